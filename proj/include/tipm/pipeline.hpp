// tipm/pipeline.hpp

// Copyright 2026 The tipm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Multi-speaker orchestration shared by the command-line tool and the
// end-to-end tests: train a model per speaker, estimate z-norm stats from
// an impostor cohort, then score a trial list with and without TIPM.

#ifndef TIPM_PIPELINE_HPP_
#define TIPM_PIPELINE_HPP_

#include <map>
#include <string>
#include <vector>

#include "tipm/codebook.hpp"
#include "tipm/evaluation.hpp"
#include "tipm/parallel.hpp"
#include "tipm/scoring.hpp"

namespace tipm {

/// Per-speaker K-means seed: the base seed mixed with an FNV-1a hash of
/// the speaker id, so a model does not depend on training order.
inline std::uint64_t SpeakerSeed(std::uint64_t base, const std::string &speaker_id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : speaker_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return DeriveSeed(base, h);
}

/// Trains one codebook per speaker from its pooled enrollment features.
inline std::map<std::string, Codebook> TrainModels(
    const std::map<std::string, std::vector<FeatureSet>> &enrollment, const KMeansConfig &cfg,
    int jobs) {
  std::vector<const std::pair<const std::string, std::vector<FeatureSet>> *> items;
  for (const auto &kv : enrollment) items.push_back(&kv);
  std::vector<Codebook> trained(items.size());
  ParallelFor(items.size(), jobs, [&](std::size_t i) {
    KMeansConfig k = cfg;
    k.seed = SpeakerSeed(cfg.seed, items[i]->first);
    trained[i] = TrainCodebook(PoolFeatures(items[i]->second), k, items[i]->first);
  });
  std::map<std::string, Codebook> out;
  for (auto &cb : trained) out.emplace(cb.speaker_id, std::move(cb));
  return out;
}

/// Z-norm stats per model from the nontarget cohort entries addressed to
/// it. Models with no cohort entries are skipped.
inline std::map<std::string, ZNormStats> EstimateCohortZNorm(
    const std::map<std::string, Codebook> &models, const std::vector<TrialEntry> &cohort,
    const UtteranceLoader &load, const MatchConfig &cfg, bool run_tipm, int jobs) {
  std::map<std::string, std::vector<std::string>> by_model;
  for (const auto &e : cohort)
    if (e.label != TrialLabel::kTarget) by_model[e.model_id].push_back(e.utterance);
  std::vector<std::string> ids;
  for (const auto &kv : by_model) {
    if (!models.count(kv.first))
      throw InputError("cohort list references unknown model '" + kv.first + "'");
    ids.push_back(kv.first);
  }
  std::vector<ZNormStats> stats(ids.size());
  ParallelFor(ids.size(), jobs, [&](std::size_t i) {
    const Codebook &cb = models.at(ids[i]);
    std::vector<double> raw;
    for (const auto &utt : by_model.at(ids[i])) {
      const FeatureSet fs = load(utt);
      raw.push_back(RawScore(Match(cb, fs, cfg, run_tipm), fs, !run_tipm));
    }
    stats[i] = ZNormFromScores(ids[i], raw);
  });
  std::map<std::string, ZNormStats> out;
  for (auto &s : stats) out.emplace(s.speaker_id, std::move(s));
  return out;
}

struct ModeResult {
  std::map<std::string, ZNormStats> znorm;
  TrialRun run;
  DetCurve det;
};

struct ConditionResult {
  ModeResult baseline;  // TIPM off
  ModeResult treatment;  // TIPM on
  EerComparison summary;  // EER in percent
};

inline ModeResult EvaluateMode(const std::map<std::string, Codebook> &models,
                               const std::vector<TrialEntry> &cohort,
                               const std::vector<TrialEntry> &trials, const UtteranceLoader &load,
                               TrialOptions opts) {
  ModeResult r;
  if (opts.use_znorm)
    r.znorm = EstimateCohortZNorm(models, cohort, load, opts.match, opts.run_tipm, opts.jobs);
  r.run = RunTrials(models, r.znorm, trials, load, opts);
  r.det = ComputeDet(r.run.scores);
  return r;
}

/// Baseline vs TIPM on one trial list.
inline ConditionResult EvaluateCondition(const std::map<std::string, Codebook> &models,
                                         const std::vector<TrialEntry> &cohort,
                                         const std::vector<TrialEntry> &trials,
                                         const UtteranceLoader &load, const TrialOptions &opts,
                                         std::string condition, std::string snr) {
  ConditionResult out;
  TrialOptions base = opts;
  base.run_tipm = false;
  TrialOptions treat = opts;
  treat.run_tipm = true;
  out.baseline = EvaluateMode(models, cohort, trials, load, base);
  out.treatment = EvaluateMode(models, cohort, trials, load, treat);
  out.summary = {std::move(condition), std::move(snr), out.baseline.det.eer * 100.0,
                 out.treatment.det.eer * 100.0};
  return out;
}

}  // namespace tipm

#endif  // TIPM_PIPELINE_HPP_
