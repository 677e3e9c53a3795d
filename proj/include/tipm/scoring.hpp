// tipm/scoring.hpp

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

#ifndef TIPM_SCORING_HPP_
#define TIPM_SCORING_HPP_

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tipm/matcher.hpp"

namespace tipm {

enum class TrialLabel { kTarget, kNontarget, kUnknown };

inline std::string LabelName(TrialLabel l) {
  switch (l) {
    case TrialLabel::kTarget: return "target";
    case TrialLabel::kNontarget: return "nontarget";
    default: return "unknown";
  }
}

inline TrialLabel ParseLabel(const std::string &s) {
  if (s == "target") return TrialLabel::kTarget;
  if (s == "nontarget") return TrialLabel::kNontarget;
  if (s == "unknown") return TrialLabel::kUnknown;
  throw InputError("unknown trial label '" + s + "'");
}

struct TrialScore {
  std::string model_id;
  std::string utterance_id;
  double raw = 0.0;  // matched-pair ratio in [0, 1]
  double normalized = 0.0;
  TrialLabel label = TrialLabel::kUnknown;
};

struct ZNormStats {
  std::string speaker_id;
  double mu = 0.0;
  double sigma = 1.0;
  std::size_t cohort_size = 0;
  bool degenerate = false;  // sigma was floored
};

inline constexpr double kSigmaFloor = 1e-6;

/// Fraction of test frames that ended up in a matched pair. In baseline
/// mode the initial (pre-TIPM) pairs are counted.
inline double RawScore(const MatchResult &result, const FeatureSet &test, bool baseline = false) {
  if (test.empty()) throw InputError("RawScore: empty test set");
  const std::size_t pairs = baseline ? result.initial.size() : result.final_pairs.size();
  return static_cast<double>(pairs) / static_cast<double>(test.size());
}

/// Mean and unbiased standard deviation of a cohort of raw scores.
inline ZNormStats ZNormFromScores(std::string speaker_id, const std::vector<double> &scores) {
  if (scores.size() < 2)
    throw InputError("z-norm cohort for '" + speaker_id + "' has " +
                     std::to_string(scores.size()) + " utterances; need at least 2");
  ZNormStats st;
  st.speaker_id = std::move(speaker_id);
  st.cohort_size = scores.size();
  double sum = 0.0;
  for (double s : scores) sum += s;
  st.mu = sum / static_cast<double>(scores.size());
  double ss = 0.0;
  for (double s : scores) ss += (s - st.mu) * (s - st.mu);
  st.sigma = std::sqrt(ss / static_cast<double>(scores.size() - 1));
  if (!(st.sigma >= kSigmaFloor)) {
    st.sigma = kSigmaFloor;
    st.degenerate = true;
  }
  return st;
}

/// Scores every cohort utterance against `codebook` and summarises.
inline ZNormStats EstimateZNorm(const Codebook &codebook, const std::vector<FeatureSet> &cohort,
                                const MatchConfig &cfg, bool run_tipm = true) {
  if (cohort.size() < 2)
    throw InputError("EstimateZNorm: cohort of " + std::to_string(cohort.size()) +
                     " is too small (need >= 2)");
  std::vector<double> raw;
  raw.reserve(cohort.size());
  for (const auto &utt : cohort)
    raw.push_back(RawScore(Match(codebook, utt, cfg, run_tipm), utt, !run_tipm));
  return ZNormFromScores(codebook.speaker_id, raw);
}

inline double ZNorm(double raw, const ZNormStats &stats) { return (raw - stats.mu) / stats.sigma; }

// "speaker_id\tmu\tsigma\tcohort_size" per line.
inline std::string EncodeZNormFile(const std::vector<ZNormStats> &stats) {
  std::string out;
  for (const auto &s : stats)
    out += s.speaker_id + "\t" + FormatDouble(s.mu) + "\t" + FormatDouble(s.sigma) + "\t" +
           std::to_string(s.cohort_size) + "\n";
  return out;
}

inline std::map<std::string, ZNormStats> ParseZNormFile(const std::string &text,
                                                        const std::string &name) {
  std::map<std::string, ZNormStats> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string id, mu, sigma, n;
    if (!std::getline(fields, id, '\t') || !std::getline(fields, mu, '\t') ||
        !std::getline(fields, sigma, '\t') || !std::getline(fields, n))
      throw InputError(name + ":" + std::to_string(lineno) + ": expected 4 tab-separated fields");
    ZNormStats st;
    st.speaker_id = id;
    try {
      st.mu = std::stod(mu);
      st.sigma = std::stod(sigma);
      st.cohort_size = std::stoul(n);
    } catch (const std::exception &) {
      throw InputError(name + ":" + std::to_string(lineno) + ": malformed number");
    }
    if (!(st.sigma > 0.0) || st.cohort_size < 2)
      throw InputError(name + ":" + std::to_string(lineno) + ": sigma must be > 0 and cohort_size >= 2");
    st.degenerate = st.sigma <= kSigmaFloor;
    out[id] = st;
  }
  return out;
}

}  // namespace tipm

#endif  // TIPM_SCORING_HPP_
