// tools/tipm_main.cpp

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

// Command-line front end. Every subcommand shares the same config loader:
// a key=value file given by --config, then one --<key> flag per config key
// (flags win). Exit status is 0 on success, 1 when some trials failed and
// 2 on configuration or input errors.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tipm/codebook.hpp"
#include "tipm/evaluation.hpp"
#include "tipm/feature_io.hpp"
#include "tipm/matcher.hpp"
#include "tipm/pipeline.hpp"
#include "tipm/run_config.hpp"
#include "tipm/scoring.hpp"
#include "tipm/synth.hpp"

namespace fs = std::filesystem;
using namespace tipm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitInput = 2;

struct GlobalOptions {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

RunConfig ResolveConfig(const GlobalOptions &g, CLI::App &app) {
  RunConfig cfg;
  if (!g.config_path.empty()) ApplyConfigFile(cfg, g.config_path);
  for (const auto &key : ConfigKeys()) {
    if (app.count("--" + key.name) == 0) continue;
    SetConfigValue(cfg, key.name, g.overrides.at(key.name), "--" + key.name);
  }
  cfg.Validate();
  cfg.PropagateSeed();
  return cfg;
}

// Utterance ids resolve to "<dir>/<id>.vqf" when a feature directory is
// given, otherwise they are used as paths directly.
UtteranceLoader FeatureLoader(const std::string &dir) {
  return [dir](const std::string &utt) {
    if (dir.empty()) return ReadFeatures(utt);
    return ReadFeatures((fs::path(dir) / (utt + ".vqf")).string());
  };
}

std::map<std::string, Codebook> LoadModels(const std::string &registry_path) {
  const auto entries = ReadRegistry(registry_path);
  if (entries.empty()) throw InputError(registry_path + ": empty registry");
  const fs::path base = fs::path(registry_path).parent_path();
  std::map<std::string, Codebook> models;
  for (const auto &e : entries) {
    fs::path p(e.codebook_path);
    if (p.is_relative()) p = base / p;
    if (!models.emplace(e.speaker_id, ReadCodebook(p.string(), e.speaker_id)).second)
      throw InputError(registry_path + ": duplicate speaker '" + e.speaker_id + "'");
  }
  return models;
}

void EnsureDir(const std::string &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create directory '" + dir + "': " + ec.message());
}

void WriteText(const std::string &path, const std::string &text) { detail::WriteFileBytes(path, text); }

int ReportTrialErrors(const std::vector<TrialError> &errors) {
  for (const auto &e : errors)
    std::cerr << "trial " << e.index << " (" << e.model_id << ", " << e.utterance << "): " << e.message
              << "\n";
  return errors.empty() ? kExitOk : kExitPartial;
}

TrialOptions MakeTrialOptions(const RunConfig &cfg) {
  TrialOptions o;
  o.match = cfg.match;
  o.run_tipm = cfg.tipm;
  o.use_znorm = cfg.use_znorm;
  o.jobs = cfg.jobs;
  return o;
}

/// Reads a scores CSV written by `score`.
std::vector<TrialScore> ReadScoresCsv(const std::string &path) {
  std::istringstream in(detail::ReadFileBytes(path));
  std::string line;
  std::size_t lineno = 0;
  std::vector<TrialScore> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != "model_id,utterance_id,raw,normalized,label")
        throw InputError(path + ":1: unexpected scores header");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) f.push_back(cell);
    if (f.size() != 5) throw InputError(path + ":" + std::to_string(lineno) + ": expected 5 columns");
    TrialScore s;
    s.model_id = f[0];
    s.utterance_id = f[1];
    try {
      s.raw = std::stod(f[2]);
      s.normalized = std::stod(f[3]);
    } catch (const std::exception &) {
      throw InputError(path + ":" + std::to_string(lineno) + ": malformed number");
    }
    s.label = ParseLabel(f[4]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Two-stage iterative Procrustes matching for VQ speaker verification"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "key=value config file; flags override it")
      ->check(CLI::ExistingFile);
  for (const auto &key : ConfigKeys()) g.overrides[key.name];
  for (const auto &key : ConfigKeys()) app.add_option("--" + key.name, g.overrides[key.name], key.help);

  // extract ------------------------------------------------------------------
  auto *extract = app.add_subcommand("extract", "WAV -> MFCC feature file");
  std::string ex_wav, ex_out, ex_mask;
  extract->add_option("--wav", ex_wav, "16-bit PCM mono WAV input")->required();
  extract->add_option("--out", ex_out, "output feature file (VQF1)")->required();
  extract->add_option("--mask", ex_mask, "optional frame mask (one 0/1 per line)");

  // mix-noise ----------------------------------------------------------------
  auto *mix = app.add_subcommand("mix-noise", "add noise to a WAV at a given SNR");
  std::string mx_wav, mx_noise, mx_out;
  double mx_snr = 0.0;
  mix->add_option("--wav", mx_wav, "clean WAV")->required();
  mix->add_option("--noise", mx_noise, "noise WAV (tiled from offset 0)")->required();
  mix->add_option("--snr", mx_snr, "target SNR in dB")->required();
  mix->add_option("--out", mx_out, "mixed WAV output")->required();

  // train --------------------------------------------------------------------
  auto *train = app.add_subcommand("train", "train K-means codebooks");
  std::string tr_speaker, tr_out, tr_enroll, tr_features_dir, tr_models_dir, tr_registry;
  std::vector<std::string> tr_features;
  train->add_option("--speaker", tr_speaker, "speaker id (single-model mode)");
  train->add_option("--features", tr_features, "enrollment feature files (single-model mode)");
  train->add_option("--out", tr_out, "output codebook (single-model mode)");
  train->add_option("--enroll", tr_enroll, "enrollment list: speaker<TAB>utterance<TAB>target");
  train->add_option("--features-dir", tr_features_dir, "directory holding <utterance>.vqf");
  train->add_option("--models-dir", tr_models_dir, "output directory for codebooks (list mode)");
  train->add_option("--registry", tr_registry, "registry manifest to write (list mode)");

  // match --------------------------------------------------------------------
  auto *match = app.add_subcommand("match", "match one test utterance against one codebook");
  std::string mt_codebook, mt_features, mt_trace, mt_mask;
  match->add_option("--codebook", mt_codebook, "codebook file (VQC1)")->required();
  match->add_option("--features", mt_features, "test feature file (VQF1)")->required();
  match->add_option("--mask", mt_mask, "optional frame mask applied to the test features");
  match->add_option("--dump-trace", mt_trace, "write the per-iteration trace as JSON lines");

  // znorm --------------------------------------------------------------------
  auto *znorm = app.add_subcommand("znorm", "estimate z-norm stats from an impostor cohort");
  std::string zn_registry, zn_cohort, zn_features_dir, zn_out;
  znorm->add_option("--registry", zn_registry, "model registry")->required();
  znorm->add_option("--cohort", zn_cohort, "cohort list (model<TAB>utterance<TAB>nontarget)")->required();
  znorm->add_option("--features-dir", zn_features_dir, "directory holding <utterance>.vqf");
  znorm->add_option("--out", zn_out, "z-norm stats output")->required();

  // score --------------------------------------------------------------------
  auto *score = app.add_subcommand("score", "score a trial list");
  std::string sc_registry, sc_trials, sc_features_dir, sc_znorm, sc_out;
  score->add_option("--registry", sc_registry, "model registry")->required();
  score->add_option("--trials", sc_trials, "trial list")->required();
  score->add_option("--features-dir", sc_features_dir, "directory holding <utterance>.vqf");
  score->add_option("--znorm", sc_znorm, "z-norm stats file (required when use_znorm is on)");
  score->add_option("--out", sc_out, "scores CSV output")->required();

  // evaluate -----------------------------------------------------------------
  auto *evaluate = app.add_subcommand(
      "evaluate", "baseline vs TIPM EER, either end to end or from two existing score CSVs");
  std::string ev_registry, ev_trials, ev_cohort, ev_features_dir, ev_out_dir, ev_condition = "clean",
                                                                        ev_snr = "clean";
  std::string ev_base_scores, ev_treat_scores;
  evaluate->add_option("--registry", ev_registry, "model registry");
  evaluate->add_option("--trials", ev_trials, "trial list");
  evaluate->add_option("--cohort", ev_cohort, "z-norm cohort list");
  evaluate->add_option("--features-dir", ev_features_dir, "directory holding <utterance>.vqf");
  evaluate->add_option("--baseline-scores", ev_base_scores, "precomputed baseline scores CSV");
  evaluate->add_option("--treatment-scores", ev_treat_scores, "precomputed TIPM scores CSV");
  evaluate->add_option("--condition", ev_condition, "condition label for the summary row");
  evaluate->add_option("--snr", ev_snr, "SNR label for the summary row");
  evaluate->add_option("--out-dir", ev_out_dir, "output directory")->required();

  // report-retention ---------------------------------------------------------
  auto *retention = app.add_subcommand("report-retention", "matched-pair retention through both stages");
  std::string rt_registry, rt_trials, rt_features_dir, rt_out;
  retention->add_option("--registry", rt_registry, "model registry")->required();
  retention->add_option("--trials", rt_trials, "trial list")->required();
  retention->add_option("--features-dir", rt_features_dir, "directory holding <utterance>.vqf");
  retention->add_option("--out", rt_out, "retention CSV output")->required();

  // synth --------------------------------------------------------------------
  auto *synth = app.add_subcommand("synth", "generate a synthetic speaker corpus");
  std::string sy_out_dir;
  synth->add_option("--out-dir", sy_out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    const RunConfig cfg = ResolveConfig(g, app);

    if (*extract) {
      FeatureSet f = ExtractMfcc(ReadWav(ex_wav), cfg.mfcc, detail::StemOf(ex_out));
      if (!ex_mask.empty()) f = ApplyMask(f, ReadMask(ex_mask));
      WriteFeatures(ex_out, f);
      std::cout << "frames=" << f.size() << " dim=" << f.dim() << "\n";
      return kExitOk;
    }

    if (*mix) {
      const MixResult r = MixNoise(ReadWav(mx_wav), ReadWav(mx_noise), mx_snr);
      WriteWav(mx_out, r.signal);
      std::cout << "gain=" << FormatDouble(r.gain) << " clipped=" << r.clipped << "\n";
      if (r.clipped > 0) std::cerr << "warning: " << r.clipped << " samples clipped\n";
      return kExitOk;
    }

    if (*train) {
      if (!tr_enroll.empty()) {
        if (tr_models_dir.empty() || tr_registry.empty())
          throw ConfigError("train: --enroll needs --models-dir and --registry");
        const auto list = ReadTrialList(tr_enroll);
        const auto load = FeatureLoader(tr_features_dir);
        std::map<std::string, std::vector<FeatureSet>> enrollment;
        for (const auto &e : list) enrollment[e.model_id].push_back(load(e.utterance));
        const auto models = TrainModels(enrollment, cfg.kmeans, cfg.jobs);
        EnsureDir(tr_models_dir);
        std::vector<RegistryEntry> reg;
        const fs::path reg_dir = fs::absolute(tr_registry).parent_path();
        for (const auto &[id, cb] : models) {
          const fs::path p = fs::absolute(fs::path(tr_models_dir) / (id + ".vqc"));
          WriteCodebook(p.string(), cb);
          reg.push_back({id, p.lexically_relative(reg_dir).string()});
        }
        WriteRegistry(tr_registry, reg);
        std::cout << "models=" << models.size() << "\n";
        return kExitOk;
      }
      if (tr_features.empty() || tr_out.empty())
        throw ConfigError("train: give either --enroll (list mode) or --features and --out");
      std::vector<FeatureSet> sets;
      for (const auto &p : tr_features) sets.push_back(ReadFeatures(p));
      const std::string id = tr_speaker.empty() ? detail::StemOf(tr_out) : tr_speaker;
      KMeansConfig k = cfg.kmeans;
      k.seed = SpeakerSeed(cfg.kmeans.seed, id);
      const Codebook cb = TrainCodebook(PoolFeatures(sets), k, id);
      WriteCodebook(tr_out, cb);
      std::cout << "q=" << cb.q() << " distortion=" << FormatDouble(cb.train_distortion) << "\n";
      return kExitOk;
    }

    if (*match) {
      const Codebook cb = ReadCodebook(mt_codebook);
      FeatureSet test = ReadFeatures(mt_features);
      if (!mt_mask.empty()) test = ApplyMask(test, ReadMask(mt_mask));
      const MatchResult r = Match(cb, test, cfg.match, cfg.tipm);
      if (!mt_trace.empty()) {
        std::string out;
        for (const auto &e : r.trace) out += TraceEntryJson(e) + "\n";
        WriteText(mt_trace, out);
      }
      std::cout << "initial=" << r.counters.initial << " after_stage1=" << r.counters.after_stage1
                << " final=" << r.counters.final_pairs << " frames=" << r.counters.test_frames
                << " score=" << FormatDouble(RawScore(r, test, !cfg.tipm)) << "\n";
      return kExitOk;
    }

    if (*znorm) {
      const auto models = LoadModels(zn_registry);
      const auto stats = EstimateCohortZNorm(models, ReadTrialList(zn_cohort), FeatureLoader(zn_features_dir),
                                             cfg.match, cfg.tipm, cfg.jobs);
      std::vector<ZNormStats> rows;
      for (const auto &[id, s] : stats) {
        if (s.degenerate) std::cerr << "warning: z-norm sigma floored for model '" << id << "'\n";
        rows.push_back(s);
      }
      WriteText(zn_out, EncodeZNormFile(rows));
      return kExitOk;
    }

    if (*score) {
      const auto models = LoadModels(sc_registry);
      std::map<std::string, ZNormStats> stats;
      if (cfg.use_znorm) {
        if (sc_znorm.empty()) throw ConfigError("score: use_znorm is on but --znorm was not given");
        stats = ParseZNormFile(detail::ReadFileBytes(sc_znorm), sc_znorm);
      }
      const TrialRun run =
          RunTrials(models, stats, ReadTrialList(sc_trials), FeatureLoader(sc_features_dir), MakeTrialOptions(cfg));
      WriteText(sc_out, EncodeScoresCsv(run.scores));
      return ReportTrialErrors(run.errors);
    }

    if (*evaluate) {
      EnsureDir(ev_out_dir);
      const fs::path out(ev_out_dir);
      if (!ev_base_scores.empty() || !ev_treat_scores.empty()) {
        if (ev_base_scores.empty() || ev_treat_scores.empty())
          throw ConfigError("evaluate: --baseline-scores and --treatment-scores go together");
        const DetCurve base = ComputeDet(ReadScoresCsv(ev_base_scores));
        const DetCurve treat = ComputeDet(ReadScoresCsv(ev_treat_scores));
        WriteText((out / "det_baseline.csv").string(), EncodeDetCsv(base));
        WriteText((out / "det_tipm.csv").string(), EncodeDetCsv(treat));
        WriteText((out / "summary.csv").string(),
                  EncodeSummaryCsv({{ev_condition, ev_snr, base.eer * 100.0, treat.eer * 100.0}}));
        return kExitOk;
      }
      if (ev_registry.empty() || ev_trials.empty() || (cfg.use_znorm && ev_cohort.empty()))
        throw ConfigError("evaluate: needs --registry, --trials and (with use_znorm) --cohort");
      const auto models = LoadModels(ev_registry);
      const auto cohort = ev_cohort.empty() ? std::vector<TrialEntry>{} : ReadTrialList(ev_cohort);
      const ConditionResult r = EvaluateCondition(models, cohort, ReadTrialList(ev_trials),
                                                  FeatureLoader(ev_features_dir), MakeTrialOptions(cfg),
                                                  ev_condition, ev_snr);
      WriteText((out / "scores_baseline.csv").string(), EncodeScoresCsv(r.baseline.run.scores));
      WriteText((out / "scores_tipm.csv").string(), EncodeScoresCsv(r.treatment.run.scores));
      WriteText((out / "det_baseline.csv").string(), EncodeDetCsv(r.baseline.det));
      WriteText((out / "det_tipm.csv").string(), EncodeDetCsv(r.treatment.det));
      WriteText((out / "summary.csv").string(), EncodeSummaryCsv({r.summary}));
      WriteText((out / "retention.csv").string(), EncodeRetentionCsv(PairRetentionReport(r.treatment.run.counters)));
      std::cout << "baseline_eer=" << FormatDouble(r.summary.baseline_eer)
                << " treatment_eer=" << FormatDouble(r.summary.treatment_eer) << "\n";
      // Both modes see the same trial list, so their errors coincide.
      return ReportTrialErrors(r.treatment.run.errors);
    }

    if (*retention) {
      const auto models = LoadModels(rt_registry);
      TrialOptions o = MakeTrialOptions(cfg);
      o.run_tipm = true;
      o.use_znorm = false;
      const TrialRun run = RunTrials(models, {}, ReadTrialList(rt_trials), FeatureLoader(rt_features_dir), o);
      if (run.counters.empty()) {
        ReportTrialErrors(run.errors);
        throw InputError("report-retention: no trial could be matched");
      }
      WriteText(rt_out, EncodeRetentionCsv(PairRetentionReport(run.counters)));
      return ReportTrialErrors(run.errors);
    }

    if (*synth) {
      const SynthCorpus corpus = MakeSynthPopulation(cfg.synth);
      const fs::path out(sy_out_dir);
      EnsureDir((out / "features").string());
      for (const auto &spk : corpus.speakers)
        for (const auto *group : {&spk.enroll, &spk.test, &spk.cohort})
          for (const auto &utt : *group)
            WriteFeatures((out / "features" / (utt.utterance_id() + ".vqf")).string(), utt);
      WriteText((out / "enroll.tsv").string(), EncodeTrialList(corpus.EnrollList()));
      WriteText((out / "trials.tsv").string(), EncodeTrialList(corpus.Trials()));
      const auto cohort = corpus.CohortList();
      if (!cohort.empty()) WriteText((out / "cohort.tsv").string(), EncodeTrialList(cohort));
      std::cout << "speakers=" << corpus.speakers.size() << " trials=" << corpus.Trials().size() << "\n";
      return kExitOk;
    }
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
