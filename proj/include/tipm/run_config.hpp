// tipm/run_config.hpp

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

#ifndef TIPM_RUN_CONFIG_HPP_
#define TIPM_RUN_CONFIG_HPP_

#include <charconv>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tipm/codebook.hpp"
#include "tipm/feature_io.hpp"
#include "tipm/matcher.hpp"
#include "tipm/synth.hpp"

namespace tipm {

/// Every tunable of the pipeline. Loaded from a flat key=value file and
/// then overridden by command-line flags of the same name.
struct RunConfig {
  MfccConfig mfcc;
  KMeansConfig kmeans;
  MatchConfig match;
  SynthSpec synth;
  std::uint64_t seed = 1;
  bool tipm = true;
  bool use_znorm = true;
  int jobs = 1;

  /// The single seed drives every random stream.
  void PropagateSeed() {
    kmeans.seed = DeriveSeed(seed, 0x6b6d65616e73ULL);
    synth.seed = DeriveSeed(seed, 0x73796e7468ULL);
  }

  void Validate() const {
    mfcc.Validate();
    kmeans.Validate();
    match.Validate();
    synth.Validate();
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
  }
};

struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(RunConfig &, const std::string &)> set;
};

namespace detail {

inline double ParseDouble(const std::string &s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception &) {
    throw ConfigError("'" + s + "' is not a number");
  }
  if (used != s.size() || !std::isfinite(v)) throw ConfigError("'" + s + "' is not a finite number");
  return v;
}

inline std::uint64_t ParseUnsigned(const std::string &s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError("'" + s + "' is not a non-negative integer");
  return v;
}

inline bool ParseBool(const std::string &s) {
  if (s == "1" || s == "true" || s == "on" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "off" || s == "no") return false;
  throw ConfigError("'" + s + "' is not a boolean (true/false, on/off, 1/0)");
}

inline std::string Trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline const std::vector<ConfigKey> &ConfigKeys() {
  using detail::ParseBool;
  using detail::ParseDouble;
  using detail::ParseUnsigned;
  auto positive = [](double v, const char *what) {
    if (!(v > 0.0)) throw ConfigError(std::string(what) + " must be > 0");
    return v;
  };
  auto at_least = [](std::uint64_t v, std::uint64_t lo, const char *what) {
    if (v < lo) throw ConfigError(std::string(what) + " must be >= " + std::to_string(lo));
    return v;
  };
  static const std::vector<ConfigKey> keys = {
      {"frame_len_ms", "MFCC frame length in ms (25)",
       [=](RunConfig &c, const std::string &v) { c.mfcc.frame_len_ms = positive(ParseDouble(v), "frame_len_ms"); }},
      {"frame_hop_ms", "MFCC frame hop in ms (10)",
       [=](RunConfig &c, const std::string &v) { c.mfcc.frame_hop_ms = positive(ParseDouble(v), "frame_hop_ms"); }},
      {"n_fft", "FFT size, power of two (512)",
       [=](RunConfig &c, const std::string &v) { c.mfcc.n_fft = at_least(ParseUnsigned(v), 1, "n_fft"); }},
      {"n_mel_filters", "mel filters (26)",
       [=](RunConfig &c, const std::string &v) { c.mfcc.n_mel_filters = at_least(ParseUnsigned(v), 1, "n_mel_filters"); }},
      {"n_ceps", "cepstral coefficients, feature dimension (13)",
       [=](RunConfig &c, const std::string &v) { c.mfcc.n_ceps = at_least(ParseUnsigned(v), 1, "n_ceps"); }},
      {"preemphasis", "pre-emphasis coefficient in [0,1) (0.97)",
       [](RunConfig &c, const std::string &v) {
         const double p = ParseDouble(v);
         if (!(p >= 0.0 && p < 1.0)) throw ConfigError("preemphasis must be in [0, 1)");
         c.mfcc.preemphasis = p;
       }},
      {"cmn", "per-utterance cepstral mean subtraction (true)",
       [](RunConfig &c, const std::string &v) { c.mfcc.cmn = ParseBool(v); }},
      {"q", "codebook size (64)",
       [=](RunConfig &c, const std::string &v) { c.kmeans.q = at_least(ParseUnsigned(v), 1, "q"); }},
      {"max_iters", "K-means iteration cap (100)",
       [=](RunConfig &c, const std::string &v) {
         c.kmeans.max_iters = static_cast<int>(at_least(ParseUnsigned(v), 1, "max_iters"));
       }},
      {"rel_tol", "K-means relative distortion tolerance (1e-6)",
       [=](RunConfig &c, const std::string &v) { c.kmeans.rel_tol = positive(ParseDouble(v), "rel_tol"); }},
      {"epsilon_t", "absolute initial-match distance threshold; 0 = epsilon_scale x mean quantisation distance (0)",
       [](RunConfig &c, const std::string &v) {
         const double e = ParseDouble(v);
         if (e < 0.0) throw ConfigError("epsilon_t must be >= 0");
         c.match.epsilon_t = e;
       }},
      {"epsilon_scale", "relative initial-match threshold (1.5)",
       [=](RunConfig &c, const std::string &v) { c.match.epsilon_scale = positive(ParseDouble(v), "epsilon_scale"); }},
      {"delta", "stage-1 removal ratio threshold in (0,1) (0.9)",
       [](RunConfig &c, const std::string &v) {
         const double d = ParseDouble(v);
         if (!(d > 0.0 && d < 1.0)) throw ConfigError("delta must be in (0, 1)");
         c.match.delta = d;
       }},
      {"eta", "stage-2 recycle ratio threshold >= 1 (1.05)",
       [](RunConfig &c, const std::string &v) {
         const double e = ParseDouble(v);
         if (!(e >= 1.0)) throw ConfigError("eta must be >= 1");
         c.match.eta = e;
       }},
      {"min_pairs", "stage-1 floor on the pair count, >= 3 (4)",
       [=](RunConfig &c, const std::string &v) { c.match.min_pairs = at_least(ParseUnsigned(v), 3, "min_pairs"); }},
      {"zero_residual_tol", "absolute residual treated as zero; 0 = 1e-12*D*S (0)",
       [](RunConfig &c, const std::string &v) {
         const double t = ParseDouble(v);
         if (t < 0.0) throw ConfigError("zero_residual_tol must be >= 0");
         c.match.zero_residual_tol = t;
       }},
      {"center", "mean-centre both pair sides before alignment (false)",
       [](RunConfig &c, const std::string &v) { c.match.center = ParseBool(v); }},
      {"tipm", "run the two matching stages; off = baseline initial-pair scoring (true)",
       [](RunConfig &c, const std::string &v) { c.tipm = ParseBool(v); }},
      {"use_znorm", "z-normalise trial scores (true)",
       [](RunConfig &c, const std::string &v) { c.use_znorm = ParseBool(v); }},
      {"seed", "base seed for every random stream (1)",
       [](RunConfig &c, const std::string &v) { c.seed = ParseUnsigned(v); }},
      {"jobs", "worker threads (1)",
       [=](RunConfig &c, const std::string &v) { c.jobs = static_cast<int>(at_least(ParseUnsigned(v), 1, "jobs")); }},
      {"n_speakers", "synth: speakers (10)",
       [=](RunConfig &c, const std::string &v) { c.synth.n_speakers = at_least(ParseUnsigned(v), 1, "n_speakers"); }},
      {"components_per_speaker", "synth: Gaussian components per speaker (8)",
       [=](RunConfig &c, const std::string &v) {
         c.synth.components_per_speaker = at_least(ParseUnsigned(v), 1, "components_per_speaker");
       }},
      {"dim", "synth: feature dimension (13)",
       [=](RunConfig &c, const std::string &v) { c.synth.dim = at_least(ParseUnsigned(v), 2, "dim"); }},
      {"frames_per_utterance", "synth: frames per utterance (100)",
       [=](RunConfig &c, const std::string &v) {
         c.synth.frames_per_utterance = at_least(ParseUnsigned(v), 1, "frames_per_utterance");
       }},
      {"outlier_fraction", "synth: fraction of corrupted test frames in [0,1) (0)",
       [](RunConfig &c, const std::string &v) {
         const double f = ParseDouble(v);
         if (!(f >= 0.0 && f < 1.0)) throw ConfigError("outlier_fraction must be in [0, 1)");
         c.synth.outlier_fraction = f;
       }},
      {"outlier_scale", "synth: corrupted-frame scale >= 1 (1)",
       [](RunConfig &c, const std::string &v) {
         const double s = ParseDouble(v);
         if (!(s >= 1.0)) throw ConfigError("outlier_scale must be >= 1");
         c.synth.outlier_scale = s;
       }},
      {"enroll_per_speaker", "synth: enrollment utterances per speaker (5)",
       [=](RunConfig &c, const std::string &v) {
         c.synth.enroll_per_speaker = at_least(ParseUnsigned(v), 1, "enroll_per_speaker");
       }},
      {"test_per_speaker", "synth: test utterances per speaker (20)",
       [=](RunConfig &c, const std::string &v) {
         c.synth.test_per_speaker = at_least(ParseUnsigned(v), 1, "test_per_speaker");
       }},
      {"cohort_per_speaker", "synth: z-norm cohort utterances per speaker (2)",
       [](RunConfig &c, const std::string &v) { c.synth.cohort_per_speaker = detail::ParseUnsigned(v); }},
  };
  return keys;
}

/// Sets one key; `origin` prefixes any error message.
inline void SetConfigValue(RunConfig &cfg, const std::string &key, const std::string &value,
                           const std::string &origin) {
  for (const auto &k : ConfigKeys()) {
    if (k.name != key) continue;
    try {
      k.set(cfg, value);
    } catch (const ConfigError &e) {
      throw ConfigError(origin + ": " + key + ": " + e.what());
    }
    return;
  }
  throw ConfigError(origin + ": unknown key '" + key + "'");
}

/// Applies "key = value" lines; '#' starts a comment.
inline void ApplyConfigText(RunConfig &cfg, const std::string &text, const std::string &name) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = name + ":" + std::to_string(lineno);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
    const std::string key = detail::Trim(line.substr(0, eq));
    const std::string value = detail::Trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    SetConfigValue(cfg, key, value, where);
  }
}

inline void ApplyConfigFile(RunConfig &cfg, const std::string &path) {
  std::string text;
  try {
    text = detail::ReadFileBytes(path);
  } catch (const InputError &e) {
    throw ConfigError(e.what());
  }
  ApplyConfigText(cfg, text, path);
}

}  // namespace tipm

#endif  // TIPM_RUN_CONFIG_HPP_
