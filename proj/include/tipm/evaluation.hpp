// tipm/evaluation.hpp

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

#ifndef TIPM_EVALUATION_HPP_
#define TIPM_EVALUATION_HPP_

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tipm/matcher.hpp"
#include "tipm/parallel.hpp"
#include "tipm/scoring.hpp"

namespace tipm {

struct TrialEntry {
  std::string model_id;
  std::string utterance;
  TrialLabel label = TrialLabel::kUnknown;
};

/// "model_id\tutterance\ttarget|nontarget" per line.
inline std::vector<TrialEntry> ParseTrialList(const std::string &text, const std::string &name) {
  std::vector<TrialEntry> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      f.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (f.size() != 3 || f[0].empty() || f[1].empty())
      throw InputError(name + ":" + std::to_string(lineno) +
                       ": expected 'model_id<TAB>utterance<TAB>target|nontarget'");
    if (f[2] != "target" && f[2] != "nontarget")
      throw InputError(name + ":" + std::to_string(lineno) + ": label must be target or nontarget, got '" +
                       f[2] + "'");
    out.push_back({f[0], f[1], ParseLabel(f[2])});
  }
  if (out.empty()) throw InputError(name + ": empty trial list");
  return out;
}

inline std::vector<TrialEntry> ReadTrialList(const std::string &path) {
  return ParseTrialList(detail::ReadFileBytes(path), path);
}

inline std::string EncodeTrialList(const std::vector<TrialEntry> &trials) {
  std::string out;
  for (const auto &t : trials) out += t.model_id + "\t" + t.utterance + "\t" + LabelName(t.label) + "\n";
  return out;
}

struct DetPoint {
  double threshold = 0.0;
  double far = 0.0;  // nontarget scores >= threshold
  double frr = 0.0;  // target scores < threshold
};

struct DetCurve {
  std::vector<DetPoint> points;  // ascending threshold
  double eer = 0.0;
  double eer_threshold = 0.0;
};

/// DET sweep over the distinct score values and the EER at the linearly
/// interpolated FAR = FRR crossing. A terminal point (FAR 0, FRR 1) past
/// the largest score closes the curve for the crossing search only.
inline DetCurve ComputeDet(const std::vector<double> &target, const std::vector<double> &nontarget) {
  if (target.empty() || nontarget.empty())
    throw InputError("ComputeDet: need both target and nontarget scores");
  std::vector<double> t = target, n = nontarget;
  std::sort(t.begin(), t.end());
  std::sort(n.begin(), n.end());
  std::vector<double> all;
  all.reserve(t.size() + n.size());
  std::merge(t.begin(), t.end(), n.begin(), n.end(), std::back_inserter(all));
  all.erase(std::unique(all.begin(), all.end()), all.end());

  DetCurve curve;
  curve.points.reserve(all.size());
  const double nt = static_cast<double>(t.size()), nn = static_cast<double>(n.size());
  std::size_t ti = 0, ni = 0;  // counts of scores < threshold
  for (double thr : all) {
    while (ti < t.size() && t[ti] < thr) ++ti;
    while (ni < n.size() && n[ni] < thr) ++ni;
    curve.points.push_back({thr, (nn - static_cast<double>(ni)) / nn, static_cast<double>(ti) / nt});
  }

  auto diff = [](const DetPoint &p) { return p.far - p.frr; };
  const auto &pts = curve.points;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double dk = diff(pts[k]);
    if (dk > 0.0) continue;
    if (dk == 0.0 || k == 0) {
      curve.eer = pts[k].far;
      curve.eer_threshold = pts[k].threshold;
      return curve;
    }
    const double dp = diff(pts[k - 1]);
    const double a = dp / (dp - dk);
    curve.eer = pts[k - 1].far + a * (pts[k].far - pts[k - 1].far);
    curve.eer_threshold = pts[k - 1].threshold + a * (pts[k].threshold - pts[k - 1].threshold);
    return curve;
  }
  const DetPoint &last = pts.back();
  const double dp = diff(last);
  const double a = dp / (dp + 1.0);
  curve.eer = last.far + a * (0.0 - last.far);
  curve.eer_threshold = last.threshold;
  return curve;
}

/// Splits scores by label (using the normalized field unless `use_raw`).
inline DetCurve ComputeDet(const std::vector<TrialScore> &scores, bool use_raw = false) {
  std::vector<double> t, n;
  for (const auto &s : scores) {
    const double v = use_raw ? s.raw : s.normalized;
    if (s.label == TrialLabel::kTarget) t.push_back(v);
    else if (s.label == TrialLabel::kNontarget) n.push_back(v);
  }
  if (t.empty() || n.empty()) throw InputError("ComputeDet: single-class trial scores");
  return ComputeDet(t, n);
}

/// One summary row; EERs in percent.
struct EerComparison {
  std::string condition;
  std::string snr;
  double baseline_eer = 0.0;
  double treatment_eer = 0.0;

  double absolute_improvement() const { return baseline_eer - treatment_eer; }
  /// Percent of the baseline; 0 when the baseline EER is 0.
  double relative_improvement_pct() const {
    return baseline_eer == 0.0 ? 0.0 : absolute_improvement() / baseline_eer * 100.0;
  }
};

struct PairRetention {
  double initial_ratio = 0.0;
  double stage1_ratio = 0.0;
  double final_ratio = 0.0;
  std::size_t trials = 0;
};

/// Mean over trials of |initial|, |after stage 1| and |final| relative to
/// the number of test frames.
inline PairRetention PairRetentionReport(const std::vector<MatchCounters> &counters) {
  if (counters.empty()) throw InputError("PairRetentionReport: no results");
  PairRetention r;
  for (const auto &c : counters) {
    if (c.test_frames == 0) throw InputError("PairRetentionReport: result with zero test frames");
    const double f = static_cast<double>(c.test_frames);
    r.initial_ratio += static_cast<double>(c.initial) / f;
    r.stage1_ratio += static_cast<double>(c.after_stage1) / f;
    r.final_ratio += static_cast<double>(c.final_pairs) / f;
  }
  const double n = static_cast<double>(counters.size());
  r.initial_ratio /= n;
  r.stage1_ratio /= n;
  r.final_ratio /= n;
  r.trials = counters.size();
  return r;
}

inline PairRetention PairRetentionReport(const std::vector<MatchResult> &results) {
  std::vector<MatchCounters> c;
  c.reserve(results.size());
  for (const auto &r : results) c.push_back(r.counters);
  return PairRetentionReport(c);
}

// ---------------------------------------------------------------------------
// Trial runner.

struct TrialError {
  std::size_t index = 0;  // position in the trial list
  std::string model_id;
  std::string utterance;
  std::string message;
};

struct TrialRun {
  std::vector<TrialScore> scores;  // trial-list order, failed entries omitted
  std::vector<MatchCounters> counters;  // parallel to scores
  std::vector<TrialError> errors;
};

struct TrialOptions {
  MatchConfig match;
  bool run_tipm = true;
  bool use_znorm = true;
  int jobs = 1;
};

using UtteranceLoader = std::function<FeatureSet(const std::string &)>;

/// Scores every trial. Missing models, missing z-norm stats, or loader
/// failures are recorded as per-entry errors and the run continues.
inline TrialRun RunTrials(const std::map<std::string, Codebook> &models,
                          const std::map<std::string, ZNormStats> &znorm,
                          const std::vector<TrialEntry> &trials, const UtteranceLoader &load,
                          const TrialOptions &opts) {
  struct Slot {
    std::optional<TrialScore> score;
    MatchCounters counters;
    std::string error;
  };
  std::vector<Slot> slots(trials.size());
  ParallelFor(trials.size(), opts.jobs, [&](std::size_t i) {
    const TrialEntry &t = trials[i];
    Slot &slot = slots[i];
    try {
      const auto model = models.find(t.model_id);
      if (model == models.end()) throw InputError("unknown model '" + t.model_id + "'");
      FeatureSet test = load(t.utterance);
      MatchResult m = Match(model->second, test, opts.match, opts.run_tipm);
      TrialScore s;
      s.model_id = t.model_id;
      s.utterance_id = test.utterance_id().empty() ? t.utterance : test.utterance_id();
      s.raw = RawScore(m, test, !opts.run_tipm);
      s.label = t.label;
      if (opts.use_znorm) {
        const auto st = znorm.find(t.model_id);
        if (st == znorm.end()) throw InputError("no z-norm stats for model '" + t.model_id + "'");
        s.normalized = ZNorm(s.raw, st->second);
      } else {
        s.normalized = s.raw;
      }
      slot.score = std::move(s);
      slot.counters = m.counters;
    } catch (const Error &e) {
      slot.error = e.what();
    }
  });
  TrialRun run;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].score) {
      run.scores.push_back(std::move(*slots[i].score));
      run.counters.push_back(slots[i].counters);
    } else {
      run.errors.push_back({i, trials[i].model_id, trials[i].utterance, slots[i].error});
    }
  }
  return run;
}

// ---------------------------------------------------------------------------
// CSV output.

inline std::string EncodeScoresCsv(const std::vector<TrialScore> &scores) {
  std::string out = "model_id,utterance_id,raw,normalized,label\n";
  for (const auto &s : scores)
    out += s.model_id + "," + s.utterance_id + "," + FormatDouble(s.raw) + "," +
           FormatDouble(s.normalized) + "," + LabelName(s.label) + "\n";
  return out;
}

inline std::string EncodeDetCsv(const DetCurve &curve) {
  std::string out = "threshold,far,frr\n";
  for (const auto &p : curve.points)
    out += FormatDouble(p.threshold) + "," + FormatDouble(p.far) + "," + FormatDouble(p.frr) + "\n";
  return out;
}

inline std::string EncodeSummaryCsv(const std::vector<EerComparison> &rows) {
  std::string out = "condition,snr,baseline_eer,treatment_eer,abs_improvement,rel_improvement_pct\n";
  for (const auto &r : rows)
    out += r.condition + "," + r.snr + "," + FormatDouble(r.baseline_eer) + "," +
           FormatDouble(r.treatment_eer) + "," + FormatDouble(r.absolute_improvement()) + "," +
           FormatDouble(r.relative_improvement_pct()) + "\n";
  return out;
}

inline std::string EncodeRetentionCsv(const PairRetention &r) {
  return "trials,initial_ratio,stage1_ratio,final_ratio\n" + std::to_string(r.trials) + "," +
         FormatDouble(r.initial_ratio) + "," + FormatDouble(r.stage1_ratio) + "," +
         FormatDouble(r.final_ratio) + "\n";
}

}  // namespace tipm

#endif  // TIPM_EVALUATION_HPP_
