// tipm/matcher.hpp

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

// Two-stage iterative Procrustes matching between a codebook and the frames
// of one test utterance:
//
//   1. Initial one-to-one correspondences: each codeword is paired with its
//      nearest test frame when the Euclidean distance is within epsilon_t.
//   2. Leave-one-out removal: while dropping the best single pair shrinks
//      the alignment residual by the ratio delta, drop it.
//   3. Add-one-in recycling: while re-adding the best discarded pair grows
//      the residual by less than the ratio eta, restore it.

#ifndef TIPM_MATCHER_HPP_
#define TIPM_MATCHER_HPP_

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "tipm/codebook.hpp"
#include "tipm/feature_io.hpp"
#include "tipm/procrustes.hpp"

namespace tipm {

struct MatchConfig {
  /// Absolute initial-match threshold. When <= 0 the threshold is
  /// epsilon_scale times the codebook's mean training quantisation distance.
  double epsilon_t = 0.0;
  double epsilon_scale = 1.5;
  double delta = 0.9;
  double eta = 1.05;
  std::size_t min_pairs = 4;
  /// Residuals at or below this are zero. When <= 0, 1e-12 * D * S for the
  /// pair set being evaluated.
  double zero_residual_tol = 0.0;
  bool center = false;

  void Validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("MatchConfig: delta must be in (0, 1)");
    if (!(eta >= 1.0)) throw ConfigError("MatchConfig: eta must be >= 1");
    if (min_pairs < 3) throw ConfigError("MatchConfig: min_pairs must be >= 3");
    if (epsilon_t <= 0.0 && !(epsilon_scale > 0.0))
      throw ConfigError("MatchConfig: epsilon_scale must be > 0 when epsilon_t is unset");
  }

  double ZeroTol(const PairSet &pairs) const {
    if (zero_residual_tol > 0.0) return zero_residual_tol;
    return 1e-12 * static_cast<double>(pairs.dim()) * static_cast<double>(pairs.size());
  }
};

/// Resolved epsilon_t for a codebook.
inline double ResolveEpsilon(const Codebook &codebook, const MatchConfig &cfg) {
  if (cfg.epsilon_t > 0.0) return cfg.epsilon_t;
  if (!codebook.has_train_stats)
    throw ConfigError("codebook '" + codebook.speaker_id +
                      "' has no training statistics; set epsilon_t explicitly");
  const double eps = cfg.epsilon_scale * codebook.mean_quant_distance;
  if (!(eps > 0.0))
    throw ConfigError("codebook '" + codebook.speaker_id +
                      "' has zero mean quantisation distance; set epsilon_t explicitly");
  return eps;
}

enum class Stage { kRemoval = 1, kRecycle = 2 };

/// One accepted leave-one-out removal or add-one-in recycle.
struct TraceEntry {
  Stage stage = Stage::kRemoval;
  int iteration = 0;
  PairId pair;
  double residual_before = 0.0;
  double residual_after = 0.0;
  double ratio = 0.0;  // after / before; 0 when before is treated as zero
};

struct DiscardedPair {
  PairId id;
  Vector left;
  Vector right;
  int iteration = 0;  // 1-based stage-1 iteration that removed it
};

struct StageOneResult {
  PairSet survivors;
  std::vector<DiscardedPair> discarded;
  std::vector<TraceEntry> trace;
};

struct StageTwoResult {
  PairSet final_pairs;
  std::vector<PairId> recycled;
  std::vector<TraceEntry> trace;
};

struct MatchCounters {
  std::size_t initial = 0;
  std::size_t after_stage1 = 0;
  std::size_t final_pairs = 0;
  std::size_t test_frames = 0;
};

struct MatchResult {
  PairSet initial;
  std::vector<DiscardedPair> discarded;
  std::vector<PairId> recycled;
  PairSet final_pairs;
  std::vector<TraceEntry> trace;
  MatchCounters counters;
};

/// Codeword -> nearest test frame, kept when within epsilon_t. Codewords
/// are visited by ascending (distance, index) and a frame can be claimed
/// once; a codeword whose nearest frame is taken stays unmatched. Pairs are
/// returned in codeword order.
inline PairSet InitialMatch(const Codebook &codebook, const FeatureSet &test,
                            const MatchConfig &cfg) {
  cfg.Validate();
  if (test.empty()) throw InputError("InitialMatch: empty test set");
  if (test.dim() != codebook.dim())
    throw InputError("InitialMatch: test dim " + std::to_string(test.dim()) +
                     " != codebook dim " + std::to_string(codebook.dim()));
  const double eps = ResolveEpsilon(codebook, cfg);
  const std::size_t q = codebook.q();
  std::vector<std::size_t> nearest(q);
  std::vector<double> dist(q);
  for (std::size_t k = 0; k < q; ++k) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t idx = 0;
    for (std::size_t p = 0; p < test.size(); ++p) {
      const double d = SquaredDistance(codebook.centroid(k), test.frame(p));
      if (d < best) {
        best = d;
        idx = p;
      }
    }
    nearest[k] = idx;
    dist[k] = std::sqrt(best);
  }
  std::vector<std::size_t> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  std::vector<bool> claimed(test.size(), false);
  std::vector<bool> accepted(q, false);
  for (std::size_t k : order) {
    if (dist[k] > eps || claimed[nearest[k]]) continue;
    claimed[nearest[k]] = true;
    accepted[k] = true;
  }
  const std::size_t s = static_cast<std::size_t>(std::count(accepted.begin(), accepted.end(), true));
  Matrix left(s, codebook.dim()), right(s, codebook.dim());
  std::vector<PairId> ids;
  ids.reserve(s);
  std::size_t row = 0;
  for (std::size_t k = 0; k < q; ++k) {
    if (!accepted[k]) continue;
    std::copy(codebook.centroid(k).begin(), codebook.centroid(k).end(), left.row(row).begin());
    const auto f = test.frame(nearest[k]);
    std::copy(f.begin(), f.end(), right.row(row).begin());
    ids.push_back({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(nearest[k])});
    ++row;
  }
  return PairSet(std::move(left), std::move(right), std::move(ids));
}

/// Stage 1. Each iteration: e = residual(current); stop if e is zero;
/// otherwise find the pair whose removal gives the smallest residual (ties
/// to the lowest pair id) and remove it when that residual / e < delta and
/// the set stays at or above min_pairs.
inline StageOneResult StageOneRemove(const PairSet &initial, const MatchConfig &cfg) {
  cfg.Validate();
  if (initial.empty()) throw InputError("StageOneRemove: empty pair set");
  const AlignOptions opts{cfg.center};
  StageOneResult out;
  PairSet current = initial;
  for (int it = 1;; ++it) {
    if (current.size() < 2 || current.size() - 1 < cfg.min_pairs) break;
    const double e = Align(current, opts).residual;
    if (e <= cfg.ZeroTol(current)) break;
    std::size_t best = 0;
    double best_r = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < current.size(); ++s) {
      const double r = ResidualWithout(current, s, opts);
      if (r < best_r || (r == best_r && current.ids()[s] < current.ids()[best])) {
        best_r = r;
        best = s;
      }
    }
    const double ratio = best_r / e;
    if (!(ratio < cfg.delta)) break;
    const PairId id = current.ids()[best];
    out.discarded.push_back({id,
                             Vector(current.left_row(best).begin(), current.left_row(best).end()),
                             Vector(current.right_row(best).begin(), current.right_row(best).end()),
                             it});
    out.trace.push_back({Stage::kRemoval, it, id, e, best_r, ratio});
    current = current.Without(best);
  }
  out.survivors = std::move(current);
  return out;
}

/// Stage 2. Each iteration: e = residual(current); for every remaining
/// discarded pair t, e_add(t) = residual(current + t); take the smallest
/// (ties to the lowest pair id). Recycle it when e > 0 and e_add / e < eta,
/// or when e is zero and e_add is zero too.
inline StageTwoResult StageTwoRecycle(const PairSet &survivors,
                                      const std::vector<DiscardedPair> &discarded,
                                      const MatchConfig &cfg) {
  cfg.Validate();
  if (survivors.empty()) throw InputError("StageTwoRecycle: empty survivor set");
  const AlignOptions opts{cfg.center};
  StageTwoResult out;
  PairSet current = survivors;
  std::vector<DiscardedPair> pool = discarded;
  for (int it = 1; !pool.empty(); ++it) {
    const double e = Align(current, opts).residual;
    const bool zero = e <= cfg.ZeroTol(current);
    std::size_t best = 0;
    double best_r = std::numeric_limits<double>::infinity();
    PairSet best_set;
    for (std::size_t t = 0; t < pool.size(); ++t) {
      PairSet candidate = current.With(pool[t].left, pool[t].right, pool[t].id);
      const double r = Align(candidate, opts).residual;
      if (r < best_r || (r == best_r && pool[t].id < pool[best].id)) {
        best_r = r;
        best = t;
        best_set = std::move(candidate);
      }
    }
    bool accept = false;
    double ratio = 0.0;
    if (!zero) {
      ratio = best_r / e;
      accept = ratio < cfg.eta;
    } else {
      accept = best_r <= cfg.ZeroTol(best_set);
    }
    if (!accept) break;
    out.trace.push_back({Stage::kRecycle, it, pool[best].id, e, best_r, ratio});
    out.recycled.push_back(pool[best].id);
    current = std::move(best_set);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
  }
  out.final_pairs = std::move(current);
  return out;
}

/// Full matcher. With `run_tipm` false (or fewer than two initial pairs)
/// both stages are skipped and the final set is the initial set.
inline MatchResult Match(const Codebook &codebook, const FeatureSet &test, const MatchConfig &cfg,
                         bool run_tipm = true) {
  MatchResult out;
  out.initial = InitialMatch(codebook, test, cfg);
  out.counters.initial = out.initial.size();
  out.counters.test_frames = test.size();
  if (!run_tipm || out.initial.size() < 2) {
    out.final_pairs = out.initial;
    out.counters.after_stage1 = out.initial.size();
    out.counters.final_pairs = out.initial.size();
    return out;
  }
  StageOneResult s1 = StageOneRemove(out.initial, cfg);
  out.counters.after_stage1 = s1.survivors.size();
  StageTwoResult s2 = StageTwoRecycle(s1.survivors, s1.discarded, cfg);
  out.discarded = std::move(s1.discarded);
  out.recycled = std::move(s2.recycled);
  out.final_pairs = std::move(s2.final_pairs);
  out.trace = std::move(s1.trace);
  out.trace.insert(out.trace.end(), s2.trace.begin(), s2.trace.end());
  out.counters.final_pairs = out.final_pairs.size();
  return out;
}

/// JSON-lines record for one trace entry.
inline std::string TraceEntryJson(const TraceEntry &e) {
  return "{\"stage\":" + std::to_string(static_cast<int>(e.stage)) +
         ",\"iteration\":" + std::to_string(e.iteration) +
         ",\"codeword\":" + std::to_string(e.pair.codeword) +
         ",\"frame\":" + std::to_string(e.pair.frame) +
         ",\"residual_before\":" + FormatDouble(e.residual_before) +
         ",\"residual_after\":" + FormatDouble(e.residual_after) +
         ",\"ratio\":" + FormatDouble(e.ratio) + "}";
}

}  // namespace tipm

#endif  // TIPM_MATCHER_HPP_
