// tipm/synth.hpp

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

// Seeded generators for planted alignment problems and synthetic speaker
// populations. Everything is driven by Xorshift64Star streams.

#ifndef TIPM_SYNTH_HPP_
#define TIPM_SYNTH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tipm/evaluation.hpp"
#include "tipm/feature_io.hpp"
#include "tipm/procrustes.hpp"
#include "tipm/rng.hpp"

namespace tipm {

/// Haar-distributed orthogonal matrix: Gram-Schmidt QR (two passes) of a
/// standard normal matrix, columns sign-fixed so that diag(R) > 0.
inline Matrix RandomOrthogonal(Xorshift64Star &rng, std::size_t d) {
  Matrix g(d, d);
  for (double &x : g.data()) x = rng.Normal();
  Matrix q = g;
  for (std::size_t k = 0; k < d; ++k) {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < k; ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += q(i, j) * q(i, k);
        for (std::size_t i = 0; i < d; ++i) q(i, k) -= dot * q(i, j);
      }
    double norm = 0.0;
    for (std::size_t i = 0; i < d; ++i) norm += q(i, k) * q(i, k);
    norm = std::sqrt(norm);
    // R(k, k) = q_k . g_k after normalisation; flip so it is positive.
    double rkk = 0.0;
    for (std::size_t i = 0; i < d; ++i) rkk += q(i, k) * g(i, k);
    const double scale = (rkk < 0.0 ? -1.0 : 1.0) / norm;
    for (std::size_t i = 0; i < d; ++i) q(i, k) *= scale;
  }
  return q;
}

struct PlantedRotation {
  PairSet pairs;
  Matrix rotation;  // right = left * rotation
};

inline PlantedRotation MakePlantedRotation(std::uint64_t seed, std::size_t s, std::size_t d) {
  if (s < 1 || d < 2) throw InputError("MakePlantedRotation: need S >= 1 and D >= 2");
  Xorshift64Star rng(seed);
  Matrix left(s, d);
  for (double &x : left.data()) x = rng.Normal();
  PlantedRotation out;
  out.rotation = RandomOrthogonal(rng, d);
  Matrix right = Multiply(left, out.rotation);
  std::vector<PairId> ids(s);
  for (std::size_t i = 0; i < s; ++i)
    ids[i] = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i)};
  out.pairs = PairSet(std::move(left), std::move(right), std::move(ids));
  return out;
}

struct PlantedOutliers {
  PairSet pairs;
  Matrix rotation;
  std::set<PairId> outlier_ids;
  /// Only set by MakePlantedBorderline.
  std::optional<PairId> borderline_id;
};

namespace detail {

// Fisher-Yates permutation of [0, n).
inline std::vector<std::size_t> Permutation(Xorshift64Star &rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.Below(i)]);
  return p;
}

// Noise rows: every coordinate uniform in [-scale * r, scale * r], where r
// is the largest absolute coordinate of the inlier left block.
inline PlantedOutliers BuildPlanted(std::uint64_t seed, std::size_t s_in, std::size_t s_out,
                                    std::size_t d, double scale, double inlier_noise,
                                    double borderline_noise, bool with_borderline) {
  Xorshift64Star rng(seed);
  const std::size_t s_border = with_borderline ? 1 : 0;
  const std::size_t total = s_in + s_border + s_out;
  Matrix left(total, d);
  for (double &x : left.data()) x = rng.Normal();
  PlantedOutliers out;
  out.rotation = RandomOrthogonal(rng, d);
  Matrix right = Multiply(left, out.rotation);

  // Row-to-slot permutation so that outliers are not clustered at the end.
  const auto slot = Permutation(rng, total);
  double radius = 0.0;
  for (std::size_t r = 0; r < s_in + s_border; ++r)
    for (std::size_t c = 0; c < d; ++c) radius = std::max(radius, std::abs(left(slot[r], c)));

  // Fixed-norm perturbation in a uniformly random direction.
  auto perturb = [&](std::size_t row, double norm) {
    Vector dir(d);
    double len = 0.0;
    for (double &x : dir) {
      x = rng.Normal();
      len += x * x;
    }
    len = std::sqrt(len);
    for (std::size_t c = 0; c < d; ++c) right(row, c) += norm * dir[c] / len;
  };
  if (inlier_noise > 0.0)
    for (std::size_t r = 0; r < s_in; ++r) perturb(slot[r], inlier_noise);
  if (with_borderline) perturb(slot[s_in], borderline_noise);
  for (std::size_t r = s_in + s_border; r < total; ++r)
    for (std::size_t c = 0; c < d; ++c) right(slot[r], c) = rng.Uniform(-scale * radius, scale * radius);

  std::vector<PairId> ids(total);
  for (std::size_t i = 0; i < total; ++i)
    ids[i] = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i)};
  for (std::size_t r = s_in + s_border; r < total; ++r) out.outlier_ids.insert(ids[slot[r]]);
  if (with_borderline) out.borderline_id = ids[slot[s_in]];
  out.pairs = PairSet(std::move(left), std::move(right), std::move(ids));
  return out;
}

}  // namespace detail

/// S_in exact-rotation inliers plus S_out pairs whose right side is uniform
/// noise at `scale` times the data radius.
inline PlantedOutliers MakePlantedOutliers(std::uint64_t seed, std::size_t s_in, std::size_t s_out,
                                           std::size_t d, double scale) {
  if (s_in < 4 || d < 2) throw InputError("MakePlantedOutliers: need S_in >= 4 and D >= 2");
  return detail::BuildPlanted(seed, s_in, s_out, d, scale, 0.0, 0.0, false);
}

/// Like MakePlantedOutliers, but every inlier carries a perturbation of
/// norm `inlier_noise` and one extra inlier carries `borderline_noise`.
inline PlantedOutliers MakePlantedBorderline(std::uint64_t seed, std::size_t s_in,
                                             std::size_t s_out, std::size_t d, double scale,
                                             double inlier_noise, double borderline_noise) {
  if (s_in < 4 || d < 2) throw InputError("MakePlantedBorderline: need S_in >= 4 and D >= 2");
  return detail::BuildPlanted(seed, s_in, s_out, d, scale, inlier_noise, borderline_noise, true);
}

// ---------------------------------------------------------------------------
// Synthetic speaker populations.

struct SynthSpec {
  std::uint64_t seed = 1;
  std::size_t n_speakers = 10;
  std::size_t components_per_speaker = 8;
  std::size_t dim = 13;
  std::size_t frames_per_utterance = 100;
  double outlier_fraction = 0.0;
  double outlier_scale = 1.0;
  std::size_t enroll_per_speaker = 5;
  std::size_t test_per_speaker = 20;
  std::size_t cohort_per_speaker = 2;
  double mean_radius = 5.0;

  void Validate() const {
    if (n_speakers < 1 || components_per_speaker < 1 || frames_per_utterance < 1 ||
        enroll_per_speaker < 1)
      throw ConfigError("SynthSpec: counts must be >= 1");
    if (dim < 2) throw ConfigError("SynthSpec: dim must be >= 2");
    if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0))
      throw ConfigError("SynthSpec: outlier_fraction must be in [0, 1)");
    if (!(outlier_scale >= 1.0)) throw ConfigError("SynthSpec: outlier_scale must be >= 1");
  }
};

struct SynthSpeaker {
  std::string id;
  Matrix means;  // components x dim
  std::vector<FeatureSet> enroll;
  std::vector<FeatureSet> test;
  std::vector<FeatureSet> cohort;
  std::vector<std::size_t> corrupted_frames;  // per test utterance, then per cohort utterance
};

struct SynthCorpus {
  SynthSpec spec;
  std::vector<SynthSpeaker> speakers;

  /// Every test utterance against every model, model-major order.
  std::vector<TrialEntry> Trials() const {
    std::vector<TrialEntry> out;
    for (const auto &model : speakers)
      for (const auto &spk : speakers)
        for (const auto &utt : spk.test)
          out.push_back({model.id, utt.utterance_id(),
                         spk.id == model.id ? TrialLabel::kTarget : TrialLabel::kNontarget});
    return out;
  }

  /// Cohort utterances of every other speaker, as nontarget entries.
  std::vector<TrialEntry> CohortList() const {
    std::vector<TrialEntry> out;
    for (const auto &model : speakers)
      for (const auto &spk : speakers) {
        if (spk.id == model.id) continue;
        for (const auto &utt : spk.cohort)
          out.push_back({model.id, utt.utterance_id(), TrialLabel::kNontarget});
      }
    return out;
  }

  std::vector<TrialEntry> EnrollList() const {
    std::vector<TrialEntry> out;
    for (const auto &spk : speakers)
      for (const auto &utt : spk.enroll) out.push_back({spk.id, utt.utterance_id(), TrialLabel::kTarget});
    return out;
  }
};

namespace detail {

inline FeatureSet SampleUtterance(Xorshift64Star &rng, const Matrix &means, const SynthSpec &spec,
                                  std::string id, bool corrupt, std::size_t *corrupted) {
  const std::size_t d = spec.dim;
  FeatureSet fs(d, std::move(id));
  Vector frame(d);
  for (std::size_t f = 0; f < spec.frames_per_utterance; ++f) {
    const std::size_t comp = static_cast<std::size_t>(rng.Below(means.rows()));
    for (std::size_t c = 0; c < d; ++c) frame[c] = means(comp, c) + rng.Normal();
    fs.Append(frame);
  }
  std::size_t n_bad = 0;
  if (corrupt && spec.outlier_fraction > 0.0) {
    n_bad = static_cast<std::size_t>(
        std::llround(spec.outlier_fraction * static_cast<double>(spec.frames_per_utterance)));
    const auto perm = Permutation(rng, spec.frames_per_utterance);
    const double a = spec.outlier_scale * spec.mean_radius / std::sqrt(static_cast<double>(d));
    for (std::size_t k = 0; k < n_bad; ++k) {
      auto fr = fs.mutable_frame(perm[k]);
      for (std::size_t c = 0; c < d; ++c) fr[c] = rng.Uniform(-a, a);
    }
  }
  if (corrupted) *corrupted = n_bad;
  return fs;
}

}  // namespace detail

/// Speaker i draws its component means (uniform on the sphere of radius
/// mean_radius) and all its utterances from stream DeriveSeed(seed, i).
/// Frames are mean + N(0, I) for a uniformly chosen component. Test and
/// cohort utterances have round(outlier_fraction * frames) frames replaced
/// by coordinates uniform in +-outlier_scale * mean_radius / sqrt(dim).
inline SynthCorpus MakeSynthPopulation(const SynthSpec &spec) {
  spec.Validate();
  SynthCorpus corpus;
  corpus.spec = spec;
  for (std::size_t i = 0; i < spec.n_speakers; ++i) {
    Xorshift64Star rng(DeriveSeed(spec.seed, i));
    SynthSpeaker spk;
    char name[32];
    std::snprintf(name, sizeof name, "spk%03zu", i);
    spk.id = name;
    spk.means = Matrix(spec.components_per_speaker, spec.dim);
    for (std::size_t k = 0; k < spec.components_per_speaker; ++k) {
      double len = 0.0;
      for (std::size_t c = 0; c < spec.dim; ++c) {
        spk.means(k, c) = rng.Normal();
        len += spk.means(k, c) * spk.means(k, c);
      }
      len = std::sqrt(len);
      for (std::size_t c = 0; c < spec.dim; ++c) spk.means(k, c) *= spec.mean_radius / len;
    }
    for (std::size_t u = 0; u < spec.enroll_per_speaker; ++u)
      spk.enroll.push_back(detail::SampleUtterance(rng, spk.means, spec,
                                                   spk.id + "_enroll" + std::to_string(u), false, nullptr));
    for (std::size_t u = 0; u < spec.test_per_speaker; ++u) {
      std::size_t bad = 0;
      spk.test.push_back(detail::SampleUtterance(rng, spk.means, spec,
                                                 spk.id + "_test" + std::to_string(u), true, &bad));
      spk.corrupted_frames.push_back(bad);
    }
    for (std::size_t u = 0; u < spec.cohort_per_speaker; ++u) {
      std::size_t bad = 0;
      spk.cohort.push_back(detail::SampleUtterance(rng, spk.means, spec,
                                                   spk.id + "_cohort" + std::to_string(u), true, &bad));
      spk.corrupted_frames.push_back(bad);
    }
    corpus.speakers.push_back(std::move(spk));
  }
  return corpus;
}

}  // namespace tipm

#endif  // TIPM_SYNTH_HPP_
