// tipm/codebook.hpp

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

#ifndef TIPM_CODEBOOK_HPP_
#define TIPM_CODEBOOK_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tipm/common.hpp"
#include "tipm/feature_io.hpp"
#include "tipm/rng.hpp"

namespace tipm {

/// A speaker model: Q centroids of dimension D.
struct Codebook {
  std::string speaker_id;
  Matrix centroids;  // Q x D
  double train_distortion = 0.0;  // mean squared quantisation error
  double mean_quant_distance = 0.0;  // mean Euclidean distance to nearest centroid
  bool has_train_stats = false;

  std::size_t q() const { return centroids.rows(); }
  std::size_t dim() const { return centroids.cols(); }
  std::span<const double> centroid(std::size_t i) const { return centroids.row(i); }
};

struct KMeansConfig {
  std::size_t q = 64;
  int max_iters = 100;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;

  void Validate() const {
    if (q < 1) throw ConfigError("KMeansConfig: q must be >= 1");
    if (max_iters < 1) throw ConfigError("KMeansConfig: max_iters must be >= 1");
    if (!(rel_tol > 0.0)) throw ConfigError("KMeansConfig: rel_tol must be > 0");
  }
};

struct KMeansReport {
  Codebook codebook;
  /// Distortion after each assignment step, then the final distortion of
  /// the returned centroids. Non-increasing.
  std::vector<double> distortion_trace;
  int iterations = 0;
};

struct Quantization {
  std::size_t index = 0;
  double distance = 0.0;
};

namespace detail {

// Nearest centroid by squared distance, ties to the lowest index.
inline std::pair<std::size_t, double> NearestRow(const Matrix &centroids,
                                                 std::span<const double> x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < centroids.rows(); ++k) {
    const double d = SquaredDistance(centroids.row(k), x);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return {best, best_d};
}

// k-means++ seeding on the shared PRNG stream.
inline Matrix SeedPlusPlus(const FeatureSet &x, std::size_t q, Xorshift64Star &rng) {
  const std::size_t n = x.size();
  Matrix c(q, x.dim());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = static_cast<std::size_t>(rng.Below(n));
  for (std::size_t k = 0; k < q; ++k) {
    std::copy(x.frame(pick).begin(), x.frame(pick).end(), c.row(k).begin());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(x.frame(i), c.row(k)));
      total += d2[i];
    }
    if (k + 1 == q) break;
    if (total > 0.0) {
      const double target = rng.Uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      // Rounding can leave acc <= target; fall back to the last positive weight.
      if (d2[pick] <= 0.0)
        for (std::size_t i = n; i-- > 0;)
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
    } else {
      pick = static_cast<std::size_t>(rng.Below(n));
    }
  }
  return c;
}

}  // namespace detail

/// Lloyd's K-means with k-means++ seeding. Each iteration assigns every
/// frame to its nearest centroid, repairs empty clusters by moving their
/// centroid onto the frame farthest from its own centroid (taken from a
/// cluster with more than one member), records the distortion, then moves
/// centroids to their cluster means. Stops after max_iters iterations or
/// when the relative distortion change drops below rel_tol.
inline KMeansReport TrainCodebookTraced(const FeatureSet &features, const KMeansConfig &cfg,
                                        std::string speaker_id = {}) {
  cfg.Validate();
  if (features.empty()) throw InputError("TrainCodebook: empty input");
  const std::size_t n = features.size();
  const std::size_t d = features.dim();
  if (n < cfg.q)
    throw InputError("TrainCodebook: " + std::to_string(n) + " frames is fewer than q = " +
                     std::to_string(cfg.q) + " clusters");

  Xorshift64Star rng(cfg.seed);
  Matrix c = detail::SeedPlusPlus(features, cfg.q, rng);
  std::vector<std::size_t> assign(n);
  std::vector<double> dist(n);
  std::vector<std::size_t> counts(cfg.q);

  KMeansReport report;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.max_iters; ++it) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto [k, dd] = detail::NearestRow(c, features.frame(i));
      assign[i] = k;
      dist[i] = dd;
      ++counts[k];
    }
    for (std::size_t k = 0; k < cfg.q; ++k) {
      if (counts[k] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i)
        if (counts[assign[i]] > 1 && (far == n || dist[i] > dist[far])) far = i;
      if (far == n) break;  // every cluster is a singleton; cannot happen when n >= q
      std::copy(features.frame(far).begin(), features.frame(far).end(), c.row(k).begin());
      --counts[assign[far]];
      assign[far] = k;
      dist[far] = 0.0;
      counts[k] = 1;
    }
    double j = 0.0;
    for (double v : dist) j += v;
    j /= static_cast<double>(n);
    report.distortion_trace.push_back(j);
    report.iterations = it + 1;

    Matrix sums(cfg.q, d);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = sums.row(assign[i]);
      auto f = features.frame(i);
      for (std::size_t t = 0; t < d; ++t) row[t] += f[t];
    }
    for (std::size_t k = 0; k < cfg.q; ++k) {
      if (counts[k] == 0) continue;
      for (std::size_t t = 0; t < d; ++t) c(k, t) = sums(k, t) / static_cast<double>(counts[k]);
    }
    const bool converged = j == 0.0 || (std::isfinite(prev) && prev > 0.0 && (prev - j) / prev < cfg.rel_tol);
    prev = j;
    if (converged) break;
  }

  double j = 0.0, mean_dist = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dd = detail::NearestRow(c, features.frame(i)).second;
    j += dd;
    mean_dist += std::sqrt(dd);
  }
  report.distortion_trace.push_back(j / static_cast<double>(n));

  report.codebook.speaker_id = std::move(speaker_id);
  report.codebook.centroids = std::move(c);
  report.codebook.train_distortion = j / static_cast<double>(n);
  report.codebook.mean_quant_distance = mean_dist / static_cast<double>(n);
  report.codebook.has_train_stats = true;
  return report;
}

inline Codebook TrainCodebook(const FeatureSet &features, const KMeansConfig &cfg,
                              std::string speaker_id = {}) {
  return TrainCodebookTraced(features, cfg, std::move(speaker_id)).codebook;
}

/// Nearest centroid (Euclidean), ties to the lowest index.
inline Quantization Quantize(const Codebook &codebook, std::span<const double> frame) {
  if (frame.size() != codebook.dim())
    throw InputError("Quantize: frame dim " + std::to_string(frame.size()) +
                     " != codebook dim " + std::to_string(codebook.dim()));
  if (codebook.q() == 0) throw InputError("Quantize: empty codebook");
  auto [k, d2] = detail::NearestRow(codebook.centroids, frame);
  return {k, std::sqrt(d2)};
}

/// Pools several utterances of one speaker into a single FeatureSet.
inline FeatureSet PoolFeatures(const std::vector<FeatureSet> &sets) {
  if (sets.empty()) throw InputError("PoolFeatures: no feature sets");
  FeatureSet pooled(sets.front().dim());
  for (const auto &s : sets) {
    if (s.dim() != pooled.dim()) throw InputError("PoolFeatures: dimension mismatch");
    for (std::size_t i = 0; i < s.size(); ++i) pooled.Append(s.frame(i));
  }
  return pooled;
}

// ---------------------------------------------------------------------------
// Files. The VQC1 file holds only the centroids; training statistics live
// in a "<path>.stats" sidecar ("speaker_id\tq\ttrain_distortion\tmean_quant_distance").

inline std::string EncodeCodebook(const Codebook &cb) {
  return detail::EncodeMatrixFile(kCodebookMagic, cb.q(), cb.dim(), cb.centroids.data());
}

inline Codebook DecodeCodebook(const std::string &bytes, const std::string &name,
                               std::string speaker_id) {
  auto m = detail::DecodeMatrixFile(kCodebookMagic, bytes, name);
  if (m.rows == 0) throw InputError(name + ": codebook with Q = 0");
  Codebook cb;
  cb.speaker_id = std::move(speaker_id);
  cb.centroids = Matrix(m.rows, m.dim);
  cb.centroids.data() = std::move(m.values);
  return cb;
}

inline std::string FormatDouble(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void WriteCodebook(const std::string &path, const Codebook &cb) {
  detail::WriteFileBytes(path, EncodeCodebook(cb));
  if (cb.has_train_stats)
    detail::WriteFileBytes(path + ".stats", cb.speaker_id + "\t" + std::to_string(cb.q()) + "\t" +
                                                FormatDouble(cb.train_distortion) + "\t" +
                                                FormatDouble(cb.mean_quant_distance) + "\n");
}

inline Codebook ReadCodebook(const std::string &path, std::string speaker_id = {}) {
  if (speaker_id.empty()) speaker_id = detail::StemOf(path);
  Codebook cb = DecodeCodebook(detail::ReadFileBytes(path), path, std::move(speaker_id));
  const std::string stats_path = path + ".stats";
  if (std::filesystem::exists(stats_path)) {
    std::istringstream in(detail::ReadFileBytes(stats_path));
    std::string id, q, dist, mean;
    if (!std::getline(in, id, '\t') || !std::getline(in, q, '\t') ||
        !std::getline(in, dist, '\t') || !std::getline(in, mean))
      throw InputError(stats_path + ":1: expected 4 tab-separated fields");
    try {
      cb.train_distortion = std::stod(dist);
      cb.mean_quant_distance = std::stod(mean);
    } catch (const std::exception &) {
      throw InputError(stats_path + ":1: malformed number");
    }
    cb.has_train_stats = true;
  }
  return cb;
}

/// Model registry: one "speaker_id\tcodebook_path" line per model.
struct RegistryEntry {
  std::string speaker_id;
  std::string codebook_path;
};

inline std::vector<RegistryEntry> ParseRegistry(const std::string &text, const std::string &name) {
  std::vector<RegistryEntry> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos)
      throw InputError(name + ":" + std::to_string(lineno) +
                       ": expected 'speaker_id<TAB>codebook_path'");
    out.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return out;
}

inline std::vector<RegistryEntry> ReadRegistry(const std::string &path) {
  return ParseRegistry(detail::ReadFileBytes(path), path);
}

inline void WriteRegistry(const std::string &path, const std::vector<RegistryEntry> &entries) {
  std::string out;
  for (const auto &e : entries) out += e.speaker_id + "\t" + e.codebook_path + "\n";
  detail::WriteFileBytes(path, out);
}

}  // namespace tipm

#endif  // TIPM_CODEBOOK_HPP_
