// tests/codebook_test.cpp

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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "test_support.hpp"
#include "tipm/codebook.hpp"

namespace tipm {
namespace {

FeatureSet RandomFeatures(Xorshift64Star &rng, std::size_t n, std::size_t d, double spread = 1.0) {
  FeatureSet fs(d);
  Vector f(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (double &x : f) x = spread * rng.Normal();
    fs.Append(f);
  }
  return fs;
}

TEST(KMeansTest, DistinctPointsAreAFixedPoint) {
  Xorshift64Star rng(1);
  const FeatureSet x = RandomFeatures(rng, 8, 3);
  KMeansConfig cfg;
  cfg.q = 8;
  cfg.seed = 4;
  const Codebook cb = TrainCodebook(x, cfg, "s");
  EXPECT_EQ(cb.train_distortion, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(Quantize(cb, x.frame(i)).distance, 0.0);
}

TEST(KMeansTest, SingleClusterIsTheMean) {
  Xorshift64Star rng(2);
  const FeatureSet x = RandomFeatures(rng, 50, 4);
  KMeansConfig cfg;
  cfg.q = 1;
  const Codebook cb = TrainCodebook(x, cfg);
  for (std::size_t c = 0; c < 4; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) mean += x.frame(i)[c];
    EXPECT_NEAR(cb.centroid(0)[c], mean / 50.0, 1e-14);
  }
}

// Exhaustive search over all 2-way partitions of n <= 12 points.
double BruteForceTwoMeansDistortion(const FeatureSet &x) {
  const std::size_t n = x.size(), d = x.dim();
  double best = INFINITY;
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    double sse = 0.0;
    for (int side = 0; side < 2; ++side) {
      Vector mean(d, 0.0);
      int count = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (((mask >> i) & 1u) == static_cast<std::uint32_t>(side)) {
          ++count;
          for (std::size_t c = 0; c < d; ++c) mean[c] += x.frame(i)[c];
        }
      for (double &m : mean) m /= count;
      for (std::size_t i = 0; i < n; ++i)
        if (((mask >> i) & 1u) == static_cast<std::uint32_t>(side)) sse += SquaredDistance(x.frame(i), mean);
    }
    best = std::min(best, sse);
  }
  return best / static_cast<double>(n);
}

TEST(KMeansTest, TwoBlobsReachTheExhaustiveOptimum) {
  const double sigma = 0.5;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Xorshift64Star rng(seed);
    const Vector mean_a = {-4.0, 1.0}, mean_b = {4.0, -1.0};
    FeatureSet x(2);
    for (int i = 0; i < 12; ++i) {
      const Vector &m = i < 6 ? mean_a : mean_b;
      x.Append(Vector{m[0] + sigma * rng.Normal(), m[1] + sigma * rng.Normal()});
    }
    KMeansConfig cfg;
    cfg.q = 2;
    cfg.seed = seed + 100;
    const Codebook cb = TrainCodebook(x, cfg);
    EXPECT_NEAR(cb.train_distortion, BruteForceTwoMeansDistortion(x), 1e-12);
    const std::size_t ia = Quantize(cb, mean_a).index, ib = Quantize(cb, mean_b).index;
    ASSERT_NE(ia, ib);
    for (int i = 0; i < 12; ++i) EXPECT_EQ(Quantize(cb, x.frame(i)).index, i < 6 ? ia : ib);
    const double bound = 3.0 * sigma / std::sqrt(6.0) * std::sqrt(2.0);
    EXPECT_LE(std::sqrt(SquaredDistance(cb.centroid(ia), mean_a)), bound);
    EXPECT_LE(std::sqrt(SquaredDistance(cb.centroid(ib), mean_b)), bound);
  }
}

TEST(KMeansTest, DistortionNeverIncreases) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Xorshift64Star rng(seed);
    const FeatureSet x = RandomFeatures(rng, 200, 5);
    KMeansConfig cfg;
    cfg.q = 16;
    cfg.seed = seed;
    const KMeansReport r = TrainCodebookTraced(x, cfg);
    ASSERT_FALSE(r.distortion_trace.empty());
    for (std::size_t t = 1; t < r.distortion_trace.size(); ++t)
      ASSERT_LE(r.distortion_trace[t], r.distortion_trace[t - 1] + 1e-12);
    EXPECT_DOUBLE_EQ(r.distortion_trace.back(), r.codebook.train_distortion);
  }
}

TEST(KMeansTest, DuplicatePointsDoNotLeaveEmptyClusters) {
  FeatureSet x(2);
  for (int i = 0; i < 10; ++i) x.Append(Vector{0.0, 0.0});
  x.Append(Vector{1.0, 0.0});
  x.Append(Vector{0.0, 1.0});
  KMeansConfig cfg;
  cfg.q = 3;
  const Codebook cb = TrainCodebook(x, cfg);
  for (double v : cb.centroids.data()) EXPECT_TRUE(std::isfinite(v));
  EXPECT_EQ(cb.train_distortion, 0.0);
}

TEST(KMeansTest, DeterministicForFixedSeed) {
  Xorshift64Star rng(3);
  const FeatureSet x = RandomFeatures(rng, 300, 13);
  KMeansConfig cfg;
  cfg.q = 32;
  cfg.seed = 77;
  const Codebook a = TrainCodebook(x, cfg), b = TrainCodebook(x, cfg);
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(a.train_distortion, b.train_distortion);
  cfg.seed = 78;
  EXPECT_NE(TrainCodebook(x, cfg).centroids, a.centroids);
}

TEST(KMeansTest, RejectsTooFewFrames) {
  Xorshift64Star rng(4);
  KMeansConfig cfg;
  cfg.q = 10;
  try {
    TrainCodebook(RandomFeatures(rng, 5, 2), cfg);
    FAIL();
  } catch (const InputError &e) {
    EXPECT_NE(std::string(e.what()).find("q = 10"), std::string::npos);
  }
  EXPECT_THROW(TrainCodebook(FeatureSet(2), cfg), InputError);
}

TEST(KMeansTest, MeanQuantDistanceIsRecorded) {
  Xorshift64Star rng(5);
  const FeatureSet x = RandomFeatures(rng, 100, 3);
  KMeansConfig cfg;
  cfg.q = 4;
  const Codebook cb = TrainCodebook(x, cfg);
  double mean = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mean += Quantize(cb, x.frame(i)).distance;
  EXPECT_NEAR(cb.mean_quant_distance, mean / 100.0, 1e-12);
  EXPECT_TRUE(cb.has_train_stats);
}

TEST(QuantizeTest, ExactCentroidAndTies) {
  Codebook cb;
  cb.centroids = Matrix(4, 2);
  cb.centroids.data() = {5, 5, 1, 0, -1, 0, 0, 9};
  EXPECT_EQ(Quantize(cb, Vector{0, 9}).index, 3u);
  EXPECT_EQ(Quantize(cb, Vector{0, 9}).distance, 0.0);
  EXPECT_EQ(Quantize(cb, Vector{0, 0}).index, 1u);  // equidistant to 1 and 2
  EXPECT_THROW(Quantize(cb, Vector{0, 0, 0}), InputError);
}

TEST(QuantizeTest, MatchesExhaustiveScan) {
  Xorshift64Star rng(6);
  Codebook cb;
  cb.centroids = testing::GaussianMatrix(rng, 20, 5);
  for (int t = 0; t < 500; ++t) {
    Vector f(5);
    for (double &x : f) x = rng.Normal();
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t k = 0; k < 20; ++k) {
      double d = 0.0;
      for (std::size_t c = 0; c < 5; ++c) d += (f[c] - cb.centroids(k, c)) * (f[c] - cb.centroids(k, c));
      if (d < best_d) best_d = d, best = k;
    }
    ASSERT_EQ(Quantize(cb, f).index, best);
    ASSERT_NEAR(Quantize(cb, f).distance, std::sqrt(best_d), 1e-12);
  }
}

TEST(CodebookIoTest, RoundTripIncludingStats) {
  testing::TempDir dir("codebook");
  Xorshift64Star rng(7);
  KMeansConfig cfg;
  cfg.q = 6;
  const Codebook cb = TrainCodebook(RandomFeatures(rng, 60, 4), cfg, "alice");
  WriteCodebook(dir / "alice.vqc", cb);
  EXPECT_EQ(std::filesystem::file_size(dir / "alice.vqc"), 16u + 6 * 4 * 8);
  const Codebook back = ReadCodebook(dir / "alice.vqc");
  EXPECT_EQ(back.centroids, cb.centroids);
  EXPECT_EQ(back.speaker_id, "alice");
  EXPECT_EQ(back.train_distortion, cb.train_distortion);
  EXPECT_EQ(back.mean_quant_distance, cb.mean_quant_distance);
  std::filesystem::remove(dir / "alice.vqc.stats");
  EXPECT_FALSE(ReadCodebook(dir / "alice.vqc").has_train_stats);
}

TEST(CodebookIoTest, FeatureMagicRejected) {
  const std::string bytes = EncodeFeatures(FeatureSet::FromRows(2, {{1, 2}}));
  EXPECT_THROW(DecodeCodebook(bytes, "x", "x"), InputError);
}

TEST(RegistryTest, ParseAndErrors) {
  const auto r = ParseRegistry("a\tmodels/a.vqc\nb\t/abs/b.vqc\n", "reg");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[1].codebook_path, "/abs/b.vqc");
  try {
    ParseRegistry("a\tx\nbroken\n", "reg.tsv");
    FAIL();
  } catch (const InputError &e) {
    EXPECT_NE(std::string(e.what()).find("reg.tsv:2"), std::string::npos);
  }
}

}  // namespace
}  // namespace tipm
