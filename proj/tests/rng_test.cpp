// tests/rng_test.cpp

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

#include <cmath>

#include "tipm/rng.hpp"

namespace tipm {
namespace {

// Reference values computed with an independent arbitrary-precision
// implementation of the published SplitMix64 and xorshift64* recurrences.
TEST(RngTest, SplitMix64ReferenceVector) {
  std::uint64_t s = 0;
  EXPECT_EQ(SplitMix64(s), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(SplitMix64(s), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(SplitMix64(s), 0x06c45d188009454fULL);
}

TEST(RngTest, Xorshift64StarReferenceVector) {
  Xorshift64Star a(1);
  EXPECT_EQ(a.Next(), 0x4b46a55df3611b9bULL);
  EXPECT_EQ(a.Next(), 0xd7e1f1410e763ef4ULL);
  EXPECT_EQ(a.Next(), 0x5f14ec66975f9b06ULL);
  EXPECT_EQ(a.Next(), 0x3b2c74fad44d6cdbULL);
  Xorshift64Star b(42);
  EXPECT_EQ(b.Next(), 0x31b0ece7c4f697a2ULL);
  EXPECT_EQ(b.Next(), 0x9008a3b1cb686f03ULL);
}

TEST(RngTest, UniformUsesTop53Bits) {
  Xorshift64Star r(7);
  EXPECT_EQ(r.Uniform(), 0.08170555950360558);
}

TEST(RngTest, DeriveSeedReferenceVector) {
  EXPECT_EQ(DeriveSeed(1, 2), 0xbcd9dbb49673066bULL);
  EXPECT_EQ(DeriveSeed(123, 0), 0xe050a2a38d8ef504ULL);
  EXPECT_NE(DeriveSeed(1, 2), DeriveSeed(1, 3));
}

TEST(RngTest, NormalMomentsAreStandard) {
  Xorshift64Star r(99);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.Normal();
    ASSERT_TRUE(std::isfinite(x));
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(sq / n - mean * mean, 1.0, 0.01);
}

TEST(RngTest, UniformRangeAndBelow) {
  Xorshift64Star r(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.Uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.Below(7), 7u);
  }
}

TEST(RngTest, SameSeedSameStream) {
  Xorshift64Star a(2024), b(2024);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.Next(), b.Next());
}

}  // namespace
}  // namespace tipm
