// tests/common_test.cpp

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

#include "tipm/common.hpp"
#include "tipm/parallel.hpp"

namespace tipm {
namespace {

TEST(MatrixTest, MultiplyMatchesHandComputation) {
  Matrix a(2, 3), b(3, 2);
  a.data() = {1, 2, 3, 4, 5, 6};
  b.data() = {7, 8, 9, 10, 11, 12};
  const Matrix c = Multiply(a, b);
  EXPECT_EQ(c.data(), (std::vector<double>{58, 64, 139, 154}));
}

TEST(MatrixTest, MultiplyTransposedIsATransposeB) {
  Matrix a(3, 2), b(3, 2);
  a.data() = {1, 2, 3, 4, 5, 6};
  b.data() = {1, 0, 0, 1, 1, 1};
  EXPECT_EQ(MultiplyTransposed(a, b), Multiply(a.Transpose(), b));
}

TEST(MatrixTest, NormsAndDefects) {
  Matrix m(2, 2);
  m.data() = {3, 0, 0, 4};
  EXPECT_DOUBLE_EQ(FrobeniusNormSquared(m), 25.0);
  EXPECT_DOUBLE_EQ(FrobeniusNorm(m), 5.0);
  EXPECT_DOUBLE_EQ(FrobeniusDistance(m, Matrix::Identity(2)), std::sqrt(4.0 + 9.0));
  EXPECT_DOUBLE_EQ(OrthogonalityDefect(Matrix::Identity(5)), 0.0);
}

TEST(MatrixTest, ShapeMismatchThrows) {
  EXPECT_THROW(Multiply(Matrix(2, 3), Matrix(2, 3)), InputError);
  EXPECT_THROW(MultiplyTransposed(Matrix(2, 3), Matrix(3, 3)), InputError);
}

TEST(ParallelForTest, EveryIndexOnceForAnyJobCount) {
  for (int jobs : {1, 2, 8, 64}) {
    std::vector<int> hits(1000, 0);
    ParallelFor(hits.size(), jobs, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) ASSERT_EQ(h, 1);
  }
}

TEST(ParallelForTest, RethrowsWorkerException) {
  EXPECT_THROW(ParallelFor(100, 4,
                           [](std::size_t i) {
                             if (i == 37) throw InputError("boom");
                           }),
               InputError);
}

}  // namespace
}  // namespace tipm
