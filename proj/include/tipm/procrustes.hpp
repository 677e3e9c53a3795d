// tipm/procrustes.hpp

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

#ifndef TIPM_PROCRUSTES_HPP_
#define TIPM_PROCRUSTES_HPP_

#include <algorithm>
#include <compare>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "tipm/common.hpp"

namespace tipm {

/// Identifies a matched pair by the codeword and test frame it joins.
/// Ordering is lexicographic (codeword, frame); "lowest pair id" tie-breaks
/// refer to this order.
struct PairId {
  std::uint32_t codeword = 0;
  std::uint32_t frame = 0;

  auto operator<=>(const PairId &) const = default;
};

/// An ordered set of S matched vector pairs. Row s of `left` (codebook
/// side) is matched to row s of `right` (test side).
class PairSet {
 public:
  PairSet() = default;

  explicit PairSet(std::size_t dim) : left_(0, dim), right_(0, dim), dim_(dim) {}

  PairSet(Matrix left, Matrix right, std::vector<PairId> ids)
      : left_(std::move(left)), right_(std::move(right)), ids_(std::move(ids)),
        dim_(left_.cols()) {
    if (left_.rows() != right_.rows() || left_.rows() != ids_.size())
      throw InputError("PairSet: left/right/ids sizes differ (" +
                       std::to_string(left_.rows()) + ", " +
                       std::to_string(right_.rows()) + ", " +
                       std::to_string(ids_.size()) + ")");
    if (left_.cols() != right_.cols())
      throw InputError("PairSet: left dim " + std::to_string(left_.cols()) +
                       " != right dim " + std::to_string(right_.cols()));
    std::set<PairId> seen(ids_.begin(), ids_.end());
    if (seen.size() != ids_.size()) throw InputError("PairSet: duplicate pair ids");
  }

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  bool empty() const { return ids_.empty(); }

  const Matrix &left() const { return left_; }
  const Matrix &right() const { return right_; }
  const std::vector<PairId> &ids() const { return ids_; }

  std::span<const double> left_row(std::size_t s) const { return left_.row(s); }
  std::span<const double> right_row(std::size_t s) const { return right_.row(s); }

  /// Copy with pair `s` removed; remaining order preserved.
  PairSet Without(std::size_t s) const {
    if (s >= size()) throw InputError("PairSet::Without: index out of range");
    Matrix l(size() - 1, dim_), r(size() - 1, dim_);
    std::vector<PairId> ids;
    ids.reserve(size() - 1);
    std::size_t out = 0;
    for (std::size_t i = 0; i < size(); ++i) {
      if (i == s) continue;
      std::copy(left_.row(i).begin(), left_.row(i).end(), l.row(out).begin());
      std::copy(right_.row(i).begin(), right_.row(i).end(), r.row(out).begin());
      ids.push_back(ids_[i]);
      ++out;
    }
    PairSet result;
    result.left_ = std::move(l);
    result.right_ = std::move(r);
    result.ids_ = std::move(ids);
    result.dim_ = dim_;
    return result;
  }

  /// Copy with one pair appended at the end.
  PairSet With(std::span<const double> left_row, std::span<const double> right_row,
               PairId id) const {
    if (left_row.size() != dim_ || right_row.size() != dim_)
      throw InputError("PairSet::With: dimension mismatch");
    if (std::find(ids_.begin(), ids_.end(), id) != ids_.end())
      throw InputError("PairSet::With: duplicate pair id");
    PairSet result;
    result.dim_ = dim_;
    result.left_ = Matrix(size() + 1, dim_);
    result.right_ = Matrix(size() + 1, dim_);
    std::copy(left_.data().begin(), left_.data().end(), result.left_.data().begin());
    std::copy(right_.data().begin(), right_.data().end(), result.right_.data().begin());
    std::copy(left_row.begin(), left_row.end(), result.left_.row(size()).begin());
    std::copy(right_row.begin(), right_row.end(), result.right_.row(size()).begin());
    result.ids_ = ids_;
    result.ids_.push_back(id);
    return result;
  }

  bool operator==(const PairSet &) const = default;

 private:
  Matrix left_;
  Matrix right_;
  std::vector<PairId> ids_;
  std::size_t dim_ = 0;
};

/// M = U diag(singular_values) V^T.
struct SvdResult {
  Matrix u;
  Vector singular_values;
  Matrix v;
  int sweeps = 0;
};

namespace detail {

// Completes/re-orthogonalises the columns of `u` (n x n) in order. Column k
// is kept when it survives two Gram-Schmidt passes against columns < k with
// at least half of its norm; otherwise it is replaced by the first unit
// basis vector that does.
inline void OrthonormalizeColumns(Matrix &u) {
  const std::size_t n = u.rows();
  auto project_out = [&](Vector &w, std::size_t k) {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < k; ++j) {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += u(i, j) * w[i];
        for (std::size_t i = 0; i < n; ++i) w[i] -= d * u(i, j);
      }
  };
  auto norm = [](const Vector &w) {
    double acc = 0.0;
    for (double x : w) acc += x * x;
    return std::sqrt(acc);
  };
  Vector w(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) w[i] = u(i, k);
    const double before = norm(w);
    bool accepted = false;
    if (before > 0.0) {
      project_out(w, k);
      const double after = norm(w);
      if (after >= 0.5 * before) {
        for (std::size_t i = 0; i < n; ++i) u(i, k) = w[i] / after;
        accepted = true;
      }
    }
    for (std::size_t e = 0; !accepted && e < n; ++e) {
      std::fill(w.begin(), w.end(), 0.0);
      w[e] = 1.0;
      project_out(w, k);
      const double after = norm(w);
      if (after >= 0.5) {
        for (std::size_t i = 0; i < n; ++i) u(i, k) = w[i] / after;
        accepted = true;
      }
    }
  }
}

}  // namespace detail

/// Singular value decomposition of a small square matrix by one-sided
/// (Hestenes) Jacobi. Columns are swept in fixed cyclic order (p < q, row
/// major); a pair is rotated while |a_p . a_q| > 1e-14 * ||a_p|| ||a_q||.
/// At most 60 sweeps. Singular values come out sorted non-increasing
/// (stable with respect to column index on ties).
inline SvdResult SvdSmall(const Matrix &m) {
  constexpr double kTol = 1e-14;
  constexpr int kMaxSweeps = 60;
  const std::size_t n = m.rows();
  if (n == 0 || m.cols() != n) throw InputError("SvdSmall: expects a non-empty square matrix");
  for (double x : m.data())
    if (!std::isfinite(x)) throw InputError("SvdSmall: non-finite matrix entry");

  Matrix a = m;
  Matrix v = Matrix::Identity(n);
  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          alpha += a(i, p) * a(i, p);
          beta += a(i, q) * a(i, q);
          gamma += a(i, p) * a(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= kTol * std::sqrt(alpha) * std::sqrt(beta))
          continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < n; ++i) {
          const double ap = a(i, p), aq = a(i, q);
          a(i, p) = c * ap - s * aq;
          a(i, q) = s * ap + c * aq;
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  Vector sigma(n);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a(i, k) * a(i, k);
    sigma[k] = std::sqrt(acc);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  SvdResult out;
  out.u = Matrix(n, n);
  out.v = Matrix(n, n);
  out.singular_values.resize(n);
  out.sweeps = sweep;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.singular_values[k] = sigma[src];
    for (std::size_t i = 0; i < n; ++i) {
      out.u(i, k) = sigma[src] > 0.0 ? a(i, src) / sigma[src] : 0.0;
      out.v(i, k) = v(i, src);
    }
  }
  detail::OrthonormalizeColumns(out.u);
  return out;
}

struct AlignOptions {
  /// Subtract the per-side row mean before aligning.
  bool center = false;
};

/// Optimal orthogonal alignment of left onto right.
struct AlignmentResult {
  Matrix rotation;  // D x D, minimises ||left * rotation - right||_F
  double residual = 0.0;  // ||left * rotation - right||_F^2
  Vector singular_values;  // of left^T right, non-increasing
};

namespace detail {

inline void CenterRows(Matrix &m) {
  if (m.rows() == 0) return;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) mean += m(r, c);
    mean /= static_cast<double>(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) -= mean;
  }
}

inline double ResidualOf(const Matrix &left, const Matrix &rotation, const Matrix &right) {
  const std::size_t d = left.cols();
  double acc = 0.0;
  for (std::size_t s = 0; s < left.rows(); ++s)
    for (std::size_t j = 0; j < d; ++j) {
      double x = 0.0;
      for (std::size_t k = 0; k < d; ++k) x += left(s, k) * rotation(k, j);
      const double diff = x - right(s, j);
      acc += diff * diff;
    }
  return acc;
}

inline AlignmentResult AlignMatrices(Matrix left, Matrix right, const AlignOptions &opts) {
  if (opts.center) {
    CenterRows(left);
    CenterRows(right);
  }
  const Matrix cross = MultiplyTransposed(left, right);
  SvdResult svd = SvdSmall(cross);
  AlignmentResult out;
  out.rotation = Multiply(svd.u, svd.v.Transpose());
  out.residual = ResidualOf(left, out.rotation, right);
  out.singular_values = std::move(svd.singular_values);
  return out;
}

}  // namespace detail

/// Solves min ||X_l * R - X_q||_F over orthogonal R (reflections allowed)
/// via the SVD X_l^T X_q = U S V^T, R = U V^T.
inline AlignmentResult Align(const PairSet &pairs, const AlignOptions &opts = {}) {
  if (pairs.empty()) throw InputError("Align: empty PairSet");
  if (pairs.dim() == 0) throw InputError("Align: zero dimension");
  return detail::AlignMatrices(pairs.left(), pairs.right(), opts);
}

/// Residual of Align on `pairs` with pair `drop_index` removed. Bit-identical
/// to Align(pairs.Without(drop_index)).residual.
inline double ResidualWithout(const PairSet &pairs, std::size_t drop_index,
                              const AlignOptions &opts = {}) {
  if (pairs.size() < 2) throw InputError("ResidualWithout: needs at least 2 pairs");
  if (drop_index >= pairs.size())
    throw InputError("ResidualWithout: index " + std::to_string(drop_index) +
                     " out of range for " + std::to_string(pairs.size()) + " pairs");
  return Align(pairs.Without(drop_index), opts).residual;
}

}  // namespace tipm

#endif  // TIPM_PROCRUSTES_HPP_
