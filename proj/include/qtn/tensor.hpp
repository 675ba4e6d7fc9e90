// Copyright 2026 The qtn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qtn/errors.hpp"

namespace qtn {

using cplx = std::complex<double>;
using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string shape_string(std::span<const std::size_t> shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

/// Dense row-major tensor of complex doubles.
///
/// A rank-0 tensor has an empty shape and exactly one element. Every axis
/// length is at least one, except for tensors made by empty(). Values are
/// not modified after construction, so tensors can be shared freely between
/// threads.
class ComplexTensor {
 public:
  /// Scalar zero.
  ComplexTensor() : data_(1, cplx{0.0, 0.0}) {}

  /// Zero-filled tensor of the given shape.
  explicit ComplexTensor(Shape shape) : shape_(std::move(shape)) {
    check_shape();
    data_.assign(shape_size(shape_), cplx{0.0, 0.0});
  }

  /// Tensor with at least one zero-length axis and no elements, used for
  /// empty results such as the Jacobian of a parameter-free circuit.
  static ComplexTensor empty(Shape shape) {
    if (shape_size(shape) != 0) throw DimensionError("empty tensor needs a zero-length axis");
    ComplexTensor t;
    t.shape_ = std::move(shape);
    t.data_.clear();
    return t;
  }

  ComplexTensor(Shape shape, std::vector<cplx> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape();
    if (data_.size() != shape_size(shape_))
      throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                           " does not match shape " + shape_string(shape_));
  }

  static ComplexTensor scalar(cplx v) { return ComplexTensor(Shape{}, {v}); }

  /// Row-major matrix from nested rows.
  static ComplexTensor matrix(std::initializer_list<std::initializer_list<cplx>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<cplx> d;
    d.reserve(r * c);
    for (const auto& row : rows) {
      if (row.size() != c) throw DimensionError("ragged matrix rows");
      d.insert(d.end(), row.begin(), row.end());
    }
    return ComplexTensor({r, c}, std::move(d));
  }

  static ComplexTensor vector(std::vector<cplx> v) {
    const std::size_t n = v.size();
    return ComplexTensor({n}, std::move(v));
  }

  static ComplexTensor identity(std::size_t dim) {
    ComplexTensor t({dim, dim});
    for (std::size_t i = 0; i < dim; ++i) t.data_[i * dim + i] = 1.0;
    return t;
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::span<const cplx> data() const noexcept { return data_; }
  const cplx& operator[](std::size_t flat) const { return data_[flat]; }

  /// Element by multi-index.
  const cplx& at(std::initializer_list<std::size_t> index) const {
    if (index.size() != shape_.size()) throw DimensionError("index rank mismatch");
    std::size_t flat = 0;
    std::size_t axis = 0;
    for (std::size_t i : index) {
      if (i >= shape_[axis]) throw DimensionError("index out of range");
      flat = flat * shape_[axis++] + i;
    }
    return data_[flat];
  }

  /// Shorthand for rank-2 access.
  const cplx& operator()(std::size_t r, std::size_t c) const {
    return data_[r * shape_[1] + c];
  }

  /// Releases the underlying buffer; used when building derived tensors.
  std::vector<cplx> release() && { return std::move(data_); }

  friend bool operator==(const ComplexTensor&, const ComplexTensor&) = default;

 private:
  void check_shape() const {
    for (std::size_t d : shape_)
      if (d == 0) throw DimensionError("zero-length axis in shape " + shape_string(shape_));
  }

  Shape shape_;
  std::vector<cplx> data_;
};

using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

inline Eigen::Map<const RowMatrix> as_matrix(std::span<const cplx> data, std::size_t rows,
                                             std::size_t cols) {
  return {data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

inline void require_matrix(const ComplexTensor& t, const char* what) {
  if (t.rank() != 2) throw DimensionError(std::string(what) + ": expected a matrix, got shape " +
                                          shape_string(t.shape()));
}

}  // namespace detail

inline ComplexTensor from_eigen(const RowMatrix& m) {
  std::vector<cplx> d(m.data(), m.data() + m.size());
  return ComplexTensor({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())},
                       std::move(d));
}

inline RowMatrix to_eigen(const ComplexTensor& t) {
  detail::require_matrix(t, "to_eigen");
  return detail::as_matrix(t.data(), t.dim(0), t.dim(1));
}

/// Permutes axes. `perm[k]` names the input axis that becomes output axis k.
inline ComplexTensor transpose(const ComplexTensor& t, std::span<const std::size_t> perm) {
  const std::size_t r = t.rank();
  if (perm.size() != r) throw DimensionError("transpose: permutation length mismatch");
  std::vector<bool> seen(r, false);
  for (std::size_t p : perm) {
    if (p >= r || seen[p]) throw DimensionError("transpose: invalid permutation");
    seen[p] = true;
  }
  bool identity = true;
  for (std::size_t k = 0; k < r; ++k) identity = identity && perm[k] == k;
  if (identity) return t;

  Shape in_strides(r, 1);
  for (std::size_t k = r; k-- > 1;) in_strides[k - 1] = in_strides[k] * t.dim(k);
  Shape out_shape(r);
  Shape strides(r);  // input stride for each output axis
  for (std::size_t k = 0; k < r; ++k) {
    out_shape[k] = t.dim(perm[k]);
    strides[k] = in_strides[perm[k]];
  }
  std::vector<cplx> out(t.size());
  Shape counter(r, 0);
  std::size_t src = 0;
  const auto in = t.data();
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    out[flat] = in[src];
    for (std::size_t k = r; k-- > 0;) {
      if (++counter[k] < out_shape[k]) {
        src += strides[k];
        break;
      }
      src -= strides[k] * (out_shape[k] - 1);
      counter[k] = 0;
    }
  }
  return ComplexTensor(std::move(out_shape), std::move(out));
}

inline ComplexTensor reshape(ComplexTensor t, Shape new_shape) {
  if (shape_size(new_shape) != t.size())
    throw DimensionError("reshape: cannot view " + std::to_string(t.size()) +
                         " elements as " + shape_string(new_shape));
  return ComplexTensor(std::move(new_shape), std::move(t).release());
}

/// Permutes axes then reinterprets the row-major buffer with `new_shape`.
inline ComplexTensor transpose_reshape(const ComplexTensor& t, std::span<const std::size_t> perm,
                                       Shape new_shape) {
  return reshape(transpose(t, perm), std::move(new_shape));
}

/// Generalized tensordot. Axes `a_axes[k]` of `a` are summed against
/// `b_axes[k]` of `b`; the result keeps the free axes of `a` (in order)
/// followed by the free axes of `b`.
inline ComplexTensor contract_pair(const ComplexTensor& a, std::span<const std::size_t> a_axes,
                                   const ComplexTensor& b, std::span<const std::size_t> b_axes) {
  if (a_axes.size() != b_axes.size())
    throw DimensionError("contract_pair: axis lists differ in length");
  std::vector<bool> a_used(a.rank(), false), b_used(b.rank(), false);
  std::size_t inner = 1;
  for (std::size_t k = 0; k < a_axes.size(); ++k) {
    const std::size_t i = a_axes[k], j = b_axes[k];
    if (i >= a.rank() || j >= b.rank() || a_used[i] || b_used[j])
      throw DimensionError("contract_pair: invalid or repeated axis");
    if (a.dim(i) != b.dim(j))
      throw DimensionError("contract_pair: paired axes have lengths " + std::to_string(a.dim(i)) +
                           " and " + std::to_string(b.dim(j)));
    a_used[i] = b_used[j] = true;
    inner *= a.dim(i);
  }
  Shape a_perm, b_perm, out_shape;
  std::size_t rows = 1, cols = 1;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (!a_used[i]) {
      a_perm.push_back(i);
      out_shape.push_back(a.dim(i));
      rows *= a.dim(i);
    }
  a_perm.insert(a_perm.end(), a_axes.begin(), a_axes.end());
  b_perm.assign(b_axes.begin(), b_axes.end());
  for (std::size_t j = 0; j < b.rank(); ++j)
    if (!b_used[j]) {
      b_perm.push_back(j);
      out_shape.push_back(b.dim(j));
      cols *= b.dim(j);
    }
  const ComplexTensor at = transpose(a, a_perm);
  const ComplexTensor bt = transpose(b, b_perm);
  std::vector<cplx> out(rows * cols);
  Eigen::Map<RowMatrix> result(out.data(), static_cast<Eigen::Index>(rows),
                               static_cast<Eigen::Index>(cols));
  result.noalias() = detail::as_matrix(at.data(), rows, inner) *
                     detail::as_matrix(bt.data(), inner, cols);
  return ComplexTensor(std::move(out_shape), std::move(out));
}

inline ComplexTensor contract_pair(const ComplexTensor& a, std::initializer_list<std::size_t> a_axes,
                                   const ComplexTensor& b, std::initializer_list<std::size_t> b_axes) {
  return contract_pair(a, std::span<const std::size_t>(a_axes.begin(), a_axes.size()), b,
                       std::span<const std::size_t>(b_axes.begin(), b_axes.size()));
}

/// Sums the diagonal over each pair (axes_a[k], axes_b[k]); remaining axes
/// keep their relative order.
inline ComplexTensor trace_axes(const ComplexTensor& t, std::span<const std::size_t> axes_a,
                                std::span<const std::size_t> axes_b) {
  if (axes_a.size() != axes_b.size()) throw DimensionError("trace_axes: length mismatch");
  if (axes_a.empty()) return t;
  std::vector<bool> used(t.rank(), false);
  std::size_t diag = 1;
  for (std::size_t k = 0; k < axes_a.size(); ++k) {
    const std::size_t i = axes_a[k], j = axes_b[k];
    if (i >= t.rank() || j >= t.rank() || i == j || used[i] || used[j])
      throw DimensionError("trace_axes: invalid axis pair");
    if (t.dim(i) != t.dim(j)) throw DimensionError("trace_axes: paired axes differ in length");
    used[i] = used[j] = true;
    diag *= t.dim(i);
  }
  Shape perm, out_shape;
  std::size_t rest = 1;
  for (std::size_t i = 0; i < t.rank(); ++i)
    if (!used[i]) {
      perm.push_back(i);
      out_shape.push_back(t.dim(i));
      rest *= t.dim(i);
    }
  perm.insert(perm.end(), axes_a.begin(), axes_a.end());
  perm.insert(perm.end(), axes_b.begin(), axes_b.end());
  const ComplexTensor p = transpose(t, perm);
  std::vector<cplx> out(rest, cplx{});
  const auto d = p.data();
  for (std::size_t r = 0; r < rest; ++r)
    for (std::size_t k = 0; k < diag; ++k) out[r] += d[r * diag * diag + k * diag + k];
  return ComplexTensor(std::move(out_shape), std::move(out));
}

/// Kronecker product of two matrices.
inline ComplexTensor kron(const ComplexTensor& a, const ComplexTensor& b) {
  detail::require_matrix(a, "kron");
  detail::require_matrix(b, "kron");
  const std::size_t m = a.dim(0), n = a.dim(1), p = b.dim(0), q = b.dim(1);
  std::vector<cplx> out(m * p * n * q);
  const std::size_t cols = n * q;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const cplx aij = a(i, j);
      for (std::size_t k = 0; k < p; ++k)
        for (std::size_t l = 0; l < q; ++l) out[(i * p + k) * cols + j * q + l] = aij * b(k, l);
    }
  return ComplexTensor({m * p, n * q}, std::move(out));
}

inline ComplexTensor matmul(const ComplexTensor& a, const ComplexTensor& b) {
  detail::require_matrix(a, "matmul");
  detail::require_matrix(b, "matmul");
  return contract_pair(a, {1}, b, {0});
}

/// Conjugate transpose of a matrix.
inline ComplexTensor adjoint(const ComplexTensor& m) {
  detail::require_matrix(m, "adjoint");
  const std::size_t r = m.dim(0), c = m.dim(1);
  std::vector<cplx> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = std::conj(m(i, j));
  return ComplexTensor({c, r}, std::move(out));
}

inline ComplexTensor conj(const ComplexTensor& t) {
  std::vector<cplx> out(t.data().begin(), t.data().end());
  for (auto& v : out) v = std::conj(v);
  return ComplexTensor(t.shape(), std::move(out));
}

inline ComplexTensor scale(const ComplexTensor& t, cplx s) {
  std::vector<cplx> out(t.data().begin(), t.data().end());
  for (auto& v : out) v *= s;
  return ComplexTensor(t.shape(), std::move(out));
}

inline ComplexTensor add(const ComplexTensor& a, const ComplexTensor& b, cplx b_scale = 1.0) {
  if (a.shape() != b.shape()) throw DimensionError("add: shape mismatch");
  std::vector<cplx> out(a.data().begin(), a.data().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b_scale * b[i];
  return ComplexTensor(a.shape(), std::move(out));
}

inline double frobenius_norm(const ComplexTensor& t) {
  double s = 0.0;
  for (const cplx& v : t.data()) s += std::norm(v);
  return std::sqrt(s);
}

/// Largest absolute elementwise difference; shapes must agree.
inline double max_abs_diff(const ComplexTensor& a, const ComplexTensor& b) {
  if (a.size() != b.size()) throw DimensionError("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline bool is_square_matrix(const ComplexTensor& t) {
  return t.rank() == 2 && t.dim(0) == t.dim(1);
}

/// ||U^dagger U - I||_max
inline double unitarity_defect(const ComplexTensor& u) {
  return max_abs_diff(matmul(adjoint(u), u), ComplexTensor::identity(u.dim(1)));
}

/// Result of splitting a two-qubit gate into two bond-connected tensors.
///
/// `left` has axes (out0, in0, bond) and `right` has axes (bond, out1, in1).
struct SvdSplit {
  ComplexTensor left;
  ComplexTensor right;
  std::size_t bond_dimension = 0;
  double truncation_error = 0.0;  ///< Frobenius norm of the dropped singular values.
  std::vector<double> singular_values;  ///< kept values, descending
};

/// Splits a [2,2,2,2] gate tensor with axes (out0, out1, in0, in1) (the
/// row-major reshape of a 4x4 matrix) into two rank-3 tensors by SVD across
/// the (out0,in0) x (out1,in1) grouping, keeping at most
/// `max_singular_values` values. Numerically zero singular values are dropped
/// as well, so low-rank gates get their natural bond dimension.
///
/// Phases are fixed so the largest-magnitude entry of every left singular
/// vector is real and positive (lowest index wins ties); the singular values
/// are shared as sqrt(s) between the two halves.
inline SvdSplit svd_split(const ComplexTensor& gate, std::size_t max_singular_values,
                          double drop_tolerance = 1e-14) {
  ComplexTensor g = gate;
  if (g.rank() == 2 && g.dim(0) == 4 && g.dim(1) == 4) g = reshape(g, {2, 2, 2, 2});
  if (g.shape() != Shape{2, 2, 2, 2})
    throw DimensionError("svd_split: expected a [2,2,2,2] gate, got " + shape_string(g.shape()));
  if (max_singular_values < 1) throw InvalidArgument("svd_split: max_singular_values must be >= 1");

  const std::size_t perm[] = {0, 2, 1, 3};
  const RowMatrix m = to_eigen(transpose_reshape(g, perm, {4, 4}));
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  Eigen::MatrixXcd u = svd.matrixU();
  Eigen::MatrixXcd v = svd.matrixV();

  const double smax = s.size() ? s(0) : 0.0;
  std::size_t keep = 0;
  while (keep < static_cast<std::size_t>(s.size()) && keep < max_singular_values &&
         s(static_cast<Eigen::Index>(keep)) > drop_tolerance * std::max(1.0, smax))
    ++keep;
  keep = std::max<std::size_t>(keep, 1);

  double dropped = 0.0;
  for (Eigen::Index k = static_cast<Eigen::Index>(keep); k < s.size(); ++k) dropped += s(k) * s(k);

  for (std::size_t k = 0; k < keep; ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    Eigen::Index best = 0;
    double best_mag = -1.0;
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      const double mag = std::abs(u(r, col));
      if (mag > best_mag * (1.0 + 1e-12) + 1e-300) {
        best_mag = mag;
        best = r;
      }
    }
    if (best_mag > 0.0) {
      const cplx phase = std::conj(u(best, col)) / best_mag;
      u.col(col) *= phase;
      v.col(col) *= phase;  // M = U S V^dagger is unchanged
    }
  }

  SvdSplit out;
  out.bond_dimension = keep;
  out.truncation_error = std::sqrt(dropped);
  std::vector<cplx> left(4 * keep), right(keep * 4);
  for (std::size_t k = 0; k < keep; ++k) {
    const double root = std::sqrt(s(static_cast<Eigen::Index>(k)));
    out.singular_values.push_back(s(static_cast<Eigen::Index>(k)));
    for (std::size_t r = 0; r < 4; ++r)
      left[r * keep + k] = u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) * root;
    for (std::size_t c = 0; c < 4; ++c)
      right[k * 4 + c] =
          std::conj(v(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k))) * root;
  }
  out.left = ComplexTensor({2, 2, keep}, std::move(left));
  out.right = ComplexTensor({keep, 2, 2}, std::move(right));
  return out;
}

/// Rebuilds the [2,2,2,2] (out0, out1, in0, in1) gate tensor from a split.
inline ComplexTensor merge_split(const SvdSplit& split) {
  // (out0,in0,bond) x (bond,out1,in1) -> (out0,in0,out1,in1)
  const ComplexTensor t = contract_pair(split.left, {2}, split.right, {0});
  const std::size_t perm[] = {0, 2, 1, 3};
  return transpose(t, perm);
}

}  // namespace qtn
