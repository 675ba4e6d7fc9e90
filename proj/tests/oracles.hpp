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

// Test-side reference implementations. None of these call into the library
// beyond its plain data types; they use naive loops and full matrices.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "qtn/tensor.hpp"

namespace oracle {

using cplx = std::complex<double>;

/// Dense row-major square matrix.
struct Mat {
  std::size_t d = 0;
  std::vector<cplx> a;

  Mat() = default;
  explicit Mat(std::size_t dim) : d(dim), a(dim * dim, 0.0) {}
  Mat(std::size_t dim, std::initializer_list<cplx> v) : d(dim), a(v) {}

  cplx& operator()(std::size_t r, std::size_t c) { return a[r * d + c]; }
  cplx operator()(std::size_t r, std::size_t c) const { return a[r * d + c]; }

  static Mat eye(std::size_t dim) {
    Mat m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline Mat mul(const Mat& x, const Mat& y) {
  Mat out(x.d);
  for (std::size_t i = 0; i < x.d; ++i)
    for (std::size_t k = 0; k < x.d; ++k) {
      const cplx v = x(i, k);
      if (v == cplx(0.0)) continue;
      for (std::size_t j = 0; j < x.d; ++j) out(i, j) += v * y(k, j);
    }
  return out;
}

inline Mat dagger(const Mat& x) {
  Mat out(x.d);
  for (std::size_t i = 0; i < x.d; ++i)
    for (std::size_t j = 0; j < x.d; ++j) out(j, i) = std::conj(x(i, j));
  return out;
}

inline Mat plus(const Mat& x, const Mat& y, cplx s = 1.0) {
  Mat out = x;
  for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] += s * y.a[i];
  return out;
}

inline Mat scaled(const Mat& x, cplx s) {
  Mat out = x;
  for (auto& v : out.a) v *= s;
  return out;
}

inline Mat kron(const Mat& x, const Mat& y) {
  Mat out(x.d * y.d);
  for (std::size_t i = 0; i < x.d; ++i)
    for (std::size_t j = 0; j < x.d; ++j)
      for (std::size_t k = 0; k < y.d; ++k)
        for (std::size_t l = 0; l < y.d; ++l) out(i * y.d + k, j * y.d + l) = x(i, j) * y(k, l);
  return out;
}

inline Mat from_tensor(const qtn::ComplexTensor& t) {
  const std::size_t d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(t.size()))));
  Mat m(d);
  for (std::size_t i = 0; i < t.size(); ++i) m.a[i] = t.data()[i];
  return m;
}

inline double max_diff(const Mat& x, const Mat& y) {
  double m = 0;
  for (std::size_t i = 0; i < x.a.size(); ++i) m = std::max(m, std::abs(x.a[i] - y.a[i]));
  return m;
}

inline double max_diff(const std::vector<cplx>& x, std::span<const cplx> y) {
  double m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

// ----------------------------------------------------------- constants

inline Mat I2() { return Mat(2, {1, 0, 0, 1}); }
inline Mat X() { return Mat(2, {0, 1, 1, 0}); }
inline Mat Y() { return Mat(2, {0, cplx(0, -1), cplx(0, 1), 0}); }
inline Mat Z() { return Mat(2, {1, 0, 0, -1}); }
inline Mat H() {
  const double s = 1 / std::sqrt(2.0);
  return Mat(2, {s, s, s, -s});
}
inline Mat pauli(int code) {
  switch (code) {
    case 1: return X();
    case 2: return Y();
    case 3: return Z();
    default: return I2();
  }
}
inline Mat CNOT() { return Mat(4, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0}); }
inline Mat CZ() { return Mat(4, {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, -1}); }

/// exp(A) by scaling and squaring of a truncated Taylor series.
inline Mat expm(const Mat& a) {
  double norm = 0;
  for (const auto& v : a.a) norm = std::max(norm, std::abs(v));
  int squarings = 0;
  while (norm * static_cast<double>(a.d) > 0.5) {
    norm /= 2;
    ++squarings;
  }
  const Mat s = scaled(a, std::pow(0.5, squarings));
  Mat term = Mat::eye(a.d), sum = Mat::eye(a.d);
  for (int k = 1; k <= 30; ++k) {
    term = scaled(mul(term, s), 1.0 / k);
    sum = plus(sum, term);
  }
  for (int i = 0; i < squarings; ++i) sum = mul(sum, sum);
  return sum;
}

/// exp(-i theta P / 2) computed through expm.
inline Mat rot(const Mat& p, double theta) { return expm(scaled(p, cplx(0, -theta / 2))); }

/// Full 2^n operator of `g` acting on `qubits` (qubit 0 most significant),
/// built entry by entry from the definition.
inline Mat embed(const Mat& g, const std::vector<int>& qubits, int n) {
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t k = qubits.size();
  Mat out(dim);
  const auto sub = [&](std::size_t idx) {
    std::size_t s = 0;
    for (std::size_t j = 0; j < k; ++j) s = (s << 1) | ((idx >> (n - 1 - qubits[j])) & 1);
    return s;
  };
  std::size_t mask = 0;
  for (int q : qubits) mask |= std::size_t{1} << (n - 1 - q);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) {
      if ((r & ~mask) != (c & ~mask)) continue;
      out(r, c) = g(sub(r), sub(c));
    }
  return out;
}

/// Pauli string as a full matrix by repeated Kronecker products.
inline Mat pauli_string(const std::vector<int>& codes) {
  Mat m = Mat(1, {1.0});
  for (int c : codes) m = kron(m, pauli(c));
  return m;
}

inline std::vector<cplx> apply(const Mat& m, const std::vector<cplx>& v) {
  std::vector<cplx> out(m.d, 0.0);
  for (std::size_t i = 0; i < m.d; ++i)
    for (std::size_t j = 0; j < m.d; ++j) out[i] += m(i, j) * v[j];
  return out;
}

inline cplx vdot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline std::vector<cplx> basis(int n, std::size_t index = 0) {
  std::vector<cplx> v(std::size_t{1} << n, 0.0);
  v[index] = 1.0;
  return v;
}

/// Gate-by-gate simulator for circuits described as (matrix, qubits) pairs.
struct Sim {
  int n;
  std::vector<cplx> psi;
  explicit Sim(int nq) : n(nq), psi(basis(nq)) {}
  Sim& op(const Mat& g, const std::vector<int>& qubits) {
    psi = oracle::apply(embed(g, qubits, n), psi);
    return *this;
  }
};

/// Naive einsum: tensors with integer labels; result axes follow `out`.
struct LabeledTensor {
  std::vector<std::size_t> shape;
  std::vector<int> labels;
  std::vector<cplx> data;
};

inline std::vector<cplx> einsum(const std::vector<LabeledTensor>& ts, const std::vector<int>& out,
                                const std::map<int, std::size_t>& dims) {
  std::vector<int> all;
  for (const auto& [l, d] : dims) all.push_back(l);
  std::size_t out_size = 1;
  for (int l : out) out_size *= dims.at(l);
  std::vector<cplx> result(out_size, 0.0);
  std::map<int, std::size_t> val;
  std::size_t total = 1;
  for (int l : all) total *= dims.at(l);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (auto it = all.rbegin(); it != all.rend(); ++it) {
      val[*it] = rem % dims.at(*it);
      rem /= dims.at(*it);
    }
    cplx prod = 1.0;
    for (const auto& t : ts) {
      std::size_t idx = 0;
      for (std::size_t k = 0; k < t.labels.size(); ++k) idx = idx * t.shape[k] + val[t.labels[k]];
      prod *= t.data[idx];
    }
    std::size_t o = 0;
    for (int l : out) o = o * dims.at(l) + val[l];
    result[o] += prod;
  }
  return result;
}

inline std::vector<cplx> random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<cplx> v(std::size_t{1} << n);
  double norm = 0;
  for (auto& x : v) {
    x = {nd(rng), nd(rng)};
    norm += std::norm(x);
  }
  for (auto& x : v) x /= std::sqrt(norm);
  return v;
}

}  // namespace oracle
