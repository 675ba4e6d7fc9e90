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

#include <cstddef>
#include <span>
#include <vector>

#include "qtn/tensor.hpp"

namespace qtn {

/// Dense amplitude vector; qubit 0 is the most significant bit.
using StateVector = std::vector<cplx>;

/// Largest qubit count for which dense states are materialized.
inline constexpr int kDenseStateCap = 26;

inline void require_dense_capacity(int n, int cap = kDenseStateCap) {
  if (n > cap)
    throw CapacityError("dense representation of " + std::to_string(n) +
                        " qubits exceeds the cap of " + std::to_string(cap));
}

inline StateVector zero_state(int n) {
  require_dense_capacity(n);
  StateVector v(std::size_t{1} << n, 0.0);
  v[0] = 1.0;
  return v;
}

/// psi <- M psi where M (2^k x 2^k) acts on `qubits` (first listed qubit is
/// the most significant bit of the local index).
inline void apply_matrix(StateVector& psi, int n, const ComplexTensor& m,
                         std::span<const int> qubits) {
  const std::size_t k = qubits.size();
  const std::size_t local = std::size_t{1} << k;
  if (m.rank() != 2 || m.dim(0) != local || m.dim(1) != local)
    throw DimensionError("apply_matrix: matrix shape " + shape_string(m.shape()) + " for " +
                         std::to_string(k) + " qubits");
  std::vector<std::size_t> bit(k);
  std::size_t mask = 0;
  for (std::size_t j = 0; j < k; ++j) {
    bit[j] = std::size_t{1} << (n - 1 - qubits[j]);
    mask |= bit[j];
  }
  std::vector<std::size_t> offset(local, 0);
  for (std::size_t l = 0; l < local; ++l)
    for (std::size_t j = 0; j < k; ++j)
      if (l & (std::size_t{1} << (k - 1 - j))) offset[l] |= bit[j];
  std::vector<cplx> in(local), out(local);
  const auto md = m.data();
  for (std::size_t base = 0; base < psi.size(); ++base) {
    if (base & mask) continue;
    for (std::size_t l = 0; l < local; ++l) in[l] = psi[base | offset[l]];
    for (std::size_t r = 0; r < local; ++r) {
      cplx acc = 0.0;
      for (std::size_t c = 0; c < local; ++c) acc += md[r * local + c] * in[c];
      out[r] = acc;
    }
    for (std::size_t l = 0; l < local; ++l) psi[base | offset[l]] = out[l];
  }
}

inline cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw DimensionError("inner: length mismatch");
  cplx acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

inline double norm_squared(std::span<const cplx> a) {
  double acc = 0.0;
  for (const cplx& v : a) acc += std::norm(v);
  return acc;
}

/// Probability weight of `qubit` reading 1 (unnormalized).
inline double weight_of_one(std::span<const cplx> psi, int n, int qubit) {
  const std::size_t bit = std::size_t{1} << (n - 1 - qubit);
  double w = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i)
    if (i & bit) w += std::norm(psi[i]);
  return w;
}

inline ComplexTensor to_tensor(const StateVector& v) { return ComplexTensor::vector(v); }

inline StateVector to_state(const ComplexTensor& t) {
  return StateVector(t.data().begin(), t.data().end());
}

}  // namespace qtn
