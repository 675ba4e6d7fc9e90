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

#include <string>
#include <vector>

#include "qtn/circuit.hpp"
#include "qtn/kraus.hpp"
#include "qtn/statevector.hpp"

namespace qtn {

inline constexpr int kDensityMatrixCap = 13;

/// Exact density-matrix simulator. rho is stored as a 2n-qubit vector with
/// row qubits first, so U rho U^dagger is U on the rows and conj(U) on the
/// columns.
class DMCircuit {
 public:
  explicit DMCircuit(int n) : n_(n) {
    if (n < 1) throw InvalidArgument("DMCircuit needs at least one qubit");
    require_dense_capacity(n, kDensityMatrixCap);
    rho_.assign(std::size_t{1} << (2 * n), 0.0);
    rho_[0] = 1.0;
  }

  static DMCircuit from_state(int n, const ComplexTensor& psi) {
    DMCircuit c(n);
    const std::size_t d = std::size_t{1} << n;
    if (psi.size() != d) throw DimensionError("DMCircuit: state length must be 2^n");
    const auto v = psi.data();
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t col = 0; col < d; ++col) c.rho_[r * d + col] = v[r] * std::conj(v[col]);
    return c;
  }

  /// Accepts a Hermitian, unit-trace, positive semidefinite 2^n x 2^n matrix.
  static DMCircuit from_density(int n, const ComplexTensor& rho, double tol = 1e-10) {
    DMCircuit c(n);
    const std::size_t d = std::size_t{1} << n;
    if (rho.rank() != 2 || rho.dim(0) != d || rho.dim(1) != d)
      throw DimensionError("DMCircuit: density matrix must be 2^n x 2^n");
    if (max_abs_diff(rho, adjoint(rho)) > tol) throw PreconditionError("density matrix is not Hermitian");
    cplx tr = 0.0;
    for (std::size_t i = 0; i < d; ++i) tr += rho(i, i);
    if (std::abs(tr - 1.0) > tol) throw PreconditionError("density matrix trace is not 1");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_eigen(rho));
    if (es.eigenvalues().minCoeff() < -tol) throw PreconditionError("density matrix is not positive semidefinite");
    c.rho_.assign(rho.data().begin(), rho.data().end());
    return c;
  }

  int n() const noexcept { return n_; }

  DMCircuit& apply(const ComplexTensor& u, const std::vector<int>& qubits) {
    check_qubits(qubits);
    apply_matrix(rho_, 2 * n_, u, qubits);
    apply_matrix(rho_, 2 * n_, conj(u), shifted(qubits));
    return *this;
  }

  DMCircuit& gate(const std::string& name, const std::vector<int>& qubits,
                  const std::map<std::string, double>& params = {},
                  const std::optional<ComplexTensor>& generator = std::nullopt) {
    return apply(named_gate_matrix(name, params, generator), qubits);
  }

  DMCircuit& h(int q) { return gate("h", {q}); }
  DMCircuit& x(int q) { return gate("x", {q}); }
  DMCircuit& cnot(int c, int t) { return gate("cnot", {c, t}); }
  DMCircuit& rx(int q, double theta) { return gate("rx", {q}, {{"theta", theta}}); }
  DMCircuit& ry(int q, double theta) { return gate("ry", {q}, {{"theta", theta}}); }
  DMCircuit& rz(int q, double theta) { return gate("rz", {q}, {{"theta", theta}}); }

  /// rho <- sum_i K_i rho K_i^dagger.
  DMCircuit& apply_kraus(const KrausChannel& channel, const std::vector<int>& qubits) {
    channel.validate(1e-8);
    check_qubits(qubits);
    if (channel.arity() != static_cast<int>(qubits.size()))
      throw DimensionError("Kraus channel arity does not match the qubit list");
    const std::vector<int> cols = shifted(qubits);
    StateVector acc(rho_.size(), 0.0);
    for (const auto& k : channel.operators) {
      StateVector term = rho_;
      apply_matrix(term, 2 * n_, k, qubits);
      apply_matrix(term, 2 * n_, conj(k), cols);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += term[i];
    }
    rho_ = std::move(acc);
    return *this;
  }

  ComplexTensor state() const {
    const std::size_t d = std::size_t{1} << n_;
    return ComplexTensor({d, d}, std::vector<cplx>(rho_.begin(), rho_.end()));
  }

  double trace() const {
    const std::size_t d = std::size_t{1} << n_;
    double t = 0.0;
    for (std::size_t i = 0; i < d; ++i) t += rho_[i * d + i].real();
    return t;
  }

  /// tr(rho O) for a sum of local terms.
  cplx expectation(const std::vector<ExpectationTerm>& terms) const {
    if (terms.empty()) throw InvalidArgument("expectation needs at least one term");
    StateVector work = rho_;
    for (const auto& t : terms) {
      check_qubits(t.qubits);
      apply_matrix(work, 2 * n_, t.matrix, t.qubits);
    }
    const std::size_t d = std::size_t{1} << n_;
    cplx tr = 0.0;
    for (std::size_t i = 0; i < d; ++i) tr += work[i * d + i];
    return tr;
  }

  cplx expectation_ps(const std::vector<int>& x, const std::vector<int>& y, const std::vector<int>& z) const {
    std::vector<ExpectationTerm> terms;
    for (int q : x) terms.push_back({gates::x(), {q}});
    for (int q : y) terms.push_back({gates::y(), {q}});
    for (int q : z) terms.push_back({gates::z(), {q}});
    return expectation(terms);
  }

 private:
  std::vector<int> shifted(const std::vector<int>& qubits) const {
    std::vector<int> out = qubits;
    for (int& q : out) q += n_;
    return out;
  }

  void check_qubits(const std::vector<int>& qubits) const {
    if (qubits.empty()) throw InvalidArgument("empty qubit list");
    for (std::size_t i = 0; i < qubits.size(); ++i) {
      if (qubits[i] < 0 || qubits[i] >= n_)
        throw InvalidArgument("qubit " + std::to_string(qubits[i]) + " out of range");
      for (std::size_t j = 0; j < i; ++j)
        if (qubits[j] == qubits[i]) throw InvalidArgument("repeated qubit " + std::to_string(qubits[i]));
    }
  }

  int n_;
  StateVector rho_;
};

inline DMCircuit& dm_apply_gate(DMCircuit& c, const ComplexTensor& u, const std::vector<int>& qubits) {
  return c.apply(u, qubits);
}

inline DMCircuit& dm_apply_kraus(DMCircuit& c, const KrausChannel& channel, const std::vector<int>& qubits) {
  return c.apply_kraus(channel, qubits);
}

inline cplx dm_expectation(const DMCircuit& c, const std::vector<ExpectationTerm>& terms) {
  return c.expectation(terms);
}

inline ComplexTensor dm_state(const DMCircuit& c) { return c.state(); }

inline int mc_general_kraus(Circuit& c, const KrausChannel& channel, std::vector<int> qubits, double status) {
  return c.mc_general_kraus(channel, std::move(qubits), status);
}

inline int mc_unitary_kraus(Circuit& c, const std::vector<ComplexTensor>& operators,
                            const std::vector<double>& probs, std::vector<int> qubits, double status) {
  return c.mc_unitary_kraus(operators, probs, std::move(qubits), status);
}

}  // namespace qtn
