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

#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "qtn/circuit.hpp"
#include "qtn/pauli.hpp"

namespace qtn {

/// Builds a circuit from trainable parameters. Gates that take `theta[i]`
/// record slot i, which is how derivatives find their parameter.
using Ansatz = std::function<Circuit(const ParamVector&)>;

/// f(theta) = Re <psi(theta)| O |psi(theta)>.
struct EnergyFunction {
  Ansatz ansatz;
  Observable observable;
};

struct GradientResult {
  double value = 0.0;
  std::vector<double> grad;
};

using QFIMatrix = Eigen::MatrixXd;

enum class JacobianMode { forward, reverse };

namespace detail {

/// Rejects ops whose matrix depends on the state (general Kraus selection,
/// mid-circuit measurement) and slots that are out of range or bound to a
/// non-differentiable parameter.
inline void check_differentiable(const Circuit& c, std::size_t num_params) {
  for (std::size_t k = 0; k < c.ops().size(); ++k) {
    const CircuitOp& op = c.ops()[k];
    if (op.kind == OpKind::kraus_general || op.kind == OpKind::cond_measure)
      throw DifferentiationError("op " + std::to_string(k) + " (" + op_kind_name(op.kind) +
                                 ") selects its branch from the state and cannot be differentiated");
    for (const auto& [key, slot] : op.slots) {
      if (key != "theta")
        throw DifferentiationError("op " + std::to_string(k) + " (" + op.name + "): parameter '" + key +
                                   "' is not differentiable");
      if (slot < 0 || static_cast<std::size_t>(slot) >= num_params)
        throw DifferentiationError("op " + std::to_string(k) + " (" + op.name + ") uses slot " +
                                   std::to_string(slot) + " outside " + std::to_string(num_params) +
                                   " parameters");
    }
  }
}

inline int slot_of(const CircuitOp& op) {
  const auto it = op.slots.find("theta");
  return it == op.slots.end() ? -1 : it->second;
}

/// states[k] is the state before op k; states.back() is the output.
inline std::vector<StateVector> forward_states(const Circuit& c) {
  std::vector<StateVector> states;
  states.reserve(c.ops().size() + 1);
  states.push_back(c.initial_dense_state());
  for (const auto& op : c.ops()) {
    StateVector next = states.back();
    c.apply_op_dense(next, op);
    states.push_back(std::move(next));
  }
  return states;
}

inline Circuit build_checked(const Ansatz& ansatz, const std::vector<double>& theta) {
  Circuit c = ansatz(ParamVector(theta));
  check_differentiable(c, theta.size());
  return c;
}

inline double energy_of(const Observable& obs, const StateVector& psi) {
  return inner(psi, apply_observable(obs, psi)).real();
}

inline void require_hermitian(const Observable& obs) {
  if (!observable_is_hermitian(obs)) throw PreconditionError("observable is not Hermitian");
}

inline StateVector apply_observable_adjoint(const Observable& obs, const StateVector& psi) {
  return std::visit(
      [&](const auto& o) -> StateVector {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, WeightedPauliSum>) {
          WeightedPauliSum h = o;
          for (auto& t : h.terms) t.weight = std::conj(t.weight);
          return apply_pauli_sum(h, psi);
        } else if constexpr (std::is_same_v<T, ComplexTensor>) {
          return apply_observable(Observable(adjoint(o)), psi);
        } else if constexpr (std::is_same_v<T, SparseCOO>) {
          return o.adjoint().matvec(psi);
        } else if constexpr (std::is_same_v<T, MPOOperator>) {
          return apply_quoperator(o.to_quoperator().adjoint(), psi);
        } else {
          return apply_quoperator(o.adjoint(), psi);
        }
      },
      obs);
}

}  // namespace detail

inline double evaluate(const EnergyFunction& f, const std::vector<double>& theta) {
  const Circuit c = f.ansatz(ParamVector(theta));
  return detail::energy_of(f.observable, c.simulate());
}

/// Energy and gradient by adjoint differentiation: one forward pass caching
/// the intermediate states, one backward pass carrying lambda = O psi.
inline GradientResult value_and_grad(const EnergyFunction& f, const std::vector<double>& theta) {
  detail::require_hermitian(f.observable);
  const Circuit c = detail::build_checked(f.ansatz, theta);
  const auto states = detail::forward_states(c);
  StateVector lambda = apply_observable(f.observable, states.back());
  GradientResult out{inner(states.back(), lambda).real(), std::vector<double>(theta.size(), 0.0)};
  for (std::size_t k = c.ops().size(); k-- > 0;) {
    const CircuitOp& op = c.ops()[k];
    if (const int slot = detail::slot_of(op); slot >= 0) {
      StateVector d = states[k];
      apply_matrix(d, c.n(), gate_derivative(op), op.qubits);
      out.grad[static_cast<std::size_t>(slot)] += 2.0 * inner(lambda, d).real();
    }
    apply_matrix(lambda, c.n(), adjoint(op.matrix), op.qubits);
  }
  return out;
}

/// Two-term shift rule, applied to every occurrence of a parameter
/// separately so that shared parameters are handled exactly.
inline std::vector<double> grad_parameter_shift(const EnergyFunction& f, const std::vector<double>& theta) {
  const Circuit c = detail::build_checked(f.ansatz, theta);
  std::vector<double> grad(theta.size(), 0.0);
  const auto& ops = c.ops();
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const CircuitOp& op = ops[k];
    const int slot = detail::slot_of(op);
    if (slot < 0) continue;
    if (op.name != "rx" && op.name != "ry" && op.name != "rz")
      throw DifferentiationError("op " + std::to_string(k) + " (" + op.name +
                                 "): parameter shift needs a generator with eigenvalues +-1/2");
    const double t = op.params.at("theta");
    const auto shifted = [&](double delta) {
      StateVector psi = c.initial_dense_state();
      for (std::size_t j = 0; j < ops.size(); ++j) {
        if (j == k) apply_matrix(psi, c.n(), rotation_gate(op.name[1], t + delta), op.qubits);
        else c.apply_op_dense(psi, ops[j]);
      }
      return detail::energy_of(f.observable, psi);
    };
    grad[static_cast<std::size_t>(slot)] +=
        0.5 * (shifted(std::numbers::pi / 2) - shifted(-std::numbers::pi / 2));
  }
  return grad;
}

/// Central differences of an arbitrary scalar function.
inline std::vector<double> finite_difference_grad(const std::function<double(const std::vector<double>&)>& f,
                                                  const std::vector<double>& theta, double h = 1e-4) {
  if (!(h > 0)) throw InvalidArgument("finite difference step must be positive");
  std::vector<double> grad(theta.size());
  std::vector<double> x = theta;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    x[k] = theta[k] + h;
    const double fp = f(x);
    x[k] = theta[k] - h;
    const double fm = f(x);
    x[k] = theta[k];
    grad[k] = (fp - fm) / (2 * h);
  }
  return grad;
}

inline std::vector<double> finite_difference_grad(const EnergyFunction& f, const std::vector<double>& theta,
                                                  double h = 1e-4) {
  return finite_difference_grad([&](const std::vector<double>& x) { return evaluate(f, x); }, theta, h);
}

/// d psi / d theta as a 2^n x p matrix.
inline ComplexTensor jacobian_state(const Ansatz& ansatz, const std::vector<double>& theta,
                                    JacobianMode mode = JacobianMode::forward) {
  const Circuit c = detail::build_checked(ansatz, theta);
  const auto& ops = c.ops();
  const std::size_t p = theta.size();
  const std::size_t dim = std::size_t{1} << c.n();
  std::vector<cplx> jac(dim * p, 0.0);
  if (p == 0) return ComplexTensor::empty({dim, 0});
  if (mode == JacobianMode::forward) {
    for (std::size_t s = 0; s < p; ++s) {
      StateVector psi = c.initial_dense_state();
      StateVector t(dim, 0.0);
      for (const auto& op : ops) {
        c.apply_op_dense(t, op);
        if (detail::slot_of(op) == static_cast<int>(s)) {
          StateVector d = psi;
          apply_matrix(d, c.n(), gate_derivative(op), op.qubits);
          for (std::size_t i = 0; i < dim; ++i) t[i] += d[i];
        }
        c.apply_op_dense(psi, op);
      }
      for (std::size_t i = 0; i < dim; ++i) jac[i * p + s] = t[i];
    }
  } else {
    const auto states = detail::forward_states(c);
    std::vector<std::pair<std::size_t, StateVector>> derivs;
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const int slot = detail::slot_of(ops[k]);
      if (slot < 0) continue;
      StateVector d = states[k];
      apply_matrix(d, c.n(), gate_derivative(ops[k]), ops[k].qubits);
      derivs.emplace_back(k, std::move(d));
    }
    std::vector<ComplexTensor> adjoints;
    for (const auto& op : ops) adjoints.push_back(adjoint(op.matrix));
    for (std::size_t j = 0; j < dim; ++j) {
      StateVector lambda(dim, 0.0);
      lambda[j] = 1.0;
      auto next = derivs.rbegin();
      for (std::size_t k = ops.size(); k-- > 0;) {
        for (; next != derivs.rend() && next->first == k; ++next)
          jac[j * p + static_cast<std::size_t>(detail::slot_of(ops[k]))] += inner(lambda, next->second);
        apply_matrix(lambda, c.n(), adjoints[k], ops[k].qubits);
      }
    }
  }
  return ComplexTensor({dim, p}, std::move(jac));
}

struct JvpResult {
  StateVector state;
  StateVector tangent;
};

/// (psi(theta), J v) in one forward pass.
inline JvpResult jvp(const Ansatz& ansatz, const std::vector<double>& theta, const std::vector<double>& v) {
  if (v.size() != theta.size())
    throw DimensionError("jvp: tangent has " + std::to_string(v.size()) + " entries for " +
                         std::to_string(theta.size()) + " parameters");
  const Circuit c = detail::build_checked(ansatz, theta);
  const std::size_t dim = std::size_t{1} << c.n();
  JvpResult out{c.initial_dense_state(), StateVector(dim, 0.0)};
  for (const auto& op : c.ops()) {
    c.apply_op_dense(out.tangent, op);
    if (const int slot = detail::slot_of(op); slot >= 0 && v[static_cast<std::size_t>(slot)] != 0.0) {
      StateVector d = out.state;
      apply_matrix(d, c.n(), gate_derivative(op), op.qubits);
      const double w = v[static_cast<std::size_t>(slot)];
      for (std::size_t i = 0; i < dim; ++i) out.tangent[i] += w * d[i];
    }
    c.apply_op_dense(out.state, op);
  }
  return out;
}

/// M_ij = Re[<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>], filled from the
/// upper triangle so it is exactly symmetric.
inline QFIMatrix qfi(const Ansatz& ansatz, const std::vector<double>& theta) {
  const std::size_t p = theta.size();
  QFIMatrix m = QFIMatrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  if (p == 0) return m;
  const ComplexTensor jac = jacobian_state(ansatz, theta, JacobianMode::forward);
  const StateVector psi = ansatz(ParamVector(theta)).simulate();
  const std::size_t dim = psi.size();
  std::vector<StateVector> cols(p, StateVector(dim));
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t s = 0; s < p; ++s) cols[s][i] = jac(i, s);
  std::vector<cplx> overlap(p);
  for (std::size_t s = 0; s < p; ++s) overlap[s] = inner(psi, cols[s]);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a; b < p; ++b) {
      const double v = (inner(cols[a], cols[b]) - std::conj(overlap[a]) * overlap[b]).real();
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
      m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
    }
  return m;
}

/// Solves (M + regularization I) x = grad with an LDL^T factorization.
inline std::vector<double> natural_gradient_solve(const QFIMatrix& m, const std::vector<double>& grad,
                                                  double regularization = 1e-6) {
  if (regularization < 0) throw InvalidArgument("regularization must be non-negative");
  if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != grad.size())
    throw DimensionError("natural_gradient_solve: matrix and gradient sizes differ");
  if (grad.empty()) return {};
  const Eigen::MatrixXd a = m + regularization * Eigen::MatrixXd::Identity(m.rows(), m.cols());
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14)
    throw PreconditionError("natural_gradient_solve: matrix is singular after regularization");
  const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(grad.data(), static_cast<Eigen::Index>(grad.size()));
  const Eigen::VectorXd x = ldlt.solve(g);
  return {x.data(), x.data() + x.size()};
}

/// Central differences of the adjoint gradient, symmetrized.
inline Eigen::MatrixXd hessian(const EnergyFunction& f, const std::vector<double>& theta, double step = 1e-4) {
  const std::size_t p = theta.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  std::vector<double> x = theta;
  for (std::size_t k = 0; k < p; ++k) {
    x[k] = theta[k] + step;
    const auto gp = value_and_grad(f, x).grad;
    x[k] = theta[k] - step;
    const auto gm = value_and_grad(f, x).grad;
    x[k] = theta[k];
    for (std::size_t j = 0; j < p; ++j)
      h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = (gp[j] - gm[j]) / (2 * step);
  }
  return 0.5 * (h + h.transpose());
}

/// <psi|H|d_k psi> with psi held constant on the left.
inline std::vector<cplx> braket_h_dpsi(const Ansatz& ansatz, const Observable& h, const std::vector<double>& theta) {
  const std::size_t p = theta.size();
  if (p == 0) return {};
  const StateVector psi = ansatz(ParamVector(theta)).simulate();
  if (observable_dim(h) != psi.size()) throw DimensionError("braket_h_dpsi: operator dimension mismatch");
  const StateVector left = detail::apply_observable_adjoint(h, psi);
  const ComplexTensor jac = jacobian_state(ansatz, theta, JacobianMode::forward);
  std::vector<cplx> out(p, 0.0);
  for (std::size_t i = 0; i < psi.size(); ++i)
    for (std::size_t s = 0; s < p; ++s) out[s] += std::conj(left[i]) * jac(i, s);
  return out;
}

}  // namespace qtn
