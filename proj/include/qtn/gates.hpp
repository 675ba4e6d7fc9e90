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

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qtn/quop.hpp"
#include "qtn/tensor.hpp"

namespace qtn {
namespace gates {

inline ComplexTensor i() { return ComplexTensor::matrix({{1, 0}, {0, 1}}); }
inline ComplexTensor x() { return ComplexTensor::matrix({{0, 1}, {1, 0}}); }
inline ComplexTensor y() { return ComplexTensor::matrix({{0, cplx(0, -1)}, {cplx(0, 1), 0}}); }
inline ComplexTensor z() { return ComplexTensor::matrix({{1, 0}, {0, -1}}); }
inline ComplexTensor h() {
  const double r = 1.0 / std::numbers::sqrt2;
  return ComplexTensor::matrix({{r, r}, {r, -r}});
}
inline ComplexTensor s() { return ComplexTensor::matrix({{1, 0}, {0, cplx(0, 1)}}); }
inline ComplexTensor t() {
  return ComplexTensor::matrix({{1, 0}, {0, std::polar(1.0, std::numbers::pi / 4)}});
}
inline ComplexTensor cnot() {
  return ComplexTensor::matrix({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}});
}
inline ComplexTensor cz() {
  return ComplexTensor::matrix({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, -1}});
}
inline ComplexTensor swap() {
  return ComplexTensor::matrix({{1, 0, 0, 0}, {0, 0, 1, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}});
}
inline ComplexTensor xx() { return kron(x(), x()); }
inline ComplexTensor yy() { return kron(y(), y()); }
inline ComplexTensor zz() { return kron(z(), z()); }

/// Pauli matrix by code: 0=I, 1=X, 2=Y, 3=Z.
inline ComplexTensor pauli(int code) {
  switch (code) {
    case 0: return i();
    case 1: return x();
    case 2: return y();
    case 3: return z();
    default: throw InvalidArgument("pauli code must be in {0,1,2,3}, got " + std::to_string(code));
  }
}

}  // namespace gates

/// Registry entry for a named gate.
struct GateInfo {
  std::string_view name;
  int arity;
  bool parameterized;
};

inline constexpr GateInfo kGateRegistry[] = {
    {"i", 1, false},   {"x", 1, false},     {"y", 1, false},    {"z", 1, false},
    {"h", 1, false},   {"s", 1, false},     {"t", 1, false},    {"cnot", 2, false},
    {"cz", 2, false},  {"swap", 2, false},  {"rx", 1, true},    {"ry", 1, true},
    {"rz", 1, true},   {"exp1", -1, true},  {"exp", -1, true},  {"unitary", -1, false},
    {"multicontrol", -1, false},
};

inline std::optional<GateInfo> find_gate(std::string_view name) {
  for (const auto& g : kGateRegistry)
    if (g.name == name) return g;
  return std::nullopt;
}

/// Matrix of a non-parameterized named gate.
inline ComplexTensor standard_gate(std::string_view name) {
  if (name == "i") return gates::i();
  if (name == "x") return gates::x();
  if (name == "y") return gates::y();
  if (name == "z") return gates::z();
  if (name == "h") return gates::h();
  if (name == "s") return gates::s();
  if (name == "t") return gates::t();
  if (name == "cnot") return gates::cnot();
  if (name == "cz") return gates::cz();
  if (name == "swap") return gates::swap();
  throw InvalidArgument("unknown gate '" + std::string(name) + "'");
}

inline ComplexTensor axis_pauli(char axis) {
  switch (axis) {
    case 'x': return gates::x();
    case 'y': return gates::y();
    case 'z': return gates::z();
    default: throw InvalidArgument(std::string("rotation axis must be x, y or z, got '") + axis + "'");
  }
}

/// R_a(theta) = exp(-i theta sigma_a / 2).
inline ComplexTensor rotation_gate(char axis, double theta) {
  const ComplexTensor p = axis_pauli(axis);
  return add(scale(gates::i(), std::cos(theta / 2)), p, cplx(0.0, -std::sin(theta / 2)));
}

/// d/dtheta R_a(theta) = (-i/2) sigma_a R_a(theta).
inline ComplexTensor rotation_derivative(char axis, double theta) {
  return scale(matmul(axis_pauli(axis), rotation_gate(axis, theta)), cplx(0.0, -0.5));
}

inline void require_involution(const ComplexTensor& g) {
  if (!is_square_matrix(g)) throw DimensionError("exp1: generator must be a square matrix");
  const double defect = max_abs_diff(matmul(g, g), ComplexTensor::identity(g.dim(0)));
  if (defect > 1e-8)
    throw PreconditionError("exp1: generator does not satisfy G^2 = I (defect " +
                            std::to_string(defect) + "); use exp_gate instead");
}

/// e^{i theta G} = cos(theta) I + i sin(theta) G for G^2 = I.
inline ComplexTensor exp1_gate(double theta, const ComplexTensor& g) {
  require_involution(g);
  return add(scale(ComplexTensor::identity(g.dim(0)), std::cos(theta)), g,
             cplx(0.0, std::sin(theta)));
}

/// d/dtheta e^{i theta G} = -sin(theta) I + i cos(theta) G for G^2 = I.
inline ComplexTensor exp1_derivative(double theta, const ComplexTensor& g) {
  return add(scale(ComplexTensor::identity(g.dim(0)), -std::sin(theta)), g,
             cplx(0.0, std::cos(theta)));
}

/// e^{i theta G} through an eigendecomposition of G.
inline ComplexTensor exp_gate(double theta, const ComplexTensor& g) {
  if (!is_square_matrix(g)) throw DimensionError("exp_gate: generator must be a square matrix");
  const Eigen::MatrixXcd m = to_eigen(g);
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-12) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    const Eigen::VectorXcd phase =
        (cplx(0.0, theta) * es.eigenvalues().cast<cplx>()).array().exp().matrix();
    return from_eigen(es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint());
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
  if (es.info() != Eigen::Success) throw PreconditionError("exp_gate: eigendecomposition failed");
  const Eigen::MatrixXcd v = es.eigenvectors();
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(v);
  if (!lu.isInvertible()) throw PreconditionError("exp_gate: generator is not diagonalizable");
  const Eigen::VectorXcd phase = (cplx(0.0, theta) * es.eigenvalues()).array().exp().matrix();
  return from_eigen(v * phase.asDiagonal() * lu.inverse());
}

/// d/dtheta e^{i theta G} = i G e^{i theta G}.
inline ComplexTensor exp_derivative(double theta, const ComplexTensor& g) {
  return scale(matmul(g, exp_gate(theta, g)), cplx(0.0, 1.0));
}

/// Multi-controlled gate as a bond-2 MPO. Sites follow the control order with
/// the target last; the target acts iff control k reads `ctrl_states[k]` for
/// every k. Bond state 0 means "all controls matched so far".
inline QuOperator multicontrol_mpo(const std::vector<int>& ctrl_states, const ComplexTensor& target) {
  if (!is_square_matrix(target) || std::popcount(target.dim(0)) != 1 || target.dim(0) < 2)
    throw DimensionError("multicontrol: target must be a 2^k x 2^k matrix");
  for (int c : ctrl_states)
    if (c != 0 && c != 1) throw InvalidArgument("multicontrol: control states must be 0 or 1");
  const std::size_t tdim = target.dim(0);
  const int k = std::countr_zero(tdim);
  if (ctrl_states.empty())
    return QuOperator::from_matrix(target, std::vector<std::size_t>(static_cast<std::size_t>(k), 2),
                                   std::vector<std::size_t>(static_cast<std::size_t>(k), 2));

  Network net;
  std::vector<EdgeId> out, in;
  EdgeId bond = -1;
  const std::size_t nc = ctrl_states.size();
  for (std::size_t c = 0; c < nc; ++c) {
    const EdgeId o = net.add_edge(2), i = net.add_edge(2), r = net.add_edge(2);
    out.push_back(o);
    in.push_back(i);
    const std::size_t want = static_cast<std::size_t>(ctrl_states[c]);
    if (c == 0) {
      std::vector<cplx> d(8, 0.0);  // (out, in, right)
      for (std::size_t s = 0; s < 2; ++s) d[(s * 2 + s) * 2 + (s == want ? 0 : 1)] = 1.0;
      net.add_node(ComplexTensor({2, 2, 2}, std::move(d)), {o, i, r});
    } else {
      std::vector<cplx> d(16, 0.0);  // (left, out, in, right)
      for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t s = 0; s < 2; ++s) {
          const std::size_t nb = (b == 0 && s == want) ? 0 : 1;
          d[((b * 2 + s) * 2 + s) * 2 + nb] = 1.0;
        }
      net.add_node(ComplexTensor({2, 2, 2, 2}, std::move(d)), {bond, o, i, r});
    }
    bond = r;
  }
  // Target site: (left, outs..., ins...).
  Shape shape{2};
  std::vector<EdgeId> edges{bond};
  std::vector<EdgeId> touts, tins;
  for (int q = 0; q < k; ++q) touts.push_back(net.add_edge(2));
  for (int q = 0; q < k; ++q) tins.push_back(net.add_edge(2));
  for (int q = 0; q < 2 * k; ++q) shape.push_back(2);
  edges.insert(edges.end(), touts.begin(), touts.end());
  edges.insert(edges.end(), tins.begin(), tins.end());
  std::vector<cplx> d(2 * tdim * tdim);
  for (std::size_t r = 0; r < tdim; ++r)
    for (std::size_t c = 0; c < tdim; ++c) {
      d[r * tdim + c] = target(r, c);
      d[tdim * tdim + r * tdim + c] = r == c ? 1.0 : 0.0;
    }
  net.add_node(ComplexTensor(shape, std::move(d)), edges);
  out.insert(out.end(), touts.begin(), touts.end());
  in.insert(in.end(), tins.begin(), tins.end());
  return QuOperator(std::move(net), std::move(out), std::move(in));
}

}  // namespace qtn
