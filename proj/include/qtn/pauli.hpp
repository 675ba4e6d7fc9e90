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
#include <bit>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "qtn/circuit.hpp"
#include "qtn/quop.hpp"
#include "qtn/statevector.hpp"

namespace qtn {

/// One code per qubit: 0 = I, 1 = X, 2 = Y, 3 = Z.
using PauliStructure = std::vector<int>;

struct PauliTerm {
  PauliStructure structure;
  cplx weight = 1.0;
};

struct WeightedPauliSum {
  int n = 0;
  std::vector<PauliTerm> terms;

  void add(PauliStructure s, cplx w) { terms.push_back({std::move(s), w}); }

  void validate() const {
    if (n < 1) throw InvalidArgument("Pauli sum needs at least one qubit");
    for (std::size_t t = 0; t < terms.size(); ++t) {
      if (static_cast<int>(terms[t].structure.size()) != n)
        throw DimensionError("Pauli term " + std::to_string(t) + " has length " +
                             std::to_string(terms[t].structure.size()) + ", expected " + std::to_string(n));
      for (int code : terms[t].structure)
        if (code < 0 || code > 3)
          throw InvalidArgument("Pauli code " + std::to_string(code) + " out of range in term " + std::to_string(t));
    }
  }
};

inline constexpr int kPauliDenseCap = 12;
inline constexpr int kPauliSparseCap = 24;

namespace detail {

/// Bit masks of one Pauli string: the row r maps to column r ^ flip with
/// value phase0 * (-1)^popcount(r & sign).
struct PauliMasks {
  std::uint64_t flip = 0;
  std::uint64_t sign = 0;
  cplx phase0 = 1.0;
};

inline PauliMasks pauli_masks(const PauliStructure& s) {
  const int n = static_cast<int>(s.size());
  PauliMasks m;
  int ny = 0;
  for (int q = 0; q < n; ++q) {
    const std::uint64_t bit = std::uint64_t{1} << (n - 1 - q);
    switch (s[static_cast<std::size_t>(q)]) {
      case 1: m.flip |= bit; break;
      case 2: m.flip |= bit; m.sign |= bit; ++ny; break;
      case 3: m.sign |= bit; break;
      default: break;
    }
  }
  static constexpr cplx kMinusIPow[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  m.phase0 = kMinusIPow[ny % 4];
  return m;
}

inline cplx pauli_entry(const PauliMasks& m, std::uint64_t row) {
  return (std::popcount(row & m.sign) & 1) ? -m.phase0 : m.phase0;
}

}  // namespace detail

/// Dense matrix of the sum; contributions are accumulated in term order.
inline ComplexTensor sum_to_dense(const WeightedPauliSum& h) {
  h.validate();
  require_dense_capacity(h.n, kPauliDenseCap);
  const std::size_t d = std::size_t{1} << h.n;
  std::vector<cplx> m(d * d, 0.0);
  for (const auto& term : h.terms) {
    const auto masks = detail::pauli_masks(term.structure);
    for (std::uint64_t r = 0; r < d; ++r)
      m[r * d + (r ^ masks.flip)] += term.weight * detail::pauli_entry(masks, r);
  }
  return ComplexTensor({d, d}, std::move(m));
}

/// Coordinate-format sparse matrix, canonically sorted by (row, col).
struct SparseCOO {
  std::vector<std::int64_t> rows;
  std::vector<std::int64_t> cols;
  std::vector<cplx> values;
  std::size_t dim = 0;

  std::size_t nnz() const noexcept { return values.size(); }

  void validate() const {
    if (rows.size() != cols.size() || rows.size() != values.size())
      throw DimensionError("COO arrays differ in length");
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i] < 0 || cols[i] < 0 || static_cast<std::size_t>(rows[i]) >= dim ||
          static_cast<std::size_t>(cols[i]) >= dim)
        throw DimensionError("COO index out of range at entry " + std::to_string(i));
  }

  StateVector matvec(std::span<const cplx> v) const {
    if (v.size() != dim) throw DimensionError("COO matvec: vector length mismatch");
    StateVector out(dim, 0.0);
    for (std::size_t i = 0; i < values.size(); ++i)
      out[static_cast<std::size_t>(rows[i])] += values[i] * v[static_cast<std::size_t>(cols[i])];
    return out;
  }

  SparseCOO adjoint() const {
    std::vector<std::size_t> idx(values.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return std::pair(cols[a], rows[a]) < std::pair(cols[b], rows[b]);
    });
    SparseCOO out;
    out.dim = dim;
    for (std::size_t i : idx) {
      out.rows.push_back(cols[i]);
      out.cols.push_back(rows[i]);
      out.values.push_back(std::conj(values[i]));
    }
    return out;
  }

  ComplexTensor to_dense() const {
    std::vector<cplx> m(dim * dim, 0.0);
    for (std::size_t i = 0; i < values.size(); ++i)
      m[static_cast<std::size_t>(rows[i]) * dim + static_cast<std::size_t>(cols[i])] += values[i];
    return ComplexTensor({dim, dim}, std::move(m));
  }
};

/// Every Pauli string has one nonzero per row, so each row collects at most
/// one entry per term; entries sharing a column are merged in term order and
/// exact zeros are dropped.
inline SparseCOO sum_to_coo(const WeightedPauliSum& h) {
  h.validate();
  require_dense_capacity(h.n, kPauliSparseCap);
  const std::size_t d = std::size_t{1} << h.n;
  std::vector<detail::PauliMasks> masks;
  for (const auto& term : h.terms) masks.push_back(detail::pauli_masks(term.structure));
  SparseCOO out;
  out.dim = d;
  std::vector<std::pair<std::uint64_t, cplx>> row;
  for (std::uint64_t r = 0; r < d; ++r) {
    row.clear();
    for (std::size_t t = 0; t < masks.size(); ++t)
      row.emplace_back(r ^ masks[t].flip, h.terms[t].weight * detail::pauli_entry(masks[t], r));
    std::stable_sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < row.size();) {
      cplx acc = 0.0;
      std::size_t j = i;
      for (; j < row.size() && row[j].first == row[i].first; ++j) acc += row[j].second;
      if (acc != cplx(0.0)) {
        out.rows.push_back(static_cast<std::int64_t>(r));
        out.cols.push_back(static_cast<std::int64_t>(row[i].first));
        out.values.push_back(acc);
      }
      i = j;
    }
  }
  return out;
}

/// psi <- (sum of Pauli strings) psi without building a matrix.
inline StateVector apply_pauli_sum(const WeightedPauliSum& h, std::span<const cplx> psi) {
  h.validate();
  if (psi.size() != (std::size_t{1} << h.n)) throw DimensionError("Pauli sum: state length mismatch");
  StateVector out(psi.size(), 0.0);
  for (const auto& term : h.terms) {
    const auto m = detail::pauli_masks(term.structure);
    for (std::uint64_t r = 0; r < psi.size(); ++r)
      out[r] += term.weight * detail::pauli_entry(m, r) * psi[r ^ m.flip];
  }
  return out;
}

/// H = sum_i J_i X_i X_{i+1} - sum_i h_i Z_i with open boundaries; XX terms
/// first, then Z terms.
inline WeightedPauliSum tfim_hamiltonian(int n, const std::vector<double>& j, const std::vector<double>& h) {
  if (n < 2) throw InvalidArgument("TFIM needs n >= 2");
  if (static_cast<int>(j.size()) != n - 1 || static_cast<int>(h.size()) != n)
    throw DimensionError("TFIM expects n-1 couplings and n fields");
  WeightedPauliSum out{n, {}};
  for (int i = 0; i + 1 < n; ++i) {
    PauliStructure s(static_cast<std::size_t>(n), 0);
    s[static_cast<std::size_t>(i)] = s[static_cast<std::size_t>(i + 1)] = 1;
    out.add(std::move(s), j[static_cast<std::size_t>(i)]);
  }
  for (int i = 0; i < n; ++i) {
    PauliStructure s(static_cast<std::size_t>(n), 0);
    s[static_cast<std::size_t>(i)] = 3;
    out.add(std::move(s), -h[static_cast<std::size_t>(i)]);
  }
  return out;
}

/// Couplings of a sum that has exactly the TFIM shape (real weights on
/// nearest-neighbour XX and single-site Z strings, each at most once).
struct TfimCouplings {
  std::vector<double> j;
  std::vector<double> h;
};

inline std::optional<TfimCouplings> tfim_couplings(const WeightedPauliSum& sum) {
  sum.validate();
  const int n = sum.n;
  if (n < 2) return std::nullopt;
  TfimCouplings out{std::vector<double>(static_cast<std::size_t>(n - 1), 0.0),
                    std::vector<double>(static_cast<std::size_t>(n), 0.0)};
  std::vector<bool> seen_j(out.j.size(), false), seen_h(out.h.size(), false);
  for (const auto& term : sum.terms) {
    if (term.weight.imag() != 0.0) return std::nullopt;
    std::vector<int> sites;
    for (int q = 0; q < n; ++q)
      if (term.structure[static_cast<std::size_t>(q)] != 0) sites.push_back(q);
    const auto code = [&](int q) { return term.structure[static_cast<std::size_t>(q)]; };
    if (sites.size() == 2 && sites[1] == sites[0] + 1 && code(sites[0]) == 1 && code(sites[1]) == 1) {
      const auto i = static_cast<std::size_t>(sites[0]);
      if (seen_j[i]) return std::nullopt;
      seen_j[i] = true;
      out.j[i] = term.weight.real();
    } else if (sites.size() == 1 && code(sites[0]) == 3) {
      const auto i = static_cast<std::size_t>(sites[0]);
      if (seen_h[i]) return std::nullopt;
      seen_h[i] = true;
      out.h[i] = -term.weight.real();
    } else {
      return std::nullopt;
    }
  }
  return out;
}

/// MPO with site tensors (bond_left, out, in, bond_right).
struct MPOOperator {
  std::vector<ComplexTensor> sites;

  int n() const noexcept { return static_cast<int>(sites.size()); }
  QuOperator to_quoperator() const { return QuOperator::from_mpo(sites); }
  ComplexTensor to_dense() const { return to_quoperator().eval_matrix(); }
  std::size_t element_count() const {
    std::size_t total = 0;
    for (const auto& s : sites) total += s.size();
    return total;
  }
};

/// Bond-3 TFIM MPO. Bulk tensor, indexed [left][right]:
///   [[I, 0, 0], [X, 0, 0], [-h Z, J X, I]]
/// with the first site taking row 2 and the last site column 0.
inline MPOOperator tfim_mpo(int n, const std::vector<double>& j, const std::vector<double>& h) {
  if (n < 2) throw InvalidArgument("TFIM MPO needs n >= 2");
  if (static_cast<int>(j.size()) != n - 1 || static_cast<int>(h.size()) != n)
    throw DimensionError("TFIM MPO expects n-1 couplings and n fields");
  const auto block = [&](int k, std::size_t l, std::size_t r) -> ComplexTensor {
    const auto uk = static_cast<std::size_t>(k);
    if (l == 0 && r == 0) return gates::i();
    if (l == 1 && r == 0) return gates::x();
    if (l == 2 && r == 0) return scale(gates::z(), -h[uk]);
    if (l == 2 && r == 1) return k + 1 < n ? scale(gates::x(), j[uk]) : ComplexTensor({2, 2});
    if (l == 2 && r == 2) return gates::i();
    return ComplexTensor({2, 2});
  };
  MPOOperator mpo;
  for (int k = 0; k < n; ++k) {
    const std::vector<std::size_t> ls = k == 0 ? std::vector<std::size_t>{2} : std::vector<std::size_t>{0, 1, 2};
    const std::vector<std::size_t> rs = k + 1 == n ? std::vector<std::size_t>{0} : std::vector<std::size_t>{0, 1, 2};
    std::vector<cplx> data(ls.size() * 4 * rs.size(), 0.0);
    for (std::size_t a = 0; a < ls.size(); ++a)
      for (std::size_t b = 0; b < rs.size(); ++b) {
        const ComplexTensor w = block(k, ls[a], rs[b]);
        for (std::size_t o = 0; o < 2; ++o)
          for (std::size_t i = 0; i < 2; ++i) data[((a * 2 + o) * 2 + i) * rs.size() + b] = w(o, i);
      }
    mpo.sites.emplace_back(Shape{ls.size(), 2, 2, rs.size()}, std::move(data));
  }
  return mpo;
}

/// Any of the supported operator representations.
using Observable = std::variant<WeightedPauliSum, ComplexTensor, SparseCOO, MPOOperator, QuOperator>;

inline std::size_t observable_dim(const Observable& obs) {
  return std::visit(
      [](const auto& o) -> std::size_t {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, WeightedPauliSum>) return std::size_t{1} << o.n;
        else if constexpr (std::is_same_v<T, ComplexTensor>) return o.rank() == 2 ? o.dim(0) : 0;
        else if constexpr (std::is_same_v<T, SparseCOO>) return o.dim;
        else if constexpr (std::is_same_v<T, MPOOperator>) return std::size_t{1} << o.n();
        else return shape_size(o.in_dims());
      },
      obs);
}

/// O psi for an n-site operator network, contracted with the state.
inline StateVector apply_quoperator(const QuOperator& op, std::span<const cplx> psi) {
  const std::size_t k = op.in_edges().size();
  if (psi.size() != shape_size(op.in_dims()) || op.out_edges().size() != k)
    throw DimensionError("operator and state dimensions differ");
  Network net;
  std::vector<EdgeId> wires;
  for (std::size_t d : op.in_dims()) wires.push_back(net.add_edge(d));
  net.add_node(ComplexTensor(Shape(op.in_dims()), std::vector<cplx>(psi.begin(), psi.end())), wires);
  const auto relabel = net.absorb(op.network());
  std::vector<EdgeId> out;
  for (std::size_t q = 0; q < k; ++q) {
    const bool through = op.out_edges()[q] == op.in_edges()[q];
    if (!through) net.merge_edges(relabel.at(op.in_edges()[q]), wires[q]);
    out.push_back(through ? wires[q] : relabel.at(op.out_edges()[q]));
  }
  net.set_dangling(out);
  ContractOptions opts;
  opts.preprocessing = false;
  return to_state(contract_network(net, opts));
}

inline StateVector apply_observable(const Observable& obs, std::span<const cplx> psi) {
  if (observable_dim(obs) != psi.size())
    throw DimensionError("observable dimension " + std::to_string(observable_dim(obs)) +
                         " does not match state length " + std::to_string(psi.size()));
  return std::visit(
      [&](const auto& o) -> StateVector {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, WeightedPauliSum>) {
          return apply_pauli_sum(o, psi);
        } else if constexpr (std::is_same_v<T, ComplexTensor>) {
          const std::size_t d = psi.size();
          StateVector out(d, 0.0);
          const auto m = o.data();
          for (std::size_t r = 0; r < d; ++r) {
            cplx acc = 0.0;
            for (std::size_t c = 0; c < d; ++c) acc += m[r * d + c] * psi[c];
            out[r] = acc;
          }
          return out;
        } else if constexpr (std::is_same_v<T, SparseCOO>) {
          return o.matvec(psi);
        } else if constexpr (std::is_same_v<T, MPOOperator>) {
          return apply_quoperator(o.to_quoperator(), psi);
        } else {
          return apply_quoperator(o, psi);
        }
      },
      obs);
}

/// Hermiticity check; operator networks are densified only up to 12 qubits.
inline bool observable_is_hermitian(const Observable& obs, double tol = 1e-10) {
  return std::visit(
      [&](const auto& o) -> bool {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, WeightedPauliSum>) {
          if (std::all_of(o.terms.begin(), o.terms.end(),
                          [&](const PauliTerm& t) { return std::abs(t.weight.imag()) <= tol; }))
            return true;
          return o.n <= kPauliDenseCap &&
                 max_abs_diff(sum_to_dense(o), adjoint(sum_to_dense(o))) <= tol;
        } else if constexpr (std::is_same_v<T, ComplexTensor>) {
          return is_square_matrix(o) && max_abs_diff(o, adjoint(o)) <= tol;
        } else if constexpr (std::is_same_v<T, SparseCOO>) {
          if (o.dim > (std::size_t{1} << kPauliDenseCap)) {
            const SparseCOO a = o.adjoint();
            if (a.nnz() != o.nnz()) return false;
            for (std::size_t i = 0; i < o.nnz(); ++i)
              if (a.rows[i] != o.rows[i] || a.cols[i] != o.cols[i] || std::abs(a.values[i] - o.values[i]) > tol)
                return false;
            return true;
          }
          const ComplexTensor m = o.to_dense();
          return max_abs_diff(m, adjoint(m)) <= tol;
        } else if constexpr (std::is_same_v<T, MPOOperator>) {
          if (o.n() > kPauliDenseCap) return true;
          const ComplexTensor m = o.to_dense();
          return max_abs_diff(m, adjoint(m)) <= tol;
        } else {
          if (shape_size(o.in_dims()) > (std::size_t{1} << kPauliDenseCap)) return true;
          const ComplexTensor m = o.eval_matrix();
          return max_abs_diff(m, adjoint(m)) <= tol;
        }
      },
      obs);
}

struct OperatorExpectation {
  double value = 0.0;  ///< Re <psi|O|psi>
  double imag = 0.0;   ///< Im <psi|O|psi>, nonzero only for non-Hermitian O
};

inline OperatorExpectation to_expectation(cplx v) { return {v.real(), v.imag()}; }

/// <psi|O|psi> for the output state of `c`. Dense and sparse operators act
/// on the contracted state; MPO and operator networks are contracted as one
/// sandwich network; Pauli sums are evaluated term by term.
inline OperatorExpectation operator_expectation(const Circuit& c, const Observable& obs) {
  const std::size_t dim = std::size_t{1} << c.n();
  if (observable_dim(obs) != dim)
    throw DimensionError("operator dimension " + std::to_string(observable_dim(obs)) +
                         " does not match 2^n = " + std::to_string(dim));
  if (const auto* m = std::get_if<MPOOperator>(&obs)) return to_expectation(c.expectation_quop(m->to_quoperator()));
  if (const auto* q = std::get_if<QuOperator>(&obs)) return to_expectation(c.expectation_quop(*q));
  if (const auto* h = std::get_if<WeightedPauliSum>(&obs)) {
    h->validate();
    cplx total = 0.0;
    for (const auto& term : h->terms) {
      std::vector<int> x, y, z;
      for (int q = 0; q < h->n; ++q) {
        const int code = term.structure[static_cast<std::size_t>(q)];
        if (code == 1) x.push_back(q);
        if (code == 2) y.push_back(q);
        if (code == 3) z.push_back(q);
      }
      total += term.weight * c.expectation_ps(x, y, z);
    }
    return to_expectation(total);
  }
  const StateVector psi = to_state(c.state());
  return to_expectation(inner(psi, apply_observable(obs, psi)));
}

/// Expectation of one Pauli string given by its structure codes.
inline double parameterized_measurement(const Circuit& c, const PauliStructure& structure) {
  if (static_cast<int>(structure.size()) != c.n())
    throw DimensionError("structure length " + std::to_string(structure.size()) + " for " +
                         std::to_string(c.n()) + " qubits");
  std::vector<int> x, y, z;
  for (int q = 0; q < c.n(); ++q) {
    switch (structure[static_cast<std::size_t>(q)]) {
      case 0: break;
      case 1: x.push_back(q); break;
      case 2: y.push_back(q); break;
      case 3: z.push_back(q); break;
      default: throw InvalidArgument("Pauli code " + std::to_string(structure[static_cast<std::size_t>(q)]) + " out of range");
    }
  }
  return c.expectation_ps(x, y, z).real();
}

/// sum_i J_i <X_i X_{i+1}> - sum_i h_i <Z_i>, one expectation per term.
inline double tfim_energy_loop(const Circuit& c, const std::vector<double>& j, const std::vector<double>& h) {
  const int n = c.n();
  if (static_cast<int>(j.size()) != n - 1 || static_cast<int>(h.size()) != n)
    throw DimensionError("TFIM expects n-1 couplings and n fields");
  double e = 0.0;
  for (int i = 0; i + 1 < n; ++i) e += j[static_cast<std::size_t>(i)] * c.expectation_ps({i, i + 1}, {}, {}).real();
  for (int i = 0; i < n; ++i) e -= h[static_cast<std::size_t>(i)] * c.expectation_ps({}, {}, {i}).real();
  return e;
}

}  // namespace qtn
