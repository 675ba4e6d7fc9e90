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
#include <cstddef>
#include <set>
#include <utility>
#include <vector>

#include "qtn/network.hpp"
#include "qtn/tensor.hpp"

namespace qtn {

/// Largest element count eval() will materialize (2^26).
inline constexpr std::size_t kDenseEvalCap = std::size_t{1} << 26;

/// A tensor-network fragment that behaves as a matrix.
///
/// `out_edges` index rows and `in_edges` index columns. An edge may appear in
/// both lists without touching any node, which wires the row index straight
/// to the column index (an identity factor). All algebra is lazy: results
/// share node storage with their operands and nothing is contracted until
/// eval().
class QuOperator {
 public:
  QuOperator() = default;

  QuOperator(Network net, std::vector<EdgeId> out_edges, std::vector<EdgeId> in_edges)
      : net_(std::move(net)), out_(std::move(out_edges)), in_(std::move(in_edges)) {
    check();
  }

  /// Identity on the given per-site dimensions, built from pass-through edges only.
  static QuOperator identity(const std::vector<std::size_t>& dims) {
    Network net;
    std::vector<EdgeId> edges;
    for (std::size_t d : dims) edges.push_back(net.add_edge(d));
    return QuOperator(std::move(net), edges, edges);
  }

  /// One node per site; site k has axes (out, in) for the dense matrix `m`
  /// when it acts on a single site of dimension dim(0).
  static QuOperator from_matrix(const ComplexTensor& m, const std::vector<std::size_t>& out_dims,
                                const std::vector<std::size_t>& in_dims) {
    if (m.rank() != 2) throw DimensionError("from_matrix: not a matrix");
    if (shape_size(out_dims) != m.dim(0) || shape_size(in_dims) != m.dim(1))
      throw DimensionError("from_matrix: site dimensions do not match the matrix shape");
    Network net;
    std::vector<EdgeId> out, in, edges;
    for (std::size_t d : out_dims) out.push_back(net.add_edge(d));
    for (std::size_t d : in_dims) in.push_back(net.add_edge(d));
    Shape shape(out_dims);
    shape.insert(shape.end(), in_dims.begin(), in_dims.end());
    edges = out;
    edges.insert(edges.end(), in.begin(), in.end());
    net.add_node(reshape(m, shape), edges);
    return QuOperator(std::move(net), out, in);
  }

  /// Matrix product operator from site tensors of shape (bond_left, out, in,
  /// bond_right); boundary bonds must be 1.
  static QuOperator from_mpo(const std::vector<ComplexTensor>& sites) {
    if (sites.empty()) throw InvalidArgument("from_mpo: no sites");
    Network net;
    std::vector<EdgeId> out, in;
    EdgeId left = -1;
    for (std::size_t k = 0; k < sites.size(); ++k) {
      const ComplexTensor& w = sites[k];
      if (w.rank() != 4) throw DimensionError("from_mpo: site tensors must have rank 4");
      if (k == 0 && w.dim(0) != 1) throw DimensionError("from_mpo: left boundary bond must be 1");
      if (k + 1 == sites.size() && w.dim(3) != 1)
        throw DimensionError("from_mpo: right boundary bond must be 1");
      if (k > 0 && w.dim(0) != sites[k - 1].dim(3))
        throw DimensionError("from_mpo: bond dimension mismatch at site " + std::to_string(k));
      const EdgeId o = net.add_edge(w.dim(1));
      const EdgeId i = net.add_edge(w.dim(2));
      const EdgeId l = k == 0 ? net.add_edge(1) : left;
      const EdgeId r = net.add_edge(w.dim(3));
      out.push_back(o);
      in.push_back(i);
      net.add_node(w, {l, o, i, r});
      left = r;
    }
    // Close the dimension-1 boundary bonds with unit vectors.
    const auto boundary = [&](EdgeId e) { net.add_node(ComplexTensor::vector({1.0}), {e}); };
    boundary(net.nodes().begin()->second.edges[0]);
    boundary(left);
    return QuOperator(std::move(net), out, in);
  }

  const Network& network() const noexcept { return net_; }
  const std::vector<EdgeId>& out_edges() const noexcept { return out_; }
  const std::vector<EdgeId>& in_edges() const noexcept { return in_; }

  std::vector<std::size_t> out_dims() const { return dims_of(out_); }
  std::vector<std::size_t> in_dims() const { return dims_of(in_); }
  std::size_t node_count() const noexcept { return net_.node_count(); }
  std::size_t element_count() const { return net_.element_count(); }

  /// Contracts the fragment; axes are out edges followed by in edges.
  ComplexTensor eval() const {
    const std::size_t total = shape_size(out_dims()) * shape_size(in_dims());
    if (total > kDenseEvalCap)
      throw CapacityError("eval: dense result of " + std::to_string(total) +
                          " elements exceeds the cap");
    return contract_network(materialize(), ContractOptions{.preprocessing = false});
  }

  /// eval() reshaped to (prod out dims) x (prod in dims).
  ComplexTensor eval_matrix() const {
    return reshape(eval(), {shape_size(out_dims()), shape_size(in_dims())});
  }

  /// Standalone network whose dangling list is out ++ in; pass-through edges
  /// get an explicit identity node.
  Network materialize() const {
    Network net = net_;
    std::vector<EdgeId> in = in_;
    for (EdgeId& e : in) {
      if (std::find(out_.begin(), out_.end(), e) == out_.end()) continue;
      const std::size_t d = net.edge_dim(e);
      const EdgeId fresh = net.add_edge(d);
      net.add_node(ComplexTensor::identity(d), {e, fresh});
      e = fresh;
    }
    std::vector<EdgeId> dangling = out_;
    dangling.insert(dangling.end(), in.begin(), in.end());
    net.set_dangling(std::move(dangling));
    if (net.node_count() == 0) net.add_node(ComplexTensor::scalar(1.0), {});
    return net;
  }

  /// Conjugate transpose.
  QuOperator adjoint() const {
    Network net;
    const auto relabel = net.absorb(net_, /*conjugate=*/true);
    return QuOperator(std::move(net), map_edges(in_, relabel), map_edges(out_, relabel));
  }

  QuOperator scaled(cplx s) const {
    QuOperator r = *this;
    r.net_.add_node(ComplexTensor::scalar(s), {});
    return r;
  }

  /// Kronecker product: out = a.out ++ b.out, in = a.in ++ b.in.
  friend QuOperator tensor_product(const QuOperator& a, const QuOperator& b) {
    Network net;
    const auto ra = net.absorb(a.net_);
    const auto rb = net.absorb(b.net_);
    auto out = map_edges(a.out_, ra);
    auto in = map_edges(a.in_, ra);
    const auto bo = map_edges(b.out_, rb);
    const auto bi = map_edges(b.in_, rb);
    out.insert(out.end(), bo.begin(), bo.end());
    in.insert(in.end(), bi.begin(), bi.end());
    return QuOperator(std::move(net), std::move(out), std::move(in));
  }

  /// a @ b; a's in edges are joined with b's out edges.
  friend QuOperator compose(const QuOperator& a, const QuOperator& b) {
    if (a.in_dims() != b.out_dims())
      throw DimensionError("matmul: inner dimensions do not match");
    Network net;
    const auto ra = net.absorb(a.net_);
    const auto rb = net.absorb(b.net_);
    auto out = map_edges(a.out_, ra);
    auto mid_a = map_edges(a.in_, ra);
    auto mid_b = map_edges(b.out_, rb);
    auto in = map_edges(b.in_, rb);
    for (std::size_t k = 0; k < mid_a.size(); ++k) {
      const EdgeId from = mid_b[k];
      const EdgeId to = mid_a[k];
      net.merge_edges(from, to);
      std::replace(in.begin(), in.end(), from, to);
      std::replace(mid_b.begin(), mid_b.end(), from, to);
    }
    return QuOperator(std::move(net), std::move(out), std::move(in));
  }

  /// Traces out the listed sites (positions into out/in).
  QuOperator partial_trace(const std::vector<std::size_t>& sites) const {
    std::set<std::size_t> traced(sites.begin(), sites.end());
    for (std::size_t s : traced)
      if (s >= out_.size() || s >= in_.size())
        throw InvalidArgument("partial_trace: site " + std::to_string(s) + " out of range");
    if (out_dims() != in_dims()) throw DimensionError("partial_trace: operator is not square");
    Network net = net_;
    std::vector<EdgeId> out, in = in_;
    cplx factor = 1.0;
    for (std::size_t k = 0; k < out_.size(); ++k) {
      if (!traced.count(k)) {
        out.push_back(out_[k]);
        continue;
      }
      const EdgeId o = out_[k];
      const EdgeId i = in_[k];
      if (o == i) {
        factor *= static_cast<double>(net.edge_dim(o));
        net.merge_edges(o, o);
      } else {
        net.merge_edges(i, o);
        std::replace(out.begin(), out.end(), i, o);
        std::replace(in.begin(), in.end(), i, o);
      }
    }
    std::vector<EdgeId> kept_in;
    for (std::size_t k = 0; k < in.size(); ++k)
      if (!traced.count(k)) kept_in.push_back(in[k]);
    if (factor != cplx(1.0)) net.add_node(ComplexTensor::scalar(factor), {});
    return QuOperator(std::move(net), std::move(out), std::move(kept_in));
  }

 protected:
  static std::vector<EdgeId> map_edges(const std::vector<EdgeId>& edges,
                                       const std::map<EdgeId, EdgeId>& relabel) {
    std::vector<EdgeId> out;
    out.reserve(edges.size());
    for (EdgeId e : edges) out.push_back(relabel.at(e));
    return out;
  }

  std::vector<std::size_t> dims_of(const std::vector<EdgeId>& edges) const {
    std::vector<std::size_t> d;
    for (EdgeId e : edges) d.push_back(net_.edge_dim(e));
    return d;
  }

  void check() const {
    const auto counts = net_.endpoint_counts();
    std::set<EdgeId> seen_out(out_.begin(), out_.end()), seen_in(in_.begin(), in_.end());
    if (seen_out.size() != out_.size() || seen_in.size() != in_.size())
      throw DimensionError("QuOperator: repeated dangling edge");
    for (const auto& [e, c] : counts) {
      const bool o = seen_out.count(e) > 0;
      const bool i = seen_in.count(e) > 0;
      if (o && i) {
        if (c != 0) throw DimensionError("QuOperator: pass-through edge touches a node");
      } else if (o || i) {
        if (c != 1) throw DimensionError("QuOperator: dangling edge must have one endpoint");
      } else if (c == 1) {
        throw DimensionError("QuOperator: edge " + std::to_string(e) +
                             " is open but not listed as out or in");
      } else if (c > 2) {
        throw DimensionError("QuOperator: edge shared by more than two axes");
      }
    }
  }

  Network net_;
  std::vector<EdgeId> out_;
  std::vector<EdgeId> in_;
};

/// Column vector: a QuOperator without in edges.
class QuVector : public QuOperator {
 public:
  QuVector() = default;
  QuVector(Network net, std::vector<EdgeId> edges)
      : QuOperator(std::move(net), std::move(edges), {}) {}
  explicit QuVector(QuOperator op) : QuOperator(std::move(op)) {
    if (!in_edges().empty()) throw DimensionError("QuVector: operator has in edges");
  }

  /// MPS from site tensors of shape (bond_left, d, bond_right); rank-1 sites
  /// are treated as (1, d, 1).
  static QuVector from_mps(const std::vector<ComplexTensor>& sites) {
    if (sites.empty()) throw InvalidArgument("from_mps: no sites");
    Network net;
    std::vector<EdgeId> phys;
    EdgeId left = -1;
    for (std::size_t k = 0; k < sites.size(); ++k) {
      ComplexTensor w = sites[k].rank() == 1 ? reshape(sites[k], {1, sites[k].dim(0), 1}) : sites[k];
      if (w.rank() != 3) throw DimensionError("from_mps: site tensors must have rank 1 or 3");
      if (k == 0 && w.dim(0) != 1) throw DimensionError("from_mps: left boundary bond must be 1");
      if (k + 1 == sites.size() && w.dim(2) != 1)
        throw DimensionError("from_mps: right boundary bond must be 1");
      if (k > 0 && net.edge_dim(left) != w.dim(0))
        throw DimensionError("from_mps: bond dimension mismatch at site " + std::to_string(k));
      // Drop the trivial boundary bonds so no dangling dimension-1 edge remains.
      std::vector<EdgeId> edges;
      Shape shape;
      if (k > 0) {
        edges.push_back(left);
        shape.push_back(w.dim(0));
      }
      const EdgeId p = net.add_edge(w.dim(1));
      phys.push_back(p);
      edges.push_back(p);
      shape.push_back(w.dim(1));
      if (k + 1 < sites.size()) {
        left = net.add_edge(w.dim(2));
        edges.push_back(left);
        shape.push_back(w.dim(2));
      }
      net.add_node(reshape(std::move(w), shape), edges);
    }
    return QuVector(std::move(net), std::move(phys));
  }

  /// Dense vector as a single node.
  static QuVector from_dense(const ComplexTensor& v, const std::vector<std::size_t>& dims) {
    if (v.size() != shape_size(dims)) throw DimensionError("from_dense: size mismatch");
    Network net;
    std::vector<EdgeId> edges;
    for (std::size_t d : dims) edges.push_back(net.add_edge(d));
    net.add_node(ComplexTensor(Shape(dims), std::vector<cplx>(v.data().begin(), v.data().end())),
                 edges);
    return QuVector(std::move(net), std::move(edges));
  }

  QuVector scaled(cplx s) const { return QuVector(QuOperator::scaled(s)); }
};

/// Row vector: a QuOperator without out edges.
class QuAdjointVector : public QuOperator {
 public:
  QuAdjointVector() = default;
  explicit QuAdjointVector(QuOperator op) : QuOperator(std::move(op)) {
    if (!out_edges().empty()) throw DimensionError("QuAdjointVector: operator has out edges");
  }
};

inline QuOperator matmul(const QuOperator& a, const QuOperator& b) { return compose(a, b); }
inline QuVector matmul(const QuOperator& a, const QuVector& v) { return QuVector(compose(a, v)); }
inline QuAdjointVector matmul(const QuAdjointVector& w, const QuOperator& a) {
  return QuAdjointVector(compose(w, a));
}
/// Inner product <w|v> as a lazy scalar fragment.
inline QuOperator matmul(const QuAdjointVector& w, const QuVector& v) { return compose(w, v); }

inline QuOperator operator*(cplx s, const QuOperator& a) { return a.scaled(s); }
inline QuVector operator*(cplx s, const QuVector& v) { return v.scaled(s); }

inline QuOperator adjoint(const QuOperator& a) { return a.adjoint(); }
inline QuAdjointVector adjoint(const QuVector& v) { return QuAdjointVector(v.adjoint()); }
inline QuVector adjoint(const QuAdjointVector& w) { return QuVector(w.adjoint()); }

/// Reduced density matrix of a dense state after tracing out `cut`.
/// The result is Hermitian PSD with trace equal to the squared norm of `state`.
inline ComplexTensor reduced_density_matrix(const ComplexTensor& state, const std::vector<int>& cut) {
  const std::size_t size = state.size();
  if (size == 0 || (size & (size - 1)) != 0)
    throw DimensionError("reduced_density_matrix: state length is not a power of two");
  const int n = std::countr_zero(size);
  std::vector<bool> traced(static_cast<std::size_t>(n), false);
  for (int q : cut) {
    if (q < 0 || q >= n || traced[static_cast<std::size_t>(q)])
      throw InvalidArgument("reduced_density_matrix: bad qubit index " + std::to_string(q));
    traced[static_cast<std::size_t>(q)] = true;
  }
  if (static_cast<int>(cut.size()) >= n)
    throw InvalidArgument("reduced_density_matrix: cannot trace out every qubit");
  std::vector<std::size_t> keep, drop;
  for (int q = 0; q < n; ++q) (traced[static_cast<std::size_t>(q)] ? drop : keep).push_back(static_cast<std::size_t>(q));
  std::vector<std::size_t> perm = keep;
  perm.insert(perm.end(), drop.begin(), drop.end());
  const std::size_t dk = std::size_t{1} << keep.size();
  const std::size_t dd = std::size_t{1} << drop.size();
  const ComplexTensor psi = transpose_reshape(reshape(state, Shape(static_cast<std::size_t>(n), 2)),
                                              perm, {dk, dd});
  const RowMatrix m = to_eigen(psi);
  return from_eigen(m * m.adjoint());
}

}  // namespace qtn
