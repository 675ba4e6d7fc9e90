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
#include <bitset>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qtn/tensor.hpp"

namespace qtn {

using EdgeId = std::int64_t;

/// A tensor placed in a network. `edges[k]` labels axis k of `tensor`.
///
/// `arity` and `order` are optional circuit annotations used by
/// preprocess_absorb: arity is the number of qubit wires the originating
/// operation acts on (0 when unknown) and order is its position in circuit
/// time.
struct TensorNode {
  int id = 0;
  std::shared_ptr<const ComplexTensor> tensor;
  std::vector<EdgeId> edges;
  int arity = 0;
  int order = 0;
};

/// Graph of tensors joined by shared edges.
///
/// An edge is attached to at most two node axes. Edges attached to exactly
/// one axis are dangling and must appear in the ordered `dangling()` list,
/// which fixes the axis order of the fully contracted result.
class Network {
 public:
  EdgeId add_edge(std::size_t dim) {
    if (dim == 0) throw DimensionError("edge dimension must be positive");
    edge_dims_[next_edge_] = dim;
    return next_edge_++;
  }

  int add_node(std::shared_ptr<const ComplexTensor> tensor, std::vector<EdgeId> edges,
               int arity = 0, int order = 0) {
    if (!tensor) throw InvalidArgument("add_node: null tensor");
    if (edges.size() != tensor->rank())
      throw DimensionError("add_node: " + std::to_string(edges.size()) + " edges for a rank-" +
                           std::to_string(tensor->rank()) + " tensor");
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const auto it = edge_dims_.find(edges[k]);
      if (it == edge_dims_.end()) throw InvalidArgument("add_node: unknown edge id");
      if (it->second != tensor->dim(k))
        throw DimensionError("add_node: edge dimension " + std::to_string(it->second) +
                             " does not match axis length " + std::to_string(tensor->dim(k)));
    }
    const int id = next_node_++;
    nodes_[id] = TensorNode{id, std::move(tensor), std::move(edges), arity, order};
    return id;
  }

  int add_node(ComplexTensor tensor, std::vector<EdgeId> edges, int arity = 0, int order = 0) {
    return add_node(std::make_shared<const ComplexTensor>(std::move(tensor)), std::move(edges),
                    arity, order);
  }

  void set_dangling(std::vector<EdgeId> dangling) { dangling_ = std::move(dangling); }

  /// Replaces every occurrence of edge `from` by `to` (node axes and the
  /// dangling list). Used to join two dangling edges into one bond.
  void merge_edges(EdgeId from, EdgeId to) {
    if (from == to) return;
    if (edge_dim(from) != edge_dim(to))
      throw DimensionError("merge_edges: joined edges differ in dimension");
    for (auto& [id, node] : nodes_)
      for (auto& e : node.edges)
        if (e == from) e = to;
    dangling_.erase(std::remove(dangling_.begin(), dangling_.end(), from), dangling_.end());
    dangling_.erase(std::remove(dangling_.begin(), dangling_.end(), to), dangling_.end());
    edge_dims_.erase(from);
  }

  /// Copies all nodes and edges of `other` into this network under fresh ids.
  /// Returns the edge relabeling; the dangling list of `other` is not copied.
  std::map<EdgeId, EdgeId> absorb(const Network& other, bool conjugate = false,
                                  int order_offset = 0, bool mirror_order = false,
                                  int arity_override = -1) {
    std::map<EdgeId, EdgeId> relabel;
    for (const auto& [e, d] : other.edge_dims_) relabel[e] = add_edge(d);
    for (const auto& [id, node] : other.nodes_) {
      std::vector<EdgeId> edges;
      edges.reserve(node.edges.size());
      for (EdgeId e : node.edges) edges.push_back(relabel.at(e));
      auto t = conjugate ? std::make_shared<const ComplexTensor>(qtn::conj(*node.tensor))
                         : node.tensor;
      const int order = mirror_order ? order_offset - node.order : order_offset + node.order;
      add_node(std::move(t), std::move(edges), arity_override >= 0 ? arity_override : node.arity,
               order);
    }
    return relabel;
  }

  void remove_node(int id) { nodes_.erase(id); }

  const std::map<int, TensorNode>& nodes() const noexcept { return nodes_; }
  const std::map<EdgeId, std::size_t>& edge_dims() const noexcept { return edge_dims_; }
  const std::vector<EdgeId>& dangling() const noexcept { return dangling_; }
  std::size_t edge_dim(EdgeId e) const {
    const auto it = edge_dims_.find(e);
    if (it == edge_dims_.end()) throw InvalidArgument("unknown edge id " + std::to_string(e));
    return it->second;
  }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  int next_node_id() const noexcept { return next_node_; }

  /// Total number of stored tensor elements.
  std::size_t element_count() const {
    std::size_t s = 0;
    for (const auto& [id, node] : nodes_) s += node.tensor->size();
    return s;
  }

  /// Number of node axes attached to each edge.
  std::map<EdgeId, int> endpoint_counts() const {
    std::map<EdgeId, int> counts;
    for (const auto& [e, d] : edge_dims_) counts[e] = 0;
    for (const auto& [id, node] : nodes_)
      for (EdgeId e : node.edges) ++counts[e];
    return counts;
  }

  /// Checks the structural invariants; throws DimensionError on violation.
  void validate() const {
    const auto counts = endpoint_counts();
    std::set<EdgeId> dangling(dangling_.begin(), dangling_.end());
    if (dangling.size() != dangling_.size())
      throw DimensionError("network: duplicate edge in dangling list");
    for (const auto& [e, c] : counts) {
      if (c > 2) throw DimensionError("network: edge " + std::to_string(e) + " has " +
                                      std::to_string(c) + " endpoints");
      if (c == 1 && !dangling.count(e))
        throw DimensionError("network: edge " + std::to_string(e) +
                             " has one endpoint but is not listed as dangling");
      if (c != 1 && dangling.count(e))
        throw DimensionError("network: dangling edge " + std::to_string(e) +
                             " does not have exactly one endpoint");
    }
  }

 private:
  std::map<int, TensorNode> nodes_;
  std::map<EdgeId, std::size_t> edge_dims_;
  std::vector<EdgeId> dangling_;
  int next_node_ = 0;
  EdgeId next_edge_ = 0;
};

/// Pairwise contraction order. Each step contracts two live nodes; the
/// product receives the next unused node id (starting at
/// `Network::next_node_id()` and increasing by one per step).
struct ContractionPath {
  std::vector<std::pair<int, int>> steps;
  friend bool operator==(const ContractionPath&, const ContractionPath&) = default;
};

/// Cost of a contraction path.
///
/// flops: sum over steps of the product of all distinct index dimensions
/// touched by the pair (one multiply-add per scalar product).
/// write: sum of the element counts of every produced intermediate.
/// size: largest produced intermediate.
struct PathMetrics {
  double flops = 0.0;
  double write = 0.0;
  double size = 0.0;
  double log10_flops = 0.0;
  double log2_write = 0.0;
  double log2_size = 0.0;
};

enum class Metric { flops, write, size, combo };

inline Metric parse_metric(std::string_view name) {
  if (name == "flops") return Metric::flops;
  if (name == "write") return Metric::write;
  if (name == "size") return Metric::size;
  if (name == "combo") return Metric::combo;
  throw InvalidArgument("unknown metric '" + std::string(name) +
                        "' (expected flops, write, size or combo)");
}

inline const char* metric_name(Metric m) {
  switch (m) {
    case Metric::flops: return "flops";
    case Metric::write: return "write";
    case Metric::size: return "size";
    case Metric::combo: return "combo";
  }
  return "?";
}

/// Weight of write in the combo score.
inline constexpr double kComboWriteWeight = 64.0;

inline double metric_score(Metric m, double flops, double write, double size) {
  switch (m) {
    case Metric::flops: return flops;
    case Metric::write: return write;
    case Metric::size: return size;
    case Metric::combo: return flops + kComboWriteWeight * write;
  }
  return flops;
}

inline double metric_score(Metric m, const PathMetrics& p) {
  return metric_score(m, p.flops, p.write, p.size);
}

namespace detail {

using IndexSet = std::vector<EdgeId>;  // sorted

/// Edges of a node with self-loops (edges appearing twice) removed.
inline IndexSet open_indices(const std::vector<EdgeId>& edges) {
  IndexSet s = edges;
  std::sort(s.begin(), s.end());
  IndexSet out;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i;
    while (j < s.size() && s[j] == s[i]) ++j;
    if (j - i == 1) out.push_back(s[i]);
    i = j;
  }
  return out;
}

inline IndexSet symmetric_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline double index_size(const Network& net, const IndexSet& s) {
  double v = 1.0;
  for (EdgeId e : s) v *= static_cast<double>(net.edge_dim(e));
  return v;
}

inline PathMetrics finish_metrics(double flops, double write, double size) {
  PathMetrics m;
  m.flops = flops;
  m.write = write;
  m.size = size;
  m.log10_flops = std::log10(std::max(1.0, flops));
  m.log2_write = std::log2(std::max(1.0, write));
  m.log2_size = std::log2(std::max(1.0, size));
  return m;
}

/// Uniform double in [0,1) from the top 53 bits.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Greedy pairwise contraction order.
///
/// Candidates are scored by size(result) - size(a) - size(b) and ordered by
/// (score, id, id). Every connected pair is a candidate initially; after a
/// contraction only the best pair involving the new node is added, and
/// candidates referring to consumed nodes are skipped when popped. When no
/// candidate remains, the leftover components are outer-multiplied in
/// ascending id order.
inline ContractionPath greedy_path(const Network& net) {
  if (net.node_count() == 0) throw InvalidArgument("greedy_path: empty network");
  std::map<int, detail::IndexSet> live;
  std::map<EdgeId, std::vector<int>> holders;
  for (const auto& [id, node] : net.nodes()) {
    live[id] = detail::open_indices(node.edges);
    for (EdgeId e : live[id]) holders[e].push_back(id);
  }
  std::map<int, double> sizes;
  for (const auto& [id, idx] : live) sizes[id] = detail::index_size(net, idx);

  using Candidate = std::tuple<double, int, int>;
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> queue;
  const auto candidate = [&](int a, int b) -> Candidate {
    if (a > b) std::swap(a, b);
    const auto out = detail::symmetric_difference(live[a], live[b]);
    return {detail::index_size(net, out) - sizes[a] - sizes[b], a, b};
  };
  const auto neighbors = [&](int a) {
    std::set<int> nb;
    for (EdgeId e : live[a])
      for (int h : holders[e])
        if (h != a) nb.insert(h);
    return nb;
  };

  std::set<std::pair<int, int>> seeded;
  for (const auto& [id, idx] : live)
    for (int b : neighbors(id))
      if (seeded.insert(std::minmax(id, b)).second) queue.push(candidate(id, b));

  ContractionPath path;
  int next_id = net.next_node_id();
  while (!queue.empty()) {
    const auto [c, a, b] = queue.top();
    queue.pop();
    if (!live.count(a) || !live.count(b)) continue;
    auto out = detail::symmetric_difference(live[a], live[b]);
    for (int x : {a, b})
      for (EdgeId e : live[x]) {
        auto& h = holders[e];
        h.erase(std::remove(h.begin(), h.end(), x), h.end());
      }
    live.erase(a);
    live.erase(b);
    const int id = next_id++;
    for (EdgeId e : out) holders[e].push_back(id);
    sizes[id] = detail::index_size(net, out);
    live[id] = std::move(out);
    path.steps.emplace_back(a, b);
    std::optional<Candidate> best;
    for (int nb : neighbors(id)) {
      const Candidate cand = candidate(id, nb);
      if (!best || cand < *best) best = cand;
    }
    if (best) queue.push(*best);
  }
  // Disconnected components: fold outer products in id order.
  std::vector<int> rest;
  for (const auto& [id, idx] : live) rest.push_back(id);
  while (rest.size() > 1) {
    path.steps.emplace_back(rest[0], rest[1]);
    rest.erase(rest.begin(), rest.begin() + 2);
    rest.insert(rest.begin(), next_id++);
  }
  return path;
}

/// Evaluates the cost of `path` without touching tensor data.
inline PathMetrics path_metrics(const Network& net, const ContractionPath& path) {
  std::map<int, detail::IndexSet> live;
  for (const auto& [id, node] : net.nodes()) live[id] = detail::open_indices(node.edges);
  if (live.empty()) throw InvalidArgument("path_metrics: empty network");
  double flops = 0.0, write = 0.0, size = 0.0;
  int next_id = net.next_node_id();
  for (const auto& [a, b] : path.steps) {
    if (a == b || !live.count(a) || !live.count(b))
      throw InvalidArgument("path_metrics: step references a dead or unknown node");
    flops += detail::index_size(net, detail::set_union(live[a], live[b]));
    auto out = detail::symmetric_difference(live[a], live[b]);
    const double s = detail::index_size(net, out);
    write += s;
    size = std::max(size, s);
    live.erase(a);
    live.erase(b);
    live[next_id++] = std::move(out);
  }
  if (live.size() != 1) throw InvalidArgument("path_metrics: path leaves more than one node");
  return detail::finish_metrics(flops, write, size);
}

/// Contracts `net` following `path`; result axes follow `net.dangling()`.
inline ComplexTensor contract_with_path(const Network& net, const ContractionPath& path) {
  net.validate();
  struct Live {
    std::shared_ptr<const ComplexTensor> tensor;
    std::vector<EdgeId> edges;
  };
  std::map<int, Live> live;
  for (const auto& [id, node] : net.nodes()) {
    // Trace self-loops up front.
    std::vector<std::size_t> ta, tb;
    std::vector<EdgeId> kept;
    for (std::size_t i = 0; i < node.edges.size(); ++i) {
      bool paired = false;
      for (std::size_t j = 0; j < node.edges.size(); ++j)
        if (i != j && node.edges[i] == node.edges[j]) {
          paired = true;
          if (i < j) {
            ta.push_back(i);
            tb.push_back(j);
          }
        }
      if (!paired) kept.push_back(node.edges[i]);
    }
    if (ta.empty()) {
      live[id] = {node.tensor, node.edges};
    } else {
      live[id] = {std::make_shared<const ComplexTensor>(trace_axes(*node.tensor, ta, tb)),
                  std::move(kept)};
    }
  }
  if (live.empty()) throw InvalidArgument("contract_with_path: empty network");
  int next_id = net.next_node_id();
  for (const auto& [a, b] : path.steps) {
    if (a == b || !live.count(a) || !live.count(b))
      throw InvalidArgument("contract_with_path: step references a dead or unknown node");
    const Live& la = live[a];
    const Live& lb = live[b];
    std::vector<std::size_t> axa, axb;
    std::vector<EdgeId> out;
    for (std::size_t i = 0; i < la.edges.size(); ++i) {
      const auto it = std::find(lb.edges.begin(), lb.edges.end(), la.edges[i]);
      if (it != lb.edges.end()) {
        axa.push_back(i);
        axb.push_back(static_cast<std::size_t>(it - lb.edges.begin()));
      } else {
        out.push_back(la.edges[i]);
      }
    }
    for (EdgeId e : lb.edges)
      if (std::find(la.edges.begin(), la.edges.end(), e) == la.edges.end()) out.push_back(e);
    auto t = std::make_shared<const ComplexTensor>(contract_pair(*la.tensor, axa, *lb.tensor, axb));
    live.erase(a);
    live.erase(b);
    live[next_id++] = {std::move(t), std::move(out)};
  }
  if (live.size() != 1) throw InvalidArgument("contract_with_path: path leaves more than one node");
  const Live& last = live.begin()->second;
  const auto& dangling = net.dangling();
  if (dangling.size() != last.edges.size())
    throw DimensionError("contract_with_path: result rank does not match dangling list");
  std::vector<std::size_t> perm;
  for (EdgeId e : dangling) {
    const auto it = std::find(last.edges.begin(), last.edges.end(), e);
    if (it == last.edges.end()) throw DimensionError("contract_with_path: dangling edge missing");
    perm.push_back(static_cast<std::size_t>(it - last.edges.begin()));
  }
  return transpose(*last.tensor, perm);
}

/// Absorbs single-wire nodes (annotated arity 1) into neighbouring
/// multi-wire nodes (arity >= 2), preferring the next node in circuit order
/// and falling back to the previous one. Chains of single-wire nodes with no
/// multi-wire neighbour collapse into one node. Nodes without annotations
/// are left alone. The contracted value of the network is unchanged.
inline Network preprocess_absorb(const Network& input) {
  struct Slot {
    std::shared_ptr<const ComplexTensor> tensor;
    std::vector<EdgeId> edges;
    int arity;
    int order;
  };
  std::map<int, Slot> slots;
  for (const auto& [id, node] : input.nodes())
    slots[id] = {node.tensor, node.edges, node.arity, node.order};

  auto adjacent = [](const Slot& a, const Slot& b) {
    for (EdgeId e : a.edges)
      if (std::find(b.edges.begin(), b.edges.end(), e) != b.edges.end()) return true;
    return false;
  };
  auto choose = [&](int src_id, bool want_multi) -> std::optional<int> {
    const Slot& src = slots.at(src_id);
    std::optional<int> later, earlier;
    int later_order = 0, earlier_order = 0;
    for (const auto& [id, s] : slots) {
      if (id == src_id || s.arity == 0 || want_multi != (s.arity >= 2)) continue;
      if (!adjacent(src, s)) continue;
      if (s.order >= src.order) {
        if (!later || s.order < later_order) later = id, later_order = s.order;
      } else if (!earlier || s.order > earlier_order) {
        earlier = id, earlier_order = s.order;
      }
    }
    return later ? later : earlier;
  };
  auto absorb = [&](int target_id, int source_id) {
    Slot& t = slots.at(target_id);
    const Slot s = slots.at(source_id);
    std::vector<std::size_t> axt, axs;
    std::vector<EdgeId> out;
    for (std::size_t i = 0; i < t.edges.size(); ++i) {
      const auto it = std::find(s.edges.begin(), s.edges.end(), t.edges[i]);
      if (it != s.edges.end()) {
        axt.push_back(i);
        axs.push_back(static_cast<std::size_t>(it - s.edges.begin()));
      } else {
        out.push_back(t.edges[i]);
      }
    }
    for (EdgeId e : s.edges)
      if (std::find(t.edges.begin(), t.edges.end(), e) == t.edges.end()) out.push_back(e);
    t.tensor = std::make_shared<const ComplexTensor>(contract_pair(*t.tensor, axt, *s.tensor, axs));
    t.edges = std::move(out);
    slots.erase(source_id);
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = slots.begin(); it != slots.end(); ++it) {
      if (it->second.arity != 1) continue;
      const int src = it->first;
      auto target = choose(src, true);
      if (!target) target = choose(src, false);
      if (!target) continue;
      absorb(*target, src);
      changed = true;
      break;
    }
  }

  Network out;
  std::map<EdgeId, EdgeId> relabel;
  for (const auto& [e, d] : input.edge_dims()) relabel[e] = out.add_edge(d);
  for (const auto& [id, s] : slots) {
    std::vector<EdgeId> edges;
    for (EdgeId e : s.edges) edges.push_back(relabel.at(e));
    out.add_node(s.tensor, std::move(edges), s.arity, s.order);
  }
  std::vector<EdgeId> dangling;
  for (EdgeId e : input.dangling()) dangling.push_back(relabel.at(e));
  out.set_dangling(std::move(dangling));
  return out;
}

namespace detail {

/// Binary contraction tree over the nodes of a network.
struct ContractionTree {
  struct Vertex {
    int left = -1;
    int right = -1;
    int leaf_id = -1;  // network node id for leaves
    IndexSet indices;
    double size = 1.0;
  };
  std::vector<Vertex> vertices;
  int root = -1;

  bool is_leaf(int v) const { return vertices[static_cast<std::size_t>(v)].left < 0; }
  Vertex& at(int v) { return vertices[static_cast<std::size_t>(v)]; }
  const Vertex& at(int v) const { return vertices[static_cast<std::size_t>(v)]; }

  static ContractionTree from_path(const Network& net, const ContractionPath& path) {
    ContractionTree tree;
    std::map<int, int> vertex_of;
    for (const auto& [id, node] : net.nodes()) {
      Vertex v;
      v.leaf_id = id;
      v.indices = open_indices(node.edges);
      v.size = index_size(net, v.indices);
      vertex_of[id] = static_cast<int>(tree.vertices.size());
      tree.vertices.push_back(std::move(v));
    }
    int next_id = net.next_node_id();
    for (const auto& [a, b] : path.steps) {
      if (a == b || !vertex_of.count(a) || !vertex_of.count(b))
        throw InvalidArgument("subtree_reconfigure: invalid path");
      Vertex v;
      v.left = vertex_of[a];
      v.right = vertex_of[b];
      v.indices = symmetric_difference(tree.at(v.left).indices, tree.at(v.right).indices);
      v.size = index_size(net, v.indices);
      vertex_of.erase(a);
      vertex_of.erase(b);
      vertex_of[next_id++] = static_cast<int>(tree.vertices.size());
      tree.vertices.push_back(std::move(v));
    }
    if (vertex_of.size() != 1) throw InvalidArgument("subtree_reconfigure: path is incomplete");
    tree.root = vertex_of.begin()->second;
    return tree;
  }

  ContractionPath to_path(const Network& net) const {
    ContractionPath path;
    int next_id = net.next_node_id();
    std::map<int, int> id_of;
    // Iterative post-order.
    std::vector<std::pair<int, bool>> stack{{root, false}};
    while (!stack.empty()) {
      auto [v, expanded] = stack.back();
      stack.pop_back();
      if (is_leaf(v)) {
        id_of[v] = at(v).leaf_id;
        continue;
      }
      if (!expanded) {
        stack.push_back({v, true});
        stack.push_back({at(v).right, false});
        stack.push_back({at(v).left, false});
        continue;
      }
      path.steps.emplace_back(id_of.at(at(v).left), id_of.at(at(v).right));
      id_of[v] = next_id++;
    }
    return path;
  }

  void collect_internal(std::vector<int>& out) const {
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      if (is_leaf(v)) continue;
      out.push_back(v);
      stack.push_back(at(v).left);
      stack.push_back(at(v).right);
    }
  }
};

}  // namespace detail

/// Subtree reconfiguration of a contraction path.
///
/// For `rounds` passes over the internal vertices of the contraction tree
/// (in a seeded random order), grows a subtree below each vertex to at most
/// `subtree_size` frontier tensors, always expanding the largest frontier
/// intermediate (with a small seeded perturbation), and replaces the subtree
/// by the exhaustively optimal order of its frontier under `minimize`. A
/// subtree is only rewritten when its score strictly improves, so the
/// minimized metric of the whole path never increases.
inline ContractionPath subtree_reconfigure(const Network& net, const ContractionPath& path,
                                           int subtree_size, int rounds, Metric minimize,
                                           std::uint64_t seed = 0) {
  if (subtree_size < 3 || subtree_size > 10)
    throw InvalidArgument("subtree_reconfigure: subtree_size must be in [3, 10]");
  if (rounds < 0) throw InvalidArgument("subtree_reconfigure: rounds must be non-negative");
  if (rounds == 0 || path.steps.size() < 2) return path;

  using detail::ContractionTree;
  using detail::IndexSet;
  constexpr std::size_t kMaxLocal = 256;
  using Bits = std::bitset<kMaxLocal>;

  ContractionTree tree = ContractionTree::from_path(net, path);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);

  struct Score {
    double flops = 0, write = 0, size = 0;
  };

  for (int round = 0; round < rounds; ++round) {
    std::vector<int> order;
    tree.collect_internal(order);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> alive(tree.vertices.size(), false);
    {
      std::vector<int> cur;
      tree.collect_internal(cur);
      for (int v : cur) alive[static_cast<std::size_t>(v)] = true;
    }

    for (const int root : order) {
      if (!alive[static_cast<std::size_t>(root)]) continue;
      // Grow the frontier.
      std::vector<int> frontier{tree.at(root).left, tree.at(root).right};
      std::vector<int> inner{root};
      while (static_cast<int>(frontier.size()) < subtree_size) {
        int best = -1;
        double best_w = -1.0;
        for (std::size_t k = 0; k < frontier.size(); ++k) {
          const int v = frontier[k];
          if (tree.is_leaf(v)) continue;
          const double w = std::log2(tree.at(v).size) + 0.5 * detail::unit_uniform(rng);
          if (w > best_w) best_w = w, best = static_cast<int>(k);
        }
        if (best < 0) break;
        const int v = frontier[static_cast<std::size_t>(best)];
        frontier.erase(frontier.begin() + best);
        frontier.push_back(tree.at(v).left);
        frontier.push_back(tree.at(v).right);
        inner.push_back(v);
      }
      const int k = static_cast<int>(frontier.size());
      if (k < 3) continue;

      // Local index numbering.
      std::map<EdgeId, std::size_t> local;
      for (int v : frontier)
        for (EdgeId e : tree.at(v).indices)
          if (!local.count(e)) local.emplace(e, local.size());
      if (local.size() > kMaxLocal) continue;
      std::vector<EdgeId> global(local.size());
      std::map<std::size_t, Bits> dim_masks;
      for (const auto& [e, i] : local) {
        global[i] = e;
        dim_masks[net.edge_dim(e)].set(i);
      }
      auto log2size = [&](const Bits& b) {
        double s = 0.0;
        for (const auto& [d, m] : dim_masks)
          if (d > 1) s += static_cast<double>((b & m).count()) * std::log2(static_cast<double>(d));
        return s;
      };
      Bits root_bits;
      for (EdgeId e : tree.at(root).indices) {
        const auto it = local.find(e);
        if (it != local.end()) root_bits.set(it->second);
      }
      std::vector<Bits> leaf_bits(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i)
        for (EdgeId e : tree.at(frontier[static_cast<std::size_t>(i)]).indices)
          leaf_bits[static_cast<std::size_t>(i)].set(local.at(e));

      const std::uint32_t full = (1u << k) - 1;
      std::vector<Bits> members(full + 1);
      for (std::uint32_t s = 1; s <= full; ++s) {
        const int low = std::countr_zero(s);
        members[s] = members[s & (s - 1)] | leaf_bits[static_cast<std::size_t>(low)];
      }
      // Open indices of subset S: touched by S and by the complement or the root output.
      std::vector<Bits> open(full + 1);
      std::vector<double> open_log2(full + 1, 0.0);
      for (std::uint32_t s = 1; s <= full; ++s) {
        open[s] = members[s] & (members[full & ~s] | root_bits);
        open_log2[s] = log2size(open[s]);
      }

      // Current score of the subtree.
      Score current;
      for (int v : inner) {
        const double f = std::exp2(log2size([&] {
          Bits b;
          for (EdgeId e : detail::set_union(tree.at(tree.at(v).left).indices,
                                            tree.at(tree.at(v).right).indices))
            b.set(local.at(e));
          return b;
        }()));
        current.flops += f;
        current.write += tree.at(v).size;
        current.size = std::max(current.size, tree.at(v).size);
      }
      const double current_score =
          metric_score(minimize, current.flops, current.write, current.size);

      std::vector<Score> best(full + 1);
      std::vector<double> best_score(full + 1, std::numeric_limits<double>::infinity());
      std::vector<std::uint32_t> split(full + 1, 0);
      for (int i = 0; i < k; ++i) best_score[1u << i] = 0.0;
      for (std::uint32_t s = 1; s <= full; ++s) {
        if (std::popcount(s) < 2) continue;
        const std::uint32_t low = s & (~s + 1);
        const double out_size = std::exp2(open_log2[s]);
        // Enumerate splits with the lowest member on the left side.
        for (std::uint32_t a = (s - 1) & s; a; a = (a - 1) & s) {
          if (!(a & low)) continue;
          const std::uint32_t b = s ^ a;
          if (!b) continue;
          if (!std::isfinite(best_score[a]) || !std::isfinite(best_score[b])) continue;
          const double step_flops = std::exp2(log2size(open[a] | open[b]));
          Score sc;
          sc.flops = best[a].flops + best[b].flops + step_flops;
          sc.write = best[a].write + best[b].write + out_size;
          sc.size = std::max({best[a].size, best[b].size, out_size});
          const double score = metric_score(minimize, sc.flops, sc.write, sc.size);
          if (score < best_score[s]) {
            best_score[s] = score;
            best[s] = sc;
            split[s] = a;
          }
        }
      }
      if (!(best_score[full] < current_score * (1.0 - 1e-12))) continue;

      // Rebuild the subtree below `root`.
      for (std::size_t i = 1; i < inner.size(); ++i) alive[static_cast<std::size_t>(inner[i])] = false;
      auto to_indices = [&](const Bits& b) {
        IndexSet s;
        for (std::size_t i = 0; i < global.size(); ++i)
          if (b.test(i)) s.push_back(global[i]);
        std::sort(s.begin(), s.end());
        return s;
      };
      std::function<int(std::uint32_t, int)> build = [&](std::uint32_t s, int reuse) -> int {
        if (std::popcount(s) == 1) return frontier[static_cast<std::size_t>(std::countr_zero(s))];
        const std::uint32_t a = split[s];
        const int left = build(a, -1);
        const int right = build(s ^ a, -1);
        int v = reuse;
        if (v < 0) {
          v = static_cast<int>(tree.vertices.size());
          tree.vertices.emplace_back();
          alive.push_back(true);
        }
        auto& vert = tree.at(v);
        vert.left = left;
        vert.right = right;
        vert.leaf_id = -1;
        vert.indices = to_indices(open[s]);
        vert.size = std::exp2(open_log2[s]);
        return v;
      };
      build(full, root);
    }
  }
  return tree.to_path(net);
}

/// Options for one-shot contraction of a network.
struct ContractOptions {
  bool preprocessing = true;
  int reconfigure_rounds = 0;
  int subtree_size = 8;
  Metric minimize = Metric::combo;
  std::uint64_t seed = 0;
};

/// Preprocesses (optionally), finds a greedy path and contracts.
inline ComplexTensor contract_network(const Network& net, const ContractOptions& opts = {}) {
  const Network work = opts.preprocessing ? preprocess_absorb(net) : net;
  ContractionPath path = greedy_path(work);
  if (opts.reconfigure_rounds > 0)
    path = subtree_reconfigure(work, path, opts.subtree_size, opts.reconfigure_rounds,
                               opts.minimize, opts.seed);
  return contract_with_path(work, path);
}

}  // namespace qtn
