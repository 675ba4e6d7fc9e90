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

// Random tensor networks paired with their labelled-tensor description for
// the brute-force einsum oracle.

#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "qtn/network.hpp"

namespace testnet {

using namespace qtn;

inline ComplexTensor random_tensor(Shape shape, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<cplx> d(shape_size(shape));
  for (auto& v : d) v = {nd(rng), nd(rng)};
  return ComplexTensor(std::move(shape), std::move(d));
}

inline oracle::LabeledTensor labeled(const ComplexTensor& t, std::vector<int> labels) {
  return {t.shape(), std::move(labels), std::vector<cplx>(t.data().begin(), t.data().end())};
}

struct RandomNet {
  Network net;
  std::vector<oracle::LabeledTensor> tensors;
  std::map<int, std::size_t> dims;
  std::vector<int> out;
};

/// Random connected-or-not network of `nodes` tensors with bonds of
/// dimension 2 or 3 and a few open legs.
inline RandomNet random_network(int nodes, std::mt19937_64& rng) {
  RandomNet r;
  std::vector<std::vector<EdgeId>> legs(static_cast<std::size_t>(nodes));
  std::uniform_int_distribution<int> dim(2, 3), pick(0, nodes - 1);
  std::uniform_real_distribution<double> u;
  // Keeps the brute-force oracle below ~2^17 index assignments.
  double volume = 8;
  for (int a = 0; a < nodes; ++a)
    for (int b = a + 1; b < nodes; ++b)
      if (u(rng) < 0.4) {
        const std::size_t d = static_cast<std::size_t>(dim(rng));
        if (volume * static_cast<double>(d) > 131072) continue;
        volume *= static_cast<double>(d);
        const EdgeId e = r.net.add_edge(d);
        r.dims[static_cast<int>(e)] = d;
        legs[static_cast<std::size_t>(a)].push_back(e);
        legs[static_cast<std::size_t>(b)].push_back(e);
      }
  std::vector<EdgeId> dangling;
  for (int k = 0; k < 3; ++k) {
    const std::size_t d = 2;
    const EdgeId e = r.net.add_edge(d);
    r.dims[static_cast<int>(e)] = d;
    legs[static_cast<std::size_t>(pick(rng))].push_back(e);
    dangling.push_back(e);
  }
  for (auto& l : legs) {
    if (l.empty()) {
      const EdgeId e = r.net.add_edge(2);
      r.dims[static_cast<int>(e)] = 2;
      l.push_back(e);
      dangling.push_back(e);
    }
    std::shuffle(l.begin(), l.end(), rng);
    Shape s;
    std::vector<int> labels;
    for (EdgeId e : l) {
      s.push_back(r.net.edge_dim(e));
      labels.push_back(static_cast<int>(e));
    }
    const ComplexTensor t = random_tensor(s, rng);
    r.tensors.push_back(labeled(t, labels));
    r.net.add_node(t, l);
  }
  std::shuffle(dangling.begin(), dangling.end(), rng);
  r.net.set_dangling(dangling);
  for (EdgeId e : dangling) r.out.push_back(static_cast<int>(e));
  return r;
}

inline ContractionPath random_path(const Network& net, std::mt19937_64& rng) {
  std::vector<int> live;
  for (const auto& [id, n] : net.nodes()) live.push_back(id);
  int next = net.next_node_id();
  ContractionPath p;
  while (live.size() > 1) {
    std::shuffle(live.begin(), live.end(), rng);
    const int a = live.back();
    live.pop_back();
    const int b = live.back();
    live.pop_back();
    p.steps.emplace_back(a, b);
    live.push_back(next++);
  }
  return p;
}

}  // namespace testnet
