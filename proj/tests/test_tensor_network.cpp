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

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "qtn/gates.hpp"
#include "qtn/network.hpp"
#include "qtn/quop.hpp"
#include "random_networks.hpp"

using namespace qtn;
using namespace testnet;
using Catch::Matchers::WithinAbs;

// ------------------------------------------------------------ tensor-core

TEST_CASE("transpose matches index permutation loops") {
  std::mt19937_64 rng(1);
  const ComplexTensor t = random_tensor({2, 3, 4}, rng);
  const std::size_t perm[] = {2, 0, 1};
  const ComplexTensor p = transpose(t, perm);
  REQUIRE(p.shape() == Shape{4, 2, 3});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 4; ++k) CHECK(p.at({k, i, j}) == t.at({i, j, k}));
}

TEST_CASE("contract_pair agrees with a naive einsum") {
  std::mt19937_64 rng(2);
  const ComplexTensor a = random_tensor({2, 3, 4}, rng);
  const ComplexTensor b = random_tensor({4, 5, 3}, rng);
  const ComplexTensor c = contract_pair(a, {1, 2}, b, {2, 0});
  REQUIRE(c.shape() == Shape{2, 5});
  const auto want = oracle::einsum({labeled(a, {0, 1, 2}), labeled(b, {2, 3, 1})}, {0, 3},
                                   {{0, 2}, {1, 3}, {2, 4}, {3, 5}});
  CHECK(oracle::max_diff(want, c.data()) < 1e-12);
}

TEST_CASE("contract_pair with no shared axes is an outer product") {
  const ComplexTensor a = ComplexTensor::vector({1.0, 2.0});
  const ComplexTensor b = ComplexTensor::vector({3.0, cplx(0, 1)});
  const ComplexTensor c = contract_pair(a, std::span<const std::size_t>{}, b, std::span<const std::size_t>{});
  REQUIRE(c.shape() == Shape{2, 2});
  CHECK(c(1, 1) == cplx(0, 2));
}

TEST_CASE("contract_pair rejects mismatched axis lengths") {
  const ComplexTensor a({2, 3});
  const ComplexTensor b({2, 3});
  CHECK_THROWS_AS(contract_pair(a, {1}, b, {0}), DimensionError);
}

TEST_CASE("trace_axes sums diagonals") {
  std::mt19937_64 rng(3);
  const ComplexTensor t = random_tensor({3, 2, 3, 2}, rng);
  const std::size_t a[] = {0}, b[] = {2};
  const ComplexTensor r = trace_axes(t, a, b);
  const auto want = oracle::einsum({labeled(t, {0, 1, 0, 2})}, {1, 2}, {{0, 3}, {1, 2}, {2, 2}});
  CHECK(oracle::max_diff(want, r.data()) < 1e-12);
}

TEST_CASE("kron and matmul match the reference") {
  std::mt19937_64 rng(4);
  const ComplexTensor a = random_tensor({2, 2}, rng), b = random_tensor({2, 2}, rng);
  CHECK(oracle::max_diff(oracle::kron(oracle::from_tensor(a), oracle::from_tensor(b)).a, kron(a, b).data()) < 1e-14);
  CHECK(oracle::max_diff(oracle::mul(oracle::from_tensor(a), oracle::from_tensor(b)).a, matmul(a, b).data()) < 1e-12);
}

TEST_CASE("tensor construction validates shapes") {
  CHECK_THROWS_AS(ComplexTensor({2, 0}), DimensionError);
  CHECK(ComplexTensor::empty({2, 0}).size() == 0);
  CHECK_THROWS_AS(ComplexTensor::empty({2, 1}), DimensionError);
  CHECK_THROWS_AS(ComplexTensor({2, 2}, std::vector<cplx>(3)), DimensionError);
  CHECK_THROWS_AS(reshape(ComplexTensor({2, 2}), {3}), DimensionError);
}

TEST_CASE("svd_split reconstructs two-qubit gates") {
  SECTION("cnot has bond dimension 2") {
    const SvdSplit s = svd_split(gates::cnot(), 4);
    CHECK(s.bond_dimension == 2);
    CHECK(max_abs_diff(merge_split(s), reshape(gates::cnot(), {2, 2, 2, 2})) < 1e-12);
  }
  SECTION("swap needs four singular values") {
    const SvdSplit full = svd_split(gates::swap(), 4);
    CHECK(full.bond_dimension == 4);
    CHECK(max_abs_diff(merge_split(full), reshape(gates::swap(), {2, 2, 2, 2})) < 1e-12);
    const SvdSplit cut = svd_split(gates::swap(), 2);
    CHECK(cut.bond_dimension == 2);
    CHECK_THAT(cut.truncation_error, WithinAbs(std::sqrt(2.0), 1e-12));
  }
  SECTION("exp1 zz splits exactly at bond 2") {
    const SvdSplit s = svd_split(exp1_gate(0.7, gates::zz()), 2);
    CHECK(s.truncation_error < 1e-12);
    CHECK(max_abs_diff(merge_split(s), reshape(exp1_gate(0.7, gates::zz()), {2, 2, 2, 2})) < 1e-12);
  }
}

// --------------------------------------------------------------- tn-graph

TEST_CASE("network rejects edges with three endpoints") {
  Network net;
  const EdgeId e = net.add_edge(2);
  net.add_node(ComplexTensor::vector({1.0, 0.0}), {e});
  net.add_node(ComplexTensor::vector({1.0, 0.0}), {e});
  net.add_node(ComplexTensor::vector({1.0, 0.0}), {e});
  CHECK_THROWS_AS(net.validate(), DimensionError);
}

TEST_CASE("network rejects axis length mismatches and undeclared dangling edges") {
  Network net;
  const EdgeId e = net.add_edge(3);
  CHECK_THROWS_AS(net.add_node(ComplexTensor::vector({1.0, 0.0}), {e}), DimensionError);
  net.add_node(ComplexTensor::vector({1.0, 0.0, 0.0}), {e});
  CHECK_THROWS_AS(net.validate(), DimensionError);
  net.set_dangling({e});
  CHECK_NOTHROW(net.validate());
}

TEST_CASE("path invariance on random small networks") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int nodes = 2 + trial % 7;
    RandomNet r = random_network(nodes, rng);
    const auto want = oracle::einsum(r.tensors, r.out, r.dims);
    const ComplexTensor greedy = contract_with_path(r.net, greedy_path(r.net));
    CHECK(oracle::max_diff(want, greedy.data()) < 1e-10);
    for (int k = 0; k < 3; ++k) {
      const ComplexTensor other = contract_with_path(r.net, random_path(r.net, rng));
      CHECK(oracle::max_diff(want, other.data()) < 1e-10);
    }
    const ContractionPath re = subtree_reconfigure(r.net, greedy_path(r.net), 4, 2, Metric::flops, 5);
    CHECK(oracle::max_diff(want, contract_with_path(r.net, re).data()) < 1e-10);
  }
}

TEST_CASE("greedy path is deterministic and metrics match hand counts") {
  // Chain A(2x3) - B(3x4) - C(4x5), open ends.
  Network net;
  const EdgeId i = net.add_edge(2), j = net.add_edge(3), k = net.add_edge(4), l = net.add_edge(5);
  const int a = net.add_node(ComplexTensor({2, 3}), {i, j});
  const int b = net.add_node(ComplexTensor({3, 4}), {j, k});
  const int c = net.add_node(ComplexTensor({4, 5}), {k, l});
  net.set_dangling({i, l});
  const ContractionPath p = greedy_path(net);
  CHECK(p == greedy_path(net));
  // The cheapest first step removes the larger input: A.B gives 2x4 (8 - 6 - 12 = -10),
  // B.C gives 3x5 (15 - 12 - 20 = -17).
  REQUIRE(p.steps.size() == 2);
  CHECK(p.steps[0] == std::pair(b, c));
  const PathMetrics m = path_metrics(net, p);
  CHECK(m.flops == 3 * 4 * 5 + 2 * 3 * 5);
  CHECK(m.write == 15 + 10);
  CHECK(m.size == 15);
  const PathMetrics other = path_metrics(net, ContractionPath{{{a, b}, {3, c}}});
  CHECK(other.flops == 2 * 3 * 4 + 2 * 4 * 5);
}

TEST_CASE("path_metrics rejects invalid paths") {
  Network net;
  const EdgeId e = net.add_edge(2);
  net.add_node(ComplexTensor::vector({1.0, 1.0}), {e});
  net.add_node(ComplexTensor::vector({1.0, 1.0}), {e});
  CHECK_THROWS_AS(path_metrics(net, ContractionPath{{{0, 0}}}), InvalidArgument);
  CHECK_THROWS_AS(path_metrics(net, ContractionPath{}), InvalidArgument);
}

TEST_CASE("subtree reconfiguration never increases the minimized metric") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 12; ++trial) {
    RandomNet r = random_network(8, rng);
    const ContractionPath base = random_path(r.net, rng);
    const PathMetrics before = path_metrics(r.net, base);
    for (Metric m : {Metric::flops, Metric::write, Metric::size, Metric::combo}) {
      const ContractionPath re = subtree_reconfigure(r.net, base, 6, 2, m, static_cast<std::uint64_t>(trial));
      CHECK(metric_score(m, path_metrics(r.net, re)) <= metric_score(m, before) * (1 + 1e-12));
    }
  }
}

TEST_CASE("subtree reconfiguration validates arguments") {
  Network net;
  const EdgeId e = net.add_edge(2);
  net.add_node(ComplexTensor::vector({1.0, 1.0}), {e});
  net.add_node(ComplexTensor::vector({1.0, 1.0}), {e});
  CHECK_THROWS_AS(subtree_reconfigure(net, greedy_path(net), 2, 1, Metric::flops), InvalidArgument);
  CHECK_THROWS_AS(subtree_reconfigure(net, greedy_path(net), 4, -1, Metric::flops), InvalidArgument);
}

TEST_CASE("preprocessing keeps the contracted value") {
  std::mt19937_64 rng(31);
  // A two-wire circuit-like network: single-wire nodes around a two-wire node.
  Network net;
  const EdgeId w0 = net.add_edge(2), w1 = net.add_edge(2);
  net.add_node(ComplexTensor::vector({1.0, 0.0}), {w0}, 1, 0);
  net.add_node(ComplexTensor::vector({1.0, 0.0}), {w1}, 1, 0);
  const EdgeId a0 = net.add_edge(2);
  net.add_node(random_tensor({2, 2}, rng), {a0, w0}, 1, 1);
  const EdgeId b0 = net.add_edge(2), b1 = net.add_edge(2);
  net.add_node(random_tensor({2, 2, 2, 2}, rng), {b0, b1, a0, w1}, 2, 2);
  const EdgeId c1 = net.add_edge(2);
  net.add_node(random_tensor({2, 2}, rng), {c1, b1}, 1, 3);
  net.set_dangling({b0, c1});
  const Network pre = preprocess_absorb(net);
  CHECK(pre.node_count() < net.node_count());
  CHECK(max_abs_diff(contract_with_path(pre, greedy_path(pre)), contract_with_path(net, greedy_path(net))) < 1e-12);
}

// ------------------------------------------------------------------- quop

TEST_CASE("QuOperator matrix-vector example gives the all-16 column") {
  Network m;
  const EdgeId a = m.add_edge(2), b = m.add_edge(2), c = m.add_edge(2), d = m.add_edge(2), f = m.add_edge(2),
               g = m.add_edge(2);
  const ComplexTensor ones3({2, 2, 2}, std::vector<cplx>(8, 1.0));
  m.add_node(ones3, {a, b, c});
  m.add_node(ones3, {d, f, c});
  m.add_node(ComplexTensor({2, 2}, std::vector<cplx>(4, 1.0)), {f, g});
  const QuOperator matrix(std::move(m), {a, d}, {b, g});
  Network v;
  const EdgeId x = v.add_edge(2), y = v.add_edge(2);
  v.add_node(ComplexTensor::vector({1.0, 1.0}), {x});
  v.add_node(ComplexTensor::vector({1.0, 1.0}), {y});
  const QuVector vec(std::move(v), {x, y});
  const QuVector out = matmul(matrix, vec);
  const ComplexTensor r = out.eval_matrix();
  REQUIRE(r.shape() == Shape{4, 1});
  for (std::size_t i = 0; i < 4; ++i) CHECK(r[i] == cplx(16.0));
}

TEST_CASE("MPO from site tensors equals the Kronecker product") {
  std::vector<ComplexTensor> sites;
  for (const auto& p : {gates::x(), gates::z(), gates::y()}) sites.push_back(reshape(p, {1, 2, 2, 1}));
  const ComplexTensor dense = QuOperator::from_mpo(sites).eval_matrix();
  const auto want = oracle::pauli_string({1, 3, 2});
  CHECK(oracle::max_diff(want.a, dense.data()) < 1e-14);
}

TEST_CASE("QuOperator algebra matches dense algebra") {
  std::mt19937_64 rng(41);
  const ComplexTensor ma = random_tensor({4, 4}, rng), mb = random_tensor({4, 4}, rng);
  const QuOperator a = QuOperator::from_matrix(ma, {2, 2}, {2, 2});
  const QuOperator b = QuOperator::from_matrix(mb, {2, 2}, {2, 2});
  CHECK(max_abs_diff(compose(a, b).eval_matrix(), matmul(ma, mb)) < 1e-12);
  CHECK(max_abs_diff(a.adjoint().eval_matrix(), adjoint(ma)) < 1e-14);
  CHECK(max_abs_diff(tensor_product(a, b).eval_matrix(), kron(ma, mb)) < 1e-12);
  CHECK(max_abs_diff((cplx(0, 2) * a).eval_matrix(), scale(ma, cplx(0, 2))) < 1e-14);
  // Partial trace over site 1 of a (x) b equals tr(b) a.
  cplx trb = 0;
  for (std::size_t i = 0; i < 4; ++i) trb += mb(i, i);
  const QuOperator ab = tensor_product(a, b);
  const ComplexTensor pt = ab.partial_trace({2, 3}).eval_matrix();
  CHECK(max_abs_diff(pt, scale(ma, trb)) < 1e-11);
  CHECK(max_abs_diff(QuOperator::identity({2, 3}).eval_matrix(), ComplexTensor::identity(6)) == 0.0);
  CHECK_THROWS_AS(compose(a, QuOperator::identity({3})), DimensionError);
}

TEST_CASE("MPS from sites and dense vectors round-trip") {
  std::mt19937_64 rng(43);
  std::vector<ComplexTensor> sites{random_tensor({1, 2, 3}, rng), random_tensor({3, 2, 2}, rng),
                                   random_tensor({2, 2, 1}, rng)};
  const QuVector mps = QuVector::from_mps(sites);
  const ComplexTensor dense = mps.eval_matrix();
  const auto want = oracle::einsum({labeled(sites[0], {0, 1, 2}), labeled(sites[1], {2, 3, 4}),
                                    labeled(sites[2], {4, 5, 6})},
                                   {0, 1, 3, 5, 6}, {{0, 1}, {1, 2}, {2, 3}, {3, 2}, {4, 2}, {5, 2}, {6, 1}});
  CHECK(oracle::max_diff(want, dense.data()) < 1e-12);
  const QuVector back = QuVector::from_dense(reshape(dense, {8}), {2, 2, 2});
  CHECK(max_abs_diff(back.eval_matrix(), dense) < 1e-14);
  // <v|v> through the adjoint vector.
  const ComplexTensor nn = matmul(adjoint(mps), mps).eval_matrix();
  double norm = 0;
  for (const auto& x : dense.data()) norm += std::norm(x);
  CHECK_THAT(nn[0].real(), WithinAbs(norm, 1e-10));
}

TEST_CASE("reduced density matrix of a Bell pair is maximally mixed") {
  const double s = 1 / std::sqrt(2.0);
  const ComplexTensor bell = ComplexTensor::vector({s, 0, 0, s});
  const ComplexTensor rho = reduced_density_matrix(bell, {1});
  CHECK(max_abs_diff(rho, scale(ComplexTensor::identity(2), 0.5)) < 1e-14);
}
