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

#include <random>

#include "oracles.hpp"
#include "qtn/apps.hpp"
#include "qtn/circuit.hpp"
#include "qtn/ir.hpp"

using namespace qtn;
using Catch::Matchers::WithinAbs;
using oracle::Mat;

namespace {

struct Built {
  Circuit circuit;
  oracle::Sim sim;
};

/// Random circuit recorded both in the library and in the Kronecker oracle.
Built random_circuit(int n, int depth, std::mt19937_64& rng, bool split = false) {
  Built b{Circuit(n), oracle::Sim(n)};
  if (split) b.circuit.set_split(SplitConfig{});
  std::uniform_int_distribution<int> kind(0, 7), qubit(0, n - 1);
  std::uniform_real_distribution<double> angle(-3.0, 3.0);
  for (int layer = 0; layer < depth; ++layer)
    for (int g = 0; g < n; ++g) {
      const int q = qubit(rng);
      int r = qubit(rng);
      if (r == q) r = (q + 1) % n;
      const double t = angle(rng);
      switch (kind(rng)) {
        case 0: b.circuit.h(q); b.sim.op(oracle::H(), {q}); break;
        case 1: b.circuit.rx(q, t); b.sim.op(oracle::rot(oracle::X(), t), {q}); break;
        case 2: b.circuit.ry(q, t); b.sim.op(oracle::rot(oracle::Y(), t), {q}); break;
        case 3: b.circuit.rz(q, t); b.sim.op(oracle::rot(oracle::Z(), t), {q}); break;
        case 4: b.circuit.cnot(q, r); b.sim.op(oracle::CNOT(), {q, r}); break;
        case 5: b.circuit.cz(q, r); b.sim.op(oracle::CZ(), {q, r}); break;
        case 6:
          b.circuit.exp1({q, r}, t, gates::zz());
          b.sim.op(oracle::expm(oracle::scaled(oracle::kron(oracle::Z(), oracle::Z()), cplx(0, t))), {q, r});
          break;
        default:
          b.circuit.exp1({q, r}, t, gates::xx());
          b.sim.op(oracle::expm(oracle::scaled(oracle::kron(oracle::X(), oracle::X()), cplx(0, t))), {q, r});
          break;
      }
    }
  return b;
}

Circuit bell() {
  Circuit c(2);
  c.h(0).cnot(0, 1);
  return c;
}

}  // namespace

// ------------------------------------------------------------------ gates

TEST_CASE("rotation gates follow exp(-i theta sigma / 2)") {
  for (double t : {-2.1, 0.0, 0.4, 3.0}) {
    CHECK(oracle::max_diff(oracle::rot(oracle::X(), t).a, rotation_gate('x', t).data()) < 1e-12);
    CHECK(oracle::max_diff(oracle::rot(oracle::Y(), t).a, rotation_gate('y', t).data()) < 1e-12);
    CHECK(oracle::max_diff(oracle::rot(oracle::Z(), t).a, rotation_gate('z', t).data()) < 1e-12);
  }
  CHECK_THROWS_AS(rotation_gate('w', 0.1), InvalidArgument);
}

TEST_CASE("exp1 and exp agree with the matrix exponential") {
  const Mat xx = oracle::kron(oracle::X(), oracle::X());
  CHECK(oracle::max_diff(oracle::expm(oracle::scaled(xx, cplx(0, 0.3))).a, exp1_gate(0.3, gates::xx()).data()) <
        1e-12);
  // Hermitian generator that is not an involution.
  const ComplexTensor g = add(gates::xx(), kron(gates::z(), gates::i()), 0.5);
  const Mat gm = oracle::from_tensor(g);
  CHECK(oracle::max_diff(oracle::expm(oracle::scaled(gm, cplx(0, 0.7))).a, exp_gate(0.7, g).data()) < 1e-10);
  // Non-Hermitian but diagonalizable.
  const ComplexTensor nh = ComplexTensor::matrix({{1, 2}, {0, 3}});
  CHECK(oracle::max_diff(oracle::expm(oracle::scaled(oracle::from_tensor(nh), cplx(0, 0.2))).a,
                         exp_gate(0.2, nh).data()) < 1e-10);
  CHECK_THROWS_AS(exp1_gate(0.1, g), PreconditionError);
}

TEST_CASE("registry gates are unitary") {
  for (const char* name : {"i", "x", "y", "z", "h", "s", "t", "cnot", "cz", "swap"})
    CHECK(unitarity_defect(standard_gate(name)) < 1e-14);
  CHECK(find_gate("rx")->parameterized);
  CHECK_FALSE(find_gate("nope"));
}

TEST_CASE("multicontrol MPO applies the target only when controls match") {
  const QuOperator mpo = multicontrol_mpo({1, 0}, gates::x());
  const Mat dense = oracle::from_tensor(mpo.eval_matrix());
  // |1><1| (x) |0><0| (x) X + (I - |1><1| (x) |0><0|) (x) I
  const Mat p1 = Mat(2, {0, 0, 0, 1}), p0 = Mat(2, {1, 0, 0, 0});
  const Mat proj = oracle::kron(p1, p0);
  const Mat want = oracle::plus(oracle::kron(proj, oracle::X()),
                                oracle::kron(oracle::plus(Mat::eye(4), proj, -1.0), oracle::I2()));
  CHECK(oracle::max_diff(want, dense) < 1e-14);
  CHECK(mpo.element_count() <= 16 * 3);
}

// ---------------------------------------------------------------- circuit

TEST_CASE("contracted state matches the Kronecker oracle on random circuits") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + trial % 4;
    const bool split = trial % 2 == 1;
    Built b = random_circuit(n, 3, rng, split);
    CHECK(oracle::max_diff(b.sim.psi, b.circuit.state().data()) < 1e-10);
    CHECK(oracle::max_diff(b.sim.psi, b.circuit.simulate()) < 1e-10);
  }
}

TEST_CASE("amplitudes and the full unitary of the Bell-plus-rotation circuit") {
  Circuit c(2);
  c.h(0).cnot(0, 1).rx(1, 0.2);
  const Mat u = oracle::mul(oracle::embed(oracle::rot(oracle::X(), 0.2), {1}, 2),
                            oracle::mul(oracle::CNOT(), oracle::embed(oracle::H(), {0}, 2)));
  CHECK(oracle::max_diff(u, oracle::from_tensor(c.full_unitary())) < 1e-12);
  const auto psi = oracle::apply(u, oracle::basis(2));
  const char* bits[] = {"00", "01", "10", "11"};
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(c.amplitude(bits[i]) - psi[i]) < 1e-12);
  CHECK(std::abs(bell().amplitude("00") - 1 / std::sqrt(2.0)) < 1e-14);
  CHECK(std::abs(bell().amplitude("01")) < 1e-14);
  CHECK_THROWS_AS(c.amplitude("0"), InvalidArgument);
  CHECK_THROWS_AS(c.amplitude("0a"), InvalidArgument);
}

TEST_CASE("non-unitary matrices are applied without normalization") {
  Circuit c(1);
  c.unitary({0}, ComplexTensor::matrix({{1, 2}, {2, 3}}));
  const ComplexTensor s = c.state();
  CHECK(s[0] == cplx(1.0));
  CHECK(s[1] == cplx(2.0));
}

TEST_CASE("h twice is the identity and qubit checks fire") {
  Circuit c(1);
  c.h(0).h(0);
  CHECK(max_abs_diff(c.full_unitary(), ComplexTensor::identity(2)) < 1e-14);
  CHECK_THROWS_AS(c.h(1), InvalidArgument);
  CHECK_THROWS_AS(Circuit(2).cnot(0, 0), InvalidArgument);
  CHECK_THROWS_AS(Circuit(2).gate("cnot", {0}), DimensionError);
  CHECK_THROWS_AS(Circuit(2).gate("bogus", {0}), InvalidArgument);
}

TEST_CASE("expectation paths agree") {
  std::mt19937_64 rng(9);
  Built b = random_circuit(4, 3, rng);
  const Mat obs = oracle::kron(oracle::kron(oracle::X(), oracle::I2()), oracle::kron(oracle::Z(), oracle::Y()));
  const cplx want = oracle::vdot(b.sim.psi, oracle::apply(obs, b.sim.psi));
  const std::vector<ExpectationTerm> terms{{gates::x(), {0}}, {gates::z(), {2}}, {gates::y(), {3}}};
  CHECK(std::abs(b.circuit.expectation(terms, true) - want) < 1e-10);
  CHECK(std::abs(b.circuit.expectation(terms, false) - want) < 1e-10);
  CHECK(std::abs(b.circuit.expectation_ps({0}, {3}, {2}) - want) < 1e-10);
  CHECK(std::abs(bell().expectation_ps({}, {}, {0, 1}) - 1.0) < 1e-12);
  CHECK(std::abs(bell().expectation({}) - 1.0) < 1e-12);
  CHECK_THROWS_AS(bell().expectation_ps({0}, {}, {0}), InvalidArgument);
}

TEST_CASE("sampling draws Born outcomes without collapsing") {
  StatusSource rng(5);
  const Circuit b = bell();
  int zeros = 0;
  for (int i = 0; i < 10000; ++i) {
    const SampleResult r = b.sample(rng);
    REQUIRE((r.bits == "00" || r.bits == "11"));
    CHECK_THAT(r.probability, WithinAbs(0.5, 1e-12));
    zeros += r.bits == "00";
  }
  CHECK(zeros >= 4700);
  CHECK(zeros <= 5300);
  Circuit d(2);
  d.x(0);
  const SampleResult r = d.sample(rng);
  CHECK(r.bits == "10");
  CHECK(r.probability == 1.0);
  Circuit empty(1);
  empty.post_select(0, 1);
  CHECK_THROWS_AS(empty.sample(rng), PreconditionError);
}

TEST_CASE("post-selection leaves the state unnormalized") {
  const double s = 1 / std::sqrt(2.0);
  Circuit c = Circuit::with_dense_input(2, ComplexTensor::vector({s, 0, 0, s}));
  c.post_select(0, 1);
  const ComplexTensor psi = c.state();
  const std::vector<cplx> want{0, 0, 0, s};
  CHECK(oracle::max_diff(want, psi.data()) < 1e-12);
  Circuit m(1);
  m.post_select(0, 1);
  CHECK(std::abs(m.state()[0]) + std::abs(m.state()[1]) == 0.0);
  CHECK_THROWS_AS(Circuit(1).post_select(0, 2), InvalidArgument);
}

TEST_CASE("mid-circuit measurement collapses and feeds conditional gates") {
  Circuit c(2);
  c.h(0).cnot(0, 1);
  const int bit = c.cond_measure_status(0, 0.9);  // p(0) = 1/2, so outcome 1
  CHECK(c.bit_value(bit) == 1);
  c.conditional_gate(bit, {gates::i(), gates::x()}, 1);
  const ComplexTensor psi = c.state();
  CHECK(std::abs(psi[2] - cplx(1.0)) < 1e-12);
  CHECK_THROWS_AS(c.bit_value(7), InvalidArgument);
}

TEST_CASE("teleportation transfers random states with unit fidelity") {
  StatusSource rng(17);
  for (int i = 0; i < 5; ++i) {
    const cplx a(rng.normal(), rng.normal()), b(rng.normal(), rng.normal());
    CHECK_THAT(teleportation_fidelity(a, b, rng), WithinAbs(1.0, 1e-10));
  }
}

TEST_CASE("MPS input and MPO expectation worked examples") {
  std::vector<ComplexTensor> sites(3, ComplexTensor::vector({0.0, 1.0}));
  Circuit c = Circuit::with_mps_input(3, QuVector::from_mps(sites));
  c.x(0);
  CHECK(std::abs(c.expectation_ps({}, {}, {0}) - 1.0) < 1e-12);
  CHECK(std::abs(c.expectation_ps({}, {}, {0}, false) - 1.0) < 1e-12);

  Network net;
  const EdgeId o0 = net.add_edge(2), i0 = net.add_edge(2), o1 = net.add_edge(2), i1 = net.add_edge(2);
  net.add_node(gates::z(), {o0, i0});
  net.add_node(gates::z(), {o1, i1});
  const QuOperator zz(std::move(net), {o0, o1}, {i0, i1});
  Circuit d(2);
  d.x(0);
  CHECK(std::abs(d.expectation_quop(zz) - (-1.0)) < 1e-12);
}

TEST_CASE("circuit quvector and append") {
  Circuit a(2), b(2);
  a.h(0);
  b.cnot(0, 1);
  const Circuit ab = append(a, b);
  CHECK(max_abs_diff(ab.state(), bell().state()) < 1e-14);
  CHECK(max_abs_diff(reshape(ab.quvector().eval(), {4}), bell().state()) < 1e-14);
  CHECK_THROWS_AS(append(Circuit(2), Circuit(3)), DimensionError);
}

TEST_CASE("unitary mixtures pick the branch named by the status") {
  Circuit c(1);
  const int branch = c.mc_unitary_kraus({gates::i(), gates::x()}, {0.25, 0.75}, {0}, 0.5);
  CHECK(branch == 1);
  CHECK(std::abs(c.state()[1] - cplx(1.0)) < 1e-14);
  CHECK_THROWS_AS(c.mc_unitary_kraus({gates::i(), gates::x()}, {0.5, 0.6}, {0}, 0.5), InvalidArgument);
  CHECK_THROWS_AS(c.mc_unitary_kraus({gates::i(), gates::x()}, {0.5, 0.5}, {0}, 1.5), InvalidArgument);
}

// --------------------------------------------------------------------- ir

TEST_CASE("circuits round-trip through JSON") {
  std::mt19937_64 rng(13);
  Built b = random_circuit(3, 3, rng, true);
  b.circuit.mc_unitary_kraus({gates::i(), gates::z()}, {0.5, 0.5}, {1}, 0.7);
  b.circuit.multicontrol({0, 2}, {1}, gates::x());
  const Json doc = to_ir(b.circuit);
  const Circuit back = from_ir(doc);
  CHECK(max_abs_diff(back.state(), b.circuit.state()) < 1e-12);
  CHECK(to_ir(back) == doc);
  CHECK(from_ir_string(doc.dump()).ops().size() == b.circuit.ops().size());
}

TEST_CASE("empty circuit serializes minimally") {
  CHECK(to_ir(Circuit(3)).dump() == R"({"n":3,"ops":[]})");
  CHECK(from_ir(Json::parse(R"({"version":"1","n":3,"ops":[]})")).n() == 3);
}

TEST_CASE("schema errors name the offending field") {
  const auto path_of = [](const std::string& text) {
    try {
      from_ir_string(text);
    } catch (const SchemaError& e) {
      return e.path();
    }
    return std::string("no error");
  };
  CHECK(path_of(R"({"n":1,"ops":[{"kind":"gate","name":"h","qubits":[0]},{"kind":"gate","name":"bad","qubits":[0]}]})") ==
        "ops[1].name");
  CHECK(path_of(R"({"n":1})") == "$.ops");
  CHECK(path_of(R"({"n":"x","ops":[]})") == "n");
  CHECK(path_of(R"({"version":"2","n":1,"ops":[]})") == "version");
  CHECK(path_of(R"({"n":1,"ops":[{"kind":"gate","name":"rx","qubits":[0],"params":{"theta":"a"}}]})") ==
        "ops[0].params.theta");
  CHECK(path_of("{not json") == "$");
  CHECK(path_of(R"({"n":1,"ops":[{"kind":"gate","name":"h","qubits":[3]}]})") == "ops[0]");
}

TEST_CASE("Hamiltonian files round-trip") {
  const WeightedPauliSum h = tfim_hamiltonian(3, {1.0, 0.5}, {0.2, 0.3, 0.4});
  const WeightedPauliSum back = hamiltonian_from_json(hamiltonian_to_json(h));
  REQUIRE(back.terms.size() == h.terms.size());
  for (std::size_t t = 0; t < h.terms.size(); ++t) {
    CHECK(back.terms[t].structure == h.terms[t].structure);
    CHECK(back.terms[t].weight == h.terms[t].weight);
  }
  CHECK_THROWS_AS(hamiltonian_from_string(R"({"n":2,"terms":[{"structure":[1],"weight":[1,0]}]})"), SchemaError);
  CHECK_THROWS_AS(hamiltonian_from_string(R"({"n":1,"terms":[{"structure":[5],"weight":1}]})"), SchemaError);
}

TEST_CASE("draw shows one row per qubit") {
  const std::string d = draw(bell());
  CHECK(std::count(d.begin(), d.end(), '\n') == 2);
  CHECK(d.find("h") != std::string::npos);
  CHECK(d.find("cnot#1") != std::string::npos);
}
