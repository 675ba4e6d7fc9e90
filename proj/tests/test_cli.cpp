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

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "oracles.hpp"

#ifndef QSIM_PATH
#error "QSIM_PATH must point at the qsim executable"
#endif
#ifndef QTN_TEST_DATA
#error "QTN_TEST_DATA must point at tests/data"
#endif

using nlohmann::json;
using Catch::Matchers::WithinAbs;

namespace {

struct Result {
  int code;
  std::string out;
};

Result qsim(const std::string& args) {
  const std::string cmd = std::string(QSIM_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  std::string out;
  char buf[4096];
  while (const std::size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string data(const std::string& name) { return std::string(QTN_TEST_DATA) + "/" + name; }

/// Reference energy of layered3.json under tfim3.json, from the oracle.
double layered3_tfim3() {
  oracle::Sim sim(3);
  sim.op(oracle::rot(oracle::Y(), 0.3), {0})
      .op(oracle::rot(oracle::Y(), -0.8), {1})
      .op(oracle::rot(oracle::Y(), 1.1), {2})
      .op(oracle::CNOT(), {0, 1})
      .op(oracle::CNOT(), {1, 2})
      .op(oracle::rot(oracle::X(), 0.5), {0})
      .op(oracle::rot(oracle::Z(), 0.9), {2});
  oracle::Mat h(8);
  h = oracle::plus(h, oracle::pauli_string({1, 1, 0}), 1.0);
  h = oracle::plus(h, oracle::pauli_string({0, 1, 1}), 0.8);
  h = oracle::plus(h, oracle::pauli_string({3, 0, 0}), -0.5);
  h = oracle::plus(h, oracle::pauli_string({0, 3, 0}), -0.5);
  h = oracle::plus(h, oracle::pauli_string({0, 0, 3}), -0.5);
  return oracle::vdot(sim.psi, oracle::apply(h, sim.psi)).real();
}

}  // namespace

TEST_CASE("run samples the Bell state deterministically") {
  const Result a = qsim("run " + data("bell.json") + " --shots 200 --seed 4 --state");
  REQUIRE(a.code == 0);
  const json j = json::parse(a.out);
  CHECK_THAT(j["norm_squared"].get<double>(), WithinAbs(1.0, 1e-12));
  int total = 0;
  for (const auto& s : j["samples"]) {
    const std::string bits = s["bitstring"];
    CHECK((bits == "00" || bits == "11"));
    CHECK_THAT(s["probability"].get<double>(), WithinAbs(0.5, 1e-12));
    total += s["count"].get<int>();
  }
  CHECK(total == 200);
  CHECK(j["state"].size() == 4);
  CHECK(qsim("run " + data("bell.json") + " --shots 200 --seed 4 --state").out == a.out);
}

TEST_CASE("expect agrees across representations") {
  const double want = layered3_tfim3();
  for (const char* repr : {"dense", "sparse", "mpo", "loop"}) {
    const Result r = qsim("expect " + data("layered3.json") + " " + data("tfim3.json") + " --repr " + repr);
    REQUIRE(r.code == 0);
    CHECK_THAT(json::parse(r.out)["value"].get<double>(), WithinAbs(want, 1e-10));
  }
  CHECK(qsim("expect " + data("layered3.json") + " " + data("zz3.json") + " --repr mpo").code == 1);
  CHECK(qsim("expect " + data("layered3.json") + " " + data("zz3.json") + " --repr dense").code == 0);
  CHECK(qsim("expect " + data("bell.json") + " " + data("tfim3.json") + " --repr dense").code == 1);
}

TEST_CASE("schema errors exit with code 2") {
  CHECK(qsim("run " + data("bad_gate.json")).code == 2);
  CHECK(qsim("draw " + data("bad_gate.json")).code == 2);
  CHECK(qsim("expect " + data("bell.json") + " " + data("bell.json")).code == 2);
}

TEST_CASE("other failures exit with code 1") {
  CHECK(qsim("run " + data("missing.json")).code == 1);
  CHECK(qsim("vqe --n 4 --schedule sgd:3 --steps 1").code == 1);
}

TEST_CASE("experiment commands are reproducible") {
  const std::string vqe = "vqe --n 4 --layers 1 --steps 5 --restarts 2 --seed 3 --workers 2";
  const Result a = qsim(vqe), b = qsim(vqe);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const json v = json::parse(a.out);
  CHECK(v["command"] == "vqe");

  const std::string bp = "bp --qubits 4 --layers 2 --circuits 8 --seed 1";
  const Result c = qsim(bp);
  REQUIRE(c.code == 0);
  CHECK(c.out == qsim(bp + " --workers 3").out);
  CHECK(json::parse(c.out)["gradients"].size() == 8);

  const std::string bench = "bench --n 6 --depth 2 --minimize write --rounds 2 --subtree 4 --seed 5";
  const Result d = qsim(bench);
  REQUIRE(d.code == 0);
  CHECK(d.out == qsim(bench).out);
  const json bj = json::parse(d.out);
  CHECK(bj["optimized"]["write"].get<double>() <= bj["greedy"]["write"].get<double>());
}

TEST_CASE("bench reports a timeout with exit code 3") {
  const Result r = qsim("bench --n 6 --depth 2 --rounds 5 --max-time 0");
  CHECK(r.code == 3);
  CHECK(json::parse(r.out)["timed_out"] == true);
}

TEST_CASE("draw and --out") {
  const Result d = qsim("draw " + data("bell.json"));
  REQUIRE(d.code == 0);
  CHECK(json::parse(d.out)["diagram"].get<std::string>().find("cnot") != std::string::npos);

  const std::string path = "qsim_out_test.json";
  std::remove(path.c_str());
  REQUIRE(qsim("--out " + path + " draw " + data("bell.json")).code == 0);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == d.out);
  std::remove(path.c_str());
}

TEST_CASE("argument validation rejects out-of-range values") {
  CHECK(qsim("vqe --n 40").code != 0);
  CHECK(qsim("bench --depth 12").code != 0);
  CHECK(qsim("bp --observable xx").code != 0);
}
