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

// qsim: command line front end. Every subcommand prints one JSON report.
// Exit codes: 0 success, 1 usage or runtime error, 2 schema error, 3 timeout.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qtn/apps.hpp"
#include "qtn/ir.hpp"
#include "qtn/pauli.hpp"

namespace {

constexpr int kExitError = 1;
constexpr int kExitSchema = 2;
constexpr int kExitTimeout = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qtn::InvalidArgument("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const qtn::Json& report, const std::string& out_path) {
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw qtn::InvalidArgument("cannot write '" + out_path + "'");
  out << text;
}

qtn::Json run_command(const std::string& circuit_path, int shots, std::uint64_t seed, bool with_state) {
  const qtn::Circuit c = qtn::from_ir_string(read_file(circuit_path));
  qtn::Json report{{"command", "run"}, {"n", c.n()}, {"shots", shots}, {"seed", seed}};
  const qtn::ComplexTensor psi = c.state();
  double norm = 0.0;
  for (const auto& a : psi.data()) norm += std::norm(a);
  report["norm_squared"] = norm;
  if (with_state) report["state"] = qtn::ir::complex_list(psi.data());
  qtn::StatusSource rng(seed);
  std::map<std::string, int> counts;
  std::map<std::string, double> probs;
  for (int s = 0; s < shots; ++s) {
    const qtn::SampleResult r = c.sample(rng);
    ++counts[r.bits];
    probs[r.bits] = r.probability;
  }
  qtn::Json samples = qtn::Json::array();
  for (const auto& [bits, count] : counts)
    samples.push_back({{"bitstring", bits}, {"count", count}, {"probability", probs[bits]}});
  report["samples"] = samples;
  return report;
}

qtn::Json expect_command(const std::string& circuit_path, const std::string& ham_path, const std::string& repr) {
  const qtn::Circuit c = qtn::from_ir_string(read_file(circuit_path));
  const qtn::WeightedPauliSum h = qtn::hamiltonian_from_string(read_file(ham_path));
  if (h.n != c.n())
    throw qtn::DimensionError("Hamiltonian acts on " + std::to_string(h.n) + " qubits, circuit has " +
                              std::to_string(c.n()));
  qtn::OperatorExpectation e;
  if (repr == "dense") {
    e = qtn::operator_expectation(c, qtn::sum_to_dense(h));
  } else if (repr == "sparse") {
    e = qtn::operator_expectation(c, qtn::sum_to_coo(h));
  } else if (repr == "mpo") {
    const auto tfim = qtn::tfim_couplings(h);
    if (!tfim) throw qtn::InvalidArgument("the mpo representation supports only TFIM-shaped Hamiltonians");
    e = qtn::operator_expectation(c, qtn::tfim_mpo(h.n, tfim->j, tfim->h));
  } else {
    e = qtn::operator_expectation(c, h);
  }
  return {{"command", "expect"}, {"repr", repr}, {"n", c.n()}, {"terms", h.terms.size()},
          {"value", e.value},    {"imag", e.imag}};
}

long parse_schedule(const std::string& schedule) {
  if (schedule.empty()) return -1;
  const std::string prefix = "adam-sgd:";
  if (schedule.rfind(prefix, 0) != 0)
    throw qtn::InvalidArgument("schedule must look like adam-sgd:STEP, got '" + schedule + "'");
  try {
    std::size_t used = 0;
    const long step = std::stol(schedule.substr(prefix.size()), &used);
    if (used != schedule.size() - prefix.size() || step < 0) throw std::invalid_argument("step");
    return step;
  } catch (const std::logic_error&) {
    throw qtn::InvalidArgument("schedule step must be a non-negative integer, got '" + schedule + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qsim: tensor network quantum circuit simulator"};
  app.require_subcommand(1);
  std::string out_path;
  app.add_option("--out", out_path, "Write the JSON report to this file instead of stdout");

  std::string circuit_path, ham_path, repr = "sparse";
  int shots = 0;
  std::uint64_t seed = 0;
  bool with_state = false;

  auto* run = app.add_subcommand("run", "Simulate a circuit and draw samples");
  run->add_option("circuit", circuit_path, "Circuit JSON")->required();
  run->add_option("--shots", shots, "Number of samples")->check(CLI::NonNegativeNumber);
  run->add_option("--seed", seed, "Sampling seed");
  run->add_flag("--state", with_state, "Include the output amplitudes");

  auto* expect = app.add_subcommand("expect", "Expectation of a Pauli-sum Hamiltonian");
  expect->add_option("circuit", circuit_path, "Circuit JSON")->required();
  expect->add_option("hamiltonian", ham_path, "Hamiltonian JSON")->required();
  expect->add_option("--repr", repr, "Operator representation")
      ->check(CLI::IsMember({"dense", "sparse", "mpo", "loop"}));

  qtn::VQEConfig vqe_cfg;
  std::string optimizer = "adam", schedule;
  auto* vqe = app.add_subcommand("vqe", "TFIM variational eigensolver");
  vqe->set_help_flag("--help", "Print this help message and exit");
  vqe->add_option("--n", vqe_cfg.n, "Qubits")->check(CLI::Range(2, 12));
  vqe->add_option("--layers", vqe_cfg.k, "Ansatz layers")->check(CLI::PositiveNumber);
  vqe->add_option("--steps", vqe_cfg.steps, "Optimizer steps")->check(CLI::NonNegativeNumber);
  vqe->add_option("--optimizer", optimizer, "sgd or adam")->check(CLI::IsMember({"sgd", "adam"}));
  vqe->add_option("--lr", vqe_cfg.learning_rate, "Learning rate");
  vqe->add_option("--restarts", vqe_cfg.restarts, "Batched parameter rows")->check(CLI::PositiveNumber);
  vqe->add_option("--seed", vqe_cfg.seed, "Initialization seed");
  vqe->add_option("--J", vqe_cfg.j, "Coupling");
  vqe->add_option("--h", vqe_cfg.h, "Transverse field");
  vqe->add_option("--init-scale", vqe_cfg.init_scale, "Std. deviation of the initial parameters");
  vqe->add_option("--schedule", schedule, "adam-sgd:STEP switches from Adam to SGD after STEP steps");
  vqe->add_option("--workers", vqe_cfg.workers, "Worker threads (0 = all cores)");

  int bp_qubits = 4, bp_layers = 10, bp_circuits = 200;
  unsigned workers = 0;
  std::string observable = "zz";
  auto* bp = app.add_subcommand("bp", "Gradient variance of random circuits");
  bp->add_option("--qubits", bp_qubits, "Qubits")->check(CLI::Range(2, 16));
  bp->add_option("--layers", bp_layers, "Layers")->check(CLI::PositiveNumber);
  bp->add_option("--circuits", bp_circuits, "Random circuits")->check(CLI::PositiveNumber);
  bp->add_option("--seed", seed, "Seed");
  bp->add_option("--observable", observable, "zz or global")->check(CLI::IsMember({"zz", "global"}));
  bp->add_option("--workers", workers, "Worker threads (0 = all cores)");

  qtn::BenchConfig bench_cfg;
  std::string minimize = "combo";
  bool no_contract = false, timing = false;
  auto* bench = app.add_subcommand("bench", "Contraction path benchmark on the layered ZZ testbed");
  bench->add_option("--n", bench_cfg.n, "Qubits")->check(CLI::Range(2, 60));
  bench->add_option("--depth", bench_cfg.depth, "Layers")->check(CLI::Range(1, 8));
  bench->add_option("--minimize", minimize, "Metric for reconfiguration")
      ->check(CLI::IsMember({"flops", "write", "size", "combo"}));
  bench->add_option("--max-time", bench_cfg.max_time, "Time budget in seconds");
  bench->add_option("--rounds", bench_cfg.reconfigure_rounds, "Subtree reconfiguration rounds")
      ->check(CLI::NonNegativeNumber);
  bench->add_option("--subtree", bench_cfg.subtree_size, "Subtree size")->check(CLI::Range(2, 16));
  bench->add_option("--seed", bench_cfg.seed, "Reconfiguration seed");
  bench->add_flag("--no-contract", no_contract, "Only search for a path");
  bench->add_flag("--timing", timing, "Report the search time");

  auto* draw = app.add_subcommand("draw", "Text diagram of a circuit");
  draw->add_option("circuit", circuit_path, "Circuit JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    qtn::Json report;
    int code = 0;
    if (*run) {
      report = run_command(circuit_path, shots, seed, with_state);
    } else if (*expect) {
      report = expect_command(circuit_path, ham_path, repr);
    } else if (*vqe) {
      vqe_cfg.optimizer = qtn::parse_optimizer(optimizer);
      vqe_cfg.switch_to_sgd = parse_schedule(schedule);
      report = qtn::to_json(qtn::vqe_run(vqe_cfg));
    } else if (*bp) {
      report = qtn::to_json(qtn::barren_plateau_experiment(bp_qubits, bp_layers, bp_circuits, seed,
                                                           qtn::parse_bp_observable(observable), workers));
    } else if (*bench) {
      bench_cfg.minimize = qtn::parse_metric(minimize);
      bench_cfg.contract = !no_contract;
      const qtn::BenchReport r = qtn::contraction_benchmark(bench_cfg);
      report = qtn::to_json(r, timing);
      if (r.timed_out) code = kExitTimeout;
    } else if (*draw) {
      const qtn::Circuit c = qtn::from_ir_string(read_file(circuit_path));
      report = {{"command", "draw"}, {"n", c.n()}, {"diagram", qtn::draw(c)}};
    }
    emit(report, out_path);
    return code;
  } catch (const qtn::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const qtn::TimeoutError& e) {
    std::cerr << "timeout: " << e.what() << "\n";
    return kExitTimeout;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
