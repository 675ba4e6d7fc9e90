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

#include <chrono>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "qtn/batch.hpp"
#include "qtn/diff.hpp"
#include "qtn/ir.hpp"
#include "qtn/optim.hpp"
#include "qtn/pauli.hpp"

namespace qtn {

inline std::size_t s4_param_count(int n, int k) { return static_cast<std::size_t>(k) * static_cast<std::size_t>(3 * n - 1); }

/// Layered ansatz: per layer, exp1(XX) on each neighbouring pair, then Rz and
/// Rx on every qubit. Layer j uses params[j(3n-1) + ...] in that order.
inline Circuit build_s4_ansatz(int n, int k, const ParamVector& params) {
  if (n < 2 || k < 0) throw InvalidArgument("ansatz needs n >= 2 and k >= 0");
  if (params.size() != s4_param_count(n, k))
    throw DimensionError("ansatz expects " + std::to_string(s4_param_count(n, k)) + " parameters, got " +
                         std::to_string(params.size()));
  Circuit c(n);
  const ComplexTensor xx = gates::xx();
  for (int j = 0; j < k; ++j) {
    const auto base = static_cast<std::size_t>(j * (3 * n - 1));
    for (int i = 0; i + 1 < n; ++i) c.exp1({i, i + 1}, params[base + static_cast<std::size_t>(i)], xx);
    for (int i = 0; i < n; ++i) c.rz(i, params[base + static_cast<std::size_t>(n - 1 + i)]);
    for (int i = 0; i < n; ++i) c.rx(i, params[base + static_cast<std::size_t>(2 * n - 1 + i)]);
  }
  return c;
}

inline double exact_ground_energy(const WeightedPauliSum& h) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_eigen(sum_to_dense(h)), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------- VQE

struct VQEConfig {
  int n = 6;
  int k = 2;
  double j = 1.0;
  double h = 1.0;
  OptimizerKind optimizer = OptimizerKind::adam;
  double learning_rate = 2e-2;
  long switch_to_sgd = -1;
  int steps = 200;
  int restarts = 1;
  std::uint64_t seed = 0;
  double init_scale = 1.0;
  unsigned workers = 0;
};

struct VQEReport {
  VQEConfig config;
  std::vector<std::vector<double>> energies;  ///< [restart][step], energy before each update
  std::vector<double> final_energies;
  double best_energy = 0.0;
  int best_restart = 0;
  double exact_energy = 0.0;
  std::vector<double> best_params;

  double relative_error() const { return std::abs((best_energy - exact_energy) / exact_energy); }
};

inline std::vector<double> initial_params(std::size_t count, std::uint64_t seed, std::uint64_t row, double scale) {
  StatusSource src = StatusSource(seed).substream(row);
  std::vector<double> p(count);
  for (double& v : p) v = scale * src.normal();
  return p;
}

/// TFIM VQE with `restarts` independent parameter rows optimized jointly
/// through the batched gradient.
inline VQEReport vqe_run(const VQEConfig& cfg) {
  if (cfg.n < 2 || cfg.k < 1 || cfg.steps < 0 || cfg.restarts < 1)
    throw InvalidArgument("vqe: need n >= 2, layers >= 1, steps >= 0, restarts >= 1");
  const WeightedPauliSum ham = tfim_hamiltonian(cfg.n, std::vector<double>(static_cast<std::size_t>(cfg.n - 1), cfg.j),
                                                std::vector<double>(static_cast<std::size_t>(cfg.n), cfg.h));
  const int n = cfg.n;
  const int k = cfg.k;
  const EnergyFunction f{[n, k](const ParamVector& p) { return build_s4_ansatz(n, k, p); }, ham};
  const std::size_t count = s4_param_count(n, k);

  VQEReport report;
  report.config = cfg;
  std::vector<std::vector<double>> rows;
  std::vector<OptimizerState> opts;
  for (int r = 0; r < cfg.restarts; ++r) {
    rows.push_back(initial_params(count, cfg.seed, static_cast<std::uint64_t>(r), cfg.init_scale));
    OptimizerState s;
    s.kind = cfg.optimizer;
    s.learning_rate = cfg.learning_rate;
    s.switch_to_sgd = cfg.switch_to_sgd;
    opts.push_back(s);
  }
  report.energies.assign(static_cast<std::size_t>(cfg.restarts), {});
  for (int step = 0; step < cfg.steps; ++step) {
    const VectorizedValueAndGrad vg = batched_circuit_params(f, rows, cfg.workers);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      report.energies[r].push_back(vg.values[r]);
      rows[r] = optimizer_step(opts[r], std::move(rows[r]), vg.grads.at(0)[r]);
    }
  }
  BatchSpec spec{{0}, {}, false, cfg.workers};
  report.final_energies = vmap_apply([&](const std::vector<double>& x) { return evaluate(f, x); }, spec, batched(rows));
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (report.final_energies[r] < report.final_energies[static_cast<std::size_t>(report.best_restart)])
      report.best_restart = static_cast<int>(r);
  report.best_energy = report.final_energies[static_cast<std::size_t>(report.best_restart)];
  report.best_params = rows[static_cast<std::size_t>(report.best_restart)];
  report.exact_energy = cfg.n <= kPauliDenseCap ? exact_ground_energy(ham) : std::nan("");
  return report;
}

inline Json to_json(const VQEReport& r) {
  return Json{{"command", "vqe"},
              {"n", r.config.n},
              {"layers", r.config.k},
              {"J", r.config.j},
              {"h", r.config.h},
              {"optimizer", optimizer_name(r.config.optimizer)},
              {"lr", r.config.learning_rate},
              {"switch_to_sgd", r.config.switch_to_sgd},
              {"init_scale", r.config.init_scale},
              {"steps", r.config.steps},
              {"restarts", r.config.restarts},
              {"seed", r.config.seed},
              {"best_energy", r.best_energy},
              {"best_restart", r.best_restart},
              {"exact_energy", r.exact_energy},
              {"relative_error", r.relative_error()},
              {"final_energies", r.final_energies},
              {"energies", r.energies},
              {"best_params", r.best_params}};
}

// ------------------------------------------------------- barren plateaus

/// Cost whose gradient is sampled: <Z0 Z1> or the global <Z...Z>.
enum class BpObservable { zz, global_z };

inline BpObservable parse_bp_observable(const std::string& name) {
  if (name == "zz") return BpObservable::zz;
  if (name == "global") return BpObservable::global_z;
  throw InvalidArgument("unknown barren plateau observable '" + name + "' (expected zz or global)");
}

struct BarrenPlateauReport {
  int n_qubits = 0;
  int n_layers = 0;
  int n_circuits = 0;
  std::uint64_t seed = 0;
  BpObservable observable = BpObservable::zz;
  std::vector<double> gradients;  ///< d<O>/d params[0,0], one per circuit
  double mean = 0.0;
  double variance = 0.0;  ///< population variance
};

/// Random circuit: an Ry(pi/4) layer, then per layer one of Rx/Ry/Rz
/// (chosen by status) on every qubit followed by a CZ ladder. params and
/// statuses have shape [n_qubits, n_layers]; parameter (i, l) is slot
/// i * n_layers + l.
inline Circuit random_structure_circuit(int n, int layers, const ParamVector& params,
                                        const std::vector<double>& statuses) {
  Circuit c(n);
  const auto idx = [&](int i, int l) { return static_cast<std::size_t>(i * layers + l); };
  const std::vector<double> third(3, 1.0 / 3.0);
  for (int i = 0; i < n; ++i) c.ry(i, std::numbers::pi / 4);
  for (int l = 0; l < layers; ++l) {
    for (int i = 0; i < n; ++i) {
      const Param p = params[idx(i, l)];
      c.unitary_kraus({{"rx", {i}, {{"theta", p}}}, {"ry", {i}, {{"theta", p}}}, {"rz", {i}, {{"theta", p}}}},
                      third, statuses[idx(i, l)]);
    }
    for (int i = 0; i + 1 < n; ++i) c.cz(i, i + 1);
  }
  return c;
}

inline BarrenPlateauReport barren_plateau_experiment(int n, int layers, int circuits, std::uint64_t seed,
                                                     BpObservable observable = BpObservable::zz,
                                                     unsigned workers = 0) {
  if (n < 2 || layers < 1 || circuits < 1) throw InvalidArgument("barren plateau: need n >= 2 and positive counts");
  WeightedPauliSum zz{n, {}};
  PauliStructure s(static_cast<std::size_t>(n), 0);
  if (observable == BpObservable::global_z) std::fill(s.begin(), s.end(), 3);
  s[0] = s[1] = 3;
  zz.add(s, 1.0);
  const std::size_t count = static_cast<std::size_t>(n * layers);
  std::vector<std::size_t> index(static_cast<std::size_t>(circuits));
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
  BarrenPlateauReport rep{n, layers, circuits, seed, observable, {}, 0.0, 0.0};
  BatchSpec spec{{0}, {}, false, workers};
  const StatusSource root(seed);
  rep.gradients = vmap_apply(
      [&](std::size_t i) {
        StatusSource src = root.substream(i);
        std::vector<double> params(count), statuses(count);
        for (double& v : params) v = 2 * std::numbers::pi * src.uniform();
        for (double& v : statuses) v = src.uniform();
        const EnergyFunction f{[&](const ParamVector& p) { return random_structure_circuit(n, layers, p, statuses); }, zz};
        return value_and_grad(f, params).grad[0];
      },
      spec, batched(index));
  for (double g : rep.gradients) rep.mean += g;
  rep.mean /= static_cast<double>(circuits);
  for (double g : rep.gradients) rep.variance += (g - rep.mean) * (g - rep.mean);
  rep.variance /= static_cast<double>(circuits);
  return rep;
}

inline Json to_json(const BarrenPlateauReport& r) {
  return Json{{"command", "bp"},
              {"qubits", r.n_qubits},
              {"layers", r.n_layers},
              {"circuits", r.n_circuits},
              {"seed", r.seed},
              {"observable", r.observable == BpObservable::zz ? "zz" : "global"},
              {"mean", r.mean},
              {"variance", r.variance},
              {"gradients", r.gradients}};
}

// ------------------------------------------------- contraction benchmark

/// Testbed circuit: d layers of exp1(ZZ, theta=1) on neighbouring pairs
/// followed by Rx(1) on every qubit, with two-qubit gates split by SVD.
inline Circuit testbed_circuit(int n, int d) {
  Circuit c(n);
  const ComplexTensor zz = gates::zz();
  for (int layer = 0; layer < d; ++layer) {
    for (int i = 0; i + 1 < n; ++i) c.exp1({i, i + 1}, 1.0, zz);
    for (int i = 0; i < n; ++i) c.rx(i, 1.0);
  }
  c.set_split(SplitConfig{});
  return c;
}

struct BenchConfig {
  int n = 40;
  int depth = 6;
  Metric minimize = Metric::combo;
  int reconfigure_rounds = 0;
  int subtree_size = 8;
  std::uint64_t seed = 0;
  double max_time = 300.0;  ///< seconds
  bool contract = true;
};

struct BenchReport {
  BenchConfig config;
  std::size_t raw_nodes = 0;
  std::size_t nodes = 0;  ///< after preprocessing
  PathMetrics greedy;
  PathMetrics optimized;
  int rounds_done = 0;
  std::optional<double> value;  ///< <Z_{n/2}>
  bool timed_out = false;
  double search_seconds = 0.0;
};

/// Builds the <Z_{n/2}> sandwich of the testbed, preprocesses it, finds a
/// greedy path, optionally reconfigures it and contracts. When `max_time`
/// runs out the partial report has timed_out set.
inline BenchReport contraction_benchmark(const BenchConfig& cfg) {
  if (cfg.n < 2 || cfg.n > 60 || cfg.depth < 1 || cfg.depth > 8)
    throw InvalidArgument("bench: need 2 <= n <= 60 and 1 <= depth <= 8");
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  BenchReport rep;
  rep.config = cfg;
  const Circuit c = testbed_circuit(cfg.n, cfg.depth);
  const Network raw = c.expectation_network({{gates::z(), {cfg.n / 2}}});
  rep.raw_nodes = raw.node_count();
  const Network net = preprocess_absorb(raw);
  rep.nodes = net.node_count();
  ContractionPath path = greedy_path(net);
  rep.greedy = path_metrics(net, path);
  rep.optimized = rep.greedy;
  for (int r = 0; r < cfg.reconfigure_rounds; ++r) {
    if (elapsed() > cfg.max_time) {
      rep.timed_out = true;
      break;
    }
    path = subtree_reconfigure(net, path, cfg.subtree_size, 1, cfg.minimize, cfg.seed + static_cast<std::uint64_t>(r));
    ++rep.rounds_done;
  }
  rep.optimized = path_metrics(net, path);
  rep.search_seconds = elapsed();
  if (cfg.contract && !rep.timed_out) {
    if (elapsed() > cfg.max_time) rep.timed_out = true;
    else rep.value = contract_with_path(net, path)[0].real();
  }
  return rep;
}

inline Json metrics_json(const PathMetrics& m) {
  return Json{{"flops", m.flops},           {"write", m.write},           {"size", m.size},
              {"log10_flops", m.log10_flops}, {"log2_write", m.log2_write}, {"log2_size", m.log2_size}};
}

/// Wall-clock search time is included only on request so that reports for
/// a fixed seed stay byte-identical.
inline Json to_json(const BenchReport& r, bool with_timing = false) {
  Json j{{"command", "bench"},
         {"n", r.config.n},
         {"depth", r.config.depth},
         {"minimize", metric_name(r.config.minimize)},
         {"reconfigure_rounds", r.config.reconfigure_rounds},
         {"rounds_done", r.rounds_done},
         {"raw_nodes", r.raw_nodes},
         {"nodes", r.nodes},
         {"greedy", metrics_json(r.greedy)},
         {"optimized", metrics_json(r.optimized)},
         {"timed_out", r.timed_out}};
  j["value"] = r.value ? Json(*r.value) : Json(nullptr);
  if (with_timing) j["search_seconds"] = r.search_seconds;
  return j;
}

// --------------------------------------------------------- teleportation

/// Teleports alpha|0> + beta|1> from qubit 0 to qubit 2 with mid-circuit
/// measurements and classically controlled corrections; returns the
/// fidelity <phi|rho_2|phi> of the received state.
inline double teleportation_fidelity(cplx alpha, cplx beta, StatusSource& rng) {
  const double norm = std::sqrt(std::norm(alpha) + std::norm(beta));
  alpha /= norm;
  beta /= norm;
  std::vector<cplx> input(8, 0.0);
  input[0] = alpha;
  input[4] = beta;
  Circuit c = Circuit::with_dense_input(3, ComplexTensor::vector(input));
  c.h(2).cnot(2, 1).cnot(0, 1).h(0);
  const int z = c.cond_measure(0, rng);
  const int x = c.cond_measure(1, rng);
  c.conditional_gate(x, {gates::i(), gates::x()}, 2);
  c.conditional_gate(z, {gates::i(), gates::z()}, 2);
  const ComplexTensor rho = reduced_density_matrix(to_tensor(c.simulate()), {0, 1});
  const cplx f = std::conj(alpha) * (rho(0, 0) * alpha + rho(0, 1) * beta) +
                 std::conj(beta) * (rho(1, 0) * alpha + rho(1, 1) * beta);
  return f.real();
}

}  // namespace qtn
