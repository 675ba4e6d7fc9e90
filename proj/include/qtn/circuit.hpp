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
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qtn/gates.hpp"
#include "qtn/kraus.hpp"
#include "qtn/network.hpp"
#include "qtn/quop.hpp"
#include "qtn/random.hpp"
#include "qtn/statevector.hpp"

namespace qtn {

enum class OpKind { gate, kraus_general, kraus_unitary, cond_measure, conditional_gate, post_select };

inline const char* op_kind_name(OpKind k) {
  switch (k) {
    case OpKind::gate: return "gate";
    case OpKind::kraus_general: return "kraus";
    case OpKind::kraus_unitary: return "kraus_unitary";
    case OpKind::cond_measure: return "cond_measure";
    case OpKind::conditional_gate: return "conditional_gate";
    case OpKind::post_select: return "post_select";
  }
  return "?";
}

/// A gate parameter value, optionally bound to a trainable slot.
struct Param {
  double value = 0.0;
  int slot = -1;

  Param() = default;
  Param(double v) : value(v) {}  // NOLINT(google-explicit-constructor)
  Param(double v, int s) : value(v), slot(s) {}
};

/// Trainable parameters; indexing yields slot-bound Params.
class ParamVector {
 public:
  ParamVector() = default;
  ParamVector(std::vector<double> values) : values_(std::move(values)) {}  // NOLINT

  Param operator[](std::size_t i) const {
    if (i >= values_.size())
      throw InvalidArgument("parameter index " + std::to_string(i) + " out of range (" +
                            std::to_string(values_.size()) + " parameters)");
    return {values_[i], static_cast<int>(i)};
  }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

struct SplitConfig {
  std::size_t max_singular_values = 2;
  bool apply_to_two_qubit_gates = true;
  friend bool operator==(const SplitConfig&, const SplitConfig&) = default;
};

struct MeasurementRecord {
  int outcome = 0;
  double probability = 0.0;
};

struct SampleResult {
  std::string bits;
  double probability = 0.0;
  double norm_squared = 1.0;  ///< squared norm of the sampled state before normalization
};

/// One term of an operator product: a 2^k x 2^k matrix on k qubits.
struct ExpectationTerm {
  ComplexTensor matrix;
  std::vector<int> qubits;
};

/// Gate chosen by unitary_kraus.
struct GateChoice {
  std::string name;
  std::vector<int> qubits;
  std::map<std::string, Param> params;
};

/// One recorded circuit operation. `matrix` is always the resolved linear
/// map the op applies (for stochastic ops, the selected branch); MPO gates
/// carry `mpo` instead.
struct CircuitOp {
  OpKind kind = OpKind::gate;
  std::string name;
  std::string label;  ///< display name of user matrices
  std::vector<int> qubits;
  std::map<std::string, double> params;
  std::map<std::string, int> slots;
  ComplexTensor matrix;
  std::optional<ComplexTensor> generator;
  std::vector<ComplexTensor> operators;
  std::vector<double> probs;
  std::vector<int> ctrl;
  std::shared_ptr<const QuOperator> mpo;
  std::vector<ComplexTensor> mpo_sites;
  std::optional<SplitConfig> split;
  std::optional<double> status;
  int keep = -1;
  int bit = -1;
  int branch = -1;
};

/// Matrix of a named gate for the given parameter values.
inline ComplexTensor named_gate_matrix(const std::string& name, const std::map<std::string, double>& params,
                                       const std::optional<ComplexTensor>& generator) {
  const auto theta = [&] {
    const auto it = params.find("theta");
    if (it == params.end()) throw InvalidArgument("gate '" + name + "' needs parameter 'theta'");
    return it->second;
  };
  if (name == "rx" || name == "ry" || name == "rz") return rotation_gate(name[1], theta());
  if (name == "exp1" || name == "exp" || name == "unitary") {
    if (!generator) throw InvalidArgument("gate '" + name + "' needs a matrix");
    if (name == "exp1") return exp1_gate(theta(), *generator);
    if (name == "exp") return exp_gate(theta(), *generator);
    return *generator;
  }
  return standard_gate(name);
}

/// d/d(theta) of a parameterized gate op.
inline ComplexTensor gate_derivative(const CircuitOp& op) {
  const double theta = op.params.at("theta");
  if (op.name == "rx" || op.name == "ry" || op.name == "rz") return rotation_derivative(op.name[1], theta);
  if (op.name == "exp1") return exp1_derivative(theta, *op.generator);
  if (op.name == "exp") return exp_derivative(theta, *op.generator);
  throw DifferentiationError("gate '" + op.name + "' has no differentiable parameter");
}

/// Tensor network of a circuit; `outputs[q]` is the open wire of qubit q.
struct CircuitNetwork {
  Network net;
  std::vector<EdgeId> outputs;
  std::vector<EdgeId> inputs;  // set only when inputs are left open
};

class Circuit {
 public:
  enum class InputKind { zeros, dense, mps };

  explicit Circuit(int n) : n_(n) {
    if (n < 1) throw InvalidArgument("circuit needs at least one qubit");
  }

  static Circuit with_dense_input(int n, const ComplexTensor& state) {
    Circuit c(n);
    if (state.size() != (std::size_t{1} << n))
      throw DimensionError("dense input must have 2^n = " + std::to_string(std::size_t{1} << n) +
                           " entries, got " + std::to_string(state.size()));
    c.input_kind_ = InputKind::dense;
    c.dense_input_ = reshape(state, {state.size()});
    return c;
  }

  /// Input given as a QuVector with n dangling edges of dimension 2.
  static Circuit with_mps_input(int n, const QuVector& mps, std::vector<ComplexTensor> sites = {}) {
    if (static_cast<int>(mps.out_edges().size()) != n)
      throw DimensionError("MPS input has " + std::to_string(mps.out_edges().size()) +
                           " sites for " + std::to_string(n) + " qubits");
    for (std::size_t d : mps.out_dims())
      if (d != 2) throw DimensionError("MPS input sites must have physical dimension 2");
    Circuit c(n);
    c.input_kind_ = InputKind::mps;
    c.mps_input_ = std::make_shared<const QuVector>(mps);
    c.mps_sites_ = std::move(sites);
    return c;
  }

  static Circuit with_mps_sites(int n, const std::vector<ComplexTensor>& sites) {
    return with_mps_input(n, QuVector::from_mps(sites), sites);
  }

  int n() const noexcept { return n_; }
  const std::vector<CircuitOp>& ops() const noexcept { return ops_; }
  InputKind input_kind() const noexcept { return input_kind_; }
  const ComplexTensor& dense_input() const noexcept { return dense_input_; }
  const std::vector<ComplexTensor>& mps_sites() const noexcept { return mps_sites_; }
  const std::shared_ptr<const QuVector>& mps_input() const noexcept { return mps_input_; }
  const std::optional<SplitConfig>& split() const noexcept { return split_; }
  const std::vector<int>& bits() const noexcept { return bits_; }

  void set_split(std::optional<SplitConfig> split) { split_ = split; }
  void set_contractor(ContractOptions opts) { contractor_ = opts; }
  const ContractOptions& contractor() const noexcept { return contractor_; }

  // Named gates.
  Circuit& i(int q) { return gate("i", {q}); }
  Circuit& x(int q) { return gate("x", {q}); }
  Circuit& y(int q) { return gate("y", {q}); }
  Circuit& z(int q) { return gate("z", {q}); }
  Circuit& h(int q) { return gate("h", {q}); }
  Circuit& s(int q) { return gate("s", {q}); }
  Circuit& t(int q) { return gate("t", {q}); }
  Circuit& cnot(int c, int t) { return gate("cnot", {c, t}); }
  Circuit& cz(int a, int b) { return gate("cz", {a, b}); }
  Circuit& swap(int a, int b) { return gate("swap", {a, b}); }
  Circuit& rx(int q, Param theta) { return gate("rx", {q}, {{"theta", theta}}); }
  Circuit& ry(int q, Param theta) { return gate("ry", {q}, {{"theta", theta}}); }
  Circuit& rz(int q, Param theta) { return gate("rz", {q}, {{"theta", theta}}); }

  /// e^{i theta G} with G^2 = I.
  Circuit& exp1(std::vector<int> qubits, Param theta, const ComplexTensor& g,
                std::optional<SplitConfig> split = std::nullopt) {
    return gate("exp1", std::move(qubits), {{"theta", theta}}, g, split);
  }
  /// e^{i theta G} for a general diagonalizable G.
  Circuit& exp(std::vector<int> qubits, Param theta, const ComplexTensor& g) {
    return gate("exp", std::move(qubits), {{"theta", theta}}, g);
  }
  /// Arbitrary matrix; unitarity is not checked.
  Circuit& unitary(std::vector<int> qubits, const ComplexTensor& m, std::string name = "unitary") {
    check_qubits(qubits);
    check_matrix(m, qubits.size(), "unitary");
    CircuitOp op;
    op.name = "unitary";
    op.label = std::move(name);
    op.qubits = std::move(qubits);
    op.generator = m;
    op.matrix = m;
    return push(std::move(op));
  }

  /// Generic gate application by registry name.
  Circuit& gate(const std::string& name, std::vector<int> qubits,
                const std::map<std::string, Param>& params = {},
                std::optional<ComplexTensor> generator = std::nullopt,
                std::optional<SplitConfig> split = std::nullopt) {
    const auto info = find_gate(name);
    if (!info || name == "multicontrol")
      throw InvalidArgument("unknown gate '" + name + "'");
    check_qubits(qubits);
    if (info->arity > 0 && static_cast<int>(qubits.size()) != info->arity)
      throw DimensionError("gate '" + name + "' acts on " + std::to_string(info->arity) +
                           " qubits, got " + std::to_string(qubits.size()));
    CircuitOp op;
    op.name = name;
    op.qubits = std::move(qubits);
    for (const auto& [key, p] : params) {
      if (!std::isfinite(p.value)) throw InvalidArgument("gate parameter '" + key + "' is not finite");
      op.params[key] = p.value;
      if (p.slot >= 0) op.slots[key] = p.slot;
    }
    if (generator) check_matrix(*generator, op.qubits.size(), name.c_str());
    op.generator = std::move(generator);
    op.split = split;
    op.matrix = named_gate_matrix(op.name, op.params, op.generator);
    return push(std::move(op));
  }

  /// Multi-controlled gate: the last `k` qubits are targets of the 2^k x 2^k
  /// `target`, the rest are controls with activation values `ctrl`.
  Circuit& multicontrol(std::vector<int> qubits, std::vector<int> ctrl, const ComplexTensor& target) {
    check_qubits(qubits);
    const QuOperator mpo = multicontrol_mpo(ctrl, target);
    if (mpo.out_edges().size() != qubits.size())
      throw DimensionError("multicontrol: " + std::to_string(qubits.size()) + " qubits for " +
                           std::to_string(mpo.out_edges().size()) + " MPO sites");
    CircuitOp op;
    op.name = "multicontrol";
    op.qubits = std::move(qubits);
    op.ctrl = std::move(ctrl);
    op.generator = target;
    op.mpo = std::make_shared<const QuOperator>(mpo);
    op.matrix = mpo.eval_matrix();
    return push(std::move(op));
  }

  /// MPO gate; site tensors enter the network individually.
  Circuit& mpo(std::vector<int> qubits, const QuOperator& op_mpo,
               std::vector<ComplexTensor> sites = {}) {
    check_qubits(qubits);
    if (op_mpo.out_edges().size() != qubits.size() || op_mpo.in_edges().size() != qubits.size())
      throw DimensionError("mpo gate: site count does not match the qubit list");
    for (std::size_t d : op_mpo.out_dims())
      if (d != 2) throw DimensionError("mpo gate: site dimensions must be 2");
    for (std::size_t d : op_mpo.in_dims())
      if (d != 2) throw DimensionError("mpo gate: site dimensions must be 2");
    CircuitOp op;
    op.name = "mpo";
    op.qubits = std::move(qubits);
    op.mpo = std::make_shared<const QuOperator>(op_mpo);
    op.mpo_sites = std::move(sites);
    op.matrix = op_mpo.eval_matrix();
    return push(std::move(op));
  }

  /// Monte Carlo application of a general Kraus channel. Branch i is chosen
  /// when `status` falls in the i-th interval of the cumulative partition of
  /// [0,1) by p_i = <psi|K_i^dagger K_i|psi> / <psi|psi>; K_i / sqrt(p_i) is
  /// applied. Returns i.
  int mc_general_kraus(const KrausChannel& channel, std::vector<int> qubits, double status) {
    check_status(status);
    check_qubits(qubits);
    channel.validate(1e-8);
    if (channel.arity() != static_cast<int>(qubits.size()))
      throw DimensionError("Kraus channel arity does not match the qubit list");
    const StateVector& psi = prefix_state();
    const double norm = norm_squared(psi);
    std::vector<double> p;
    for (const auto& k : channel.operators) {
      StateVector phi = psi;
      apply_matrix(phi, n_, k, qubits);
      p.push_back(norm > 0 ? norm_squared(phi) / norm : 0.0);
    }
    const int branch = select_branch(p, status);
    if (branch < 0) throw PreconditionError("mc_general_kraus: every branch has zero probability");
    CircuitOp op;
    op.kind = OpKind::kraus_general;
    op.name = channel.name;
    op.params = channel.params;
    op.qubits = std::move(qubits);
    op.operators = channel.operators;
    op.status = status;
    op.branch = branch;
    op.probs = p;
    op.matrix = scale(channel.operators[static_cast<std::size_t>(branch)],
                      1.0 / std::sqrt(p[static_cast<std::size_t>(branch)]));
    push(std::move(op));
    return branch;
  }

  /// Monte Carlo application of a mixture of unitaries with fixed
  /// probabilities; no state-dependent weights are computed. Operators that
  /// are unitary up to a constant factor are rescaled to unit norm.
  int mc_unitary_kraus(const std::vector<ComplexTensor>& operators, const std::vector<double>& probs,
                       std::vector<int> qubits, double status) {
    check_status(status);
    check_qubits(qubits);
    check_probs(probs, operators.size());
    for (const auto& k : operators) check_matrix(k, qubits.size(), "unitary_kraus");
    const int branch = select_branch(probs, status);
    const ComplexTensor& k = operators[static_cast<std::size_t>(branch)];
    const double scale2 = frobenius_norm(k) * frobenius_norm(k) / static_cast<double>(k.dim(0));
    CircuitOp op;
    op.kind = OpKind::kraus_unitary;
    op.qubits = std::move(qubits);
    op.operators = operators;
    op.probs = probs;
    op.status = status;
    op.branch = branch;
    op.matrix = scale2 > 0 ? scale(k, 1.0 / std::sqrt(scale2)) : k;
    push(std::move(op));
    return branch;
  }

  /// Chooses one of several (possibly parameterized) gates with fixed
  /// probabilities and appends it as an ordinary gate, keeping trainable
  /// slots. Returns the chosen index.
  int unitary_kraus(const std::vector<GateChoice>& choices, const std::vector<double>& probs,
                    double status) {
    check_status(status);
    check_probs(probs, choices.size());
    const int branch = select_branch(probs, status);
    const GateChoice& g = choices[static_cast<std::size_t>(branch)];
    gate(g.name, g.qubits, g.params);
    return branch;
  }

  /// Projective Z measurement that collapses the state; the outcome is drawn
  /// from `rng`. Returns a handle into the classical register.
  int cond_measure(int qubit, StatusSource& rng) { return cond_measure_status(qubit, rng.uniform()); }

  /// cond_measure with an explicit status: outcome 0 iff status < p(0).
  int cond_measure_status(int qubit, double status) {
    check_status(status);
    check_qubits({qubit});
    const StateVector& psi = prefix_state();
    const double norm = norm_squared(psi);
    if (!(norm > 0)) throw PreconditionError("cond_measure: state has zero norm");
    const double w1 = weight_of_one(psi, n_, qubit);
    const double p1 = w1 / norm;
    const double p0 = 1.0 - p1;
    const int outcome = status < p0 ? 0 : 1;
    const double w = outcome == 0 ? norm - w1 : w1;
    if (!(w > 0)) throw PreconditionError("cond_measure: selected outcome has zero probability");
    CircuitOp op;
    op.kind = OpKind::cond_measure;
    op.name = "measure";
    op.qubits = {qubit};
    op.status = status;
    op.branch = outcome;
    op.probs = {p0, p1};
    const double amp = 1.0 / std::sqrt(w);
    op.matrix = outcome == 0 ? ComplexTensor::matrix({{amp, 0}, {0, 0}})
                             : ComplexTensor::matrix({{0, 0}, {0, amp}});
    op.bit = static_cast<int>(bits_.size());
    bits_.push_back(outcome);
    push(std::move(op));
    return static_cast<int>(bits_.size()) - 1;
  }

  int bit_value(int handle) const {
    if (handle < 0 || handle >= static_cast<int>(bits_.size()))
      throw InvalidArgument("unknown classical bit handle " + std::to_string(handle));
    return bits_[static_cast<std::size_t>(handle)];
  }

  /// Applies choices[value of bit] on `qubit`.
  Circuit& conditional_gate(int bit, const std::vector<ComplexTensor>& choices, int qubit) {
    const int value = bit_value(bit);
    if (choices.size() < 2) throw InvalidArgument("conditional_gate needs at least two choices");
    if (static_cast<std::size_t>(value) >= choices.size())
      throw InvalidArgument("conditional_gate: bit value has no matching choice");
    check_qubits({qubit});
    for (const auto& m : choices) check_matrix(m, 1, "conditional_gate");
    CircuitOp op;
    op.kind = OpKind::conditional_gate;
    op.name = "conditional";
    op.qubits = {qubit};
    op.bit = bit;
    op.branch = value;
    op.operators = choices;
    op.matrix = choices[static_cast<std::size_t>(value)];
    return push(std::move(op));
  }

  /// Projects `qubit` onto |keep> without renormalizing.
  Circuit& post_select(int qubit, int keep) {
    if (keep != 0 && keep != 1) throw InvalidArgument("post_select: keep must be 0 or 1");
    check_qubits({qubit});
    CircuitOp op;
    op.kind = OpKind::post_select;
    op.name = "post_select";
    op.qubits = {qubit};
    op.keep = keep;
    op.matrix = keep == 0 ? ComplexTensor::matrix({{1, 0}, {0, 0}})
                          : ComplexTensor::matrix({{0, 0}, {0, 1}});
    return push(std::move(op));
  }

  /// Appends the ops of `other` (which must use the default input).
  /// Stochastic ops are replayed with their recorded statuses.
  Circuit& append(const Circuit& other) {
    if (other.n_ != n_) throw DimensionError("append: qubit counts differ");
    if (other.input_kind_ != InputKind::zeros)
      throw InvalidArgument("append: the appended circuit must use the default input");
    const int offset = static_cast<int>(bits_.size());
    for (const auto& op : other.ops_) replay(op, offset);
    return *this;
  }

  /// Re-applies a recorded op through the public API.
  void replay(const CircuitOp& op, int bit_offset = 0) {
    switch (op.kind) {
      case OpKind::gate: {
        check_qubits(op.qubits);
        push(CircuitOp(op));
        return;
      }
      case OpKind::kraus_general:
        mc_general_kraus(KrausChannel{op.operators, op.name, op.params}, op.qubits, op.status.value());
        return;
      case OpKind::kraus_unitary:
        mc_unitary_kraus(op.operators, op.probs, op.qubits, op.status.value());
        return;
      case OpKind::cond_measure:
        cond_measure_status(op.qubits.at(0), op.status.value());
        return;
      case OpKind::conditional_gate:
        conditional_gate(op.bit + bit_offset, op.operators, op.qubits.at(0));
        return;
      case OpKind::post_select:
        post_select(op.qubits.at(0), op.keep);
        return;
    }
  }

  // ---------------------------------------------------------------- networks

  /// Builds the circuit network. With `open_inputs` the input wires stay
  /// dangling instead of being closed by the input state.
  CircuitNetwork build_network(bool open_inputs = false) const {
    CircuitNetwork cn;
    Network& net = cn.net;
    std::vector<EdgeId> wires(static_cast<std::size_t>(n_));
    if (open_inputs) {
      for (auto& w : wires) w = net.add_edge(2);
      cn.inputs = wires;
    } else if (input_kind_ == InputKind::zeros) {
      for (auto& w : wires) {
        w = net.add_edge(2);
        net.add_node(ComplexTensor::vector({1.0, 0.0}), {w}, /*arity=*/1, /*order=*/-1);
      }
    } else if (input_kind_ == InputKind::dense) {
      for (auto& w : wires) w = net.add_edge(2);
      net.add_node(reshape(dense_input_, Shape(static_cast<std::size_t>(n_), 2)), wires, 0, -1);
    } else {
      const auto relabel = net.absorb(mps_input_->network(), false, -1);
      for (int q = 0; q < n_; ++q)
        wires[static_cast<std::size_t>(q)] = relabel.at(mps_input_->out_edges()[static_cast<std::size_t>(q)]);
    }
    for (std::size_t k = 0; k < ops_.size(); ++k) add_op_nodes(net, wires, ops_[k], static_cast<int>(k));
    cn.outputs = wires;
    return cn;
  }

  /// Circuit output as a lazy QuVector.
  QuVector quvector() const {
    CircuitNetwork cn = build_network();
    return QuVector(std::move(cn.net), cn.outputs);
  }

  // ------------------------------------------------------------- evaluation

  /// Output state (2^n vector), contracted as a tensor network.
  ComplexTensor state() const {
    require_dense_capacity(n_);
    CircuitNetwork cn = build_network();
    cn.net.set_dangling(cn.outputs);
    return reshape(contract_network(cn.net, contractor_), {std::size_t{1} << n_});
  }

  /// <bits|psi> without materializing the state.
  cplx amplitude(const std::string& bits) const {
    if (static_cast<int>(bits.size()) != n_)
      throw InvalidArgument("amplitude: bitstring length " + std::to_string(bits.size()) +
                            " does not match " + std::to_string(n_) + " qubits");
    CircuitNetwork cn = build_network();
    for (int q = 0; q < n_; ++q) {
      const char b = bits[static_cast<std::size_t>(q)];
      if (b != '0' && b != '1') throw InvalidArgument("amplitude: bitstring must contain only 0 and 1");
      cn.net.add_node(b == '0' ? ComplexTensor::vector({1.0, 0.0}) : ComplexTensor::vector({0.0, 1.0}),
                      {cn.outputs[static_cast<std::size_t>(q)]}, 1, static_cast<int>(ops_.size()));
    }
    return contract_network(cn.net, contractor_)[0];
  }

  /// Matrix of the whole circuit (gates only).
  ComplexTensor full_unitary() const {
    require_dense_capacity(n_, 13);
    for (std::size_t k = 0; k < ops_.size(); ++k)
      if (ops_[k].kind != OpKind::gate)
        throw InvalidArgument("full_unitary: op " + std::to_string(k) + " (" +
                              op_kind_name(ops_[k].kind) + ") is not a gate");
    CircuitNetwork cn = build_network(true);
    std::vector<EdgeId> dangling = cn.outputs;
    dangling.insert(dangling.end(), cn.inputs.begin(), cn.inputs.end());
    cn.net.set_dangling(dangling);
    if (cn.net.node_count() == 0) return ComplexTensor::identity(std::size_t{1} << n_);
    const std::size_t d = std::size_t{1} << n_;
    // Wires without any gate are pass-through: add identities.
    const auto counts = cn.net.endpoint_counts();
    for (int q = 0; q < n_; ++q) {
      const EdgeId in = cn.inputs[static_cast<std::size_t>(q)];
      if (cn.outputs[static_cast<std::size_t>(q)] == in && counts.at(in) == 0) {
        const EdgeId fresh = cn.net.add_edge(2);
        cn.net.add_node(ComplexTensor::identity(2), {in, fresh});
        dangling[static_cast<std::size_t>(n_ + q)] = fresh;
      }
    }
    cn.net.set_dangling(dangling);
    return reshape(contract_network(cn.net, contractor_), {d, d});
  }

  /// Draws a bitstring from |amplitude|^2 (normalized); non-collapsing.
  SampleResult sample(StatusSource& rng) const {
    const ComplexTensor psi = state();
    double total = 0.0;
    for (const cplx& a : psi.data()) total += std::norm(a);
    if (!(total > 0)) throw PreconditionError("sample: state has zero norm");
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = psi.size() - 1;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      acc += std::norm(psi[i]);
      if (u < acc) {
        pick = i;
        break;
      }
    }
    while (std::norm(psi[pick]) == 0.0 && pick > 0) --pick;
    return {index_to_bits(pick), std::norm(psi[pick]) / total, total};
  }

  /// Joint Z-basis outcome on `qubits`; every record carries the joint
  /// marginal probability. Non-collapsing.
  std::vector<MeasurementRecord> measure(const std::vector<int>& qubits, StatusSource& rng) const {
    check_qubits(qubits);
    const ComplexTensor psi = state();
    const std::size_t k = qubits.size();
    std::vector<double> marginal(std::size_t{1} << k, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      std::size_t key = 0;
      for (std::size_t j = 0; j < k; ++j)
        key = (key << 1) | ((i >> (n_ - 1 - qubits[j])) & 1u);
      marginal[key] += std::norm(psi[i]);
      total += std::norm(psi[i]);
    }
    if (!(total > 0)) throw PreconditionError("measure: state has zero norm");
    for (double& m : marginal) m /= total;
    const int key = select_branch(marginal, rng.uniform());
    std::vector<MeasurementRecord> out;
    for (std::size_t j = 0; j < k; ++j)
      out.push_back({static_cast<int>((static_cast<std::size_t>(key) >> (k - 1 - j)) & 1u),
                     marginal[static_cast<std::size_t>(key)]});
    return out;
  }

  /// <psi| (x) terms |psi>. With `reuse` the state is computed once and
  /// the operator is applied to it; otherwise the whole sandwich is
  /// contracted as one network.
  cplx expectation(const std::vector<ExpectationTerm>& terms, bool reuse = true) const {
    std::set<int> seen;
    for (const auto& t : terms) {
      check_qubits(t.qubits);
      check_matrix(t.matrix, t.qubits.size(), "expectation");
      for (int q : t.qubits)
        if (!seen.insert(q).second)
          throw InvalidArgument("expectation: qubit " + std::to_string(q) + " appears in several terms");
    }
    if (reuse) {
      const StateVector psi = to_state(state());
      StateVector phi = psi;
      for (const auto& t : terms) apply_matrix(phi, n_, t.matrix, t.qubits);
      return inner(psi, phi);
    }
    return sandwich(term_attach(terms));
  }

  /// The closed <psi|O|psi> network used by expectation(terms, false).
  Network expectation_network(const std::vector<ExpectationTerm>& terms) const {
    return sandwich_network(term_attach(terms));
  }

  /// Expectation of the Pauli string X on `x`, Y on `y`, Z on `z`.
  cplx expectation_ps(const std::vector<int>& x, const std::vector<int>& y, const std::vector<int>& z,
                      bool reuse = true) const {
    std::vector<ExpectationTerm> terms;
    std::set<int> seen;
    const auto add_terms = [&](const std::vector<int>& qs, const ComplexTensor& m) {
      for (int q : qs) {
        if (!seen.insert(q).second)
          throw InvalidArgument("expectation_ps: qubit " + std::to_string(q) + " listed twice");
        terms.push_back({m, {q}});
      }
    };
    add_terms(x, gates::x());
    add_terms(y, gates::y());
    add_terms(z, gates::z());
    return expectation(terms, reuse);
  }

  /// <psi|O|psi> for an n-site QuOperator, contracted as one network.
  cplx expectation_quop(const QuOperator& op) const {
    if (static_cast<int>(op.out_edges().size()) != n_ || static_cast<int>(op.in_edges().size()) != n_)
      throw DimensionError("operator acts on " + std::to_string(op.in_edges().size()) +
                           " sites, circuit has " + std::to_string(n_) + " qubits");
    for (std::size_t d : op.out_dims())
      if (d != 2) throw DimensionError("operator site dimensions must be 2");
    return sandwich([&](Network& net, const std::vector<EdgeId>& bra, const std::vector<EdgeId>& ket,
                        std::vector<bool>& used, int order) {
      const auto relabel = net.absorb(op.network(), false, order);
      for (int q = 0; q < n_; ++q) {
        const auto uq = static_cast<std::size_t>(q);
        net.merge_edges(relabel.at(op.in_edges()[uq]), ket[uq]);
        EdgeId o = relabel.at(op.out_edges()[uq]);
        if (op.out_edges()[uq] == op.in_edges()[uq]) o = ket[uq];
        net.merge_edges(bra[uq], o);
        used[uq] = true;
      }
    });
  }

  /// Dense output state by direct statevector simulation.
  StateVector simulate() const {
    StateVector psi = initial_dense_state();
    for (const auto& op : ops_) apply_op_dense(psi, op);
    return psi;
  }

  StateVector initial_dense_state() const {
    require_dense_capacity(n_);
    switch (input_kind_) {
      case InputKind::zeros: return zero_state(n_);
      case InputKind::dense: return to_state(dense_input_);
      case InputKind::mps: return to_state(mps_input_->eval());
    }
    return zero_state(n_);
  }

  void apply_op_dense(StateVector& psi, const CircuitOp& op) const {
    apply_matrix(psi, n_, op.matrix, op.qubits);
  }

  std::string index_to_bits(std::size_t index) const {
    std::string s(static_cast<std::size_t>(n_), '0');
    for (int q = 0; q < n_; ++q)
      if ((index >> (n_ - 1 - q)) & 1u) s[static_cast<std::size_t>(q)] = '1';
    return s;
  }

  /// Index of the first interval of the cumulative partition of `p`
  /// containing `status`; -1 when all weights are zero.
  static int select_branch(const std::vector<double>& p, double status) {
    double total = 0.0;
    for (double v : p) total += v;
    if (!(total > 0)) return -1;
    double acc = 0.0;
    int last = -1;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] <= 0) continue;
      last = static_cast<int>(i);
      acc += p[i] / total;
      if (status < acc) return static_cast<int>(i);
    }
    return last;
  }

 private:
  using Attach = std::function<void(Network&, const std::vector<EdgeId>&, const std::vector<EdgeId>&,
                                    std::vector<bool>&, int)>;

  cplx sandwich(const Attach& attach) const {
    const Network net = sandwich_network(attach);
    if (net.node_count() == 0) return 1.0;
    return contract_network(net, contractor_)[0];
  }

  static Attach term_attach(const std::vector<ExpectationTerm>& terms) {
    return [&terms](Network& net, const std::vector<EdgeId>& bra, const std::vector<EdgeId>& ket,
                    std::vector<bool>& used, int order) {
      for (const auto& t : terms) {
        std::vector<EdgeId> edges;
        for (int q : t.qubits) edges.push_back(bra[static_cast<std::size_t>(q)]);
        for (int q : t.qubits) {
          edges.push_back(ket[static_cast<std::size_t>(q)]);
          used[static_cast<std::size_t>(q)] = true;
        }
        net.add_node(reshape(t.matrix, Shape(2 * t.qubits.size(), 2)), edges,
                     static_cast<int>(t.qubits.size()), order);
      }
    };
  }

  Network sandwich_network(const Attach& attach) const {
    const CircuitNetwork ket = build_network();
    const int m = static_cast<int>(ops_.size());
    Network net;
    const auto rk = net.absorb(ket.net, false, 0);
    const auto rb = net.absorb(ket.net, true, 2 * m, true);
    std::vector<EdgeId> kets, bras;
    for (EdgeId e : ket.outputs) {
      kets.push_back(rk.at(e));
      bras.push_back(rb.at(e));
    }
    std::vector<bool> used(static_cast<std::size_t>(n_), false);
    attach(net, bras, kets, used, m);
    for (int q = 0; q < n_; ++q)
      if (!used[static_cast<std::size_t>(q)]) net.merge_edges(bras[static_cast<std::size_t>(q)], kets[static_cast<std::size_t>(q)]);
    net.set_dangling({});
    return net;
  }

  void add_op_nodes(Network& net, std::vector<EdgeId>& wires, const CircuitOp& op, int order) const {
    const std::size_t k = op.qubits.size();
    if (op.mpo) {
      const auto relabel = net.absorb(op.mpo->network(), false, order, false, static_cast<int>(k));
      for (std::size_t j = 0; j < k; ++j) {
        const EdgeId w = wires[static_cast<std::size_t>(op.qubits[j])];
        const EdgeId in = relabel.at(op.mpo->in_edges()[j]);
        const EdgeId out = relabel.at(op.mpo->out_edges()[j]);
        net.merge_edges(in, w);
        wires[static_cast<std::size_t>(op.qubits[j])] = (out == in) ? w : out;
      }
      return;
    }
    std::vector<EdgeId> outs;
    for (std::size_t j = 0; j < k; ++j) outs.push_back(net.add_edge(2));
    const std::optional<SplitConfig> split =
        op.split ? op.split : (split_ && split_->apply_to_two_qubit_gates ? split_ : std::nullopt);
    if (k == 2 && split && op.kind == OpKind::gate) {
      const SvdSplit parts = svd_split(op.matrix, split->max_singular_values);
      const EdgeId bond = net.add_edge(parts.bond_dimension);
      net.add_node(parts.left, {outs[0], wires[static_cast<std::size_t>(op.qubits[0])], bond}, 2, order);
      net.add_node(parts.right, {bond, outs[1], wires[static_cast<std::size_t>(op.qubits[1])]}, 2, order);
    } else {
      std::vector<EdgeId> edges = outs;
      for (int q : op.qubits) edges.push_back(wires[static_cast<std::size_t>(q)]);
      net.add_node(reshape(op.matrix, Shape(2 * k, 2)), edges, static_cast<int>(k), order);
    }
    for (std::size_t j = 0; j < k; ++j) wires[static_cast<std::size_t>(op.qubits[j])] = outs[j];
  }

  Circuit& push(CircuitOp op) {
    ops_.push_back(std::move(op));
    return *this;
  }

  /// Dense state after all ops recorded so far (cached incrementally).
  const StateVector& prefix_state() {
    if (!prefix_valid_) {
      prefix_ = initial_dense_state();
      prefix_ops_ = 0;
      prefix_valid_ = true;
    }
    for (; prefix_ops_ < ops_.size(); ++prefix_ops_) apply_op_dense(prefix_, ops_[prefix_ops_]);
    return prefix_;
  }

  void check_qubits(const std::vector<int>& qubits) const {
    if (qubits.empty()) throw InvalidArgument("operation needs at least one qubit");
    std::set<int> seen;
    for (int q : qubits) {
      if (q < 0 || q >= n_)
        throw InvalidArgument("qubit " + std::to_string(q) + " out of range for " +
                              std::to_string(n_) + " qubits");
      if (!seen.insert(q).second) throw InvalidArgument("qubit " + std::to_string(q) + " repeated");
    }
  }

  static void check_matrix(const ComplexTensor& m, std::size_t k, const char* what) {
    const std::size_t d = std::size_t{1} << k;
    if (m.rank() != 2 || m.dim(0) != d || m.dim(1) != d)
      throw DimensionError(std::string(what) + ": expected a " + std::to_string(d) + "x" +
                           std::to_string(d) + " matrix, got " + shape_string(m.shape()));
  }

  static void check_status(double status) {
    if (!(status >= 0.0 && status < 1.0))
      throw InvalidArgument("status must lie in [0, 1), got " + std::to_string(status));
  }

  static void check_probs(const std::vector<double>& probs, std::size_t count) {
    if (probs.size() != count || count == 0)
      throw InvalidArgument("unitary_kraus: need one probability per operator");
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) throw InvalidArgument("unitary_kraus: probabilities must be non-negative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw InvalidArgument("unitary_kraus: probabilities sum to " + std::to_string(total) + ", not 1");
  }

  int n_;
  std::vector<CircuitOp> ops_;
  InputKind input_kind_ = InputKind::zeros;
  ComplexTensor dense_input_;
  std::shared_ptr<const QuVector> mps_input_;
  std::vector<ComplexTensor> mps_sites_;
  std::optional<SplitConfig> split_;
  ContractOptions contractor_;
  std::vector<int> bits_;
  StateVector prefix_;
  std::size_t prefix_ops_ = 0;
  bool prefix_valid_ = false;
};

/// Circuit acting on an MPS input.
inline Circuit circuit_with_mps_input(int n, const QuVector& mps) { return Circuit::with_mps_input(n, mps); }

inline QuVector circuit_quvector(const Circuit& c) { return c.quvector(); }

/// Applies an MPO gate to `c`.
inline void apply_mpo_gate(Circuit& c, std::vector<int> qubits, const QuOperator& mpo) {
  c.mpo(std::move(qubits), mpo);
}

inline Circuit append(const Circuit& c1, const Circuit& c2) {
  Circuit out = c1;
  out.append(c2);
  return out;
}

}  // namespace qtn
