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

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtn/circuit.hpp"
#include "qtn/pauli.hpp"

namespace qtn {

using Json = nlohmann::ordered_json;

namespace ir {

inline Json complex_list(std::span<const cplx> data) {
  Json out = Json::array();
  for (const cplx& v : data) out.push_back(Json::array({v.real(), v.imag()}));
  return out;
}

inline Json tensor_to_json(const ComplexTensor& t) {
  return Json{{"shape", t.shape()}, {"data", complex_list(t.data())}};
}

inline const Json& field(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "." + key, "missing required field");
  return *it;
}

inline int as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<int>();
}

inline double as_double(const Json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

inline std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

inline std::vector<int> int_list(const Json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_int(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<double> double_list(const Json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_double(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<cplx> parse_complex_list(const Json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of [re, im] pairs");
  std::vector<cplx> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const Json& e = j[i];
    if (!e.is_array() || e.size() != 2) throw SchemaError(p, "expected a [re, im] pair");
    out.emplace_back(as_double(e[0], p + "[0]"), as_double(e[1], p + "[1]"));
  }
  return out;
}

inline cplx parse_complex(const Json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_array() || j.size() != 2) throw SchemaError(path, "expected a [re, im] pair");
  return {as_double(j[0], path + "[0]"), as_double(j[1], path + "[1]")};
}

/// Square matrix from a flat row-major list of [re, im] pairs.
inline ComplexTensor parse_matrix(const Json& j, const std::string& path) {
  std::vector<cplx> data = parse_complex_list(j, path);
  const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(data.size()))));
  if (d == 0 || d * d != data.size()) throw SchemaError(path, "matrix entry count is not a square");
  return ComplexTensor({d, d}, std::move(data));
}

inline ComplexTensor parse_tensor(const Json& j, const std::string& path) {
  const Json& shape = field(j, "shape", path);
  if (!shape.is_array()) throw SchemaError(path + ".shape", "expected an array");
  Shape s;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    const int d = as_int(shape[i], path + ".shape[" + std::to_string(i) + "]");
    if (d < 1) throw SchemaError(path + ".shape[" + std::to_string(i) + "]", "axis length must be positive");
    s.push_back(static_cast<std::size_t>(d));
  }
  std::vector<cplx> data = parse_complex_list(field(j, "data", path), path + ".data");
  if (data.size() != shape_size(s)) throw SchemaError(path + ".data", "length does not match shape");
  return ComplexTensor(std::move(s), std::move(data));
}

inline Json matrices_to_json(const std::vector<ComplexTensor>& ms) {
  Json out = Json::array();
  for (const auto& m : ms) out.push_back(complex_list(m.data()));
  return out;
}

inline std::vector<ComplexTensor> parse_matrices(const Json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array of matrices");
  std::vector<ComplexTensor> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(parse_matrix(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline Json op_to_json(const CircuitOp& op) {
  Json j;
  switch (op.kind) {
    case OpKind::gate: {
      j["kind"] = "gate";
      j["name"] = op.name;
      j["qubits"] = op.qubits;
      if (!op.params.empty()) j["params"] = op.params;
      if (!op.slots.empty()) j["slots"] = op.slots;
      if (!op.label.empty() && op.label != op.name) j["label"] = op.label;
      if (op.name == "mpo") {
        if (op.mpo_sites.empty())
          throw InvalidArgument("to_ir: MPO gate without site tensors cannot be serialized");
        Json sites = Json::array();
        for (const auto& t : op.mpo_sites) sites.push_back(tensor_to_json(t));
        j["tensors"] = sites;
      } else if (op.generator) {
        j["matrix"] = complex_list(op.generator->data());
      }
      if (!op.ctrl.empty()) j["ctrl"] = op.ctrl;
      if (op.split) j["split"] = {{"max_singular_values", op.split->max_singular_values}};
      break;
    }
    case OpKind::kraus_general:
      j["kind"] = "kraus";
      if (!op.name.empty()) {
        j["channel"] = op.name;
        j["params"] = op.params;
      } else {
        j["operators"] = matrices_to_json(op.operators);
      }
      j["qubits"] = op.qubits;
      j["status"] = *op.status;
      break;
    case OpKind::kraus_unitary:
      j["kind"] = "kraus_unitary";
      j["qubits"] = op.qubits;
      j["operators"] = matrices_to_json(op.operators);
      j["probs"] = op.probs;
      j["status"] = *op.status;
      break;
    case OpKind::cond_measure:
      j["kind"] = "cond_measure";
      j["qubits"] = op.qubits;
      j["status"] = *op.status;
      break;
    case OpKind::conditional_gate:
      j["kind"] = "conditional_gate";
      j["qubits"] = op.qubits;
      j["bit"] = op.bit;
      j["operators"] = matrices_to_json(op.operators);
      break;
    case OpKind::post_select:
      j["kind"] = "post_select";
      j["qubits"] = op.qubits;
      j["keep"] = op.keep;
      break;
  }
  return j;
}

inline void apply_op_json(Circuit& c, const Json& j, const std::string& path) {
  const std::string kind = as_string(field(j, "kind", path), path + ".kind");
  const std::vector<int> qubits = int_list(field(j, "qubits", path), path + ".qubits");
  const auto status = [&] { return as_double(field(j, "status", path), path + ".status"); };
  try {
    if (kind == "gate") {
      const std::string name = as_string(field(j, "name", path), path + ".name");
      std::map<std::string, Param> params;
      if (j.contains("params")) {
        const Json& p = j["params"];
        if (!p.is_object()) throw SchemaError(path + ".params", "expected an object");
        for (const auto& [key, value] : p.items())
          params[key] = Param(as_double(value, path + ".params." + key));
      }
      if (j.contains("slots")) {
        const Json& s = j["slots"];
        if (!s.is_object()) throw SchemaError(path + ".slots", "expected an object");
        for (const auto& [key, value] : s.items()) {
          if (!params.count(key)) throw SchemaError(path + ".slots." + key, "slot for a missing parameter");
          params[key].slot = as_int(value, path + ".slots." + key);
        }
      }
      std::optional<ComplexTensor> matrix;
      if (j.contains("matrix")) matrix = parse_matrix(j["matrix"], path + ".matrix");
      if (name == "mpo") {
        const Json& ts = field(j, "tensors", path);
        if (!ts.is_array()) throw SchemaError(path + ".tensors", "expected an array");
        std::vector<ComplexTensor> sites;
        for (std::size_t i = 0; i < ts.size(); ++i)
          sites.push_back(parse_tensor(ts[i], path + ".tensors[" + std::to_string(i) + "]"));
        c.mpo(qubits, QuOperator::from_mpo(sites), sites);
      } else if (name == "multicontrol") {
        if (!matrix) throw SchemaError(path + ".matrix", "missing required field");
        c.multicontrol(qubits, int_list(field(j, "ctrl", path), path + ".ctrl"), *matrix);
      } else if (name == "unitary") {
        if (!matrix) throw SchemaError(path + ".matrix", "missing required field");
        c.unitary(qubits, *matrix, j.contains("label") ? as_string(j["label"], path + ".label") : "unitary");
      } else {
        if (!find_gate(name)) throw SchemaError(path + ".name", "unknown gate '" + name + "'");
        std::optional<SplitConfig> split;
        if (j.contains("split")) {
          split = SplitConfig{};
          split->max_singular_values = static_cast<std::size_t>(
              as_int(field(j["split"], "max_singular_values", path + ".split"),
                     path + ".split.max_singular_values"));
        }
        c.gate(name, qubits, params, matrix, split);
      }
    } else if (kind == "kraus") {
      KrausChannel ch;
      if (j.contains("channel")) {
        std::map<std::string, double> params;
        if (j.contains("params")) {
          for (const auto& [key, value] : j["params"].items())
            params[key] = as_double(value, path + ".params." + key);
        }
        ch = channels::by_name(as_string(j["channel"], path + ".channel"), params);
      } else {
        ch.operators = parse_matrices(field(j, "operators", path), path + ".operators");
      }
      c.mc_general_kraus(ch, qubits, status());
    } else if (kind == "kraus_unitary") {
      c.mc_unitary_kraus(parse_matrices(field(j, "operators", path), path + ".operators"),
                         double_list(field(j, "probs", path), path + ".probs"), qubits, status());
    } else if (kind == "cond_measure") {
      if (qubits.size() != 1) throw SchemaError(path + ".qubits", "expected exactly one qubit");
      c.cond_measure_status(qubits[0], status());
    } else if (kind == "conditional_gate") {
      if (qubits.size() != 1) throw SchemaError(path + ".qubits", "expected exactly one qubit");
      c.conditional_gate(as_int(field(j, "bit", path), path + ".bit"),
                         parse_matrices(field(j, "operators", path), path + ".operators"), qubits[0]);
    } else if (kind == "post_select") {
      if (qubits.size() != 1) throw SchemaError(path + ".qubits", "expected exactly one qubit");
      c.post_select(qubits[0], as_int(field(j, "keep", path), path + ".keep"));
    } else {
      throw SchemaError(path + ".kind", "unknown op kind '" + kind + "'");
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(path, e.what());
  }
}

}  // namespace ir

/// Serializes a circuit. The default input and a missing split setting are
/// omitted, so an empty 3-qubit circuit becomes {"n":3,"ops":[]}.
inline Json to_ir(const Circuit& c) {
  Json doc;
  doc["n"] = c.n();
  switch (c.input_kind()) {
    case Circuit::InputKind::zeros: break;
    case Circuit::InputKind::dense:
      doc["input"] = {{"kind", "dense"}, {"data", ir::complex_list(c.dense_input().data())}};
      break;
    case Circuit::InputKind::mps: {
      if (c.mps_sites().empty()) {
        doc["input"] = {{"kind", "dense"}, {"data", ir::complex_list(c.mps_input()->eval().data())}};
      } else {
        Json sites = Json::array();
        for (const auto& t : c.mps_sites()) sites.push_back(ir::tensor_to_json(t));
        doc["input"] = {{"kind", "mps"}, {"tensors", sites}};
      }
      break;
    }
  }
  if (c.split())
    doc["split"] = {{"max_singular_values", c.split()->max_singular_values},
                    {"apply_to_two_qubit_gates", c.split()->apply_to_two_qubit_gates}};
  Json ops = Json::array();
  for (const auto& op : c.ops()) ops.push_back(ir::op_to_json(op));
  doc["ops"] = ops;
  return doc;
}

/// Rebuilds a circuit; schema violations raise SchemaError with the path of
/// the offending field (e.g. "ops[3].name").
inline Circuit from_ir(const Json& doc) {
  if (!doc.is_object()) throw SchemaError("$", "document must be an object");
  if (doc.contains("version") && doc["version"] != "1")
    throw SchemaError("version", "unsupported version");
  const int n = ir::as_int(ir::field(doc, "n", "$"), "n");
  if (n < 1) throw SchemaError("n", "qubit count must be positive");
  Circuit c(n);
  if (doc.contains("input")) {
    const Json& in = doc["input"];
    const std::string kind = ir::as_string(ir::field(in, "kind", "input"), "input.kind");
    try {
      if (kind == "dense") {
        c = Circuit::with_dense_input(n, ComplexTensor::vector(ir::parse_complex_list(ir::field(in, "data", "input"), "input.data")));
      } else if (kind == "mps") {
        const Json& ts = ir::field(in, "tensors", "input");
        if (!ts.is_array()) throw SchemaError("input.tensors", "expected an array");
        std::vector<ComplexTensor> sites;
        for (std::size_t i = 0; i < ts.size(); ++i)
          sites.push_back(ir::parse_tensor(ts[i], "input.tensors[" + std::to_string(i) + "]"));
        c = Circuit::with_mps_sites(n, sites);
      } else if (kind != "zeros") {
        throw SchemaError("input.kind", "unknown input kind '" + kind + "'");
      }
    } catch (const SchemaError&) {
      throw;
    } catch (const Error& e) {
      throw SchemaError("input", e.what());
    }
  }
  if (doc.contains("split")) {
    const Json& s = doc["split"];
    SplitConfig cfg;
    cfg.max_singular_values = static_cast<std::size_t>(
        ir::as_int(ir::field(s, "max_singular_values", "split"), "split.max_singular_values"));
    if (s.contains("apply_to_two_qubit_gates")) {
      if (!s["apply_to_two_qubit_gates"].is_boolean())
        throw SchemaError("split.apply_to_two_qubit_gates", "expected a boolean");
      cfg.apply_to_two_qubit_gates = s["apply_to_two_qubit_gates"].get<bool>();
    }
    c.set_split(cfg);
  }
  const Json& ops = ir::field(doc, "ops", "$");
  if (!ops.is_array()) throw SchemaError("ops", "expected an array");
  for (std::size_t k = 0; k < ops.size(); ++k) ir::apply_op_json(c, ops[k], "ops[" + std::to_string(k) + "]");
  return c;
}

inline Circuit from_ir_string(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
  return from_ir(doc);
}

inline Json hamiltonian_to_json(const WeightedPauliSum& h) {
  Json terms = Json::array();
  for (const auto& t : h.terms)
    terms.push_back({{"structure", t.structure}, {"weight", Json::array({t.weight.real(), t.weight.imag()})}});
  return Json{{"n", h.n}, {"terms", terms}};
}

/// Reads {"n": int, "terms": [{"structure": [codes], "weight": [re, im]}]};
/// a bare number is accepted as a real weight.
inline WeightedPauliSum hamiltonian_from_json(const Json& doc) {
  if (!doc.is_object()) throw SchemaError("$", "document must be an object");
  WeightedPauliSum h;
  h.n = ir::as_int(ir::field(doc, "n", "$"), "n");
  if (h.n < 1) throw SchemaError("n", "qubit count must be positive");
  const Json& terms = ir::field(doc, "terms", "$");
  if (!terms.is_array()) throw SchemaError("terms", "expected an array");
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string path = "terms[" + std::to_string(t) + "]";
    PauliStructure s = ir::int_list(ir::field(terms[t], "structure", path), path + ".structure");
    if (static_cast<int>(s.size()) != h.n) throw SchemaError(path + ".structure", "length differs from n");
    for (std::size_t q = 0; q < s.size(); ++q)
      if (s[q] < 0 || s[q] > 3)
        throw SchemaError(path + ".structure[" + std::to_string(q) + "]", "Pauli code must be 0..3");
    h.add(std::move(s), ir::parse_complex(ir::field(terms[t], "weight", path), path + ".weight"));
  }
  return h;
}

inline WeightedPauliSum hamiltonian_from_string(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
  return hamiltonian_from_json(doc);
}

/// Plain-text wire diagram, one row per qubit and one column per op.
inline std::string draw(const Circuit& c) {
  const int n = c.n();
  std::vector<std::string> rows(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) rows[static_cast<std::size_t>(q)] = "q" + std::to_string(q) + ": ";
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.size());
  for (auto& r : rows) r.resize(width, ' ');
  for (const auto& op : c.ops()) {
    std::string label;
    switch (op.kind) {
      case OpKind::gate: label = op.label.empty() ? op.name : op.label; break;
      case OpKind::kraus_general: label = op.name.empty() ? "K" : op.name; break;
      case OpKind::kraus_unitary: label = "mix"; break;
      case OpKind::cond_measure: label = "M"; break;
      case OpKind::conditional_gate: label = "c" + std::to_string(op.bit); break;
      case OpKind::post_select: label = "P" + std::to_string(op.keep); break;
    }
    const int lo = *std::min_element(op.qubits.begin(), op.qubits.end());
    const int hi = *std::max_element(op.qubits.begin(), op.qubits.end());
    std::vector<std::string> cell(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) {
      const auto it = std::find(op.qubits.begin(), op.qubits.end(), q);
      if (it != op.qubits.end()) {
        cell[static_cast<std::size_t>(q)] =
            op.qubits.size() > 1 ? label + "#" + std::to_string(it - op.qubits.begin()) : label;
      } else {
        cell[static_cast<std::size_t>(q)] = (q > lo && q < hi) ? "|" : "";
      }
    }
    std::size_t w = 1;
    for (const auto& s : cell) w = std::max(w, s.size());
    for (int q = 0; q < n; ++q) {
      std::string s = cell[static_cast<std::size_t>(q)];
      if (s.empty()) s = std::string(w, '-');
      else if (s == "|") s = std::string(w / 2, '-') + "|" + std::string(w - w / 2 - 1, '-');
      else s += std::string(w - s.size(), '-');
      rows[static_cast<std::size_t>(q)] += "-" + s + "-";
    }
  }
  std::ostringstream out;
  for (const auto& r : rows) out << r << "-\n";
  return out.str();
}

}  // namespace qtn
