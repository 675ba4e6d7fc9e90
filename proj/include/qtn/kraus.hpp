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

#include <bit>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "qtn/gates.hpp"
#include "qtn/tensor.hpp"

namespace qtn {

/// A channel rho -> sum_i K_i rho K_i^dagger. `name` and `params` identify
/// built-in channels for serialization; custom channels leave name empty.
struct KrausChannel {
  std::vector<ComplexTensor> operators;
  std::string name;
  std::map<std::string, double> params;

  int arity() const {
    if (operators.empty()) throw InvalidArgument("Kraus channel has no operators");
    return std::countr_zero(operators.front().dim(0));
  }

  /// ||sum_i K_i^dagger K_i - I||_max.
  double cptp_defect() const {
    if (operators.empty()) return 1.0;
    const std::size_t d = operators.front().dim(0);
    ComplexTensor acc({d, d});
    for (const auto& k : operators) acc = add(acc, matmul(adjoint(k), k));
    return max_abs_diff(acc, ComplexTensor::identity(d));
  }

  void validate(double tol = 1e-10) const {
    if (operators.empty()) throw InvalidArgument("Kraus channel has no operators");
    const std::size_t d = operators.front().dim(0);
    if (std::popcount(d) != 1) throw DimensionError("Kraus operators must be 2^k x 2^k");
    for (const auto& k : operators)
      if (k.rank() != 2 || k.dim(0) != d || k.dim(1) != d)
        throw DimensionError("Kraus operators must share one square shape");
    const double defect = cptp_defect();
    if (defect > tol)
      throw PreconditionError("Kraus operators are not trace preserving (defect " +
                              std::to_string(defect) + ")");
  }
};

namespace channels {

inline void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0))
    throw InvalidArgument(std::string(what) + " must lie in [0, 1], got " + std::to_string(p));
}

inline KrausChannel amplitude_damping(double gamma) {
  require_probability(gamma, "amplitude_damping gamma");
  return {{ComplexTensor::matrix({{1, 0}, {0, std::sqrt(1 - gamma)}}),
           ComplexTensor::matrix({{0, std::sqrt(gamma)}, {0, 0}})},
          "amplitude_damping",
          {{"gamma", gamma}}};
}

inline KrausChannel phase_damping(double gamma) {
  require_probability(gamma, "phase_damping gamma");
  return {{ComplexTensor::matrix({{1, 0}, {0, std::sqrt(1 - gamma)}}),
           ComplexTensor::matrix({{0, 0}, {0, std::sqrt(gamma)}})},
          "phase_damping",
          {{"gamma", gamma}}};
}

/// K0 = sqrt(1-px-py-pz) I, K1 = sqrt(px) X, K2 = sqrt(py) Y, K3 = sqrt(pz) Z.
inline KrausChannel depolarizing(double px, double py, double pz) {
  require_probability(px, "depolarizing px");
  require_probability(py, "depolarizing py");
  require_probability(pz, "depolarizing pz");
  const double p0 = 1.0 - px - py - pz;
  if (p0 < -1e-12) throw InvalidArgument("depolarizing: px + py + pz must not exceed 1");
  return {{scale(gates::i(), std::sqrt(std::max(0.0, p0))), scale(gates::x(), std::sqrt(px)),
           scale(gates::y(), std::sqrt(py)), scale(gates::z(), std::sqrt(pz))},
          "depolarizing",
          {{"px", px}, {"py", py}, {"pz", pz}}};
}

inline KrausChannel reset() {
  return {{ComplexTensor::matrix({{1, 0}, {0, 0}}), ComplexTensor::matrix({{0, 1}, {0, 0}})},
          "reset",
          {}};
}

/// Built-in channel by name and parameter map.
inline KrausChannel by_name(const std::string& name, const std::map<std::string, double>& params) {
  const auto get = [&](const char* key) {
    const auto it = params.find(key);
    if (it == params.end()) throw InvalidArgument("channel '" + name + "' needs parameter '" + key + "'");
    return it->second;
  };
  if (name == "amplitude_damping") return amplitude_damping(get("gamma"));
  if (name == "phase_damping") return phase_damping(get("gamma"));
  if (name == "depolarizing") return depolarizing(get("px"), get("py"), get("pz"));
  if (name == "reset") return reset();
  throw InvalidArgument("unknown channel '" + name + "'");
}

}  // namespace channels
}  // namespace qtn
