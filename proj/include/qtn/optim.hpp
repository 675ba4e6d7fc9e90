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
#include <string>
#include <vector>

#include "qtn/errors.hpp"

namespace qtn {

enum class OptimizerKind { sgd, adam };

inline OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw InvalidArgument("unknown optimizer '" + name + "' (expected sgd or adam)");
}

inline const char* optimizer_name(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Adam until this many steps have been taken, then plain SGD; -1 disables.
  long switch_to_sgd = -1;
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;
};

inline void check_lengths(const std::vector<double>& params, const std::vector<double>& grad) {
  if (params.size() != grad.size())
    throw DimensionError("optimizer: " + std::to_string(params.size()) + " parameters, " +
                         std::to_string(grad.size()) + " gradient entries");
}

inline std::vector<double> sgd_step(OptimizerState& state, std::vector<double> params, const std::vector<double>& grad) {
  check_lengths(params, grad);
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= state.learning_rate * grad[i];
  ++state.t;
  return params;
}

inline std::vector<double> adam_step(OptimizerState& state, std::vector<double> params, const std::vector<double>& grad) {
  check_lengths(params, grad);
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw DimensionError("optimizer: moment length changed");
  ++state.t;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1 - state.beta2) * grad[i] * grad[i];
    const double mh = state.m[i] / c1;
    const double vh = state.v[i] / c2;
    params[i] -= state.learning_rate * mh / (std::sqrt(vh) + state.eps);
  }
  return params;
}

/// One update according to `state.kind` and the optional Adam-to-SGD switch.
inline std::vector<double> optimizer_step(OptimizerState& state, std::vector<double> params,
                                          const std::vector<double>& grad) {
  if (state.kind == OptimizerKind::sgd || (state.switch_to_sgd >= 0 && state.t >= state.switch_to_sgd))
    return sgd_step(state, std::move(params), grad);
  return adam_step(state, std::move(params), grad);
}

}  // namespace qtn
