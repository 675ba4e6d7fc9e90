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
#include <exception>
#include <map>
#include <optional>
#include <set>
#include <thread>
#include <tuple>
#include <type_traits>
#include <vector>

#include "qtn/diff.hpp"
#include "qtn/pauli.hpp"
#include "qtn/random.hpp"

namespace qtn {

/// Marks an argument as vectorized along its leading axis.
template <class T>
struct Batched {
  std::vector<T> items;
};

template <class T>
Batched<T> batched(std::vector<T> items) {
  return {std::move(items)};
}

struct BatchSpec {
  std::set<int> vectorized_argnums;
  std::set<int> argnums;
  bool has_aux = false;
  unsigned workers = 0;  ///< 0 selects std::thread::hardware_concurrency()
};

namespace detail {

template <class T>
struct is_batched : std::false_type {};
template <class T>
struct is_batched<Batched<T>> : std::true_type {};

template <class T>
const auto& element(const T& arg, std::size_t i) {
  if constexpr (is_batched<T>::value) return arg.items[i];
  else return arg;
}

template <class... Args>
std::size_t infer_batch_size(const BatchSpec& spec, const Args&... args) {
  std::set<int> positions;
  std::optional<std::size_t> size;
  int pos = 0;
  const auto visit = [&](const auto& arg) {
    if constexpr (is_batched<std::decay_t<decltype(arg)>>::value) {
      positions.insert(pos);
      if (size && *size != arg.items.size())
        throw DimensionError("vectorized arguments have ragged leading axes (" + std::to_string(*size) +
                             " vs " + std::to_string(arg.items.size()) + ")");
      size = arg.items.size();
    }
    ++pos;
  };
  (visit(args), ...);
  if (positions != spec.vectorized_argnums)
    throw InvalidArgument("vectorized_argnums does not match the positions of the batched arguments");
  for (int a : spec.argnums)
    if (a < 0 || a >= pos) throw InvalidArgument("argnum " + std::to_string(a) + " out of range");
  if (!size) throw InvalidArgument("no vectorized argument");
  return *size;
}

/// Runs body(i) for i in [0, count) over a fixed number of threads; each
/// index writes only its own slot, so the result is schedule independent.
/// The exception of the lowest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  std::vector<std::exception_ptr> errors(count);
  const auto run = [&](unsigned w) {
    for (std::size_t i = w; i < count; i += workers) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// Maps f over the leading axis of the Batched arguments; other arguments
/// are broadcast. Equivalent to the sequential loop for any worker count.
template <class F, class... Args>
auto vmap_apply(F&& f, const BatchSpec& spec, const Args&... args) {
  const std::size_t b = detail::infer_batch_size(spec, args...);
  using R = std::decay_t<decltype(f(detail::element(args, 0)...))>;
  std::vector<std::optional<R>> slots(b);
  detail::parallel_for(b, spec.workers, [&](std::size_t i) { slots[i].emplace(f(detail::element(args, i)...)); });
  std::vector<R> out;
  out.reserve(b);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Per-element result of a function handed to vectorized_value_and_grad:
/// its value, the gradient for each differentiated argument position, and
/// optional undifferentiated auxiliary output.
struct ElementValueAndGrad {
  double value = 0.0;
  std::map<int, std::vector<double>> grads;
  std::optional<std::vector<double>> aux;
};

struct VectorizedValueAndGrad {
  std::vector<double> values;
  /// Vectorized differentiated arguments get one gradient row per element;
  /// broadcast arguments get a single row, the sum over the batch.
  std::map<int, std::vector<std::vector<double>>> grads;
  std::vector<std::vector<double>> aux;
};

template <class F, class... Args>
VectorizedValueAndGrad vectorized_value_and_grad(F&& f, const BatchSpec& spec, const Args&... args) {
  const auto per = vmap_apply(std::forward<F>(f), spec, args...);
  VectorizedValueAndGrad out;
  for (int a : spec.argnums) out.grads[a];
  for (std::size_t i = 0; i < per.size(); ++i) {
    const ElementValueAndGrad& e = per[i];
    out.values.push_back(e.value);
    for (int a : spec.argnums) {
      const auto it = e.grads.find(a);
      if (it == e.grads.end())
        throw InvalidArgument("element " + std::to_string(i) + " returned no gradient for argnum " + std::to_string(a));
      auto& rows = out.grads[a];
      if (spec.vectorized_argnums.count(a)) {
        rows.push_back(it->second);
      } else if (rows.empty()) {
        rows.push_back(it->second);
      } else {
        if (rows[0].size() != it->second.size()) throw DimensionError("gradient lengths differ across the batch");
        for (std::size_t k = 0; k < it->second.size(); ++k) rows[0][k] += it->second[k];
      }
    }
    if (spec.has_aux) {
      if (!e.aux) throw InvalidArgument("has_aux is set but element " + std::to_string(i) + " returned no aux output");
      out.aux.push_back(*e.aux);
    }
  }
  return out;
}

// ------------------------------------------------------------ helpers

/// Circuit whose input state is supplied separately from its parameters.
using StateAnsatz = std::function<Circuit(const ComplexTensor& input, const ParamVector&)>;

/// One energy per input state; the parameter gradient is summed over states.
inline VectorizedValueAndGrad batched_states(const StateAnsatz& builder, const Observable& obs,
                                             const std::vector<ComplexTensor>& states,
                                             const std::vector<double>& theta, unsigned workers = 0) {
  BatchSpec spec{{0}, {1}, false, workers};
  return vectorized_value_and_grad(
      [&](const ComplexTensor& input, const std::vector<double>& x) {
        const EnergyFunction f{[&](const ParamVector& p) { return builder(input, p); }, obs};
        const GradientResult g = value_and_grad(f, x);
        return ElementValueAndGrad{g.value, {{1, g.grad}}, std::nullopt};
      },
      spec, batched(states), theta);
}

/// Independent parameter rows (e.g. optimizer restarts); gradients stacked.
inline VectorizedValueAndGrad batched_circuit_params(const EnergyFunction& f,
                                                     const std::vector<std::vector<double>>& rows,
                                                     unsigned workers = 0) {
  BatchSpec spec{{0}, {0}, false, workers};
  return vectorized_value_and_grad(
      [&](const std::vector<double>& x) {
        const GradientResult g = value_and_grad(f, x);
        return ElementValueAndGrad{g.value, {{0, g.grad}}, std::nullopt};
      },
      spec, batched(rows));
}

/// One Pauli-string expectation per structure.
inline std::vector<double> batched_structures(const Circuit& c, const std::vector<PauliStructure>& structures,
                                              unsigned workers = 0) {
  BatchSpec spec{{0}, {}, false, workers};
  return vmap_apply([&](const PauliStructure& s) { return parameterized_measurement(c, s); }, spec,
                    batched(structures));
}

/// One trajectory value per row of externally supplied statuses.
inline std::vector<double> batched_mc_status(const std::function<double(const std::vector<double>&)>& trajectory,
                                             const std::vector<std::vector<double>>& statuses,
                                             unsigned workers = 0) {
  BatchSpec spec{{0}, {}, false, workers};
  return vmap_apply(trajectory, spec, batched(statuses));
}

/// Trajectory i draws from substream i of `source`.
inline std::vector<double> batched_mc_status(const std::function<double(StatusSource&)>& trajectory,
                                             const StatusSource& source, std::size_t batch, unsigned workers = 0) {
  std::vector<std::size_t> index(batch);
  for (std::size_t i = 0; i < batch; ++i) index[i] = i;
  BatchSpec spec{{0}, {}, false, workers};
  return vmap_apply(
      [&](std::size_t i) {
        StatusSource s = source.substream(i);
        return trajectory(s);
      },
      spec, batched(index));
}

}  // namespace qtn
