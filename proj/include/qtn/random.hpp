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
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "qtn/tensor.hpp"

namespace qtn {

/// Seeded source of uniforms in [0,1).
///
/// substream(i) derives an independent source from (seed, stream, i), so
/// work indexed by i draws the same numbers whether it runs serially or in
/// parallel.
class StatusSource {
 public:
  explicit StatusSource(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  StatusSource substream(std::uint64_t index) const {
    return StatusSource(seed_, mix(stream_ * 0x9e3779b97f4a7c15ULL + index + 1));
  }

  std::uint64_t next_u64() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal by Box-Muller (one draw per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

/// Real array with a shape, row-major.
struct RealArray {
  Shape shape;
  std::vector<double> data;

  double operator[](std::size_t i) const { return data[i]; }
  double at2(std::size_t r, std::size_t c) const { return data[r * shape.at(1) + c]; }
  double at3(std::size_t a, std::size_t b, std::size_t c) const {
    return data[(a * shape.at(1) + b) * shape.at(2) + c];
  }
};

inline RealArray implicit_randu(const Shape& shape, std::uint64_t seed) {
  StatusSource src(seed);
  RealArray out{shape, std::vector<double>(shape_size(shape))};
  for (double& v : out.data) v = src.uniform();
  return out;
}

inline RealArray implicit_randn(const Shape& shape, std::uint64_t seed) {
  StatusSource src(seed);
  RealArray out{shape, std::vector<double>(shape_size(shape))};
  for (double& v : out.data) v = src.normal();
  return out;
}

}  // namespace qtn
