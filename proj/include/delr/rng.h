// Copyright 2026 The delr Authors.
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

#ifndef DELR_RNG_H_
#define DELR_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace delr {

// Deterministic random stream. Each module derives its own named stream from
// the experiment seed so results do not depend on call order across modules.
// Distributions are implemented here rather than with <random> distribution
// classes, whose output is implementation defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  // Stream for `name` (and optional index) split from `seed`.
  static RngStream Derive(std::uint64_t seed, std::string_view name,
                          std::uint64_t index = 0);

  std::uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1).
  double Uniform();
  // Uniform in [lo, hi]. Returns lo when hi <= lo.
  double Uniform(double lo, double hi);
  // Uniform integer in [0, n). Requires n > 0.
  std::uint64_t UniformInt(std::uint64_t n);
  bool Bernoulli(double p) { return Uniform() < p; }
  // Knuth's multiplication method; fine for the small means used here.
  int Poisson(double mean);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t SplitMix64(std::uint64_t x);

}  // namespace delr

#endif  // DELR_RNG_H_
