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

#include "delr/rng.h"

#include <cmath>

#include "delr/error.h"

namespace delr {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream RngStream::Derive(std::uint64_t seed, std::string_view name,
                            std::uint64_t index) {
  // FNV-1a over the stream name.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return RngStream(SplitMix64(SplitMix64(seed ^ h) + index));
}

double RngStream::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::Uniform(double lo, double hi) {
  const double u = Uniform();
  if (!(hi > lo)) return lo;
  return lo + u * (hi - lo);
}

std::uint64_t RngStream::UniformInt(std::uint64_t n) {
  if (n == 0) throw PreconditionError("UniformInt needs n > 0");
  // Rejection sampling for an unbiased result.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

int RngStream::Poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  const double l = std::exp(-mean);
  int k = 0;
  double p = Uniform();
  while (p > l) {
    ++k;
    p *= Uniform();
  }
  return k;
}

}  // namespace delr
