// Copyright 2026 The AOTK Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AOTK_RANDOM_H_
#define AOTK_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace aotk {

// Seeds flow from a single run seed; every consumer derives its own stream by
// mixing in a stable label so that adding a consumer never perturbs another.
uint64_t DeriveSeed(uint64_t base, std::string_view label);
uint64_t DeriveSeed(uint64_t base, uint64_t index);

// 64-bit FNV-1a; stable across platforms, used for hashing into buckets.
uint64_t Fnv1a64(std::string_view data);

// Deterministic generator whose draws do not depend on the standard library's
// distribution implementations, so outputs match across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, n). n must be positive.
  size_t UniformIndex(size_t n);

  // Uniform in [0, 1) with 53 bits of resolution.
  double UniformDouble();

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = UniformIndex(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace aotk

#endif  // AOTK_RANDOM_H_
