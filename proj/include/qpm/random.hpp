// Copyright 2026 The qpm Authors
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

#include <cstdint>
#include <random>

#include "qpm/tensor.hpp"

namespace qpm {

/// Seeded generator. Uniform and normal variates are produced here rather than by
/// <random> distributions so that streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal();
  cd complex_normal() { return {normal(), normal()}; }
  std::uint64_t next() { return engine_(); }
  int below(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Independent stream seed for the `index`-th consumer of `seed` (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Haar-random unitary via QR of a Ginibre matrix with the phase fix on R's diagonal.
Matrix haar_unitary(int n, Rng& rng);
PureVector haar_state(const Dims& dims, Rng& rng);
/// Product of independent Haar states, one per factor.
PureVector haar_product_state(const Dims& dims, Rng& rng);
/// Random density operator of the given rank (partial trace of a Haar pure state).
Operator random_density(const Dims& dims, int rank, Rng& rng);
Matrix random_hermitian(int n, Rng& rng);

}  // namespace qpm
