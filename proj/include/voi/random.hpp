// Copyright 2026 The voi-twin Authors
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

#ifndef VOI_RANDOM_HPP
#define VOI_RANDOM_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace voi {

/// Seeded 64-bit generator with portable conversions.
///
/// std::uniform_real_distribution and std::shuffle are implementation defined,
/// so every draw here is derived from raw mt19937_64 output instead. A stream id
/// selects an independent sequence for the same user seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x9e3779b9U};
    engine_.seed(seq);
  }

  /// Uniform on the open interval (0, 1).
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform integer in [0, bound), unbiased by rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
  }

  template <class T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Stream ids used across the engine so that independent random inputs never overlap.
namespace streams {
inline constexpr std::uint64_t kInnerSamples = 0;
inline constexpr std::uint64_t kOuterSamples = 1;
inline constexpr std::uint64_t kMeasurementNoise = 2;
inline constexpr std::uint64_t kFallbackNoise = 3;
inline constexpr std::uint64_t kCalibration = 4;
}  // namespace streams

}  // namespace voi

#endif  // VOI_RANDOM_HPP
