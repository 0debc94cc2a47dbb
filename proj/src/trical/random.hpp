// Copyright 2026 The TriCal Authors
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

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>

namespace trical {

// Substream tags. Keep values stable: they are part of every seeded output.
namespace stream {
inline constexpr std::uint64_t kScene = 1;
inline constexpr std::uint64_t kPerturb = 2;
inline constexpr std::uint64_t kResample = 3;
inline constexpr std::uint64_t kShuffle = 4;
inline constexpr std::uint64_t kInit = 5;
inline constexpr std::uint64_t kEval = 6;
inline constexpr std::uint64_t kSplit = 7;
inline constexpr std::uint64_t kTest = 99;
}  // namespace stream

/// Philox4x32-10 counter-based generator.
///
/// A generator is fully determined by its 64-bit key and 128-bit counter, so
/// independent substreams are obtained by hashing (seed, tags...) into the key
/// instead of advancing a shared state. Output does not depend on platform or
/// standard-library distribution implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key = 0) : key_{static_cast<std::uint32_t>(key),
                                             static_cast<std::uint32_t>(key >> 32)} {}

  /// Generator keyed by (seed, tags...). Distinct tag tuples give independent streams.
  static Rng substream(std::uint64_t seed, std::span<const std::uint64_t> tags);
  static Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    return substream(seed, std::span<const std::uint64_t>(tags.begin(), tags.size()));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Unbiased integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller (one value per call).
  double normal();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_{0, 0, 0, 0};
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
};

/// SplitMix64 finalizer, used for key derivation.
std::uint64_t mix64(std::uint64_t x);

}  // namespace trical
