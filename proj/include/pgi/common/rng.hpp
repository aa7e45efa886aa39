/* Copyright 2026 The pgi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>

namespace pgi {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a over raw bytes. Used for manifest checksums and mask fingerprints.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// Derives an independent stream key from a base seed and a list of
/// counters (tag, iteration, sample index, ...).
std::uint64_t derive_key(std::uint64_t seed,
                         std::initializer_list<std::uint64_t> counters) noexcept;

/// Stable string tags for the named RNG streams.
namespace stream {
inline constexpr std::uint64_t kMasks = 0x6d61736b;       // "mask"
inline constexpr std::uint64_t kEpochOrder = 0x6f726472;  // "ordr"
inline constexpr std::uint64_t kInitG = 0x696e6947;       // "iniG"
inline constexpr std::uint64_t kInitD = 0x696e6944;       // "iniD"
inline constexpr std::uint64_t kExtractor = 0x65787472;   // "extr"
inline constexpr std::uint64_t kEval = 0x6576616c;        // "eval"
inline constexpr std::uint64_t kSubsample = 0x73756273;   // "subs"
inline constexpr std::uint64_t kCorpus = 0x636f7270;      // "corp"
}  // namespace stream

/// Counter-keyed random stream. The engine is std::mt19937_64; the
/// conversions to real/integer values are written out here because the
/// standard distributions are implementation-defined, and runs must agree
/// across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : engine_(key) {}
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> counters)
      : engine_(derive_key(seed, counters)) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound). Lemire's nearly-divisionless method.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }
  /// Standard normal (Box-Muller, no caching so every call consumes two draws).
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace pgi
