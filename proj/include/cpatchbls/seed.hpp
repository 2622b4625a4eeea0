// Copyright 2026 The CPatchBLS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CPATCHBLS_SEED_HPP
#define CPATCHBLS_SEED_HPP

#include <cstdint>

namespace cpatchbls {

// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

enum class BranchKind : std::uint8_t { Basic = 0, SKP = 1 };

/// Derives the seed of one (scale, branch, channel) fitting task:
///
///   s0 = splitmix64(master)
///   s1 = splitmix64(s0 ^ scale_index)
///   s2 = splitmix64(s1 ^ branch_id)        Basic = 0, SKP = 1
///   seed = splitmix64(s2 ^ channel_index)
///
/// The result depends only on the task coordinates, never on the order in
/// which tasks run.
constexpr std::uint64_t mix64(std::uint64_t master, std::uint64_t scale_index,
                              BranchKind branch,
                              std::uint64_t channel_index) noexcept {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ scale_index);
  s = splitmix64(s ^ static_cast<std::uint64_t>(branch));
  return splitmix64(s ^ channel_index);
}

}  // namespace cpatchbls

#endif  // CPATCHBLS_SEED_HPP
