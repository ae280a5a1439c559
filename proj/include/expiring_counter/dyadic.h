//
// Copyright 2026 The Expiring Counter Authors
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
//

#ifndef EXPIRING_COUNTER_DYADIC_H_
#define EXPIRING_COUNTER_DYADIC_H_

#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

namespace expiring_counter {

// A dyadic interval [index * 2^level, (index + 1) * 2^level - 1] on the
// positive integers. Intervals that would start at 0 are not part of the set.
struct DyadicInterval {
  std::uint32_t level = 0;
  std::uint64_t index = 1;

  std::uint64_t start() const { return index << level; }
  std::uint64_t end() const { return ((index + 1) << level) - 1; }
  std::uint64_t length() const { return std::uint64_t{1} << level; }
  bool Contains(std::uint64_t t) const { return t >= start() && t <= end(); }

  friend auto operator<=>(const DyadicInterval&,
                          const DyadicInterval&) = default;
};

// Disjoint dyadic intervals sorted by start whose union is one contiguous
// range, with at most two intervals per level.
using Decomposition = std::vector<DyadicInterval>;

// floor(log2(x)) for x >= 1, computed on the bit pattern.
inline std::uint32_t FloorLog2(std::uint64_t x) {
  return static_cast<std::uint32_t>(std::bit_width(x)) - 1;
}

// The interval of `level` containing t, or nullopt when that interval would
// start at 0 (t < 2^level). Requires t >= 1.
std::optional<DyadicInterval> ContainingInterval(std::uint64_t t,
                                                 std::uint32_t level);

// All dyadic intervals containing t, ordered by level. Always has exactly
// FloorLog2(t) + 1 entries.
std::vector<DyadicInterval> Intersect(std::uint64_t t);

// Deterministic dyadic decomposition of [a, b].
//
// The range is split at the point p in [a, b] divisible by the largest power
// of two. [a, p - 1] is then covered right-to-left and [p, b] left-to-right,
// each following the binary representation of its length from the most
// significant bit down. Each side uses at most one interval per level and no
// level exceeds FloorLog2(b - a + 1).
//
// Throws std::domain_error unless 1 <= a <= b.
Decomposition Decompose(std::uint64_t a, std::uint64_t b);

}  // namespace expiring_counter

#endif  // EXPIRING_COUNTER_DYADIC_H_
