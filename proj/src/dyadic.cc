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

#include "expiring_counter/dyadic.h"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace expiring_counter {

std::optional<DyadicInterval> ContainingInterval(std::uint64_t t,
                                                 std::uint32_t level) {
  if (level >= 64) return std::nullopt;
  const std::uint64_t k = t >> level;
  if (k == 0) return std::nullopt;
  return DyadicInterval{level, k};
}

std::vector<DyadicInterval> Intersect(std::uint64_t t) {
  std::vector<DyadicInterval> out;
  if (t == 0) return out;
  const std::uint32_t top = FloorLog2(t);
  out.reserve(top + 1);
  for (std::uint32_t level = 0; level <= top; ++level) {
    out.push_back(DyadicInterval{level, t >> level});
  }
  return out;
}

Decomposition Decompose(std::uint64_t a, std::uint64_t b) {
  if (a < 1 || a > b) {
    throw std::domain_error("Decompose requires 1 <= a <= b, got [" +
                            std::to_string(a) + ", " + std::to_string(b) +
                            "]");
  }
  // The highest bit in which a - 1 and b differ is the largest power of two
  // with a multiple inside [a, b]; clearing the bits below it gives that
  // multiple.
  const std::uint32_t split_level = FloorLog2((a - 1) ^ b);
  const std::uint64_t split = (b >> split_level) << split_level;

  Decomposition out;
  out.reserve(2 * (split_level + 1));

  std::uint64_t left_len = split - a;
  std::uint64_t cursor = split;
  while (left_len != 0) {
    const std::uint32_t level = FloorLog2(left_len);
    cursor -= std::uint64_t{1} << level;
    out.push_back(DyadicInterval{level, cursor >> level});
    left_len &= ~(std::uint64_t{1} << level);
  }
  std::reverse(out.begin(), out.end());

  std::uint64_t right_len = b - split + 1;
  cursor = split;
  while (right_len != 0) {
    const std::uint32_t level = FloorLog2(right_len);
    out.push_back(DyadicInterval{level, cursor >> level});
    cursor += std::uint64_t{1} << level;
    right_len &= ~(std::uint64_t{1} << level);
  }
  return out;
}

}  // namespace expiring_counter
