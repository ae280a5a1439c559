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

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "oracles.h"

namespace expiring_counter {
namespace {

using ::testing::ElementsAre;
using ::testing::Eq;

TEST(DyadicIntervalTest, Bounds) {
  const DyadicInterval iv{3, 5};
  EXPECT_EQ(iv.start(), 40u);
  EXPECT_EQ(iv.end(), 47u);
  EXPECT_EQ(iv.length(), 8u);
  EXPECT_TRUE(iv.Contains(40));
  EXPECT_TRUE(iv.Contains(47));
  EXPECT_FALSE(iv.Contains(48));
}

TEST(FloorLog2Test, PowersAndNeighbors) {
  EXPECT_EQ(FloorLog2(1), 0u);
  EXPECT_EQ(FloorLog2(2), 1u);
  EXPECT_EQ(FloorLog2(3), 1u);
  EXPECT_EQ(FloorLog2(1023), 9u);
  EXPECT_EQ(FloorLog2(1024), 10u);
  EXPECT_EQ(FloorLog2(~std::uint64_t{0}), 63u);
}

TEST(ContainingIntervalTest, Examples) {
  EXPECT_EQ(ContainingInterval(5, 0), (DyadicInterval{0, 5}));
  EXPECT_EQ(ContainingInterval(5, 1), (DyadicInterval{1, 2}));
  EXPECT_FALSE(ContainingInterval(5, 3).has_value());
}

TEST(ContainingIntervalTest, NoIntervalStartsAtZero) {
  EXPECT_FALSE(ContainingInterval(3, 2).has_value());
  ASSERT_TRUE(ContainingInterval(4, 2).has_value());
  EXPECT_EQ(*ContainingInterval(4, 2), (DyadicInterval{2, 1}));
}

TEST(IntersectTest, SmallValues) {
  EXPECT_THAT(Intersect(1), ElementsAre(DyadicInterval{0, 1}));
  EXPECT_THAT(Intersect(6), ElementsAre(DyadicInterval{0, 6},
                                        DyadicInterval{1, 3},
                                        DyadicInterval{2, 1}));
}

TEST(IntersectTest, SevenAndEight) {
  EXPECT_THAT(Intersect(7), ElementsAre(DyadicInterval{0, 7},
                                        DyadicInterval{1, 3},
                                        DyadicInterval{2, 1}));
  EXPECT_THAT(Intersect(8), ElementsAre(DyadicInterval{0, 8},
                                        DyadicInterval{1, 4},
                                        DyadicInterval{2, 2},
                                        DyadicInterval{3, 1}));
}

TEST(IntersectTest, MatchesOracle) {
  for (std::uint64_t t = 1; t <= 4096; ++t) {
    const auto got = Intersect(t);
    ASSERT_THAT(got, Eq(oracle::Intersect(t))) << "t=" << t;
    ASSERT_EQ(got.size(), FloorLog2(t) + 1) << "t=" << t;
  }
}

TEST(IntersectTest, LargeValue) {
  const std::uint64_t t = (std::uint64_t{1} << 40) + 12345;
  EXPECT_EQ(Intersect(t).size(), 41u);
  for (const DyadicInterval& iv : Intersect(t)) EXPECT_TRUE(iv.Contains(t));
}

TEST(DecomposeTest, Examples) {
  EXPECT_THAT(Decompose(1, 1), ElementsAre(DyadicInterval{0, 1}));
  EXPECT_THAT(Decompose(1, 7), ElementsAre(DyadicInterval{0, 1},
                                           DyadicInterval{1, 1},
                                           DyadicInterval{2, 1}));
  EXPECT_THAT(Decompose(3, 10), ElementsAre(DyadicInterval{0, 3},
                                            DyadicInterval{2, 1},
                                            DyadicInterval{1, 4},
                                            DyadicInterval{0, 10}));
  // Both ends at or above the top power of two of b.
  EXPECT_THAT(Decompose(9, 14), ElementsAre(DyadicInterval{0, 9},
                                            DyadicInterval{1, 5},
                                            DyadicInterval{1, 6},
                                            DyadicInterval{0, 14}));
}

TEST(DecomposeTest, WorkedExamples) {
  EXPECT_THAT(Decompose(37, 37), ElementsAre(DyadicInterval{0, 37}));
  EXPECT_THAT(Decompose(4, 7), ElementsAre(DyadicInterval{2, 1}));
  EXPECT_THAT(Decompose(3, 6), ElementsAre(DyadicInterval{0, 3},
                                           DyadicInterval{1, 2},
                                           DyadicInterval{0, 6}));
  EXPECT_THAT(Decompose(5, 8), ElementsAre(DyadicInterval{0, 5},
                                           DyadicInterval{1, 3},
                                           DyadicInterval{0, 8}));
}

TEST(DecomposeTest, LevelsArePeriodicInStart) {
  for (std::uint64_t len = 1; len <= 256; ++len) {
    const std::uint64_t period = std::uint64_t{2} << FloorLog2(len);
    for (std::uint64_t a = 1; a <= period; ++a) {
      std::multiset<std::uint32_t> here;
      std::multiset<std::uint32_t> shifted;
      for (const auto& iv : Decompose(a, a + len - 1)) here.insert(iv.level);
      for (const auto& iv : Decompose(a + period, a + period + len - 1)) {
        shifted.insert(iv.level);
      }
      ASSERT_EQ(here, shifted) << "a=" << a << " len=" << len;
    }
  }
}

TEST(DecomposeTest, RejectsBadRanges) {
  EXPECT_THROW(Decompose(0, 3), std::domain_error);
  EXPECT_THROW(Decompose(5, 4), std::domain_error);
}

TEST(DecomposeTest, MatchesGreedyAndIsMinimal) {
  for (std::uint64_t a = 1; a <= 200; ++a) {
    for (std::uint64_t b = a; b <= 200; ++b) {
      const Decomposition got = Decompose(a, b);
      ASSERT_THAT(got, Eq(oracle::GreedyDecompose(a, b)))
          << "[" << a << ", " << b << "]";
      ASSERT_EQ(static_cast<int>(got.size()), oracle::MinimalCoverSize(a, b));
    }
  }
}

TEST(DecomposeTest, StructuralInvariantsAtLargeOffsets) {
  const std::uint64_t base = std::uint64_t{1} << 50;
  for (std::uint64_t a = base - 300; a <= base + 300; a += 7) {
    for (std::uint64_t len = 1; len <= 700; len += 13) {
      const std::uint64_t b = a + len - 1;
      const Decomposition got = Decompose(a, b);
      std::uint64_t next = a;
      std::map<std::uint32_t, int> per_level;
      for (const DyadicInterval& iv : got) {
        ASSERT_EQ(iv.start(), next);
        ASSERT_GE(iv.index, 1u);
        ASSERT_LE(iv.level, FloorLog2(len));
        ++per_level[iv.level];
        next = iv.end() + 1;
      }
      ASSERT_EQ(next, b + 1);
      for (const auto& [level, count] : per_level) ASSERT_LE(count, 2);
    }
  }
}

}  // namespace
}  // namespace expiring_counter
