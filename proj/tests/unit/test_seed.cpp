// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <set>

#include "mmblock/seed.hpp"

using namespace mmblock;

TEST(Seed, DeriveIsDeterministicAndTagSensitive) {
  EXPECT_EQ(derive_seed(5, {1, 2}), derive_seed(5, {1, 2}));
  EXPECT_NE(derive_seed(5, {1, 2}), derive_seed(5, {2, 1}));
  EXPECT_NE(derive_seed(5, "dataset", {}), derive_seed(5, "split", {}));
  EXPECT_NE(derive_seed(5, "dataset", {}), derive_seed(6, "dataset", {}));
}

TEST(Seed, UnitIntervalStaysInHalfOpenRange) {
  std::set<double> seen;
  for (std::uint64_t k = 0; k < 10000; ++k) {
    const double u = unit_interval(mix64(k));
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    seen.insert(u);
  }
  EXPECT_GT(seen.size(), 9990u);
  EXPECT_EQ(unit_interval(0), 0.0);
  EXPECT_LT(unit_interval(~0ULL), 1.0);
}

TEST(Seed, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}
