// Copyright 2026 The EvoFlow Authors.
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

#include "evoflow/util.h"

#include <gtest/gtest.h>

#include <limits>
#include <random>

namespace evoflow::util {
namespace {

TEST(FormatDoubleTest, RoundTrips) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = dist(rng);
    EXPECT_EQ(std::stod(FormatDouble(v)), v);
  }
  EXPECT_EQ(FormatDouble(0.5), "0.5");
  EXPECT_EQ(FormatDouble(3.0), "3");
}

TEST(SplitJoinTest, Inverse) {
  const std::vector<std::string> parts = {"a", "", "bc"};
  EXPECT_EQ(Split(Join(parts, ","), ','), parts);
  EXPECT_EQ(Trim("  x y \t"), "x y");
}

TEST(DeriveSeedTest, DependsOnBothInputs) {
  EXPECT_EQ(DeriveSeed(1, "a"), DeriveSeed(1, "a"));
  EXPECT_NE(DeriveSeed(1, "a"), DeriveSeed(2, "a"));
  EXPECT_NE(DeriveSeed(1, "a"), DeriveSeed(1, "b"));
  EXPECT_EQ(Fnv1a(""), 14695981039346656037ULL);
}

TEST(StatsTest, MedianAndQuantiles) {
  EXPECT_DOUBLE_EQ(Median({1, 2, 3, 10}), 2.5);
  EXPECT_DOUBLE_EQ(Median({3, 1, 2}), 2.0);
  // numpy.quantile([1, 2, 3, 4], 0.25) == 1.75
  EXPECT_DOUBLE_EQ(Quantile({4, 3, 2, 1}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(Quantile({1, 2, 3, 4}, 0.75), 3.25);
  const std::vector<double> v = {1.0, 2.0, 6.0};
  EXPECT_DOUBLE_EQ(Mean(v), 3.0);
}

}  // namespace
}  // namespace evoflow::util
