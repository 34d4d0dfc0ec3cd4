// Copyright 2026 The FAQ Authors.
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

#include "faq/text.h"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "faq/errors.h"
#include "faq/random.h"

namespace faq {
namespace {

TEST(TextTest, SplitKeepsEmptyCells) {
  const auto c = SplitCsvLine("a,,b,");
  ASSERT_EQ(c.size(), 4u);
  EXPECT_EQ(c[1], "");
  EXPECT_EQ(c[3], "");
}

TEST(TextTest, StrictNumbers) {
  EXPECT_EQ(ParseInt(" 42 ", "x"), 42);
  EXPECT_THROW(ParseInt("4x", "x"), ParseError);
  EXPECT_THROW(ParseInt("", "x"), ParseError);
  EXPECT_DOUBLE_EQ(ParseDouble("1e-3", "x"), 1e-3);
  EXPECT_TRUE(std::isnan(ParseDouble("NA", "x")));
  EXPECT_TRUE(std::isinf(ParseDouble("inf", "x")));
  EXPECT_THROW(ParseDouble("0.5.1", "x"), ParseError);
}

TEST(TextTest, Lists) {
  EXPECT_EQ(ParseDoubleList("0.1, 0.2,0.3", "x"), (std::vector<double>{0.1, 0.2, 0.3}));
  EXPECT_EQ(ParseIntList("1,2", "x"), (std::vector<std::int64_t>{1, 2}));
}

TEST(TextTest, FormatDoubleRoundTrips) {
  CounterRng r(3);
  for (int i = 0; i < 10000; ++i) {
    const double x = (r.Uniform() - 0.5) * std::pow(10.0, static_cast<int>(r.UniformInt(40)) - 20);
    EXPECT_EQ(ParseDouble(FormatDouble(x), "x"), x);
  }
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(std::numeric_limits<double>::infinity()), "inf");
}

}  // namespace
}  // namespace faq
