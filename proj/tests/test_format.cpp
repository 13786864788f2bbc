#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "robshash/format.hpp"
#include "robshash/plotdata.hpp"

using namespace robshash;

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(3.0), "3");
  EXPECT_EQ(format_double(-2.5e-300), "-2.5e-300");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_double(std::optional<double>{}), "");
  const double v = 0.1 + 0.2;
  EXPECT_EQ(*parse_double(format_double(v)), v);
}

TEST(ParseDouble, StrictWholeField) {
  EXPECT_EQ(parse_double(" 1.5 "), 1.5);
  EXPECT_EQ(parse_double("+2"), 2.0);
  EXPECT_EQ(parse_double("-1e3"), -1000.0);
  EXPECT_FALSE(parse_double(""));
  EXPECT_FALSE(parse_double("1,5"));
  EXPECT_FALSE(parse_double("1.5x"));
  EXPECT_FALSE(parse_double("NA"));
}

TEST(SplitList, RespectsParentheses) {
  EXPECT_EQ(split_list("normal(10,3), t(4) ,gamma(2,1)"),
            (std::vector<std::string>{"normal(10,3)", "t(4)", "gamma(2,1)"}));
  EXPECT_TRUE(split_list("").empty());
  EXPECT_EQ(trim("  a b \t"), "a b");
}

TEST(Histogram, BinsCoverDataAndIntegrateToOne) {
  std::vector<double> x;
  for (int i = 0; i < 400; ++i) x.push_back(std::sin(i) * 3);
  const auto h = histogram(x);
  EXPECT_EQ(h.size(), 20u);
  std::size_t total = 0;
  double area = 0;
  for (const auto& b : h) {
    total += b.count;
    area += b.density * (b.upper - b.lower);
  }
  EXPECT_EQ(total, 400u);
  EXPECT_NEAR(area, 1.0, 1e-12);
  EXPECT_EQ(histogram(x, 5).size(), 5u);
  EXPECT_EQ(histogram(std::vector<double>{1, 2, 3}).size(), 10u);
}

TEST(NormalQq, PlottingPositions) {
  const auto q = normal_qq(std::vector<double>{3, 1, 2});
  ASSERT_EQ(q.size(), 3u);
  EXPECT_EQ(q[0].sample, 1.0);
  EXPECT_EQ(q[2].sample, 3.0);
  EXPECT_NEAR(q[1].theoretical, 0.0, 1e-15);
  EXPECT_NEAR(q[0].theoretical, normal_quantile(0.5 / 3), 1e-15);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
}
