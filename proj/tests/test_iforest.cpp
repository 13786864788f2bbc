#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "robshash/distributions.hpp"
#include "robshash/error.hpp"
#include "robshash/iforest.hpp"
#include "robshash/robust.hpp"
#include "robshash/simulation.hpp"

using namespace robshash;

namespace {

long double harmonic(std::size_t n) {
  long double h = 0;
  for (std::size_t i = 1; i <= n; ++i) h += 1.0L / static_cast<long double>(i);
  return h;
}

std::vector<double> normal_draws(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST(AveragePathLength, ExactValues) {
  EXPECT_EQ(average_path_length(0), 0.0);
  EXPECT_EQ(average_path_length(1), 0.0);
  EXPECT_DOUBLE_EQ(average_path_length(2), 1.0);
  for (std::size_t n : {3u, 10u, 256u, 5000u}) {
    const long double ref = 2 * harmonic(n - 1) - 2.0L * (n - 1) / n;
    EXPECT_NEAR(average_path_length(n), static_cast<double>(ref), 1e-12);
  }
}

TEST(IsolationForest, TwoPointsScoreOneHalf) {
  const std::vector<double> x{0.0, 1.0};
  IsolationForestConfig cfg;
  cfg.seed = 3;
  const IsolationForest f(x, cfg);
  EXPECT_EQ(f.subsample_size(), 2u);
  EXPECT_EQ(f.height_limit(), 1u);
  EXPECT_DOUBLE_EQ(f.score(0.0), 0.5);
  EXPECT_DOUBLE_EQ(f.score(1.0), 0.5);
}

TEST(IsolationForest, ConstantSampleScoresOneHalf) {
  const std::vector<double> x(300, 4.2);
  const IsolationForest f(x, IsolationForestConfig{});
  for (const auto& t : f.trees()) EXPECT_EQ(t.size(), 1u);
  EXPECT_NEAR(f.score(4.2), 0.5, 1e-15);
}

TEST(IsolationForest, DeterministicPerSeed) {
  const auto x = normal_draws(500, 1);
  IsolationForestConfig cfg;
  cfg.seed = 42;
  const auto a = IsolationForest(x, cfg).scores(x);
  const auto b = IsolationForest(x, cfg).scores(x);
  EXPECT_EQ(a, b);
  cfg.seed = 43;
  EXPECT_NE(a, IsolationForest(x, cfg).scores(x));
}

TEST(IsolationForest, StructuralInvariants) {
  const auto x = normal_draws(1000, 2);
  IsolationForestConfig cfg;
  cfg.n_trees = 50;
  const IsolationForest f(x, cfg);
  EXPECT_EQ(f.trees().size(), 50u);
  EXPECT_EQ(f.subsample_size(), 256u);
  EXPECT_EQ(f.height_limit(), 8u);
  for (const auto& t : f.trees()) {
    EXPECT_EQ(t.front().size, 256u);
    for (const auto& node : t) {
      EXPECT_LE(node.depth, f.height_limit());
      if (node.left >= 0) {
        const auto& l = t[static_cast<std::size_t>(node.left)];
        const auto& r = t[static_cast<std::size_t>(node.right)];
        EXPECT_EQ(l.size + r.size, node.size);
        EXPECT_GT(l.size, 0u);
        EXPECT_GT(r.size, 0u);
      }
    }
  }
  for (double s : f.scores(x)) {
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
}

TEST(IsolationForest, SubsampleCappedAtSampleSize) {
  const auto x = normal_draws(40, 3);
  const IsolationForest f(x, IsolationForestConfig{});
  EXPECT_EQ(f.subsample_size(), 40u);
  EXPECT_EQ(f.height_limit(), 6u);
}

TEST(IsolationForest, PlantedPointHasHighestScore) {
  auto x = normal_draws(500, 4);
  x[123] = median(x) + 50 * mad(x);
  const auto sc = IsolationForest(x, IsolationForestConfig{}).scores(x);
  EXPECT_EQ(std::max_element(sc.begin(), sc.end()) - sc.begin(), 123);
}

TEST(IsolationForest, Preconditions) {
  EXPECT_THROW(IsolationForest(std::vector<double>{1.0}, IsolationForestConfig{}), InvalidArgument);
  IsolationForestConfig bad;
  bad.n_trees = 0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = IsolationForestConfig{};
  bad.score_threshold = 1.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(IforestInit, NothingAboveThresholdMeansNoFlags) {
  IsolationForestConfig cfg;
  cfg.score_threshold = 0.99;
  const auto lab = iforest_init(Sample(normal_draws(300, 5), Support::RealLine), cfg);
  EXPECT_EQ(lab.count(), 0u);
  EXPECT_FALSE(lab.upper_cut);
  EXPECT_FALSE(lab.lower_cut);
}

TEST(IforestInit, FlagsBothTailsOnRealLine) {
  auto x = normal_draws(500, 6);
  x[0] = 40.0;
  x[1] = -40.0;
  const auto lab = iforest_init(Sample(x, Support::RealLine), IsolationForestConfig{});
  EXPECT_TRUE(lab.flags[0]);
  EXPECT_TRUE(lab.flags[1]);
  ASSERT_TRUE(lab.upper_cut && lab.lower_cut);
  // Cuts are monotone: everything beyond a cut is flagged, nothing inside.
  for (std::size_t i = 0; i < x.size(); ++i)
    EXPECT_EQ(lab.flags[i], x[i] >= *lab.upper_cut || x[i] <= *lab.lower_cut);
}

TEST(IforestInit, PositiveSupportIsOneSided) {
  auto s = sample_reference(ReferenceDistribution::gamma(2, 1), 500, 8);
  std::vector<double> x(s.values().begin(), s.values().end());
  x[0] = 1e-6;
  x[1] = 60.0;
  const auto lab = iforest_init(Sample(x, Support::PositiveReal), IsolationForestConfig{});
  EXPECT_FALSE(lab.lower_cut);
  EXPECT_FALSE(lab.flags[0]);
  EXPECT_TRUE(lab.flags[1]);
}

TEST(IforestInit, FindsGammaContaminants) {
  const auto d = ReferenceDistribution::gamma(2, 1);
  const ShashParams p = calibrate_shash(d, 20000, 1);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ContaminationSpec spec{d, 0.10, 500, 20000, seed};
    const LabeledSample ls = contaminate(spec, p);
    IsolationForestConfig cfg;
    cfg.seed = seed;
    const auto lab = iforest_init(ls.sample, cfg);
    const ConfusionRates r = confusion(lab.flags, ls.truth);
    EXPECT_EQ(*r.tpr, 1.0) << "seed " << seed;
  }
}

TEST(ZscoreInit, FlagsExtremePointAndNominalRate) {
  auto x = normal_draws(499, 9);
  x.push_back(10.0);
  const auto lab = zscore_init(Sample(x, Support::RealLine));
  EXPECT_TRUE(lab.flags.back());
  EXPECT_NEAR(*lab.upper_cut, median(x) + 2.58 * mad(x), 1e-12);
  EXPECT_NEAR(*lab.lower_cut, median(x) - 2.58 * mad(x), 1e-12);

  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed)
    total += static_cast<double>(zscore_init(Sample(normal_draws(500, 100 + seed), Support::RealLine)).count());
  EXPECT_NEAR(total / (200.0 * 500.0), 0.0099, 0.003);
}

TEST(ZscoreInit, PositiveSupportIgnoresLowerTail) {
  const Sample g = sample_reference(ReferenceDistribution::gamma(2, 1), 300, 3);
  std::vector<double> x(g.values().begin(), g.values().end());
  x[0] = 1e-9;
  const auto lab = zscore_init(Sample(x, Support::PositiveReal));
  EXPECT_FALSE(lab.flags[0]);
  EXPECT_FALSE(lab.lower_cut);
  EXPECT_TRUE(lab.upper_cut);
}

TEST(ZscoreInit, AffineInvariantAndDegenerate) {
  const auto x = normal_draws(400, 10);
  std::vector<double> y;
  for (double v : x) y.push_back(7 * v + 100);
  EXPECT_EQ(zscore_init(Sample(x, Support::RealLine)).flags,
            zscore_init(Sample(y, Support::RealLine)).flags);
  EXPECT_THROW(zscore_init(Sample({1, 1, 1, 1, 2}, Support::RealLine)), DegenerateSample);
}

TEST(UnionLabels, OrAndWidenedCuts) {
  InitLabels a{{true, false, false}, 1.0, 5.0};
  InitLabels b{{false, false, true}, std::nullopt, 4.0};
  const auto u = union_labels(a, b);
  EXPECT_EQ(u.flags, (std::vector<bool>{true, false, true}));
  EXPECT_EQ(u.upper_cut, 4.0);
  EXPECT_EQ(u.lower_cut, 1.0);
  EXPECT_EQ(u.count(), 2u);
  EXPECT_THROW(union_labels(a, InitLabels{{true}, {}, {}}), InvalidArgument);
}
