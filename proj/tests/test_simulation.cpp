#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "robshash/error.hpp"
#include "robshash/moments.hpp"
#include "robshash/random.hpp"
#include "robshash/simulation.hpp"

using namespace robshash;

TEST(Contamination, CountIsRounded) {
  EXPECT_EQ(contamination_count(0.0, 500), 0u);
  EXPECT_EQ(contamination_count(0.1, 500), 50u);
  EXPECT_EQ(contamination_count(0.01, 500), 5u);
  EXPECT_EQ(contamination_count(0.3, 7), 2u);
  EXPECT_EQ(contamination_count(0.25, 10), 3u);
  EXPECT_THROW(contamination_count(1.0, 10), InvalidArgument);
  EXPECT_THROW(contamination_count(-0.1, 10), InvalidArgument);
}

TEST(Contamination, ZeroFractionIsTheRawDraw) {
  const auto d = ReferenceDistribution::gamma(2, 1);
  const ShashParams p = calibrate_shash(d, 20000, 3);
  const LabeledSample ls = contaminate({d, 0.0, 500, 20000, 77}, p);
  EXPECT_EQ(std::count(ls.truth.begin(), ls.truth.end(), true), 0);
  const Sample raw = sample_reference(d, 500, stream_seed(77, Stream::Base));
  for (std::size_t i = 0; i < 500; ++i) EXPECT_NEAR(ls.sample[i], raw[i], 1e-8 * std::max(1.0, raw[i]));
}

TEST(Contamination, ReplacementsLieBeyondThreeOnTheNormalScale) {
  for (const auto& d : {ReferenceDistribution::normal(10, 3), ReferenceDistribution::chi_square(3)}) {
    const ShashParams p = calibrate_shash(d, 20000, 5);
    const LabeledSample ls = contaminate({d, 0.1, 500, 20000, 12}, p);
    EXPECT_EQ(std::count(ls.truth.begin(), ls.truth.end(), true), 50);
    const auto z = shash_transform(ls.sample.values(), p);
    int neg = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (!ls.truth[i]) continue;
      EXPECT_GE(std::abs(z[i]), 3.0 - 1e-9);
      neg += z[i] < 0;
    }
    if (d.support() == Support::RealLine) {
      EXPECT_GT(neg, 10);
      EXPECT_LT(neg, 40);
    } else {
      EXPECT_EQ(neg, 0);
      EXPECT_EQ(ls.sample.support(), Support::PositiveReal);
    }
  }
}

TEST(Contamination, DeterministicPerSeed) {
  const auto d = ReferenceDistribution::laplace(0, 3);
  const ShashParams p = calibrate_shash(d, 20000, 1);
  const auto a = contaminate({d, 0.2, 300, 20000, 5}, p);
  const auto b = contaminate({d, 0.2, 300, 20000, 5}, p);
  EXPECT_TRUE(std::equal(a.sample.values().begin(), a.sample.values().end(), b.sample.values().begin()));
  EXPECT_EQ(a.truth, b.truth);
}

TEST(Calibration, NormalReferenceIsNearlyGaussian) {
  const ShashParams p = calibrate_shash(ReferenceDistribution::normal(10, 3), 100000, 20240601);
  EXPECT_NEAR(p.mu, 10.0, 0.1);
  EXPECT_NEAR(p.nu, 0.0, 0.1);
  EXPECT_NEAR(p.tau, 1.0, 0.1);
  EXPECT_NEAR(p.sigma, 3.0, 0.3);
  EXPECT_EQ(calibrate_shash(ReferenceDistribution::normal(10, 3), 100000, 20240601), p);
  const ShashParams q = calibrate_shash(ReferenceDistribution::chi_square(3), 100000, 20240601);
  EXPECT_GT(q.nu, 0.0);
}

TEST(Confusion, Examples) {
  const std::vector<bool> flags{true, true, false, false, true};
  const std::vector<bool> truth{true, false, false, true, true};
  const ConfusionRates r = confusion(flags, truth);
  EXPECT_EQ(r.tp, 2u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_EQ(r.tn, 1u);
  EXPECT_EQ(r.fn, 1u);
  EXPECT_DOUBLE_EQ(*r.tpr, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.fpr, 0.5);

  const ConfusionRates none = confusion({false, true}, {false, false});
  EXPECT_FALSE(none.tpr);
  EXPECT_DOUBLE_EQ(none.fpr, 0.5);
  EXPECT_THROW(confusion({true}, {true, false}), InvalidArgument);
}

TEST(Estimators, NamesAndValues) {
  for (Estimator e : {Estimator::Median, Estimator::Mad, Estimator::HuberLocation,
                      Estimator::HuberScale, Estimator::Qn, Estimator::Sn})
    EXPECT_EQ(parse_estimator(estimator_name(e)), e);
  EXPECT_THROW(parse_estimator("mean"), InvalidArgument);
  const std::vector<double> x{1, 2, 3, 4, 100};
  EXPECT_DOUBLE_EQ(apply_estimator(Estimator::Median, x), 3.0);
  EXPECT_NEAR(apply_estimator(Estimator::Mad, x), 1.4826, 1e-12);
}

TEST(Seeds, ReplicationSeedsAreDistinct) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t d = 0; d < 6; ++d)
    for (std::size_t r = 0; r < 200; ++r) seeds.push_back(replication_seed(1, d, r));
  std::sort(seeds.begin(), seeds.end());
  EXPECT_EQ(std::adjacent_find(seeds.begin(), seeds.end()), seeds.end());
  EXPECT_NE(calibration_seed(1, 0), calibration_seed(1, 1));
  EXPECT_NE(replication_seed(1, 0, 0), replication_seed(2, 0, 0));
}

namespace {

StudyConfig small_study() {
  StudyConfig c;
  c.distributions = {ReferenceDistribution::laplace(0, 3), ReferenceDistribution::gamma(2, 1)};
  c.methods = {Method::RobustZ, Method::ShashZ};
  c.fractions = {0.0, 0.1};
  c.replications = 4;
  c.n = 200;
  c.calibration_n = 5000;
  c.threads = 1;
  return c;
}

bool same_rows(const StudyRow& a, const StudyRow& b) {
  return a.dist_index == b.dist_index && a.method == b.method && a.fraction == b.fraction &&
         a.failures == b.failures && a.mean_tpr == b.mean_tpr && a.mean_fpr == b.mean_fpr &&
         a.sd_fpr == b.sd_fpr && a.sd_tpr == b.sd_tpr;
}

}  // namespace

TEST(Study, DeterministicAcrossThreadCounts) {
  StudyConfig c = small_study();
  const StudyTable a = run_study(c);
  c.threads = 3;
  const StudyTable b = run_study(c);
  ASSERT_EQ(a.rows.size(), 8u);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_TRUE(same_rows(a.rows[i], b.rows[i]));
  ASSERT_EQ(a.records.size(), 32u);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].seed, b.records[i].seed);
    EXPECT_EQ(a.records[i].rates.tp, b.records[i].rates.tp);
    EXPECT_EQ(a.records[i].rates.fp, b.records[i].rates.fp);
  }
}

TEST(Study, MethodOrderDoesNotChangeResults) {
  StudyConfig c = small_study();
  const StudyTable a = run_study(c);
  c.methods = {Method::ShashZ, Method::RobustZ};
  const StudyTable b = run_study(c);
  for (const auto& row : a.rows) {
    const StudyRow* other = b.find(row.dist_index, row.method, row.fraction);
    ASSERT_NE(other, nullptr);
    EXPECT_TRUE(same_rows(row, *other));
  }
}

TEST(Study, CellsAreConsistentWithRecords) {
  const StudyTable t = run_study(small_study());
  for (const auto& row : t.rows) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& r : t.records)
      if (r.dist_index == row.dist_index && r.method == row.method && r.fraction == row.fraction &&
          !r.failed) {
        sum += r.rates.fpr;
        ++n;
      }
    EXPECT_EQ(n + row.failures, row.replications);
    EXPECT_NEAR(row.mean_fpr, sum / static_cast<double>(n), 1e-15);
    if (row.fraction == 0.0) EXPECT_FALSE(row.mean_tpr);
    if (row.fraction > 0.0) EXPECT_TRUE(row.mean_tpr);
  }
}

TEST(Study, MoreReplicationsAgreeWithinSamplingError) {
  StudyConfig c;
  c.distributions = {ReferenceDistribution::laplace(0, 3)};
  c.methods = {Method::RobustZ};
  c.fractions = {0.1};
  c.calibration_n = 20000;
  c.threads = 1;
  c.replications = 200;
  const StudyRow a = run_study(c).rows.front();
  c.replications = 400;
  const StudyRow b = run_study(c).rows.front();
  const double se = b.sd_fpr / std::sqrt(200.0);
  EXPECT_LT(std::abs(a.mean_fpr - b.mean_fpr), 3 * se + 1e-12);
}

TEST(BiasStudy, ShapeOfOutput) {
  BiasStudyConfig c;
  c.replications = 20;
  c.calibration_n = 5000;
  c.threads = 1;
  const auto cells = estimator_bias_study(c);
  EXPECT_EQ(cells.size(), 2u * 4u * 6u);
  for (const auto& cell : cells) {
    EXPECT_EQ(cell.estimates.size() + cell.failures, 20u);
    const Moments m = sample_moments(cell.estimates);
    EXPECT_NEAR(cell.mean, m.mean, 1e-9 * std::max(1.0, std::abs(m.mean)));
  }
}

TEST(StudyConfigText, ParsesAndRoundTrips) {
  const StudyConfig c = parse_study_config(
      "# pilot\n"
      "distributions = normal(10,3), gamma(2,1)\n"
      "methods = shash-i, robust-z\n"
      "fractions = 0, 0.05\n"
      "replications = 7  # few\n"
      "seed = 18446744073709551615\n"
      "truncated_fit = false\n"
      "bias_study = true\n"
      "bias_estimators = median, qn\n");
  EXPECT_EQ(c.distributions.size(), 2u);
  EXPECT_EQ(c.methods, (std::vector<Method>{Method::ShashI, Method::RobustZ}));
  EXPECT_EQ(c.replications, 7u);
  EXPECT_EQ(c.seed, 18446744073709551615ULL);
  EXPECT_EQ(c.bias.seed, c.seed);
  EXPECT_FALSE(c.detection.truncated_fit);
  EXPECT_TRUE(c.bias_study);
  const std::string text = format_study_config(c);
  EXPECT_EQ(format_study_config(parse_study_config(text)), text);
  EXPECT_EQ(parse_study_config(format_study_config(StudyConfig{})).replications, 100u);
}

TEST(StudyConfigText, ErrorsNameLineAndField) {
  auto message = [](const std::string& text) {
    try {
      parse_study_config(text);
    } catch (const InvalidArgument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const std::string bad_dist = message("n = 100\ndistributions = normal(0,1), cauchy(0,1)\n");
  EXPECT_NE(bad_dist.find("line 2"), std::string::npos) << bad_dist;
  EXPECT_NE(bad_dist.find("distributions"), std::string::npos) << bad_dist;
  EXPECT_NE(bad_dist.find("cauchy"), std::string::npos) << bad_dist;
  EXPECT_NE(message("colour = red\n").find("unknown key"), std::string::npos);
  EXPECT_NE(message("replications = 2.5\n").find("replications"), std::string::npos);
  EXPECT_NE(message("methods = shash-z, magic\n").find("methods"), std::string::npos);
  EXPECT_NE(message("just text\n").find("line 1"), std::string::npos);
  EXPECT_FALSE(message("fractions = 0, 1.5\n").empty());
}
