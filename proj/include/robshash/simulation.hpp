#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "robshash/detect.hpp"
#include "robshash/distributions.hpp"

namespace robshash {

struct ContaminationSpec {
  ReferenceDistribution distribution;
  double fraction = 0.0;
  std::size_t n = 500;
  std::size_t calibration_n = 100000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LabeledSample {
  Sample sample;
  std::vector<bool> truth;
};

struct ConfusionRates {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  /// Absent when the truth has no positives.
  std::optional<double> tpr;
  /// Zero when the truth has no negatives.
  double fpr = 0.0;
};

/// Contaminant draws on the standard-normal scale: chi^2(4) / 5 + 3.
inline constexpr double kContaminantShift = 3.0;
inline constexpr double kContaminantDivisor = 5.0;
inline constexpr double kContaminantDf = 4.0;

/// round(fraction * n).
std::size_t contamination_count(double fraction, std::size_t n);

/// SHASH fit to calibration_n fresh draws of d. Results are memoized per
/// (d, calibration_n, seed) for the lifetime of the process; thread-safe.
ShashParams calibrate_shash(const ReferenceDistribution& d, std::size_t calibration_n,
                            std::uint64_t seed);

/// Draws n points of spec.distribution, maps them to the normal scale with
/// params, replaces round(fraction * n) of them (chosen without replacement)
/// by contaminant draws, signed +-1 at random for real-line support, and maps
/// everything back to data units.
LabeledSample contaminate(const ContaminationSpec& spec, const ShashParams& params);

/// Throws InvalidArgument on a length mismatch.
ConfusionRates confusion(const std::vector<bool>& flags, const std::vector<bool>& truth);

enum class Estimator { Median, Mad, HuberLocation, HuberScale, Qn, Sn };

std::string_view estimator_name(Estimator e);
Estimator parse_estimator(std::string_view name);
double apply_estimator(Estimator e, std::span<const double> xs);

struct BiasStudyConfig {
  std::vector<Estimator> estimators{Estimator::Median, Estimator::Mad, Estimator::HuberLocation,
                                    Estimator::HuberScale, Estimator::Qn, Estimator::Sn};
  std::vector<ReferenceDistribution> distributions{ReferenceDistribution::normal(10.0, 3.0),
                                                   ReferenceDistribution::gamma(2.0, 1.0)};
  std::vector<double> fractions{0.0, 0.10, 0.20, 0.30};
  std::size_t replications = 1000;
  std::size_t n = 500;
  std::uint64_t seed = 20240601;
  std::size_t calibration_n = 100000;
  std::size_t threads = 0;

  void validate() const;
};

struct StudyConfig {
  std::vector<ReferenceDistribution> distributions = default_study_distributions();
  std::vector<Method> methods{Method::ShashZ, Method::ShashI, Method::RobustZ, Method::BoxCoxYJ};
  std::vector<double> fractions{0.0, 0.01, 0.05, 0.10, 0.20, 0.30};
  std::size_t replications = 100;
  std::size_t n = 500;
  std::uint64_t seed = 20240601;
  std::size_t calibration_n = 100000;
  /// Method-independent detection settings; method and forest seed are set per run.
  DetectionConfig detection;
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  std::size_t threads = 0;
  /// Also run the estimator-bias study. Its seed, n, calibration_n and threads
  /// are taken from this config.
  bool bias_study = false;
  BiasStudyConfig bias;

  void validate() const;
};

/// Parses the key = value study grammar. Blank lines and '#' comments are
/// ignored; list values are comma separated (commas inside parentheses belong
/// to a distribution). Unknown keys and bad values throw InvalidArgument
/// naming the line and key.
StudyConfig parse_study_config(std::string_view text);

/// Canonical text accepted by parse_study_config, with every field written.
std::string format_study_config(const StudyConfig& cfg);

/// Seed of replication r for distribution index d. Independent of the
/// method and the contamination fraction, so every method in a cell (and the
/// same replication across fractions) sees the same base draw.
std::uint64_t replication_seed(std::uint64_t base, std::size_t dist_index, std::size_t rep);
std::uint64_t calibration_seed(std::uint64_t base, std::size_t dist_index);

struct RunRecord {
  std::size_t dist_index = 0;
  Method method = Method::ShashZ;
  double fraction = 0.0;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  bool converged = false;
  int iterations = 0;
  ConfusionRates rates;
};

struct StudyRow {
  std::size_t dist_index = 0;
  Method method = Method::ShashZ;
  double fraction = 0.0;
  std::size_t replications = 0;
  std::size_t failures = 0;
  std::size_t non_converged = 0;
  /// Runs contributing to the TPR average (successful runs with true outliers).
  std::size_t tpr_runs = 0;
  std::optional<double> mean_tpr;
  std::optional<double> sd_tpr;
  double mean_fpr = 0.0;
  double sd_fpr = 0.0;
};

struct StudyTable {
  std::vector<ReferenceDistribution> distributions;
  /// One row per (distribution, fraction, method), in config order.
  std::vector<StudyRow> rows;
  std::vector<RunRecord> records;

  [[nodiscard]] const StudyRow* find(std::size_t dist_index, Method m, double fraction) const;
};

/// Runs every method on every (distribution, fraction, replication) sample.
/// A run that throws is recorded as failed and excluded from the means.
StudyTable run_study(const StudyConfig& cfg);

struct BiasCell {
  std::size_t dist_index = 0;
  Estimator estimator = Estimator::Median;
  double fraction = 0.0;
  std::size_t failures = 0;
  double mean = 0.0;
  double sd = 0.0;
  /// One estimate per successful replication, in replication order.
  std::vector<double> estimates;
};

/// Sampling distributions of robust estimators on contaminated samples, one
/// cell per (distribution, fraction, estimator), all estimators of a
/// replication seeing the same sample.
std::vector<BiasCell> estimator_bias_study(const BiasStudyConfig& cfg);

}  // namespace robshash
