#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "robshash/distributions.hpp"
#include "robshash/iforest.hpp"
#include "robshash/power.hpp"
#include "robshash/robust.hpp"
#include "robshash/shash_fit.hpp"

namespace robshash {

enum class Method { ShashZ, ShashI, ShashUnion, RobustZ, BoxCoxYJ };

/// "shash-z", "shash-i", "shash-union", "robust-z", "power".
std::string_view method_name(Method m);
/// Inverse of method_name. Throws InvalidArgument on an unknown name.
Method parse_method(std::string_view name);

struct DetectionConfig {
  Method method = Method::ShashZ;
  double final_threshold = 3.0;
  /// Re-flagging cutoff used while iterating, and the z-score initialization cutoff.
  double init_cutoff = 2.58;
  int max_iterations = 50;
  /// Fit the kept points by the likelihood truncated to the interval they
  /// were selected from. When false the kept points are fit as a complete
  /// sample.
  bool truncated_fit = true;
  FitConfig fit;
  IsolationForestConfig forest;

  void validate() const;
};

struct Thresholds {
  std::optional<double> lower;
  std::optional<double> upper;
};

struct IterationRecord {
  int iteration = 0;
  std::size_t kept = 0;
  std::size_t flagged = 0;
  /// Objective of the fit on the kept points (SHASH NLL or power profile log-likelihood).
  double objective = 0.0;
};

using TransformParams = std::variant<ShashParams, PowerParams, LocationScale>;

struct DetectionResult {
  Method method = Method::ShashZ;
  Support support = Support::RealLine;
  /// Values on the standard-normal scale.
  std::vector<double> transformed;
  std::vector<bool> flags;
  TransformParams params;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> trace;
  /// Final threshold mapped back to data units. A side is absent for
  /// one-sided detection or when the threshold lies outside the transform's image.
  Thresholds threshold_data_units;
  /// Number of flags produced by the initialization step.
  std::size_t initial_flags = 0;
  /// Labels at the iteration cutoff after the last iteration, with their
  /// data-unit cuts. Feeding them back to detect_shash_from restarts at the
  /// fixed point.
  InitLabels iteration_labels;
  /// Non-empty when the run stopped early.
  std::string diagnostic;

  [[nodiscard]] std::size_t flag_count() const noexcept;
};

/// Dispatches on cfg.method.
DetectionResult detect(const Sample& s, const DetectionConfig& cfg);

/// Iterative SHASH detection with z-score, isolation-forest or union initialization.
DetectionResult detect_shash(const Sample& s, const DetectionConfig& cfg);

/// Iterative SHASH detection from caller-supplied initial labels (method is
/// reported as cfg.method). The label cuts bound the first truncated fit.
DetectionResult detect_shash_from(const Sample& s, InitLabels initial, const DetectionConfig& cfg);

/// One-shot robust z-scoring at the final threshold.
DetectionResult detect_robust_z(const Sample& s, const DetectionConfig& cfg);

/// Iterative trimmed-likelihood Box-Cox (positive support) or Yeo-Johnson
/// (real line) baseline initialized from Huber z-scores.
DetectionResult detect_power_baseline(const Sample& s, const DetectionConfig& cfg);

/// flags[i] = z[i] > t, or also z[i] < -t when two_sided.
std::vector<bool> threshold_flags(std::span<const double> z, double t, bool two_sided);

}  // namespace robshash
