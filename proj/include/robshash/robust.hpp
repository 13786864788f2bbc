#pragma once

#include <span>
#include <vector>

namespace robshash {

struct LocationScale {
  double location = 0.0;
  double scale = 0.0;
};

/// MAD consistency factor for the standard deviation under normality.
inline constexpr double kMadConsistency = 1.4826;

// Location and scale estimators. Each takes the raw values and throws
// InvalidArgument on an empty input.

/// Average of the two central order statistics for even n.
double median(std::span<const double> xs);

/// 1.4826 * median |x_i - median(x)|.
double mad(std::span<const double> xs);

inline LocationScale median_mad(std::span<const double> xs) { return {median(xs), mad(xs)}; }

struct HuberOptions {
  double tuning = 1.5;
  int max_iterations = 100;
  double tolerance = 1e-8;
};

/// Simultaneous Huber M-estimates of location and scale (Huber's Proposal 2),
/// iterated from (median, MAD). Throws DegenerateSample when the MAD is zero
/// and ConvergenceError when the iteration cap is reached.
LocationScale huber_location_scale(std::span<const double> xs, const HuberOptions& opts = {});

/// Rousseeuw-Croux Qn: 2.2219 * c_n * the k-th smallest of |x_i - x_j| (i < j),
/// k = C(h, 2), h = floor(n/2) + 1. Exact O(n log^2 n) selection. n >= 2.
double qn(std::span<const double> xs);

/// Rousseeuw-Croux Sn: 1.1926 * c_n * lomed_i himed_j |x_i - x_j|. O(n log n). n >= 2.
double sn(std::span<const double> xs);

/// Small-sample correction factors for n <= 9, asymptotic formulas above.
double qn_correction(std::size_t n);
double sn_correction(std::size_t n);

inline constexpr double kQnConsistency = 2.2219;
inline constexpr double kSnConsistency = 1.1926;

/// (x_i - median) / MAD. Throws DegenerateSample when MAD is zero.
std::vector<double> robust_zscore(std::span<const double> xs);

}  // namespace robshash
