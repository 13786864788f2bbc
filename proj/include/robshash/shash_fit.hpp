#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "robshash/distributions.hpp"

namespace robshash {

/// Smallest sample a SHASH fit accepts (twice the parameter count).
inline constexpr std::size_t kMinFitSize = 8;

struct FitConfig {
  /// Simplex iterations allowed per start.
  int max_iterations = 500;
  double objective_tolerance = 1e-8;
  /// Max-norm tolerance on the internal (mu/sigma0, log sigma, nu, log tau) simplex.
  double parameter_tolerance = 1e-6;
  /// Multi-start grid around (median, MAD). The (0, 1) point is run first.
  std::vector<double> nu_starts{-1.0, 0.0, 1.0};
  std::vector<double> tau_starts{0.5, 1.0, 2.0};
  /// Samples larger than this run the multi-start search on this many evenly
  /// spaced order statistics, then refine the winner on the full sample.
  /// Zero disables screening.
  std::size_t screening_size = 4000;

  void validate() const;
};

struct FitResult {
  ShashParams params;
  double neg_log_likelihood = 0.0;
  /// Simplex iterations of the winning start, including full-sample refinement.
  int iterations = 0;
  bool converged = false;
  /// Index of the winning start in start_grid() order.
  std::size_t start_index = 0;
};

/// (median, MAD, 0, 1). Throws DegenerateSample when the MAD is zero.
ShashParams default_start(std::span<const double> xs);
inline ShashParams default_start(const Sample& s) { return default_start(s.values()); }

/// default_start followed by the remaining (nu, tau) grid points in
/// lexicographic order.
std::vector<ShashParams> start_grid(std::span<const double> xs, const FitConfig& cfg = {});

/// Maximum-likelihood SHASH fit: minimizes the negative log-likelihood over
/// (mu, log sigma, nu, log tau) from every grid start and keeps the lowest
/// finite objective (ties go to the earlier start).
///
/// Throws InvalidArgument for fewer than kMinFitSize values, DegenerateSample
/// for a zero MAD, and NumericalError when no start reaches a finite objective.
FitResult fit_shash(std::span<const double> xs, const FitConfig& cfg = {});
inline FitResult fit_shash(const Sample& s, const FitConfig& cfg = {}) {
  return fit_shash(s.values(), cfg);
}

/// MLE for a sample observed only inside [lower, upper] (an absent end is
/// unbounded): each log-density is renormalized by the SHASH probability of
/// the window. Throws InvalidArgument when a value lies outside the window.
FitResult fit_shash_truncated(std::span<const double> xs, std::optional<double> lower,
                              std::optional<double> upper, const FitConfig& cfg = {});

/// Single local search from `start` on the full sample.
FitResult fit_shash_from(std::span<const double> xs, const ShashParams& start,
                         const FitConfig& cfg = {});

}  // namespace robshash
