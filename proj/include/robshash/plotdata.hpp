#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace robshash {

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  /// count / (n * width), so the bars integrate to one.
  double density = 0.0;
};

/// Equal-width bins over [min, max]; the last bin is closed. bins == 0 picks
/// ceil(sqrt(n)) clamped to [10, 100].
std::vector<HistogramBin> histogram(std::span<const double> xs, std::size_t bins = 0);

struct QQPoint {
  double theoretical = 0.0;
  double sample = 0.0;
};

/// Sorted sample against standard normal quantiles at (i - 0.5) / n.
std::vector<QQPoint> normal_qq(std::span<const double> xs);

/// Standard normal quantile.
double normal_quantile(double p);

}  // namespace robshash
