#pragma once

#include <span>

namespace robshash {

// Sample moments with population (1/n) normalization.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

Moments sample_moments(std::span<const double> xs);

}  // namespace robshash
