#include "robshash/moments.hpp"

#include <cmath>

#include "robshash/error.hpp"

namespace robshash {

Moments sample_moments(std::span<const double> xs) {
  if (xs.empty()) throw InvalidArgument("moments of an empty sample");
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  Moments m;
  m.mean = mean;
  m.variance = m2;
  if (m2 > 0.0) {
    m.skewness = m3 / (m2 * std::sqrt(m2));
    m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return m;
}

}  // namespace robshash
