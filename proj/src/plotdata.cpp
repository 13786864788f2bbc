#include "robshash/plotdata.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>

#include "robshash/error.hpp"

namespace robshash {

std::vector<HistogramBin> histogram(std::span<const double> xs, std::size_t bins) {
  if (xs.empty()) throw InvalidArgument("histogram of an empty sample");
  if (bins == 0)
    bins = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(xs.size())))), 10, 100);
  const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lower = lo + width * static_cast<double>(b);
    out[b].upper = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (double x : xs) {
    auto b = static_cast<std::size_t>((x - lo) / width);
    ++out[std::min(b, bins - 1)].count;
  }
  const double n = static_cast<double>(xs.size());
  for (auto& bin : out) bin.density = static_cast<double>(bin.count) / (n * width);
  return out;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("normal_quantile: p must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

std::vector<QQPoint> normal_qq(std::span<const double> xs) {
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<QQPoint> out(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    out[i] = {normal_quantile((static_cast<double>(i) + 0.5) / n), sorted[i]};
  return out;
}

}  // namespace robshash
