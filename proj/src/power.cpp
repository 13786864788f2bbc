#include "robshash/power.hpp"

#include <cmath>
#include <limits>

#include "robshash/error.hpp"
#include "robshash/optimize.hpp"

namespace robshash {

namespace {

constexpr double kLambdaEps = 1e-12;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double box_cox(double x, double lambda) {
  if (!(x > 0.0)) throw InvalidArgument("box_cox: input must be > 0");
  const double lx = std::log(x);
  if (std::abs(lambda) < kLambdaEps) return lx;
  return std::expm1(lambda * lx) / lambda;
}

double yeo_johnson(double x, double lambda) {
  if (x >= 0.0) {
    const double l = std::log1p(x);
    return std::abs(lambda) < kLambdaEps ? l : std::expm1(lambda * l) / lambda;
  }
  const double l = std::log1p(-x);
  const double k = 2.0 - lambda;
  return std::abs(k) < kLambdaEps ? -l : -std::expm1(k * l) / k;
}

double box_cox_inverse(double y, double lambda) {
  if (std::abs(lambda) < kLambdaEps) return std::exp(y);
  const double t = lambda * y;
  if (!(t > -1.0)) return kNaN;
  return std::exp(std::log1p(t) / lambda);
}

double yeo_johnson_inverse(double y, double lambda) {
  if (y >= 0.0) {
    if (std::abs(lambda) < kLambdaEps) return std::expm1(y);
    const double t = lambda * y;
    if (!(t > -1.0)) return kNaN;
    return std::expm1(std::log1p(t) / lambda);
  }
  const double k = 2.0 - lambda;
  if (std::abs(k) < kLambdaEps) return -std::expm1(-y);
  const double t = -k * y;
  if (!(t > -1.0)) return kNaN;
  return -std::expm1(std::log1p(t) / k);
}

double power_profile_loglik(std::span<const double> xs, PowerFamily family, double lambda) {
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 2) throw InvalidArgument("power_profile_loglik: need at least 2 values");
  double jac = 0.0;
  // Welford keeps the variance accurate when |y| is large relative to its spread.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    double y = 0.0;
    if (family == PowerFamily::BoxCox) {
      y = box_cox(x, lambda);
      jac += std::log(x);
    } else {
      y = yeo_johnson(x, lambda);
      jac += std::copysign(std::log1p(std::abs(x)), x);
    }
    if (!std::isfinite(y)) return -std::numeric_limits<double>::infinity();
    ++k;
    const double delta = y - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (y - mean);
  }
  const double var = m2 / n;
  if (!(var > 0.0) || !std::isfinite(var)) return -std::numeric_limits<double>::infinity();
  return -0.5 * n * std::log(var) + (lambda - 1.0) * jac;
}

double fit_power_lambda(std::span<const double> xs, PowerFamily family, double lo, double hi) {
  return golden_section_maximize(
      [&](double lambda) { return power_profile_loglik(xs, family, lambda); }, lo, hi, 1e-6);
}

double power_forward(double x, const PowerParams& p) {
  const double y = p.family == PowerFamily::BoxCox
                       ? box_cox(x, p.lambda)
                       : yeo_johnson((x - p.pre_center) / p.pre_scale, p.lambda);
  return (y - p.post_center) / p.post_scale;
}

double power_inverse(double z, const PowerParams& p) {
  const double y = p.post_center + z * p.post_scale;
  if (p.family == PowerFamily::BoxCox) return box_cox_inverse(y, p.lambda);
  return p.pre_center + p.pre_scale * yeo_johnson_inverse(y, p.lambda);
}

}  // namespace robshash
