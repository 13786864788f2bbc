#pragma once

#include <span>
#include <vector>

namespace robshash {

enum class PowerFamily { BoxCox, YeoJohnson };

/// A fitted power transformation followed by a location/scale standardization.
/// Yeo-Johnson is applied to (x - pre_center) / pre_scale; Box-Cox to x itself
/// (pre_center 0, pre_scale 1).
struct PowerParams {
  PowerFamily family = PowerFamily::BoxCox;
  double lambda = 1.0;
  double pre_center = 0.0;
  double pre_scale = 1.0;
  double post_center = 0.0;
  double post_scale = 1.0;
};

/// Box-Cox: (x^lambda - 1) / lambda, log x at lambda = 0. Requires x > 0.
double box_cox(double x, double lambda);
/// Yeo-Johnson on the real line.
double yeo_johnson(double x, double lambda);

/// Inverse maps; NaN when y lies outside the image of the transform.
double box_cox_inverse(double y, double lambda);
double yeo_johnson_inverse(double y, double lambda);

/// Profile log-likelihood of lambda for a Gaussian model on the transformed
/// values, including the Jacobian term. -inf when a value overflows.
double power_profile_loglik(std::span<const double> xs, PowerFamily family, double lambda);

/// Golden-section maximization of power_profile_loglik over [lo, hi].
double fit_power_lambda(std::span<const double> xs, PowerFamily family, double lo = -4.0,
                        double hi = 4.0);

/// Full map from data units to the standardized scale, and its inverse.
double power_forward(double x, const PowerParams& p);
double power_inverse(double z, const PowerParams& p);

}  // namespace robshash
