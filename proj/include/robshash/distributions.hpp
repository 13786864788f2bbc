#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace robshash {

enum class Support { RealLine, PositiveReal };

std::string_view support_name(Support s);

/// Four-parameter sinh-arcsinh parameters in the (mu, sigma*tau) scale
/// parameterization: Z = sinh(tau * asinh((X - mu) / (sigma * tau)) - nu).
///
/// mu and nu are unrestricted; sigma and tau must be strictly positive.
struct ShashParams {
  double mu = 0.0;
  double sigma = 1.0;
  double nu = 0.0;
  double tau = 1.0;

  [[nodiscard]] bool valid() const noexcept;
  /// Throws InvalidArgument when valid() is false.
  void validate() const;

  friend bool operator==(const ShashParams&, const ShashParams&) = default;
};

/// PositiveReal iff every value is strictly greater than zero.
Support detect_support(std::span<const double> values) noexcept;

/// A non-empty sequence of finite observations with a declared support.
class Sample {
 public:
  /// Throws InvalidArgument on empty input, non-finite entries, or a
  /// non-positive value under PositiveReal support.
  Sample(std::vector<double> values, Support support);

  static Sample with_detected_support(std::vector<double> values);

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] Support support() const noexcept { return support_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }

 private:
  std::vector<double> values_;
  Support support_;
};

// SHASH transformation to the standard-normal scale. Throws InvalidArgument on
// non-finite input or invalid parameters, and NumericalError when the hyperbolic evaluation overflows.
double shash_transform(double x, const ShashParams& p);
std::vector<double> shash_transform(std::span<const double> xs, const ShashParams& p);

// Inverse map from the standard-normal scale back to data units.
double shash_inverse(double z, const ShashParams& p);

/// Log-density of SHASH(mu, sigma, nu, tau) at x, evaluated in log space:
///   -log sigma - log sqrt(1 + w^2) + log cosh(g) - log sqrt(2 pi) - sinh(g)^2 / 2
/// with w = (x - mu) / (sigma tau) and g = tau asinh(w) - nu. This is
/// log phi(S(x)) + log S'(x); the tau from dg/du cancels against the 1/tau in
/// dw/dx. Returns -inf when sinh(g)^2 overflows.
double shash_log_density(double x, const ShashParams& p);

/// -sum log f(x_i); +inf when any term is -inf. Parameters are not validated.
double shash_neg_log_likelihood(std::span<const double> xs, const ShashParams& p) noexcept;

/// SHASH cumulative distribution Phi(S(x)); overflow saturates to 0 or 1.
double shash_cdf(double x, const ShashParams& p) noexcept;

/// log P(lower <= X <= upper) with infinite ends allowed, accurate when the
/// window sits deep in a tail. Parameters are not validated.
double shash_log_interval_probability(double lower, double upper, const ShashParams& p) noexcept;

/// n standard-normal draws mapped through shash_inverse.
Sample shash_sample(const ShashParams& p, std::size_t n, std::uint64_t seed);

enum class DistributionKind { Normal, StudentT, Laplace, Gamma, ChiSquare, Weibull };

/// Reference distributions of the simulation study.
///
/// Parameterizations: Normal(mean, sd), StudentT(df), Laplace(location, scale),
/// Gamma(shape, rate), ChiSquare(df), Weibull(scale, shape).
struct ReferenceDistribution {
  DistributionKind kind = DistributionKind::Normal;
  std::array<double, 2> params{0.0, 1.0};

  static ReferenceDistribution normal(double mean, double sd);
  static ReferenceDistribution student_t(double df);
  static ReferenceDistribution laplace(double location, double scale);
  static ReferenceDistribution gamma(double shape, double rate);
  static ReferenceDistribution chi_square(double df);
  static ReferenceDistribution weibull(double scale, double shape);

  /// Parses "normal(10,3)", "student_t(4)", "t(4)", "laplace(0,3)",
  /// "gamma(2,1)", "chi_square(3)", "chisq(3)", "weibull(1,3)".
  static ReferenceDistribution parse(std::string_view text);

  [[nodiscard]] Support support() const noexcept;
  [[nodiscard]] std::size_t param_count() const noexcept;
  /// Canonical text form accepted by parse().
  [[nodiscard]] std::string name() const;
  void validate() const;

  friend bool operator==(const ReferenceDistribution&, const ReferenceDistribution&) = default;
};

Sample sample_reference(const ReferenceDistribution& d, std::size_t n, std::uint64_t seed);

/// Gamma, chi-square, Weibull, Normal(10, 3), t and Laplace: the default study set.
std::vector<ReferenceDistribution> default_study_distributions();

}  // namespace robshash
