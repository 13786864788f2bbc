#include "robshash/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "robshash/error.hpp"
#include "robshash/format.hpp"
#include "robshash/random.hpp"

namespace robshash {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be finite");
}

// log(sqrt(1 + w^2)) without squaring a huge w.
double log_hypot1(double w) noexcept {
  const double a = std::abs(w);
  if (a < 1e150) return 0.5 * std::log1p(a * a);
  return std::log(a);
}

// log(cosh(g)) for any finite g.
double log_cosh(double g) noexcept {
  const double a = std::abs(g);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

}  // namespace

std::string_view support_name(Support s) {
  return s == Support::PositiveReal ? "positive" : "real";
}

bool ShashParams::valid() const noexcept {
  return std::isfinite(mu) && std::isfinite(sigma) && std::isfinite(nu) && std::isfinite(tau) &&
         sigma > 0.0 && tau > 0.0;
}

void ShashParams::validate() const {
  if (!valid()) {
    std::ostringstream os;
    os << "invalid SHASH parameters (mu=" << mu << ", sigma=" << sigma << ", nu=" << nu
       << ", tau=" << tau << "): all must be finite with sigma > 0 and tau > 0";
    throw InvalidArgument(os.str());
  }
}

Support detect_support(std::span<const double> values) noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return v > 0.0; })
             ? Support::PositiveReal
             : Support::RealLine;
}

Sample::Sample(std::vector<double> values, Support support)
    : values_(std::move(values)), support_(support) {
  if (values_.empty()) throw InvalidArgument("sample must contain at least one value");
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("sample values must be finite");
    if (support_ == Support::PositiveReal && !(v > 0.0))
      throw InvalidArgument("positive-support sample contains a value <= 0");
  }
}

Sample Sample::with_detected_support(std::vector<double> values) {
  const Support s = detect_support(values);
  return Sample(std::move(values), s);
}

double shash_transform(double x, const ShashParams& p) {
  require_finite(x, "transform input");
  p.validate();
  const double w = (x - p.mu) / (p.sigma * p.tau);
  const double z = std::sinh(p.tau * std::asinh(w) - p.nu);
  if (!std::isfinite(z)) throw NumericalError("SHASH transform overflowed");
  return z;
}

std::vector<double> shash_transform(std::span<const double> xs, const ShashParams& p) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(shash_transform(x, p));
  return out;
}

double shash_inverse(double z, const ShashParams& p) {
  require_finite(z, "inverse-transform input");
  p.validate();
  const double x = p.sigma * p.tau * std::sinh((std::asinh(z) + p.nu) / p.tau) + p.mu;
  if (!std::isfinite(x)) throw NumericalError("SHASH inverse transform overflowed");
  return x;
}

double shash_log_density(double x, const ShashParams& p) {
  require_finite(x, "density argument");
  const double w = (x - p.mu) / (p.sigma * p.tau);
  const double g = p.tau * std::asinh(w) - p.nu;
  const double r = std::sinh(g);
  return -std::log(p.sigma) - log_hypot1(w) + log_cosh(g) - kLogSqrt2Pi - 0.5 * r * r;
}

namespace {

double shash_map_unchecked(double x, const ShashParams& p) noexcept {
  if (std::isinf(x)) return x;
  const double w = (x - p.mu) / (p.sigma * p.tau);
  return std::sinh(p.tau * std::asinh(w) - p.nu);
}

// Upper-tail normal probability.
double normal_sf(double z) noexcept { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

// log of normal_sf; asymptotic series where erfc underflows.
double log_normal_sf(double z) noexcept {
  if (z < 30.0) return std::log(normal_sf(z));
  if (std::isinf(z)) return -std::numeric_limits<double>::infinity();
  const double r = 1.0 / (z * z);
  const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
  return -0.5 * z * z - std::log(z) - kLogSqrt2Pi + std::log(series);
}

// log(sf(a) - sf(b)) for a < b on the upper side.
double log_upper_mass(double a, double b) noexcept {
  const double la = log_normal_sf(a);
  const double lb = log_normal_sf(b);
  return la + std::log1p(-std::exp(lb - la));
}

}  // namespace

double shash_cdf(double x, const ShashParams& p) noexcept {
  return normal_sf(-shash_map_unchecked(x, p));
}

double shash_log_interval_probability(double lower, double upper, const ShashParams& p) noexcept {
  const double a = shash_map_unchecked(lower, p);
  const double b = shash_map_unchecked(upper, p);
  if (!(a < b)) return -std::numeric_limits<double>::infinity();
  if (a >= 0.0) return log_upper_mass(a, b);
  if (b <= 0.0) return log_upper_mass(-b, -a);
  return std::log1p(-(normal_sf(-a) + normal_sf(b)));
}

double shash_neg_log_likelihood(std::span<const double> xs, const ShashParams& p) noexcept {
  const double scale = p.sigma * p.tau;
  if (!(scale > 0.0) || !std::isfinite(scale)) return std::numeric_limits<double>::infinity();
  const double inv_scale = 1.0 / scale;
  double sum = 0.0;
  for (double x : xs) {
    const double w = (x - p.mu) * inv_scale;
    const double g = p.tau * std::asinh(w) - p.nu;
    const double a = std::abs(g);
    const double e = std::exp(-a);
    // sinh(|g|) = (1 - e^{-2|g|}) / (2 e^{-|g|}); overflows to inf for |g| > ~710.
    const double sh = 0.5 * (1.0 / e - e);
    // log sqrt(1 + w^2) - log(1 + e^{-2|g|}) folded into one logarithm.
    const double aw = std::abs(w);
    const double log_ratio = aw < 1e150 ? std::log(std::sqrt(1.0 + aw * aw) / (1.0 + e * e))
                                        : std::log(aw) - std::log1p(e * e);
    sum += log_ratio - a + std::numbers::ln2 + 0.5 * sh * sh;
  }
  const double n = static_cast<double>(xs.size());
  const double total = sum + n * (std::log(p.sigma) + kLogSqrt2Pi);
  return std::isnan(total) ? std::numeric_limits<double>::infinity() : total;
}

Sample shash_sample(const ShashParams& p, std::size_t n, std::uint64_t seed) {
  p.validate();
  if (n == 0) throw InvalidArgument("sample size must be at least 1");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> values;
  values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) values.push_back(shash_inverse(normal(rng), p));
  return Sample(std::move(values), Support::RealLine);
}

// ---------------------------------------------------------------------------
// Reference distributions

ReferenceDistribution ReferenceDistribution::normal(double mean, double sd) {
  ReferenceDistribution d{DistributionKind::Normal, {mean, sd}};
  d.validate();
  return d;
}
ReferenceDistribution ReferenceDistribution::student_t(double df) {
  ReferenceDistribution d{DistributionKind::StudentT, {df, 0.0}};
  d.validate();
  return d;
}
ReferenceDistribution ReferenceDistribution::laplace(double location, double scale) {
  ReferenceDistribution d{DistributionKind::Laplace, {location, scale}};
  d.validate();
  return d;
}
ReferenceDistribution ReferenceDistribution::gamma(double shape, double rate) {
  ReferenceDistribution d{DistributionKind::Gamma, {shape, rate}};
  d.validate();
  return d;
}
ReferenceDistribution ReferenceDistribution::chi_square(double df) {
  ReferenceDistribution d{DistributionKind::ChiSquare, {df, 0.0}};
  d.validate();
  return d;
}
ReferenceDistribution ReferenceDistribution::weibull(double scale, double shape) {
  ReferenceDistribution d{DistributionKind::Weibull, {scale, shape}};
  d.validate();
  return d;
}

Support ReferenceDistribution::support() const noexcept {
  switch (kind) {
    case DistributionKind::Normal:
    case DistributionKind::StudentT:
    case DistributionKind::Laplace:
      return Support::RealLine;
    default:
      return Support::PositiveReal;
  }
}

std::size_t ReferenceDistribution::param_count() const noexcept {
  return (kind == DistributionKind::StudentT || kind == DistributionKind::ChiSquare) ? 1 : 2;
}

namespace {

std::string_view kind_name(DistributionKind k) {
  switch (k) {
    case DistributionKind::Normal: return "normal";
    case DistributionKind::StudentT: return "student_t";
    case DistributionKind::Laplace: return "laplace";
    case DistributionKind::Gamma: return "gamma";
    case DistributionKind::ChiSquare: return "chi_square";
    case DistributionKind::Weibull: return "weibull";
  }
  return "?";
}


}  // namespace

std::string ReferenceDistribution::name() const {
  std::string out(kind_name(kind));
  out += '(';
  out += format_double(params[0]);
  if (param_count() == 2) {
    out += ',';
    out += format_double(params[1]);
  }
  out += ')';
  return out;
}

void ReferenceDistribution::validate() const {
  auto bad = [&](const char* why) {
    throw InvalidArgument("invalid " + std::string(kind_name(kind)) + " parameters: " + why);
  };
  const double a = params[0];
  const double b = params[1];
  if (!std::isfinite(a) || !std::isfinite(b)) bad("parameters must be finite");
  switch (kind) {
    case DistributionKind::Normal:
    case DistributionKind::Laplace:
      if (!(b > 0.0)) bad("scale must be > 0");
      break;
    case DistributionKind::StudentT:
    case DistributionKind::ChiSquare:
      if (!(a > 0.0)) bad("degrees of freedom must be > 0");
      break;
    case DistributionKind::Gamma:
    case DistributionKind::Weibull:
      if (!(a > 0.0) || !(b > 0.0)) bad("both parameters must be > 0");
      break;
  }
}

ReferenceDistribution ReferenceDistribution::parse(std::string_view text) {
  const std::string_view t = trim(text);
  const auto open = t.find('(');
  if (open == std::string_view::npos || t.back() != ')')
    throw InvalidArgument("distribution '" + std::string(t) + "' must look like name(p1[,p2])");
  std::string key(trim(t.substr(0, open)));
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

  std::vector<double> ps;
  std::string_view args = t.substr(open + 1, t.size() - open - 2);
  while (!args.empty()) {
    const auto comma = args.find(',');
    const std::string_view tok = trim(args.substr(0, comma));
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
      throw InvalidArgument("distribution '" + std::string(t) + "': bad parameter '" +
                            std::string(tok) + "'");
    ps.push_back(v);
    if (comma == std::string_view::npos) break;
    args.remove_prefix(comma + 1);
  }

  auto need = [&](std::size_t k) {
    if (ps.size() != k)
      throw InvalidArgument("distribution '" + std::string(t) + "' takes " + std::to_string(k) +
                            " parameter(s)");
  };
  if (key == "normal") { need(2); return normal(ps[0], ps[1]); }
  if (key == "student_t" || key == "t") { need(1); return student_t(ps[0]); }
  if (key == "laplace") { need(2); return laplace(ps[0], ps[1]); }
  if (key == "gamma") { need(2); return gamma(ps[0], ps[1]); }
  if (key == "chi_square" || key == "chisq") { need(1); return chi_square(ps[0]); }
  if (key == "weibull") { need(2); return weibull(ps[0], ps[1]); }
  throw InvalidArgument("unknown distribution '" + key + "'");
}

Sample sample_reference(const ReferenceDistribution& d, std::size_t n, std::uint64_t seed) {
  d.validate();
  if (n == 0) throw InvalidArgument("sample size must be at least 1");
  Rng rng = make_rng(seed);
  std::vector<double> values;
  values.reserve(n);
  const double a = d.params[0];
  const double b = d.params[1];
  auto fill = [&](auto&& draw) {
    for (std::size_t i = 0; i < n; ++i) values.push_back(draw());
  };
  switch (d.kind) {
    case DistributionKind::Normal: {
      std::normal_distribution<double> dist(a, b);
      fill([&] { return dist(rng); });
      break;
    }
    case DistributionKind::StudentT: {
      std::student_t_distribution<double> dist(a);
      fill([&] { return dist(rng); });
      break;
    }
    case DistributionKind::Laplace: {
      // Inverse CDF on u in (-1/2, 1/2).
      std::uniform_real_distribution<double> unif(-0.5, 0.5);
      fill([&] {
        double u = unif(rng);
        while (u == -0.5) u = unif(rng);
        return a - b * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
      });
      break;
    }
    case DistributionKind::Gamma: {
      // libstdc++ uses the Marsaglia-Tsang squeeze/rejection scheme; it takes a scale.
      std::gamma_distribution<double> dist(a, 1.0 / b);
      fill([&] { return dist(rng); });
      break;
    }
    case DistributionKind::ChiSquare: {
      std::chi_squared_distribution<double> dist(a);
      fill([&] { return dist(rng); });
      break;
    }
    case DistributionKind::Weibull: {
      // std::weibull_distribution takes (shape, scale).
      std::weibull_distribution<double> dist(b, a);
      fill([&] { return dist(rng); });
      break;
    }
  }
  if (d.support() == Support::PositiveReal) {
    // A zero draw is possible in principle at the bottom of the double range.
    for (double& v : values)
      if (!(v > 0.0)) v = std::numeric_limits<double>::min();
  }
  return Sample(std::move(values), d.support());
}

std::vector<ReferenceDistribution> default_study_distributions() {
  return {ReferenceDistribution::normal(10.0, 3.0), ReferenceDistribution::student_t(4.0),
          ReferenceDistribution::laplace(0.0, 3.0), ReferenceDistribution::gamma(2.0, 1.0),
          ReferenceDistribution::chi_square(3.0),   ReferenceDistribution::weibull(1.0, 3.0)};
}

}  // namespace robshash
