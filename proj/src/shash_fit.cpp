#include "robshash/shash_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "robshash/error.hpp"
#include "robshash/optimize.hpp"
#include "robshash/robust.hpp"

namespace robshash {

namespace {

// The search runs on y = (x - median) / MAD with internal coordinates
// (mu_y, log sigma_y, nu, log tau). Working on standardized data makes every
// tolerance dimensionless, so the fit is equivariant under a*x + b.
struct Standardizer {
  double center;
  double scale;

  ShashParams to_internal(const ShashParams& p) const {
    return {(p.mu - center) / scale, p.sigma / scale, p.nu, p.tau};
  }
  ShashParams to_data(const ShashParams& q) const {
    return {center + scale * q.mu, scale * q.sigma, q.nu, q.tau};
  }
};

std::vector<double> encode(const ShashParams& q) {
  return {q.mu, std::log(q.sigma), q.nu, std::log(q.tau)};
}

ShashParams decode(const std::vector<double>& th) {
  return {th[0], std::exp(th[1]), th[2], std::exp(th[3])};
}

// Observation window on the standardized scale; infinite ends mean no truncation.
struct Window {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  [[nodiscard]] bool truncated() const { return std::isfinite(lower) || std::isfinite(upper); }
};

double objective(std::span<const double> y, const std::vector<double>& th, const Window& win) {
  const ShashParams q = decode(th);
  if (!q.valid()) return std::numeric_limits<double>::infinity();
  const double nll = shash_neg_log_likelihood(y, q);
  if (!win.truncated()) return nll;
  const double log_mass = shash_log_interval_probability(win.lower, win.upper, q);
  if (!std::isfinite(log_mass)) return std::numeric_limits<double>::infinity();
  return nll + static_cast<double>(y.size()) * log_mass;
}

NelderMeadResult local_search(std::span<const double> y, const ShashParams& start_internal,
                              double step, const FitConfig& cfg, const Window& win = {}) {
  NelderMeadOptions opts;
  opts.max_iterations = cfg.max_iterations;
  opts.f_tolerance = cfg.objective_tolerance;
  opts.x_tolerance = cfg.parameter_tolerance;
  return nelder_mead([&](const std::vector<double>& th) { return objective(y, th, win); },
                     encode(start_internal), std::vector<double>(4, step), opts);
}

// m evenly spaced order statistics of y (midpoint rule on ranks).
std::vector<double> order_statistic_subsample(std::span<const double> y, std::size_t m) {
  std::vector<double> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(m);
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < m; ++i) {
    const auto idx = static_cast<std::size_t>((static_cast<double>(i) + 0.5) * n /
                                              static_cast<double>(m));
    out.push_back(sorted[std::min(idx, sorted.size() - 1)]);
  }
  return out;
}

void require_fit_size(std::span<const double> xs) {
  if (xs.size() < kMinFitSize)
    throw InvalidArgument("SHASH fit needs at least " + std::to_string(kMinFitSize) +
                          " observations, got " + std::to_string(xs.size()));
}

Standardizer standardizer_for(std::span<const double> xs) {
  const double m = median(xs);
  const double s = mad(xs);
  if (!(s > 0.0)) throw DegenerateSample("SHASH fit: MAD is zero");
  return {m, s};
}

std::vector<double> standardize(std::span<const double> xs, const Standardizer& st) {
  std::vector<double> y;
  y.reserve(xs.size());
  for (double x : xs) y.push_back((x - st.center) / st.scale);
  return y;
}

constexpr double kGridStep = 0.25;
constexpr double kRefineStep = 0.05;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void FitConfig::validate() const {
  if (max_iterations < 1) throw InvalidArgument("fit: max_iterations must be >= 1");
  if (!(objective_tolerance > 0.0) || !(parameter_tolerance > 0.0))
    throw InvalidArgument("fit: tolerances must be > 0");
  if (nu_starts.empty() || tau_starts.empty())
    throw InvalidArgument("fit: start grid must be non-empty");
  for (double t : tau_starts)
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("fit: tau starts must be > 0");
  for (double v : nu_starts)
    if (!std::isfinite(v)) throw InvalidArgument("fit: nu starts must be finite");
  if (screening_size != 0 && screening_size < kMinFitSize)
    throw InvalidArgument("fit: screening_size must be 0 or >= " + std::to_string(kMinFitSize));
}

ShashParams default_start(std::span<const double> xs) {
  if (xs.empty()) throw InvalidArgument("default start of an empty sample");
  const double s = mad(xs);
  if (!(s > 0.0)) throw DegenerateSample("SHASH start: MAD is zero");
  return {median(xs), s, 0.0, 1.0};
}

std::vector<ShashParams> start_grid(std::span<const double> xs, const FitConfig& cfg) {
  const ShashParams base = default_start(xs);
  std::vector<ShashParams> grid{base};
  for (double nu : cfg.nu_starts) {
    for (double tau : cfg.tau_starts) {
      ShashParams p = base;
      p.nu = nu;
      p.tau = tau;
      if (p != base) grid.push_back(p);
    }
  }
  return grid;
}

namespace {

FitResult fit_impl(std::span<const double> xs, const FitConfig& cfg, std::optional<double> lower,
                   std::optional<double> upper) {
  cfg.validate();
  require_fit_size(xs);
  const Standardizer st = standardizer_for(xs);
  const std::vector<double> y = standardize(xs, st);
  Window win;
  if (lower) win.lower = (*lower - st.center) / st.scale;
  if (upper) win.upper = (*upper - st.center) / st.scale;
  const bool screen = cfg.screening_size != 0 && y.size() > cfg.screening_size;
  const std::vector<double> search_data =
      screen ? order_statistic_subsample(y, cfg.screening_size) : y;

  const std::vector<ShashParams> starts = start_grid(xs, cfg);
  NelderMeadResult best;
  best.value = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    NelderMeadResult r = local_search(search_data, st.to_internal(starts[i]), kGridStep, cfg, win);
    if (std::isfinite(r.value) && r.value < best.value) {
      best = std::move(r);
      best_index = i;
    }
  }
  if (!std::isfinite(best.value))
    throw NumericalError("SHASH fit: no start produced a finite likelihood");

  if (screen) {
    NelderMeadResult refined = local_search(y, decode(best.x), kRefineStep, cfg, win);
    if (!std::isfinite(refined.value))
      throw NumericalError("SHASH fit: refinement left the finite-likelihood region");
    refined.iterations += best.iterations;
    best = std::move(refined);
  }

  FitResult out;
  out.params = st.to_data(decode(best.x));
  out.neg_log_likelihood = shash_neg_log_likelihood(xs, out.params);
  if (win.truncated())
    out.neg_log_likelihood += static_cast<double>(xs.size()) *
                              shash_log_interval_probability(lower.value_or(-kInf),
                                                             upper.value_or(kInf), out.params);
  out.iterations = best.iterations;
  out.converged = best.converged && std::isfinite(out.neg_log_likelihood);
  out.start_index = best_index;
  return out;
}

}  // namespace

FitResult fit_shash(std::span<const double> xs, const FitConfig& cfg) {
  return fit_impl(xs, cfg, std::nullopt, std::nullopt);
}

FitResult fit_shash_truncated(std::span<const double> xs, std::optional<double> lower,
                              std::optional<double> upper, const FitConfig& cfg) {
  if (lower && upper && !(*lower < *upper))
    throw InvalidArgument("truncated SHASH fit: empty observation window");
  for (double x : xs)
    if ((lower && x < *lower) || (upper && x > *upper))
      throw InvalidArgument("truncated SHASH fit: value outside the observation window");
  return fit_impl(xs, cfg, lower, upper);
}

FitResult fit_shash_from(std::span<const double> xs, const ShashParams& start,
                         const FitConfig& cfg) {
  cfg.validate();
  start.validate();
  require_fit_size(xs);
  const Standardizer st = standardizer_for(xs);
  const std::vector<double> y = standardize(xs, st);
  const NelderMeadResult r = local_search(y, st.to_internal(start), kRefineStep, cfg);
  if (!std::isfinite(r.value)) throw NumericalError("SHASH fit: non-finite likelihood");
  FitResult out;
  out.params = st.to_data(decode(r.x));
  out.neg_log_likelihood = shash_neg_log_likelihood(xs, out.params);
  out.iterations = r.iterations;
  out.converged = r.converged;
  return out;
}

}  // namespace robshash
