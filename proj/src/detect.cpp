#include "robshash/detect.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "robshash/error.hpp"

namespace robshash {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 5> kMethodNames{{
    {Method::ShashZ, "shash-z"},
    {Method::ShashI, "shash-i"},
    {Method::ShashUnion, "shash-union"},
    {Method::RobustZ, "robust-z"},
    {Method::BoxCoxYJ, "power"},
}};

std::vector<double> kept_values(std::span<const double> xs, const std::vector<bool>& flags) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (!flags[i]) out.push_back(xs[i]);
  return out;
}

std::size_t count_true(const std::vector<bool>& v) {
  return static_cast<std::size_t>(std::count(v.begin(), v.end(), true));
}

std::optional<double> finite_or_none(double v) {
  return std::isfinite(v) ? std::optional<double>(v) : std::nullopt;
}

// Data-unit image of a normal-scale cut; absent when it overflows.
std::optional<double> shash_cut(double z, const ShashParams& p) {
  try {
    return shash_inverse(z, p);
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

}  // namespace

std::string_view method_name(Method m) {
  for (const auto& [k, v] : kMethodNames)
    if (k == m) return v;
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (const auto& [k, v] : kMethodNames)
    if (v == name) return k;
  throw InvalidArgument("unknown method '" + std::string(name) +
                        "' (expected shash-z, shash-i, shash-union, robust-z or power)");
}

void DetectionConfig::validate() const {
  if (!(final_threshold > 0.0) || !std::isfinite(final_threshold))
    throw InvalidArgument("detect: final_threshold must be > 0");
  if (!(init_cutoff > 0.0) || !std::isfinite(init_cutoff))
    throw InvalidArgument("detect: init_cutoff must be > 0");
  if (max_iterations < 1) throw InvalidArgument("detect: max_iterations must be >= 1");
  fit.validate();
  forest.validate();
}

std::size_t DetectionResult::flag_count() const noexcept { return count_true(flags); }

std::vector<bool> threshold_flags(std::span<const double> z, double t, bool two_sided) {
  std::vector<bool> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] > t || (two_sided && z[i] < -t);
  return out;
}

DetectionResult detect(const Sample& s, const DetectionConfig& cfg) {
  switch (cfg.method) {
    case Method::ShashZ:
    case Method::ShashI:
    case Method::ShashUnion:
      return detect_shash(s, cfg);
    case Method::RobustZ:
      return detect_robust_z(s, cfg);
    case Method::BoxCoxYJ:
      return detect_power_baseline(s, cfg);
  }
  throw InvalidArgument("detect: unknown method");
}

DetectionResult detect_shash(const Sample& s, const DetectionConfig& cfg) {
  cfg.validate();
  if (s.size() < kMinFitSize)
    throw InvalidArgument("detect: need at least " + std::to_string(kMinFitSize) + " observations");
  InitLabels init;
  switch (cfg.method) {
    case Method::ShashZ:
      init = zscore_init(s, cfg.init_cutoff);
      break;
    case Method::ShashI:
      init = iforest_init(s, cfg.forest);
      break;
    case Method::ShashUnion:
      init = union_labels(zscore_init(s, cfg.init_cutoff), iforest_init(s, cfg.forest));
      break;
    default:
      throw InvalidArgument("detect_shash: method is not a SHASH method");
  }
  return detect_shash_from(s, std::move(init), cfg);
}

DetectionResult detect_shash_from(const Sample& s, InitLabels initial, const DetectionConfig& cfg) {
  cfg.validate();
  const auto xs = s.values();
  if (initial.flags.size() != xs.size())
    throw InvalidArgument("detect: initial flag length mismatch");
  const bool two_sided = s.support() == Support::RealLine;

  DetectionResult res;
  res.method = cfg.method;
  res.support = s.support();
  res.initial_flags = initial.count();

  InitLabels labels = std::move(initial);
  std::optional<ShashParams> params;
  std::vector<double> z;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const std::vector<double> kept = kept_values(xs, labels.flags);
    if (kept.size() < kMinFitSize) {
      res.diagnostic = "kept set of " + std::to_string(kept.size()) +
                       " points is below the fit minimum of " + std::to_string(kMinFitSize);
      break;
    }
    std::optional<double> lower;
    std::optional<double> upper;
    if (cfg.truncated_fit) {
      // Cuts can sit a rounding error inside the kept range; widen to cover it.
      const auto [lo, hi] = std::minmax_element(kept.begin(), kept.end());
      if (labels.lower_cut) lower = std::min(*labels.lower_cut, *lo);
      if (labels.upper_cut) upper = std::max(*labels.upper_cut, *hi);
    }
    const FitResult fit = cfg.truncated_fit ? fit_shash_truncated(kept, lower, upper, cfg.fit)
                                            : fit_shash(kept, cfg.fit);
    params = fit.params;
    z = shash_transform(xs, fit.params);
    InitLabels next;
    next.flags = threshold_flags(z, cfg.init_cutoff, two_sided);
    next.upper_cut = shash_cut(cfg.init_cutoff, fit.params);
    if (two_sided) next.lower_cut = shash_cut(-cfg.init_cutoff, fit.params);
    res.iterations = it;
    res.trace.push_back({it, kept.size(), next.count(), fit.neg_log_likelihood});
    const bool same = next.flags == labels.flags;
    labels = std::move(next);
    if (same) {
      res.converged = true;
      break;
    }
  }
  if (!params) {
    params = default_start(xs);
    z = shash_transform(xs, *params);
  }
  if (!res.converged && res.diagnostic.empty())
    res.diagnostic = "flag set still changing after " + std::to_string(cfg.max_iterations) +
                     " iterations";

  res.params = *params;
  res.iteration_labels = std::move(labels);
  res.flags = threshold_flags(z, cfg.final_threshold, two_sided);
  res.transformed = std::move(z);
  res.threshold_data_units.upper = shash_cut(cfg.final_threshold, *params);
  if (two_sided)
    res.threshold_data_units.lower = shash_cut(-cfg.final_threshold, *params);
  return res;
}

DetectionResult detect_robust_z(const Sample& s, const DetectionConfig& cfg) {
  cfg.validate();
  const auto xs = s.values();
  const bool two_sided = s.support() == Support::RealLine;
  const LocationScale ls = median_mad(xs);
  if (!(ls.scale > 0.0)) throw DegenerateSample("robust-z: MAD is zero");

  DetectionResult res;
  res.method = Method::RobustZ;
  res.support = s.support();
  res.transformed = robust_zscore(xs);
  res.flags = threshold_flags(res.transformed, cfg.final_threshold, two_sided);
  res.params = ls;
  res.iterations = 1;
  res.converged = true;
  res.initial_flags = count_true(res.flags);
  res.trace.push_back({1, xs.size(), res.initial_flags, 0.0});
  res.threshold_data_units.upper = ls.location + cfg.final_threshold * ls.scale;
  if (two_sided) res.threshold_data_units.lower = ls.location - cfg.final_threshold * ls.scale;
  return res;
}

DetectionResult detect_power_baseline(const Sample& s, const DetectionConfig& cfg) {
  cfg.validate();
  const auto xs = s.values();
  if (xs.size() < kMinFitSize)
    throw InvalidArgument("detect: need at least " + std::to_string(kMinFitSize) + " observations");
  const bool two_sided = s.support() == Support::RealLine;

  PowerParams p;
  p.family = two_sided ? PowerFamily::YeoJohnson : PowerFamily::BoxCox;
  if (p.family == PowerFamily::YeoJohnson) {
    const LocationScale pre = median_mad(xs);
    if (!(pre.scale > 0.0)) throw DegenerateSample("power: MAD is zero");
    p.pre_center = pre.location;
    p.pre_scale = pre.scale;
  }

  DetectionResult res;
  res.method = Method::BoxCoxYJ;
  res.support = s.support();

  // Proposal 2 converges slowly under heavy contamination.
  HuberOptions huber;
  huber.max_iterations = 1000;
  const LocationScale h0 = huber_location_scale(xs, huber);
  std::vector<double> z(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) z[i] = (xs[i] - h0.location) / h0.scale;
  std::vector<bool> flags = threshold_flags(z, cfg.init_cutoff, two_sided);
  res.initial_flags = count_true(flags);

  bool fitted = false;
  std::vector<double> y(xs.size());
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    std::vector<double> kept = kept_values(xs, flags);
    if (kept.size() < kMinFitSize) {
      res.diagnostic = "kept set of " + std::to_string(kept.size()) +
                       " points is below the fit minimum of " + std::to_string(kMinFitSize);
      break;
    }
    if (p.family == PowerFamily::YeoJohnson)
      for (double& v : kept) v = (v - p.pre_center) / p.pre_scale;
    p.lambda = fit_power_lambda(kept, p.family);
    const double objective = power_profile_loglik(kept, p.family, p.lambda);

    PowerParams raw = p;
    raw.post_center = 0.0;
    raw.post_scale = 1.0;
    for (std::size_t i = 0; i < xs.size(); ++i) y[i] = power_forward(xs[i], raw);
    const LocationScale post = huber_location_scale(y, huber);
    p.post_center = post.location;
    p.post_scale = post.scale;
    for (std::size_t i = 0; i < xs.size(); ++i) z[i] = (y[i] - p.post_center) / p.post_scale;
    fitted = true;

    std::vector<bool> next = threshold_flags(z, cfg.init_cutoff, two_sided);
    res.iterations = it;
    res.trace.push_back({it, kept.size(), count_true(next), objective});
    if (next == flags) {
      res.converged = true;
      break;
    }
    flags = std::move(next);
  }
  if (!fitted) {
    // Identity power with the Huber initialization standardization.
    p.lambda = 1.0;
    PowerParams raw = p;
    raw.post_center = 0.0;
    raw.post_scale = 1.0;
    p.post_center = power_forward(h0.location, raw);
    p.post_scale = h0.scale / (p.family == PowerFamily::YeoJohnson ? p.pre_scale : 1.0);
    for (std::size_t i = 0; i < xs.size(); ++i) z[i] = power_forward(xs[i], p);
  }
  if (!res.converged && res.diagnostic.empty())
    res.diagnostic = "flag set still changing after " + std::to_string(cfg.max_iterations) +
                     " iterations";

  res.params = p;
  res.flags = threshold_flags(z, cfg.final_threshold, two_sided);
  res.transformed = std::move(z);
  res.threshold_data_units.upper = finite_or_none(power_inverse(cfg.final_threshold, p));
  if (two_sided)
    res.threshold_data_units.lower = finite_or_none(power_inverse(-cfg.final_threshold, p));
  return res;
}

}  // namespace robshash
