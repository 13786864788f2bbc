#include "robshash/robust.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>

#include "robshash/error.hpp"

namespace robshash {

namespace {

void require_nonempty(std::span<const double> xs, const char* what) {
  if (xs.empty()) throw InvalidArgument(std::string(what) + " of an empty sample");
}

// k-th smallest (0-based) of v; reorders v.
double select(std::vector<double>& v, std::size_t k) {
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

double median_inplace(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  const double upper = select(v, mid);
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Lower weighted median of (value, weight) pairs: the smallest value whose
// cumulative weight reaches half of the total.
double weighted_median(std::vector<std::pair<double, double>>& vw) {
  std::sort(vw.begin(), vw.end());
  double total = 0.0;
  for (const auto& p : vw) total += p.second;
  double acc = 0.0;
  for (const auto& [v, w] : vw) {
    acc += w;
    if (2.0 * acc >= total) return v;
  }
  return vw.back().first;
}

// k-th smallest (1-based) of { x[i] - x[j] : j < i } for sorted x, by the
// row-bound elimination scheme of Johnson & Mizoguchi / Croux & Rousseeuw.
// Row i holds x[i] - x[i-1-m] for m = 0..i-1, nondecreasing in m.
double kth_pairwise_difference(const std::vector<double>& x, std::size_t k) {
  const std::size_t n = x.size();
  std::vector<std::size_t> lo(n, 0), hi(n, 0);
  for (std::size_t i = 1; i < n; ++i) hi[i] = i;
  auto elem = [&](std::size_t i, std::size_t m) { return x[i] - x[i - 1 - m]; };

  std::vector<std::pair<double, double>> mids;
  std::vector<std::size_t> less(n, 0), less_eq(n, 0);
  for (int guard = 0; guard < 200; ++guard) {
    std::size_t remaining = 0;
    for (std::size_t i = 1; i < n; ++i) remaining += hi[i] - lo[i];
    if (remaining <= n) break;

    mids.clear();
    for (std::size_t i = 1; i < n; ++i) {
      if (lo[i] < hi[i]) {
        const std::size_t w = hi[i] - lo[i];
        mids.emplace_back(elem(i, lo[i] + (w - 1) / 2), static_cast<double>(w));
      }
    }
    const double trial = weighted_median(mids);

    std::size_t n_less = 0, n_less_eq = 0;
    for (std::size_t i = 1; i < n; ++i) {
      // Entries before lo[i] are known to lie below the answer and entries from
      // hi[i] on above it, so searching [lo, hi) gives exact row counts.
      std::size_t a = lo[i], b = hi[i];
      while (a < b) {
        const std::size_t m = a + (b - a) / 2;
        if (elem(i, m) < trial) a = m + 1; else b = m;
      }
      less[i] = a;
      b = hi[i];
      while (a < b) {
        const std::size_t m = a + (b - a) / 2;
        if (elem(i, m) <= trial) a = m + 1; else b = m;
      }
      less_eq[i] = a;
      n_less += less[i];
      n_less_eq += less_eq[i];
    }
    if (k <= n_less) {
      for (std::size_t i = 1; i < n; ++i) hi[i] = less[i];
    } else if (k > n_less_eq) {
      for (std::size_t i = 1; i < n; ++i) lo[i] = less_eq[i];
    } else {
      return trial;
    }
  }

  std::size_t below = 0;
  std::vector<double> rest;
  for (std::size_t i = 1; i < n; ++i) {
    below += lo[i];
    for (std::size_t m = lo[i]; m < hi[i]; ++m) rest.push_back(elem(i, m));
  }
  return select(rest, k - below - 1);
}

// k-th smallest (1-based) of |x[i] - x[j]| over all j, x sorted. The left
// distances (including j = i) and the right distances are both sorted, so the
// answer is the k-th element of the merge of two sorted sequences.
double kth_distance_from(const std::vector<double>& x, std::size_t i, std::size_t k) {
  const std::size_t n = x.size();
  const std::size_t len_a = i + 1;
  const std::size_t len_b = n - i - 1;
  auto a_at = [&](std::size_t m) { return x[i] - x[i - m]; };
  auto b_at = [&](std::size_t m) { return x[i + 1 + m] - x[i]; };

  // Take `ta` from A and k - ta from B; find the split where both sides agree.
  std::size_t lo = k > len_b ? k - len_b : 0;
  std::size_t hi = std::min(k, len_a);
  while (lo < hi) {
    const std::size_t ta = lo + (hi - lo) / 2;
    const std::size_t tb = k - ta;
    // If B's last taken element exceeds A's next one, take more from A.
    if (tb > 0 && ta < len_a && b_at(tb - 1) > a_at(ta)) lo = ta + 1; else hi = ta;
  }
  const std::size_t ta = lo;
  const std::size_t tb = k - ta;
  if (ta == 0) return b_at(tb - 1);
  if (tb == 0) return a_at(ta - 1);
  return std::max(a_at(ta - 1), b_at(tb - 1));
}

std::vector<double> sorted_copy(std::span<const double> xs) {
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

double median(std::span<const double> xs) {
  require_nonempty(xs, "median");
  std::vector<double> v(xs.begin(), xs.end());
  return median_inplace(v);
}

double mad(std::span<const double> xs) {
  require_nonempty(xs, "MAD");
  const double m = median(xs);
  std::vector<double> dev;
  dev.reserve(xs.size());
  for (double x : xs) dev.push_back(std::abs(x - m));
  return kMadConsistency * median_inplace(dev);
}

LocationScale huber_location_scale(std::span<const double> xs, const HuberOptions& opts) {
  require_nonempty(xs, "Huber estimate");
  if (!(opts.tuning > 0.0)) throw InvalidArgument("Huber tuning constant must be > 0");
  double mu = median(xs);
  double s = mad(xs);
  if (!(s > 0.0)) throw DegenerateSample("Huber estimate: MAD is zero, scale cannot be started");

  const double k = opts.tuning;
  const double th = 2.0 * normal_cdf(k) - 1.0;
  const double beta = th + k * k * (1.0 - th) - 2.0 * k * normal_pdf(k);
  const double n = static_cast<double>(xs.size());
  const double n1 = xs.size() > 1 ? n - 1.0 : 1.0;

  std::vector<double> yy(xs.size());
  for (int it = 0; it < opts.max_iterations; ++it) {
    const double lo = mu - k * s;
    const double hi = mu + k * s;
    double sum = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      yy[i] = std::clamp(xs[i], lo, hi);
      sum += yy[i];
    }
    const double mu1 = sum / n;
    double ss = 0.0;
    for (double y : yy) ss += (y - mu1) * (y - mu1);
    const double s1 = std::sqrt(ss / n1 / beta);
    const bool done =
        std::abs(mu - mu1) < opts.tolerance * s && std::abs(s - s1) < opts.tolerance * s;
    mu = mu1;
    s = s1;
    if (done) return {mu, s};
    if (!(s > 0.0)) throw DegenerateSample("Huber estimate: scale collapsed to zero");
  }
  throw ConvergenceError("Huber estimate did not converge within " +
                         std::to_string(opts.max_iterations) + " iterations");
}

double qn_correction(std::size_t n) {
  static constexpr double table[] = {0, 0, 0.399, 0.994, 0.512, 0.844, 0.611, 0.857, 0.669, 0.872};
  if (n <= 9) return table[n];
  const double dn = static_cast<double>(n);
  return n % 2 == 1 ? dn / (dn + 1.4) : dn / (dn + 3.8);
}

double sn_correction(std::size_t n) {
  static constexpr double table[] = {0, 0, 0.743, 1.851, 0.954, 1.351, 0.993, 1.198, 1.005, 1.131};
  if (n <= 9) return table[n];
  const double dn = static_cast<double>(n);
  return n % 2 == 1 ? dn / (dn - 0.9) : 1.0;
}

double qn(std::span<const double> xs) {
  if (xs.size() < 2) throw InvalidArgument("Qn requires at least 2 observations");
  const std::vector<double> x = sorted_copy(xs);
  const std::size_t n = x.size();
  const std::size_t h = n / 2 + 1;
  const std::size_t k = h * (h - 1) / 2;
  return kQnConsistency * qn_correction(n) * kth_pairwise_difference(x, k);
}

double sn(std::span<const double> xs) {
  if (xs.size() < 2) throw InvalidArgument("Sn requires at least 2 observations");
  const std::vector<double> x = sorted_copy(xs);
  const std::size_t n = x.size();
  const std::size_t inner_rank = n / 2 + 1;  // high median of n distances
  std::vector<double> inner(n);
  for (std::size_t i = 0; i < n; ++i) inner[i] = kth_distance_from(x, i, inner_rank);
  const std::size_t outer_rank = (n + 1) / 2;  // low median
  return kSnConsistency * sn_correction(n) * select(inner, outer_rank - 1);
}

std::vector<double> robust_zscore(std::span<const double> xs) {
  const double m = median(xs);
  const double s = mad(xs);
  if (!(s > 0.0)) throw DegenerateSample("robust z-score: MAD is zero");
  std::vector<double> z;
  z.reserve(xs.size());
  for (double x : xs) z.push_back((x - m) / s);
  return z;
}

}  // namespace robshash
