#include "robshash/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "robshash/error.hpp"

namespace robshash {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& steps,
                             const NelderMeadOptions& opts) {
  const std::size_t d = x0.size();
  if (d == 0 || steps.size() != d) throw InvalidArgument("nelder_mead: dimension mismatch");

  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> pts(d + 1, x0);
  for (std::size_t j = 0; j < d; ++j) pts[j + 1][j] += steps[j];
  std::vector<double> vals(d + 1);
  for (std::size_t i = 0; i <= d; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(d + 1);
  std::vector<double> centroid(d), xr(d), xe(d), xc(d);
  auto along = [&](std::vector<double>& out, double t) {
    // out = centroid + t * (centroid - worst)
    const auto& worst = pts[order[d]];
    for (std::size_t j = 0; j < d; ++j) out[j] = centroid[j] + t * (centroid[j] - worst[j]);
  };

  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Stable on index so ties resolve identically on every run.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order[0];
    const std::size_t worst = order[d];

    const double fb = vals[best];
    const double spread = vals[worst] - fb;
    double xspread = 0.0;
    for (std::size_t i = 0; i <= d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        xspread = std::max(xspread, std::abs(pts[i][j] - pts[best][j]));
    if (std::isfinite(fb) && spread <= opts.f_tolerance * std::max(1.0, std::abs(fb)) &&
        xspread <= opts.x_tolerance) {
      res.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) centroid[j] += pts[order[i]][j];
    for (double& c : centroid) c /= static_cast<double>(d);

    along(xr, 1.0);
    const double fr = eval(xr);
    const double second_worst = vals[order[d - 1]];
    if (fr < fb) {
      along(xe, 2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < second_worst) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    // Outside contraction when the reflection improved on the worst point,
    // inside contraction otherwise.
    const bool outside = fr < vals[worst];
    along(xc, outside ? 0.5 : -0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= d; ++i) {
      auto& p = pts[order[i]];
      for (std::size_t j = 0; j < d; ++j) p[j] = pts[best][j] + 0.5 * (p[j] - pts[best][j]);
      vals[order[i]] = eval(p);
    }
  }

  const auto it = std::min_element(vals.begin(), vals.end());
  const auto bi = static_cast<std::size_t>(it - vals.begin());
  res.x = pts[bi];
  res.value = vals[bi];
  return res;
}

double golden_section_maximize(const std::function<double(double)>& f, double a, double b,
                               double tolerance) {
  if (!(a < b)) throw InvalidArgument("golden_section_maximize: empty interval");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto safe = [&](double x) {
    const double v = f(x);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  };
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = safe(c);
  double fd = safe(d);
  while (b - a > tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = safe(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = safe(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace robshash
