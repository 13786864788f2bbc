#pragma once

#include <functional>
#include <vector>

namespace robshash {

struct NelderMeadOptions {
  int max_iterations = 500;
  // Converged when the simplex's objective spread is at most
  // f_tolerance * max(1, |f_best|) and every vertex lies within x_tolerance
  // (max-norm) of the best vertex.
  double f_tolerance = 1e-8;
  double x_tolerance = 1e-6;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimization with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2). Non-finite
/// objective values are treated as +inf. The initial simplex is x0 plus
/// steps[j] along each coordinate j.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& steps,
                             const NelderMeadOptions& opts = {});

/// Golden-section search for the maximum of a unimodal f on [a, b].
double golden_section_maximize(const std::function<double(double)>& f, double a, double b,
                               double tolerance = 1e-6);

}  // namespace robshash
