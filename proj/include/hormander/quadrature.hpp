#pragma once

#include <functional>
#include <vector>

namespace hormander {

/// Nodes and weights of a one-dimensional rule: integral ≈ Σ w[i]·g(x[i]).
struct Rule {
  std::vector<double> x;
  std::vector<double> w;

  std::size_t size() const { return x.size(); }
  void append(const Rule& other);
  double apply(const std::function<double(double)>& g) const;
};

/// n-point Gauss–Legendre on [-1, 1]. Computed by Newton iteration on the Legendre
/// recurrence and cached per n (thread-safe).
const Rule& gauss_legendre(int n);

/// n-point Gauss–Legendre mapped to [a, b].
Rule gauss_legendre(int n, double a, double b);

/// n-point Gauss–Hermite for the standard normal weight: Σ w[i] = 1 and
/// Σ w[i]·g(x[i]) ≈ E[g(Z)], Z ~ N(0,1). Golub–Welsch on the probabilists' recurrence.
const Rule& gauss_hermite_normal(int n);

/// Gauss–Legendre in u = log t over [a, b] (0 < a < b); weights include the Jacobian t.
Rule log_rule(int n, double a, double b);

/// Composite Gauss–Legendre on [a, b] with panels graded geometrically toward the
/// endpoints: the innermost panel at each graded end has width `finest`, successive
/// widths grow by `ratio` until they reach the uniform panel width (b-a)/panels.
Rule graded_rule(double a, double b, int nodes_per_panel, int panels, double finest, double ratio,
                 bool grade_left = true, bool grade_right = true);

/// Tanh-sinh on finite [a, b]; exp-sinh when b = +infinity.
double integrate_adaptive(const std::function<double(double)>& g, double a, double b,
                          double rel_tol = 1e-12, double* error = nullptr);

}  // namespace hormander
