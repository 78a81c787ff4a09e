#pragma once

#include "hormander/covariance.hpp"
#include "hormander/gaussian_box.hpp"
#include "hormander/operator_model.hpp"
#include "hormander/parallel.hpp"
#include "hormander/test_function.hpp"

#include <cstdint>
#include <vector>

namespace hormander {

enum class QuadMode { Deterministic, MonteCarlo, Auto };

struct SemigroupQuadrature {
  int gh_order = 0;  // 0 selects 40 for N <= 2 and 20 for N in {3, 4}
  std::size_t mc_samples = 100000;
  std::uint64_t seed = 1;
  QuadMode mode = QuadMode::Auto;
  BoxRuleConfig box;
};

inline constexpr double kMaxGaussHermiteNodes = 1e7;

/// Mode actually used: Auto means Deterministic for N <= 4.
QuadMode resolve_mode(const SemigroupQuadrature& q, int dim);
int resolve_gh_order(const SemigroupQuadrature& q, int dim);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// |d|^p, with exp(p·log max(|d|, 1e-300)) for non-integer p.
double pow_abs(double d, double p);

double kernel_density(const OperatorSpec& spec, const Vector& X, const Vector& Y, double t);
double kernel_density(const CovarianceState& st, const Vector& X, const Vector& Y);

/// P_t f(X). Deterministic mode uses the truncated box rule when f has a support box
/// and tensor Gauss–Hermite otherwise; MonteCarlo averages f(mean + L Z).
double apply_semigroup(const OperatorSpec& spec, const TestFunction& f, const Vector& X, double t,
                       const SemigroupQuadrature& quad = {});
/// P_t f at every column of `points` (N×M) for every t: result(i, j) = P_{times[j]} f(points.col(i)).
/// One covariance per t; points run in parallel.
Matrix apply_semigroup_table(const OperatorSpec& spec, const TestFunction& f, const Matrix& points,
                             const std::vector<double>& times, const SemigroupQuadrature& quad = {});

McEstimate apply_semigroup_mc(const OperatorSpec& spec, const TestFunction& f, const Vector& X, double t,
                              std::size_t samples, std::uint64_t seed);

/// P_t(|f - f(X)|^p)(X).
double apply_semigroup_centered_p(const OperatorSpec& spec, const TestFunction& f, const Vector& X, double t,
                                  double p, const SemigroupQuadrature& quad = {});

/// Deterministic E[g(mean + L Z)] by tensor Gauss–Hermite.
double gauss_hermite_expectation(const Vector& mean, const Matrix& L, int order,
                                 const std::function<double(const double*)>& g);

/// ∫ p(X, Y, t) dX by importance sampling X around e^{-tB}Y with an inflated kernel
/// covariance. The exact value is e^{-t tr B}.
McEstimate adjoint_mass(const OperatorSpec& spec, const Vector& Y, double t, std::size_t n_mc, std::uint64_t seed);

/// Euler–Maruyama endpoint of dX = BX ds + sqrt(2) Q^{1/2} dW from X0 over [0, t].
Vector sde_sample(const OperatorSpec& spec, const Vector& X0, double t, int n_steps, std::mt19937_64& rng);
Vector sde_sample(const OperatorSpec& spec, const Vector& X0, double t, int n_steps, std::uint64_t seed);

struct SdeMoments {
  Vector mean;
  Matrix covariance;
  Vector mean_std_error;
  Matrix covariance_std_error;
  std::size_t paths = 0;
};

/// Sample mean and covariance of sde_sample endpoints over sharded, seeded paths.
SdeMoments sde_moments(const OperatorSpec& spec, const Vector& X0, double t, std::size_t n_paths, int n_steps,
                       std::uint64_t seed);

/// m_∞(f): the average of f under N(0, 2 K_∞). Requires a stable drift.
double invariant_mean(const OperatorSpec& spec, const TestFunction& f, const SemigroupQuadrature& quad = {});

}  // namespace hormander
