#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hormander/covariance.hpp"
#include "hormander/extrapolation.hpp"
#include "hormander/semigroup.hpp"

#include <cmath>

using namespace hormander;

namespace {

// E[exp(-|Y|²/2)] for Y ~ N(m, S).
double gaussian_expectation(const Vector& m, const Matrix& S) {
  const Matrix a = Matrix::Identity(m.size(), m.size()) + S;
  return std::exp(-0.5 * m.dot(a.ldlt().solve(m))) / std::sqrt(a.determinant());
}

double closed_form(const OperatorSpec& spec, const Vector& x, double t) {
  const auto st = covariance(spec, t);
  return gaussian_expectation(st.exp_tB * x, 2.0 * st.tK_t);
}

Vector vec(std::initializer_list<double> v) {
  Vector r(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double a : v) r(i++) = a;
  return r;
}

}  // namespace

TEST_CASE("P_t 1 = 1 for every catalog operator") {
  for (auto [name, size] : {std::pair{"heat", 2}, {"ornstein_uhlenbeck", 1}, {"kolmogorov", 1},
                            {"kolmogorov_friction", 2}}) {
    const auto spec = catalog(name, size);
    const auto one = constant_function(spec.dim, 1.0);
    Vector x = Vector::Constant(spec.dim, 0.7);
    for (double t : {0.01, 1.0, 50.0}) CHECK(apply_semigroup(spec, one, x, t) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("Gaussian closed forms, deterministic quadrature") {
  const auto heat = catalog("heat", 1);
  const auto f1 = gaussian(1);
  for (double t : {1e-4, 0.3, 5.0, 200.0}) {
    const double x = 0.8;
    const double want = std::exp(-x * x / (2 * (1 + 2 * t))) / std::sqrt(1 + 2 * t);
    CHECK(apply_semigroup(heat, f1, vec({x}), t) == doctest::Approx(want).epsilon(1e-10));
  }
  const auto ou = catalog("ornstein_uhlenbeck", 1);
  for (double t : {0.1, 1.0, 20.0})
    CHECK(apply_semigroup(ou, f1, vec({0.0}), t) == doctest::Approx(1.0 / std::sqrt(2 - std::exp(-2 * t))).epsilon(1e-10));

  const auto f2 = gaussian(2);
  SemigroupQuadrature fine;
  fine.box.nodes = 48;
  for (auto name : {"kolmogorov", "kolmogorov_friction"}) {
    const auto spec = catalog(name, 1);
    for (double t : {0.05, 0.3, 1.0, 4.0}) {
      const Vector x = vec({0.4, -0.9});
      const double want = closed_form(spec, x, t);
      CHECK(apply_semigroup(spec, f2, x, t, fine) == doctest::Approx(want).epsilon(1e-12));
      CHECK(apply_semigroup(spec, f2, x, t) == doctest::Approx(want).epsilon(1e-6));
    }
  }
}

TEST_CASE("Monte Carlo agrees within four standard errors") {
  const auto spec = catalog("kolmogorov_friction", 1);
  const auto f = gaussian(2);
  const Vector x = vec({0.2, 0.5});
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto mc = apply_semigroup_mc(spec, f, x, 0.8, 50000, seed);
    CHECK(std::abs(mc.value - closed_form(spec, x, 0.8)) <= 4 * mc.std_error);
  }
  SemigroupQuadrature q;
  q.mode = QuadMode::MonteCarlo;
  q.seed = 11;
  const double a = apply_semigroup(spec, f, x, 0.8, q);
  CHECK(a == apply_semigroup(spec, f, x, 0.8, q));  // seeded
}

TEST_CASE("indicator semigroup through the box rule") {
  const auto heat = catalog("heat", 1);
  Box e{vec({-1.0}), vec({1.0})};
  const auto ind = indicator_box(e);
  for (double t : {1e-3, 0.5, 10.0, 1e4}) {
    const double x = 0.3, sd = std::sqrt(2 * t);
    const double want = 0.5 * (std::erf((1 - x) / (sd * std::sqrt(2.0))) + std::erf((1 + x) / (sd * std::sqrt(2.0))));
    CHECK(apply_semigroup(heat, ind, vec({x}), t) == doctest::Approx(want).epsilon(1e-11));
  }
}

TEST_CASE("adjoint mass equals exp(-t tr B)") {
  for (auto name : {"kolmogorov", "kolmogorov_friction", "ornstein_uhlenbeck"}) {
    const auto spec = catalog(name, 1);
    const auto cls = classify_spectrum(spec);
    Vector y = Vector::Constant(spec.dim, 0.3);
    for (double t : {0.5, 2.0}) {
      const auto m = adjoint_mass(spec, y, t, 40000, 5);
      CHECK(std::abs(m.value - std::exp(-t * cls.trace_B)) <= 4 * m.std_error);
    }
  }
}

TEST_CASE("adjoint mass stays resolved when e^{tB} grows") {
  const auto spec = catalog("kolmogorov_friction", 1);
  for (double t : {20.0, 100.0}) {
    const auto m = adjoint_mass(spec, vec({0.4, -0.1}), t, 20000, 3);
    CHECK(std::abs(m.value / std::exp(-t) - 1.0) <= 4 * m.std_error / std::exp(-t));
  }
}

TEST_CASE("SDE moments match the kernel mean and covariance") {
  const auto spec = catalog("kolmogorov", 1);
  const Vector x0 = vec({1.0, 0.0});
  const auto m = sde_moments(spec, x0, 1.0, 20000, 200, 9);
  const auto st = covariance(spec, 1.0);
  const Vector mean = st.exp_tB * x0;
  const Matrix cov = 2.0 * st.tK_t;
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(m.mean(i) - mean(i)) <= 4 * m.mean_std_error(i) + 1e-2);
    for (int j = 0; j < 2; ++j) CHECK(std::abs(m.covariance(i, j) - cov(i, j)) <= 4 * m.covariance_std_error(i, j) + 1e-2);
  }
}

TEST_CASE("invariant mean") {
  CHECK(invariant_mean(catalog("ornstein_uhlenbeck", 1), gaussian(1)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
  SemigroupQuadrature fine;
  fine.box.nodes = 48;
  CHECK(invariant_mean(catalog("ornstein_uhlenbeck", 2), gaussian(2), fine) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(invariant_mean(catalog("ornstein_uhlenbeck", 2), gaussian(2)) == doctest::Approx(0.5).epsilon(1e-5));
  CHECK_THROWS(invariant_mean(catalog("heat", 1), gaussian(1)));
}

// |P_t f(X) − m_∞(f)| ≤ C e^{−αt}: C depends on f and X, so only the fitted rate is checked.
TEST_CASE("equilibration rate matches the spectral abscissa") {
  Matrix b(2, 2);
  b << -1.0, 0.5, 0.0, -2.0;
  const OperatorSpec specs[] = {catalog("ornstein_uhlenbeck", 1), build_operator(Matrix::Identity(2, 2), b)};
  for (const OperatorSpec& spec : specs) {
    const int n = spec.dim;
    const TestFunction f = gaussian(n, 1.0, 1.0, Vector::Constant(n, 0.3));
    SemigroupQuadrature fine;
    fine.gh_order = 40;
    const double m = invariant_mean(spec, f, fine);
    const Vector x = Vector::Constant(n, 1.0);
    std::vector<double> ts, logs;
    for (double t = 6.0; t <= 14.0; t += 1.0) {
      ts.push_back(t);
      logs.push_back(std::log(std::abs(apply_semigroup(spec, f, x, t, fine) - m)));
    }
    const AffineFit fit = affine_fit(ts, logs);
    CHECK(fit.slope == doctest::Approx(classify_spectrum(spec).max_re_lambda).epsilon(0.03));
  }
}

TEST_CASE("table matches pointwise evaluation") {
  const auto spec = catalog("kolmogorov_friction", 1);
  const auto f = gaussian(2);
  Matrix pts(2, 3);
  pts << 0.0, 0.5, -1.0, 0.0, 1.0, 2.0;
  const std::vector<double> ts{0.01, 0.5, 3.0};
  const Matrix tab = apply_semigroup_table(spec, f, pts, ts);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(tab(i, j) == doctest::Approx(apply_semigroup(spec, f, pts.col(i), ts[j])).epsilon(1e-13));
  // Decay past the overflow of e^{tB} is reported as zero, not as an error.
  std::vector<double> ascending;
  for (double t = 10.0; t < 2000.0; t *= 1.2) ascending.push_back(t);
  const Matrix late = apply_semigroup_table(spec, f, pts, ascending);
  CHECK(late(0, ascending.size() - 1) == 0.0);
  CHECK(late(0, 0) > 0.0);
  // Jumping straight past the overflow is refused.
  CHECK_THROWS_AS(apply_semigroup_table(spec, f, pts, {10.0, 500.0}), NumericalError);
}

TEST_CASE("centered p-th moment") {
  const auto heat = catalog("heat", 1);
  const auto f = gaussian(1);
  const double t = 0.4;
  const double c = apply_semigroup_centered_p(heat, f, vec({0.0}), t, 2.0);
  // P_t f² - 2 f P_t f + f² at 0: f² = e^{-x²} is a Gaussian of width 1/√2.
  const double pf2 = 1.0 / std::sqrt(1 + 4 * t), pf = 1.0 / std::sqrt(1 + 2 * t);
  CHECK(c == doctest::Approx(pf2 - 2 * pf + 1).epsilon(1e-10));
  CHECK(pow_abs(-2.0, 3.0) == doctest::Approx(8.0));
}
