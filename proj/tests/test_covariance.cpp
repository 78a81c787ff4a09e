#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hormander/covariance.hpp"
#include "hormander/semigroup.hpp"
#include "oracles/oracle_values.hpp"

#include <cmath>
#include <numbers>
#include <algorithm>
#include <sstream>

using namespace hormander;

TEST_CASE("Kolmogorov K(t) closed form") {
  const auto k0 = catalog("kolmogorov", 1);
  for (double t : {1e-4, 0.1, 1.0, 10.0, 1e3}) {
    const auto st = covariance(k0, t, true);
    Matrix want(2, 2);
    want << 1, t / 2, t / 2, t * t / 3;
    CHECK(max_abs(st.K_t - want) <= 1e-10 * std::max(1.0, want.cwiseAbs().maxCoeff()));
    CHECK(st.log_det_tK == doctest::Approx(std::log(std::pow(t, 4) / 12.0)).epsilon(1e-10));
  }
  // The t³/3 entry stays accurate relative to itself at small t.
  const auto tiny = covariance(k0, 1e-5);
  CHECK(tiny.K_t(1, 1) == doctest::Approx(1e-10 / 3).epsilon(1e-10));
}

TEST_CASE("heat and Ornstein-Uhlenbeck covariances") {
  for (int n : {1, 3}) {
    const auto heat = catalog("heat", n);
    for (double t : {0.01, 1.0, 100.0}) {
      const auto st = covariance(heat, t);
      CHECK(max_abs(st.K_t - Matrix::Identity(n, n)) <= 1e-12);
      CHECK(st.V_t == doctest::Approx(unit_ball_volume(n) * std::pow(t, 0.5 * n)).epsilon(1e-12));
    }
  }
  const auto ou = catalog("ornstein_uhlenbeck", 2);
  for (double t : {0.1, 1.0, 30.0}) {
    const auto st = covariance(ou, t, true);
    const double k = (1.0 - std::exp(-2.0 * t)) / (2.0 * t);
    CHECK(st.K_t(0, 0) == doctest::Approx(k).epsilon(1e-12));
    CHECK(std::abs(st.K_t(0, 1)) < 1e-14);
    CHECK(st.exp_tB(1, 1) == doctest::Approx(std::exp(-t)).epsilon(1e-13));
  }
}

TEST_CASE("block exponential agrees with quadrature") {
  const auto k1 = catalog("kolmogorov_friction", 2);
  for (double t : {0.3, 2.0, 8.0}) {
    const Matrix a = covariance(k1, t).tK_t;
    const Matrix b = gramian_by_quadrature(k1, t, 128, 16);
    CHECK(max_abs(a - b) <= 1e-9 * max_abs(a));
  }
  Matrix q(2, 2), b(2, 2);
  q << 2, 0.5, 0.5, 1;
  b << -0.3, 1, -1, -0.2;
  const auto spec = build_operator(q, b);
  CHECK_NOTHROW(covariance(spec, 5.0, true));
}

TEST_CASE("factor and Gaussian shift") {
  const auto k0 = catalog("kolmogorov", 1);
  const auto st = covariance(k0, 2.0);
  CHECK(max_abs(st.factor_L * st.factor_L.transpose() - 2.0 * st.tK_t) < 1e-12);
  Vector x(2);
  x << 1.0, -1.0;
  const auto g = gaussian_shift_and_factor(k0, x, 2.0);
  CHECK(g.mean(0) == doctest::Approx(1.0));
  CHECK(g.mean(1) == doctest::Approx(1.0));  // e^{2B} x = (x1, x2 + 2 x1)
}

TEST_CASE("ill-conditioned friction covariance keeps its small directions") {
  // det tK(t) = t(e^{2t} - 1)/2 - (e^t - 1)² for B = [[1,0],[1,0]], Q = diag(1, 0).
  const auto k1 = catalog("kolmogorov_friction", 1);
  for (double t : {5.0, 30.0, 100.0, 300.0}) {
    const double want = 2 * t + std::log(0.5 * t * (1 - std::exp(-2 * t)) - std::pow(1 - std::exp(-t), 2));
    const auto st = covariance(k1, t);
    CHECK(st.log_det_tK == doctest::Approx(want).epsilon(1e-10));
    CHECK(max_abs(st.factor_L * st.factor_L.transpose() - 2.0 * st.tK_t) <= 1e-12 * max_abs(st.tK_t));
  }
  // n = 2 decouples into two copies.
  const auto k2 = catalog("kolmogorov_friction", 2);
  CHECK(covariance(k2, 100.0).log_det_tK == doctest::Approx(2 * covariance(k1, 100.0).log_det_tK).epsilon(1e-10));
}

TEST_CASE("log det for drifts with growing and decaying directions") {
  Matrix b2(2, 2);
  b2 << 0.8, 0.3, 0.2, -1.5;
  const auto s2 = build_operator_unchecked(Matrix::Identity(2, 2), b2);
  for (const auto& [t, want] : oracle::kLogDetMixed2) {
    const auto st = covariance(s2, t);
    CHECK(st.log_det_tK == doctest::Approx(want).epsilon(1e-11));
    CHECK(st.V_t > 0.0);
  }
  Matrix b3(3, 3), q3 = Matrix::Zero(3, 3);
  b3 << 0.5, 1, 0, 0, -0.7, 0.4, 0.3, 0, 0.1;
  q3(0, 0) = 1.0;
  const auto s3 = build_operator_unchecked(q3, b3);
  for (const auto& [t, want] : oracle::kLogDetMixed3) CHECK(covariance(s3, t).log_det_tK == doctest::Approx(want).epsilon(1e-11));
}

TEST_CASE("k_infinity solves the Lyapunov equation") {
  const auto ou = catalog("ornstein_uhlenbeck", 2);
  const Matrix k = k_infinity(ou);
  CHECK(max_abs(k - 0.5 * Matrix::Identity(2, 2)) < 1e-12);
  Matrix q(2, 2), b(2, 2);
  q << 1, 0, 0, 0;
  b << -1, -1, 1, -0.5;
  const auto spec = build_operator(q, b);
  const Matrix ki = k_infinity(spec);
  CHECK(max_abs(b * ki + ki * b.transpose() + q) < 1e-12);
  CHECK_THROWS_AS(k_infinity(catalog("kolmogorov_friction", 1)), std::invalid_argument);
}

TEST_CASE("kernel density integrates to one and matches the heat kernel") {
  const auto heat = catalog("heat", 1);
  Vector x(1), y(1);
  x << 0.3;
  y << -0.4;
  const double t = 0.7;
  const double want = std::exp(-0.49 / (4 * t)) / std::sqrt(4 * std::numbers::pi * t);
  CHECK(kernel_density(heat, x, y, t) == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("sphere and ball measures") {
  CHECK(unit_sphere_measure(1) == doctest::Approx(2.0));
  CHECK(unit_sphere_measure(2) == doctest::Approx(2 * std::numbers::pi));
  CHECK(unit_sphere_measure(3) == doctest::Approx(4 * std::numbers::pi));
  CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi));
}

TEST_CASE("volume table layout") {
  std::ostringstream out;
  write_volume_table(catalog("kolmogorov", 1), {0.5, 2.0}, out);
  const std::string s = out.str();
  CHECK(s.rfind("t,V,V_over_sqrt_t,V_over_t,log_det_tK", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 3);
}
