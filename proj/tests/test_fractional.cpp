#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hormander/fractional.hpp"
#include "hormander/seminorms.hpp"
#include "oracles/oracle_values.hpp"

#include <cmath>
#include <numbers>

using namespace hormander;

namespace {

FractionalConfig with_s(double s) {
  FractionalConfig c;
  c.s = s;
  return c;
}

}  // namespace

TEST_CASE("Balakrishnan weights integrate to one") {
  for (double s = 0.01; s < 0.995; s += 0.01) CHECK(std::abs(balakrishnan_weight_check(s) - 1.0) <= 1e-8);
}

TEST_CASE("pointwise values against frozen references") {
  const Vector x0 = Vector::Zero(1);
  for (auto [s, v] : oracle::kHeatFrac)
    CHECK(fractional_power(catalog("heat", 1), gaussian(1), x0, with_s(s)) == doctest::Approx(v).epsilon(1e-6));
  for (auto [s, v] : oracle::kOuFrac)
    CHECK(fractional_power(catalog("ornstein_uhlenbeck", 1), gaussian(1), x0, with_s(s)) == doctest::Approx(v).epsilon(1e-8));
  const auto e = fractional_power_estimate(catalog("heat", 1), gaussian(1), x0, with_s(0.5));
  CHECK(e.near + e.far == doctest::Approx(e.value).epsilon(1e-12));
  CHECK(e.error > 0.0);
  CHECK(std::abs(e.value - oracle::kHeatFrac[4][1]) <= 10 * e.error);
}

TEST_CASE("profile and single-point paths agree") {
  const auto spec = catalog("kolmogorov", 1);
  const auto f = gaussian(2);
  Matrix pts(2, 2);
  pts << 0.0, 0.7, 0.0, -0.4;
  const FractionalProfile prof(spec, f, pts, 0.5);
  const Vector v = prof.values(0.3);
  for (int i = 0; i < 2; ++i)
    CHECK(v(i) == doctest::Approx(fractional_power(spec, f, pts.col(i), with_s(0.3))).epsilon(1e-8));
}

TEST_CASE("linearity in f") {
  const auto spec = catalog("kolmogorov_friction", 1);
  const auto f = gaussian(2), g = gaussian(2, 1.0, 0.5);
  const auto h = sum(scaled(2.0, f), g);
  Vector x(2);
  x << 0.3, 0.1;
  // The narrow bump sits in the wider union box of h, so the box rule needs more nodes there.
  FractionalConfig c = with_s(0.4);
  c.semigroup_quad.box.nodes = 64;
  const double a = fractional_power(spec, f, x, c), b = fractional_power(spec, g, x, c);
  CHECK(fractional_power(spec, h, x, c) == doctest::Approx(2 * a + b).epsilon(1e-8));
  CHECK(fractional_power(spec, constant_function(2, 3.0), x, with_s(0.4)) == doctest::Approx(0.0));
}

TEST_CASE("pointwise limits") {
  const std::vector<double> s_list{0.1, 0.05, 0.02, 0.01};
  const Vector x0 = Vector::Zero(1);
  const auto heat = pointwise_limit_sweep(catalog("heat", 1), gaussian(1), x0, s_list);
  CHECK(heat.limit == doctest::Approx(1.0).epsilon(0.02));
  const auto ou = pointwise_limit_sweep(catalog("ornstein_uhlenbeck", 1), gaussian(1), x0, s_list);
  CHECK(ou.limit == doctest::Approx(1.0 - std::sqrt(0.5)).epsilon(0.02));
  CHECK_THROWS(pointwise_limit_sweep(catalog("heat", 1), gaussian(1), x0, {0.01, 0.1}));
}

TEST_CASE("L1 norms of fractional powers") {
  const auto k0 = catalog("kolmogorov", 1);
  const auto f = gaussian(2);
  const double f1 = f.lp_norm_pow(1.0);
  const auto sweep = fractional_norm_sweep(k0, f, {0.05, 0.01}, 1.0);
  CHECK(sweep.norm[1].value / f1 > sweep.norm[0].value / f1);
  CHECK(sweep.norm[1].value / f1 == doctest::Approx(2.0).epsilon(0.03));
  CHECK(sweep.difference[1].value / f1 == doctest::Approx(1.0).epsilon(0.01));
  const double single = fractional_l1_norm(k0, f, 0.05).value;
  CHECK(single == doctest::Approx(sweep.norm[0].value).epsilon(1e-6));
}

TEST_CASE("refusals") {
  const auto heat = catalog("heat", 1);
  CHECK_THROWS_AS(lp_limit_error(heat, gaussian(1), 0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(lp_limit_error(catalog("kolmogorov", 1), gaussian(2), 0.1, 1.0), std::invalid_argument);
  CHECK_NOTHROW(FractionalConfig{}.validate());
  FractionalConfig bad;
  bad.s = 1.0;
  try {
    bad.validate();
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("s") != std::string::npos);
  }
  CHECK_THROWS(fractional_power(heat, gaussian(1), Vector::Zero(1), bad));
}

TEST_CASE("resolvent") {
  const double c = 2.5, lambda = 0.3;
  CHECK(resolvent_apply(catalog("heat", 1), constant_function(1, c), Vector::Zero(1), lambda) ==
        doctest::Approx(c / lambda).epsilon(1e-12));
  // R(λ)f(0) for heat and f = e^{-x²/2}: ∫ e^{-λt}(1+2t)^{-1/2} dt = √(π/(2λ)) e^{λ/2} erfc(√(λ/2)).
  const double want = std::sqrt(std::numbers::pi / (2 * lambda)) * std::exp(lambda / 2) * std::erfc(std::sqrt(lambda / 2));
  CHECK(resolvent_apply(catalog("heat", 1), gaussian(1), Vector::Zero(1), lambda) == doctest::Approx(want).epsilon(1e-7));

  const std::vector<double> lambdas{1.0, 0.1, 0.01};
  const auto heat = balakrishnan_condition(catalog("heat", 1), gaussian(1), 2.0, lambdas);
  const double f2 = gaussian(1).lp_norm(2.0);
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    CHECK(heat.value[i] / f2 == doctest::Approx(oracle::kResolventHeatRatio[i][1]).epsilon(1e-4));

  ResolventConfig rc;
  rc.mc_samples = 20000;
  const auto k0 = balakrishnan_condition(catalog("kolmogorov", 1), gaussian(2), 1.0, {1.0}, rc);
  const double f1 = gaussian(2).lp_norm_pow(1.0);
  CHECK(std::abs(k0.value[0] - f1) <= 4 * k0.error[0]);
}

TEST_CASE("L^p bound through the Besov seminorm") {
  const auto heat = catalog("heat", 1);
  const auto f = gaussian(1);
  const double sigma = 0.8, s = 0.2;
  const double n_sigma = std::sqrt(besov_seminorm(heat, f, sigma, 2.0).value_p);
  const double bound = seminorm_lp_bound(s, sigma, 2.0, n_sigma, f.lp_norm(2.0));
  const auto norm = fractional_lp_norm(heat, f, s, 2.0);
  CHECK(norm.value <= bound);
  CHECK(norm.value > 0.0);
  CHECK_THROWS(seminorm_lp_bound(0.5, 0.8, 2.0, 1.0, 1.0));
}

TEST_CASE("time horizon") {
  const auto cls = classify_spectrum(catalog("heat", 1));
  CHECK(fractional_t_max(cls, 0.5, std::numeric_limits<double>::infinity()) == doctest::Approx(1e3));
  const auto ou = classify_spectrum(catalog("ornstein_uhlenbeck", 1));
  CHECK(fractional_t_max(ou, 0.5, 2.0) >= 1e3);
}
