#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hormander/seminorms.hpp"
#include "oracles/oracle_values.hpp"

#include <cmath>
#include <numbers>

using namespace hormander;

namespace {

// 𝒩^Δ_{s,2}(e^{-|x|²/2})² = 2π^{N/2} Γ(1-s) Γ(N/2+s) / (s Γ(N/2)).
double heat_gauss_besov_p2(int N, double s) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * N) * std::tgamma(1 - s) * std::tgamma(0.5 * N + s) /
         (s * std::tgamma(0.5 * N));
}

}  // namespace

TEST_CASE("closed form reproduces the frozen oracle") {
  for (auto [s, v] : oracle::kBesovHeatP2) CHECK(heat_gauss_besov_p2(1, s) == doctest::Approx(v).epsilon(1e-12));
  for (auto [s, v] : oracle::kGagliardoGaussP2)
    CHECK(heat_gauss_besov_p2(1, s) / heat_equivalence_constant(1, s, 2) == doctest::Approx(v).epsilon(1e-8));
}

TEST_CASE("heat Besov seminorm of a Gaussian, N = 1") {
  const auto heat = catalog("heat", 1);
  const auto f = gaussian(1);
  for (auto [s, v] : oracle::kBesovHeatP2) {
    const auto e = besov_seminorm(heat, f, s, 2.0);
    CHECK(e.value_p == doctest::Approx(v).epsilon(1e-7));
    CHECK(e.near_part + e.far_part == doctest::Approx(e.value_p).epsilon(1e-12));
    CHECK(e.std_error > 0.0);
    CHECK(std::abs(e.value_p - v) <= e.std_error);
  }
}

TEST_CASE("one profile serves many s") {
  const auto heat = catalog("heat", 1);
  const auto f = gaussian(1);
  const auto prof = BesovProfile::build(heat, f, 2.0, 0.3);
  for (auto [s, v] : oracle::kBesovHeatP2) CHECK(prof.evaluate(s).value_p == doctest::Approx(v).epsilon(1e-7));
  // I(t) itself: 2√π(1 - (1+t)^{-1/2}).
  for (double t : {1e-3, 0.5, 20.0})
    CHECK(prof.integrand(t) == doctest::Approx(2 * std::sqrt(std::numbers::pi) * (1 - 1 / std::sqrt(1 + t))).epsilon(1e-9));
  CHECK(prof.norm_p() == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("heat Besov seminorm of a Gaussian, N = 2") {
  const auto e = besov_seminorm(catalog("heat", 2), gaussian(2), 0.5, 2.0);
  CHECK(e.value_p == doctest::Approx(heat_gauss_besov_p2(2, 0.5)).epsilon(1e-5));
}

TEST_CASE("Monte Carlo mode agrees with the oracle") {
  SeminormConfig cfg;
  cfg.mode = QuadMode::MonteCarlo;
  cfg.mc_samples = 4000;
  cfg.near_nodes = 32;
  cfg.far_nodes = 32;
  const auto e = besov_seminorm(catalog("heat", 1), gaussian(1), 0.5, 2.0, cfg);
  const double v = oracle::kBesovHeatP2[1][1];
  CHECK(e.std_error > 0.0);
  CHECK(std::abs(e.value_p - v) <= 4 * e.std_error + 1e-3 * v);
}

TEST_CASE("constants have zero seminorm and scaling is homogeneous") {
  const auto heat = catalog("heat", 1);
  CHECK(besov_seminorm(heat, constant_function(1, 3.0), 0.5, 2.0).value_p == 0.0);
  const double a = besov_seminorm(heat, gaussian(1), 0.4, 1.5).value_p;
  const double b = besov_seminorm(heat, scaled(-2.0, gaussian(1)), 0.4, 1.5).value_p;
  CHECK(b == doctest::Approx(std::pow(2.0, 1.5) * a).epsilon(1e-9));
}

TEST_CASE("argument checks") {
  const auto heat = catalog("heat", 1);
  CHECK_THROWS_AS(besov_seminorm(heat, gaussian(1), 1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(besov_seminorm(heat, gaussian(1), 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(besov_seminorm(heat, gaussian(2), 0.5, 2.0), std::invalid_argument);
  CHECK_THROWS(s_perimeter(heat, gaussian(1), 0.25));
  CHECK_THROWS(s_perimeter(heat, function_catalog("indicator_interval", 1), 0.5));
}

TEST_CASE("Gagliardo seminorm") {
  const auto f = gaussian(1);
  for (auto [s, v] : oracle::kGagliardoGaussP2) CHECK(gagliardo_seminorm(f, s, 2.0, 1).value_p == doctest::Approx(v).epsilon(1e-6));
  const double want2 = heat_gauss_besov_p2(2, 0.5) / heat_equivalence_constant(2, 0.5, 2);
  CHECK(gagliardo_seminorm(gaussian(2), 0.5, 2.0, 2).value_p == doctest::Approx(want2).epsilon(1e-4));
  // Indicator of [-1,1] in N = 1: [1_E]_{s,1} = 2·2·(2^{1-s})/(s(1-s)).
  const double s = 0.3;
  const double want_ind = 4.0 * std::pow(2.0, 1 - s) / (s * (1 - s));
  CHECK(gagliardo_seminorm(function_catalog("indicator_interval", 1), s, 1.0, 1).value_p ==
        doctest::Approx(want_ind).epsilon(1e-8));
  CHECK_THROWS(gagliardo_seminorm(function_catalog("indicator_interval", 1), 0.6, 2.0, 1));
  // Scaling: [1_{λE}]_{s,p}^p = λ^{N-sp} [1_E]_{s,p}^p.
  const auto sq = function_catalog("indicator_square", 2);
  Vector lo = Vector::Constant(2, -1.0), hi = Vector::Constant(2, 1.0);
  const auto big = indicator_box(Box{lo, hi});
  const double a = gagliardo_seminorm(sq, 0.3, 1.0, 2).value_p, b = gagliardo_seminorm(big, 0.3, 1.0, 2).value_p;
  CHECK(b == doctest::Approx(std::pow(2.0, 2.0 - 0.3) * a).epsilon(1e-8));
}

TEST_CASE("equivalence constants") {
  CHECK(heat_equivalence_constant(1, 0.5, 2) == doctest::Approx(2 / std::sqrt(std::numbers::pi)).epsilon(1e-14));
  CHECK(heat_equivalence_constant(2, 0.5, 2) == doctest::Approx(1 / std::sqrt(std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("far tail closed form") {
  CHECK(far_tail_closed_form(1.0, 0.5, 2.0, 1.0) == doctest::Approx(oracle::kFarTailTrB1).epsilon(1e-12));
  for (double p : {1.0, 2.0}) {
    CHECK(far_tail_closed_form(0.0, 1e-6, p, 1.0) == doctest::Approx(4 / p).epsilon(1e-5));
    CHECK(far_tail_closed_form(2.0, 1e-6, p, 1.0) == doctest::Approx(2 / p).epsilon(1e-4));
  }
  CHECK(far_tail_closed_form(0.0, 0.3, 2.0, 5.0) == doctest::Approx(5.0 * 4 / 2.0).epsilon(1e-12));
}

TEST_CASE("perimeter of an interval under the heat semigroup") {
  SeminormConfig cfg;
  const auto e = s_perimeter(catalog("heat", 1), function_catalog("indicator_interval", 1), 0.25, cfg);
  CHECK(e.value_p == doctest::Approx(oracle::kPerimeterHeatInterval).epsilon(1e-5));
}
