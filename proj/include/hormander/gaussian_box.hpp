#pragma once

// Expectations E[g(Y) 1_box(Y)] for Y = mean + L Z, Z ~ N(0, I), L lower triangular.
//
// Coordinates are integrated one at a time: given z_0..z_{k-1}, Y_k is affine in z_k
// with slope L_kk, so the event Y_k ∈ [lo_k, hi_k] is an interval in z_k. Each interval
// (clipped to |z_k| <= z_max) gets its own Gauss–Legendre rule with the normal density
// folded into the weights. Nodes therefore never fall outside the box, which is what
// makes the rule usable when the kernel is many times wider than the support of g.

#include "hormander/linalg.hpp"
#include "hormander/test_function.hpp"
#include "hormander/quadrature.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hormander {

struct BoxRuleConfig {
  int nodes = 0;  // per coordinate; 0 selects 48 for N = 1 and 32 above
  double z_max = 8.5;
};

inline constexpr int kMaxBoxDim = 8;

/// P(a <= Z <= b) for standard normal Z, accurate in both tails.
inline double normal_interval(double a, double b) {
  if (!(b > a)) return 0.0;
  constexpr double r = std::numbers::sqrt2 / 2.0;
  if (a >= 0.0) return 0.5 * (std::erfc(a * r) - std::erfc(b * r));
  if (b <= 0.0) return 0.5 * (std::erfc(-b * r) - std::erfc(-a * r));
  return 1.0 - 0.5 * (std::erfc(-a * r) + std::erfc(b * r));
}

namespace detail {

struct BoxRuleState {
  const double* mean;
  const double* L;  // column-major N×N
  int n;
  const double* lo;
  const double* hi;
  const Rule* ref;
  double z_max;
  std::array<double, kMaxBoxDim> z{};
  std::array<double, kMaxBoxDim> y{};
};

// z-interval for coordinate k given z_0..z_{k-1}; false when empty.
inline bool coordinate_interval(const BoxRuleState& s, int k, double& za, double& zb, double& c) {
  c = s.mean[k];
  for (int j = 0; j < k; ++j) c += s.L[k + j * s.n] * s.z[j];
  const double lkk = s.L[k + k * s.n];
  if (lkk > 0.0) {
    za = std::max((s.lo[k] - c) / lkk, -s.z_max);
    zb = std::min((s.hi[k] - c) / lkk, s.z_max);
  } else {
    if (c < s.lo[k] || c > s.hi[k]) return false;
    za = -s.z_max;
    zb = s.z_max;
  }
  return zb > za;
}

template <class Visit>
void box_rule_level(BoxRuleState& s, int k, double weight, Visit& visit) {
  double za, zb, c;
  if (!coordinate_interval(s, k, za, zb, c)) return;
  const double lkk = s.L[k + k * s.n];
  const double half = 0.5 * (zb - za), mid = 0.5 * (za + zb);
  const Rule& ref = *s.ref;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double z = mid + half * ref.x[i];
    const double w = weight * half * ref.w[i] * std::exp(-0.5 * z * z) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
    s.z[k] = z;
    s.y[k] = c + lkk * z;
    if (k + 1 == s.n)
      visit(s.y.data(), w);
    else
      box_rule_level(s, k + 1, w, visit);
  }
}

inline double exit_level(BoxRuleState& s, int k) {
  // P(Y_k..Y_{n-1} leaves the box | z_0..z_{k-1}).
  const double lkk = s.L[k + k * s.n];
  double c = s.mean[k];
  for (int j = 0; j < k; ++j) c += s.L[k + j * s.n] * s.z[j];
  double za, zb;
  if (lkk > 0.0) {
    za = (s.lo[k] - c) / lkk;
    zb = (s.hi[k] - c) / lkk;
  } else {
    if (c < s.lo[k] || c > s.hi[k]) return 1.0;
    za = -std::numeric_limits<double>::infinity();
    zb = std::numeric_limits<double>::infinity();
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double out = normal_interval(-inf, za) + normal_interval(zb, inf);
  if (k + 1 == s.n || out >= 1.0) return out;
  za = std::max(za, -s.z_max);
  zb = std::min(zb, s.z_max);
  if (!(zb > za)) return out;
  const double half = 0.5 * (zb - za), mid = 0.5 * (za + zb);
  const Rule& ref = *s.ref;
  double acc = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double z = mid + half * ref.x[i];
    s.z[k] = z;
    acc += half * ref.w[i] * std::exp(-0.5 * z * z) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2) *
           exit_level(s, k + 1);
  }
  return out + acc;
}

inline BoxRuleState make_state(const Vector& mean, const Matrix& L, const Box& box, const BoxRuleConfig& cfg) {
  const int n = static_cast<int>(mean.size());
  if (n > kMaxBoxDim) throw std::invalid_argument("box rule: dimension too large");
  if (L.rows() != n || L.cols() != n || box.dim() != n) throw std::invalid_argument("box rule: dimension mismatch");
  return BoxRuleState{mean.data(), L.data(), n, box.lo.data(), box.hi.data(), &gauss_legendre(cfg.nodes > 0 ? cfg.nodes : (n == 1 ? 48 : 32)),
                      cfg.z_max, {}, {}};
}

}  // namespace detail

/// Calls visit(y, w) for every node; Σ w·g(y) ≈ E[g(Y) 1_box(Y)].
template <class Visit>
void box_rule(const Vector& mean, const Matrix& L, const Box& box, const BoxRuleConfig& cfg, Visit&& visit) {
  detail::BoxRuleState s = detail::make_state(mean, L, box, cfg);
  detail::box_rule_level(s, 0, 1.0, visit);
}

/// P(Y ∉ box), with the last coordinate done exactly through erfc.
inline double box_exit_probability(const Vector& mean, const Matrix& L, const Box& box, const BoxRuleConfig& cfg) {
  detail::BoxRuleState s = detail::make_state(mean, L, box, cfg);
  return detail::exit_level(s, 0);
}

}  // namespace hormander
