#pragma once

#include "hormander/gaussian_box.hpp"
#include "hormander/operator_model.hpp"
#include "hormander/semigroup.hpp"
#include "hormander/test_function.hpp"

#include <cstdint>
#include <vector>

namespace hormander {

struct SeminormConfig {
  int x_panels = 0;           // 0: 4 panels for N = 1, 3 for N = 2, 2 above
  int x_nodes_per_panel = 0;  // 0: 16 for N = 1, 14 for N = 2, 8 above
  BoxRuleConfig box;          // inner Y rule
  int near_nodes = 64;        // log-spaced Gauss–Legendre nodes on (t_cut, 1); doubled for indicators
  int far_nodes = 64;         // log-spaced nodes on (1, T_max)
  double t_cut = 1e-6;        // below: power-law model of the integrand
  double s_min = 0.0;         // far grid reaches 10⁴/(s_min p); 0 uses the s of the call
  bool error_estimate = true; // deterministic mode: rerun on half-size t-rules
  QuadMode mode = QuadMode::Auto;
  std::size_t mc_samples = 20000;  // per t-node, MonteCarlo mode
  std::uint64_t seed = 1;
};

struct SeminormEstimate {
  double value_p = 0.0;  // 𝒩^p
  double near_part = 0.0;
  double far_part = 0.0;
  double std_error = 0.0;
  SeminormConfig config;
  double s = 0.0;
  double p = 0.0;
};

/// t ↦ I(t) = ∫∫ p(X,Y,t) |f(Y) - f(X)|^p dY dX on the t-grids. The seminorm for any s
/// whose far grid fits (s >= s_min) is a weighted sum of the stored values.
class BesovProfile {
 public:
  BesovProfile(const OperatorSpec& spec, const TestFunction& f, double p, const SeminormConfig& cfg);

  /// Builds the profile for the smallest s that will be evaluated.
  static BesovProfile build(const OperatorSpec& spec, const TestFunction& f, double p, double s_min,
                            SeminormConfig cfg = {});

  SeminormEstimate evaluate(double s) const;

  /// I(t) by the same quadrature at an arbitrary t.
  double integrand(double t) const;

  double p() const { return p_; }
  double s_min() const { return s_min_; }
  double norm_p() const { return norm_p_; }
  double trace_B() const { return trace_b_; }
  double t_max() const { return t_max_; }
  bool trivial() const { return trivial_; }

  struct Grid {
    std::vector<double> t, w, value, error;  // error: MC standard error per node
  };
  const Grid& near_grid() const { return near_; }
  const Grid& far_grid() const { return far_; }

 private:
  struct Parts {
    double near, far, near_var, far_var;
  };
  Parts integrate(double s, const Grid& near, const Grid& far) const;
  void fill(Grid& g) const;
  double integrand_deterministic(double t) const;
  double integrand_mc(double t, std::uint64_t stream, double& std_error) const;
  bool negligible(double t, double log_det_tK) const;

  OperatorSpec spec_;
  TestFunction f_;
  double p_;
  SeminormConfig cfg_;
  QuadMode mode_;
  double s_min_ = 0.0;
  double trace_b_ = 0.0;
  double norm_p_ = 0.0;  // ∫|f|^p on the X-rule
  double t_max_ = 0.0;
  double growth_ = 0.5;  // power-law exponent of I(t) at t → 0
  bool trivial_ = false;
  Rule x_rule_;          // tensor X-rule flattened, dimension-major points
  std::vector<double> x_points_;
  std::vector<double> fx_pow_;
  Grid near_, far_, near_half_, far_half_;
  double i_cut_ = 0.0, r_end_ = 0.0;  // I(t_cut) and I(T) - ‖f‖^p(1 + e^{-T tr B})
  double t_star_ = 0.0;               // from here on I(t) is taken as ‖f‖^p(1 + e^{-t tr B})
};

SeminormEstimate besov_seminorm(const OperatorSpec& spec, const TestFunction& f, double s, double p,
                                const SeminormConfig& cfg = {});

struct BesovSplit {
  double near = 0.0;
  double far = 0.0;
};
BesovSplit besov_split(const OperatorSpec& spec, const TestFunction& f, double s, double p,
                       const SeminormConfig& cfg = {});

/// s·‖f‖_p^p·[2/(sp) + ∫₁^∞ e^{-t tr B} t^{-sp/2-1} dt]; fnorm_p is ‖f‖_p^p.
double far_tail_closed_form(double trB, double s, double p, double fnorm_p);

struct GagliardoConfig {
  int x_panels = 0;           // 0: 6 for N = 1, 3 for N = 2
  int x_nodes_per_panel = 0;  // 0: 16 for N = 1, 14 for N = 2
  int angle_nodes = 64;       // trapezoid in θ for N = 2
  int r_nodes = 48;           // log-spaced radial nodes on each side of r0
  double r0 = 1.0;            // split radius
  double r_min_ratio = 1e-7;  // below r0·ratio: |Δf| ∝ r model
};

struct GagliardoEstimate {
  double value_p = 0.0;
  double near_part = 0.0;  // |x - y| < r0
  double far_part = 0.0;
};

/// [f]^p_{s,p} = ∫∫ |f(x) - f(y)|^p |x - y|^{-N-sp} dx dy in polar coordinates around x.
/// Supports N ∈ {1, 2}; f needs a support box.
GagliardoEstimate gagliardo_seminorm(const TestFunction& f, double s, double p, int N, const GagliardoConfig& cfg = {});

/// 2^{sp} Γ((N+sp)/2) π^{-N/2}.
double heat_equivalence_constant(int N, double s, double p);

/// 𝔓_{A,s}(E) = 𝒩^A_{2s,1}(1_E) for 0 < s < 1/2.
SeminormEstimate s_perimeter(const OperatorSpec& spec, const TestFunction& E, double s, const SeminormConfig& cfg = {});

}  // namespace hormander
