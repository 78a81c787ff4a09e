#pragma once

#include "hormander/extrapolation.hpp"
#include "hormander/operator_model.hpp"
#include "hormander/semigroup.hpp"
#include "hormander/test_function.hpp"

#include <vector>

namespace hormander {

struct FractionalConfig {
  double s = 0.5;
  double t_split = 1.0;
  int near_nodes = 64;   // log-spaced on (t_cut, t_split)
  int far_nodes = 64;    // log-spaced on (t_split, T_max)
  double t_cut = 1e-7;   // below: P_t f - f taken quadratic in t
  double T_max = 0.0;    // 0: see fractional_t_max
  bool error_estimate = true;
  SemigroupQuadrature semigroup_quad;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// 50/max(tr B, |max Re λ|/2, 1/(2p′s)) clamped to [10³, 10⁶], with p′ the conjugate exponent
/// (p = ∞ means pointwise, p′ = 1); 10³ when all three rates vanish. The first two rates count
/// only in the TracePositive and MaxReNegative regimes.
double fractional_t_max(const SpectralClassification& cls, double s, double p);

struct FractionalEstimate {
  double value = 0.0;   // (−𝒜)^s f(X)
  double near = 0.0;    // contribution of t < t_split, prefactor included
  double far = 0.0;     // t > t_split including the tail beyond T_max
  double error = 0.0;   // half-rule comparison plus tail-model spread
};

/// (−𝒜)^s f at many points for many s from one table of P_t f values.
class FractionalProfile {
 public:
  /// points: N×M. T_max follows cfg (or fractional_t_max at s_max and p).
  FractionalProfile(const OperatorSpec& spec, const TestFunction& f, Matrix points, double s_max,
                    const FractionalConfig& cfg = {}, double p = std::numeric_limits<double>::infinity());

  std::vector<FractionalEstimate> evaluate(double s) const;
  Vector values(double s) const;

  const Matrix& points() const { return points_; }
  const Vector& f_values() const { return fx_; }
  double t_max() const { return t_max_; }
  const SpectralClassification& classification() const { return cls_; }

 private:
  struct Grid {
    std::vector<double> t, w;
    Matrix pf;  // M × nodes
  };
  void sum(double s, const Grid& near, const Grid& far, Vector& near_out, Vector& far_out, Vector& tail_spread) const;

  OperatorSpec spec_;
  SpectralClassification cls_;
  FractionalConfig cfg_;
  Matrix points_;
  Vector fx_;
  double t_max_ = 0.0;
  double m_inf_ = 0.0;
  bool stable_ = false;
  bool constant_ = false;
  bool integrable_ = false;
  Grid near_, far_, near_half_, far_half_;
  Vector p_cut_, p_cut_half_;                    // P_t f at t_cut and t_cut/2
  Vector p_end_, p_end_prev_, p_end_prev2_;      // at T_max, T_max/2 and T_max/4
};

FractionalEstimate fractional_power_estimate(const OperatorSpec& spec, const TestFunction& f, const Vector& X,
                                             const FractionalConfig& cfg = {});
double fractional_power(const OperatorSpec& spec, const TestFunction& f, const Vector& X,
                        const FractionalConfig& cfg = {});

/// s/Γ(1−s) ∫₀^∞ (1 − e^{−t}) t^{−1−s} dt on the default grids; should be 1.
double balakrishnan_weight_check(double s, const FractionalConfig& cfg = {});

struct LimitSeries {
  std::vector<double> x;       // s or λ
  std::vector<double> value;
  std::vector<double> error;
  AffineFit fit;               // affine extrapolation to x = 0 over the four smallest x
  double limit = 0.0;
  double limit_error = 0.0;
};

/// (−𝒜)^s f(X) for each s (decreasing), extrapolated affinely to s = 0.
LimitSeries pointwise_limit_sweep(const OperatorSpec& spec, const TestFunction& f, const Vector& X,
                                  const std::vector<double>& s_list, const FractionalConfig& cfg = {});

/// Tensor quadrature over the support box, extended geometrically outward to `radius`
/// (measured from the box center) when radius exceeds the box half-width.
struct PointRule {
  Matrix points;   // N×M
  std::vector<double> weights;
};
PointRule expanding_point_rule(const Box& box, double radius, int core_panels, int nodes, double ratio = 1.6);

struct NormEstimate {
  double value = 0.0;
  double error = 0.0;
  double near_norm = 0.0;  // ‖near-part contribution‖_p over the same rule
};

/// ‖(−𝒜)^s f‖₁ for f ≥ 0 from ∫_box over the support box: with g = (−𝒜)^s f,
/// ‖g‖₁ = 2∫_box g₊ − (tr B)^s‖f‖₁ because g <= 0 off the support and ∫g = (tr B)^s‖f‖₁.
NormEstimate fractional_l1_norm(const OperatorSpec& spec, const TestFunction& f, double s,
                                const FractionalConfig& cfg = {});

/// ‖(−𝒜)^s f − f‖_p. p = 1 requires tr B > 0 and f ≥ 0 (same identity as above);
/// p > 1 integrates over an expanding domain.
NormEstimate lp_limit_error(const OperatorSpec& spec, const TestFunction& f, double s, double p,
                            const FractionalConfig& cfg = {});

/// ‖(−𝒜)^s f‖_p for p > 1, or p = 1 with f ≥ 0.
NormEstimate fractional_lp_norm(const OperatorSpec& spec, const TestFunction& f, double s, double p,
                                const FractionalConfig& cfg = {});

/// Sweeps sharing one profile; rows follow s_list.
struct NormSweep {
  std::vector<double> s;
  std::vector<NormEstimate> norm;        // ‖(−𝒜)^s f‖_p
  std::vector<NormEstimate> difference;  // ‖(−𝒜)^s f − f‖_p
};
NormSweep fractional_norm_sweep(const OperatorSpec& spec, const TestFunction& f, const std::vector<double>& s_list,
                                double p, const FractionalConfig& cfg = {});

/// R(λ, 𝒜)f(X) = ∫₀^∞ e^{−λt} P_t f(X) dt.
double resolvent_apply(const OperatorSpec& spec, const TestFunction& f, const Vector& X, double lambda,
                       const FractionalConfig& cfg = {});

struct ResolventConfig {
  std::size_t mc_samples = 100000;  // p = 1, f >= 0
  std::uint64_t seed = 1;
  int t_nodes = 96;
  FractionalConfig base;
};

/// ‖λR(λ, 𝒜)f‖_p for each λ (x = λ in the series). For p = 1 and f ≥ 0 a Monte Carlo
/// estimate of ‖f‖₁·E[∫ p(X, Y, t) dX], t ~ Exp(λ), Y ~ f/‖f‖₁; otherwise deterministic.
LimitSeries balakrishnan_condition(const OperatorSpec& spec, const TestFunction& f, double p,
                                   const std::vector<double>& lambdas, const ResolventConfig& cfg = {});

/// Right-hand sides of the L^p bounds for (−𝒜)^s f through the Besov seminorm of order σ;
/// n_sigma is 𝒩_{σ,p}(f) (not its p-th power), f_norm is ‖f‖_p.
double seminorm_lp_bound(double s, double sigma, double p, double n_sigma, double f_norm);

}  // namespace hormander
