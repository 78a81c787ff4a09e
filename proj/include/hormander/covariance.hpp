#pragma once

#include "hormander/linalg.hpp"
#include "hormander/operator_model.hpp"

#include <ostream>
#include <vector>

namespace hormander {

struct CovarianceState {
  double t = 0.0;
  Matrix K_t;       // K(t) = tK(t) / t
  Matrix tK_t;      // ∫₀ᵗ e^{sB} Q e^{sBᵀ} ds
  Matrix factor_L;  // lower triangular, L Lᵀ = 2 tK(t)
  double log_det_tK = 0.0;
  double V_t = 0.0;
  Matrix exp_tB;
};

/// Volume of the unit ball in R^N.
double unit_ball_volume(int N);

/// Surface measure of the unit sphere S^{N-1} (σ₀ = 2).
double unit_sphere_measure(int N);

/// e^{tB} and ∫₀ᵗ e^{sB} Q e^{sBᵀ} ds from one exponential of the 2N×2N block matrix
/// [[-Bᵀ, Q], [0, B]]·t. Long times are reached by doubling steps so the block
/// exponential is only ever taken at moderate norm.
void gramian(const Matrix& Q, const Matrix& B, double t, Matrix& exp_tB, Matrix& integral);

/// Full covariance state. With `cross_check` the block-exponential integral is
/// compared with composite Gauss–Legendre quadrature of the integrand and a
/// NumericalError is raised when they disagree by more than 1e-8 relative.
CovarianceState covariance(const OperatorSpec& spec, double t, bool cross_check = false);

/// tK(t) by composite Gauss–Legendre quadrature of e^{sB} Q e^{sBᵀ}.
Matrix gramian_by_quadrature(const OperatorSpec& spec, double t, int panels = 64, int nodes = 16);

double volume(const OperatorSpec& spec, double t);

/// Solution of B K + K Bᵀ + Q = 0, i.e. K_∞ = ∫₀^∞ e^{sB} Q e^{sBᵀ} ds. Requires every
/// eigenvalue of B to have negative real part; cross-checked against tK(t) at
/// t = 50/|max Re λ|.
Matrix k_infinity(const OperatorSpec& spec);

struct GaussianShift {
  Vector mean;
  Matrix factor;
};

/// Y = e^{tB}X + L Z with Z standard normal has the law of the kernel p(X, ·, t).
GaussianShift gaussian_shift_and_factor(const OperatorSpec& spec, const Vector& X, double t);

/// CSV with columns t, V, V/sqrt(t), V/t, log_det_tK.
void write_volume_table(const OperatorSpec& spec, const std::vector<double>& ts, std::ostream& out);

}  // namespace hormander
