#pragma once

#include "hormander/linalg.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace hormander {

/// The pair (Q, B) of A = tr(Q ∇²) + <BX, ∇>.
struct OperatorSpec {
  int dim = 0;
  Matrix Q;
  Matrix B;
  std::string name;
};

enum class DriftRegime { TraceZero, TracePositive, TraceNegative };
enum class StabilityRegime { MaxReNonnegative, MaxReNegative };

struct SpectralClassification {
  double trace_B = 0.0;
  double max_re_lambda = 0.0;
  DriftRegime drift_regime = DriftRegime::TraceZero;
  StabilityRegime stability_regime = StabilityRegime::MaxReNonnegative;
};

struct HypoellipticityReport {
  std::vector<double> t_samples;
  std::vector<double> min_eigenvalue;
  int algebraic_rank = 0;
  bool passed = false;
  std::string message;
};

inline constexpr double kClassificationTol = 1e-10;

/// Validating constructor. Symmetrizes Q. Throws std::invalid_argument on a
/// dimension mismatch, a non-symmetric or non-PSD Q, or a failed hypoellipticity check.
OperatorSpec build_operator(const Matrix& Q, const Matrix& B, std::string name = "");

/// Same as build_operator but skips every check. Only for degenerate test setups.
OperatorSpec build_operator_unchecked(const Matrix& Q, const Matrix& B, std::string name = "");

/// Minimum eigenvalue of K(t) at each sample plus the rank of
/// [Q^{1/2}, B Q^{1/2}, ..., B^{N-1} Q^{1/2}]. Never throws on a failed condition.
HypoellipticityReport check_hypoellipticity(const OperatorSpec& spec, const std::vector<double>& t_samples);

SpectralClassification classify_spectrum(const OperatorSpec& spec, double tol = kClassificationTol);

/// heat (size = N), ornstein_uhlenbeck (size = N), kolmogorov (size = n, N = 2n),
/// kolmogorov_friction (size = n, N = 2n).
OperatorSpec catalog(const std::string& name, int size_param);

const char* to_string(DriftRegime r);
const char* to_string(StabilityRegime r);

nlohmann::json to_json(const OperatorSpec& spec);
OperatorSpec operator_from_json(const nlohmann::json& j);

}  // namespace hormander
