#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace hormander {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when a numerical routine cannot produce a trustworthy result
/// (overflow, loss of definiteness, non-convergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix exponential by scaling and squaring with a [13/13] Padé approximant
/// (Higham 2005). Throws NumericalError if the result is not finite.
Matrix matrix_exp(const Matrix& m);

/// Symmetric PSD square root; negative eigenvalues are clipped at zero.
Matrix symmetric_sqrt(const Matrix& s);

/// Lower-triangular L with L * L^T = s.
///
/// Uses Cholesky when it succeeds. Otherwise, if the minimum eigenvalue after
/// scaling by the largest one is within `marginal_tol` of zero, a triangular
/// factor is recovered from the symmetric square root via QR. Anything more
/// indefinite than that throws NumericalError.
Matrix lower_factor(const Matrix& s, double marginal_tol = 1e-12);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& s);

/// Largest absolute elementwise entry, a cheap norm for tolerance checks.
double max_abs(const Matrix& m);

}  // namespace hormander
