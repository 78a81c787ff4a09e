#include "hormander/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace hormander {

namespace {

// Padé [13/13] coefficients, Higham (2005) Table 10.4.
constexpr double kPade13[] = {64764752532480000.0,
                              32382376266240000.0,
                              7771770303897600.0,
                              1187353796428800.0,
                              129060195264000.0,
                              10559470521600.0,
                              670442572800.0,
                              33522128640.0,
                              1323241920.0,
                              40840800.0,
                              960960.0,
                              16380.0,
                              182.0,
                              1.0};

constexpr double kTheta13 = 5.371920351148152;

}  // namespace

Matrix matrix_exp(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix_exp: matrix is not square");
  if (!m.allFinite()) throw NumericalError("matrix_exp: non-finite input");
  const Eigen::Index n = m.rows();
  if (n == 0) return m;

  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > kTheta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  const Matrix a = m / std::ldexp(1.0, squarings);

  const Matrix id = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const double* b = kPade13;

  Matrix u = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  u = a * u;
  const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;

  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) r = r * r;
  if (!r.allFinite()) throw NumericalError("matrix_exp: overflow (1-norm " + std::to_string(norm1) + ")");
  return r;
}

Matrix symmetric_sqrt(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
  if (es.info() != Eigen::Success) throw NumericalError("symmetric_sqrt: eigensolver failed");
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

double min_eigenvalue(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("min_eigenvalue: eigensolver failed");
  return es.eigenvalues()(0);
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Matrix lower_factor(const Matrix& s, double marginal_tol) {
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) {
    Matrix l = llt.matrixL();
    if (l.allFinite() && l.diagonal().minCoeff() > 0.0) return l;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) throw NumericalError("lower_factor: eigensolver failed");
  const double top = std::max(std::abs(es.eigenvalues().maxCoeff()), 1e-300);
  const double low = es.eigenvalues().minCoeff() / top;
  if (low < -marginal_tol)
    throw NumericalError("lower_factor: matrix is not positive definite (scaled min eigenvalue " +
                         std::to_string(low) + ")");

  // sym = S S^T with S symmetric; S^T = Q R gives sym = R^T R, so L = R^T (signs fixed to a
  // nonnegative diagonal).
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix root_mat = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
  Eigen::HouseholderQR<Matrix> qr(root_mat.transpose());
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  Matrix l = r.transpose();
  for (Eigen::Index j = 0; j < l.cols(); ++j)
    if (l(j, j) < 0.0) l.col(j) *= -1.0;
  return l;
}

}  // namespace hormander
