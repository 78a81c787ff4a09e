#include "hormander/covariance.hpp"

#include "hormander/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <stdexcept>

namespace hormander {

double unit_ball_volume(int N) { return std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N + 1.0); }

double unit_sphere_measure(int N) { return N * unit_ball_volume(N); }

namespace {

// Taylor series of exp(C·t) for ‖C t‖₁ ≤ 1/2. Summing the series instead of using the
// rational approximant keeps structurally small entries (t³/3 for the Kolmogorov block)
// accurate relative to their own size.
Matrix exp_series(const Matrix& ct) {
  const Eigen::Index n = ct.rows();
  Matrix sum = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k < 80; ++k) {
    term = term * ct / static_cast<double>(k);
    sum += term;
    if (max_abs(term) == 0.0 || max_abs(term) < 1e-60) break;
  }
  return sum;
}

}  // namespace

void gramian(const Matrix& Q, const Matrix& B, double t, Matrix& exp_tB, Matrix& integral) {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("gramian: t must be positive and finite");
  const Eigen::Index n = B.rows();
  Matrix c = Matrix::Zero(2 * n, 2 * n);
  c.topLeftCorner(n, n) = -B;
  c.topRightCorner(n, n) = Q;
  c.bottomRightCorner(n, n) = B.transpose();

  const double norm = c.cwiseAbs().colwise().sum().maxCoeff();
  int doublings = 0;
  if (norm * t > 0.5) doublings = static_cast<int>(std::ceil(std::log2(norm * t / 0.5)));
  const double t0 = std::ldexp(t, -doublings);

  // Van Loan: exp(C t) = [[F11, F12], [0, F22]] with F22 = e^{tBᵀ} and F22ᵀ F12 = ∫₀ᵗ e^{sB} Q e^{sBᵀ} ds.
  const Matrix f = exp_series(c * t0);
  Matrix e = f.bottomRightCorner(n, n).transpose();
  Matrix w = e * f.topRightCorner(n, n);
  w = 0.5 * (w + w.transpose());

  for (int k = 0; k < doublings; ++k) {
    w = w + e * w * e.transpose();
    w = 0.5 * (w + w.transpose());
    e = e * e;
    if (!w.allFinite() || !e.allFinite())
      throw NumericalError("gramian: overflow at t = " + std::to_string(t));
  }
  exp_tB = e;
  integral = w;
}

Matrix gramian_by_quadrature(const OperatorSpec& spec, double t, int panels, int nodes) {
  const double h = t / panels;
  const double bnorm = spec.B.cwiseAbs().colwise().sum().maxCoeff();
  const double finest = bnorm > 0.0 ? std::min(h, 0.05 / bnorm) : h;
  const Rule r = finest < h ? graded_rule(0.0, t, nodes, panels, finest, 1.5) : graded_rule(0.0, t, nodes, panels, h, 2.0, false, false);
  Matrix sum = Matrix::Zero(spec.dim, spec.dim);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Matrix e = matrix_exp(spec.B * r.x[i]);
    sum += r.w[i] * (e * spec.Q * e.transpose());
  }
  return 0.5 * (sum + sum.transpose());
}

namespace {

// Plain Cholesky of m that stops at the first pivot d_k with d_k < min_ratio·m_kk, i.e. one
// whose digits went to cancellation. Returns that index, or n when every pivot is resolved.
int guarded_cholesky(const Matrix& m, Matrix& L, double min_ratio) {
  const int n = static_cast<int>(m.rows());
  L = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    double d = m(k, k);
    for (int j = 0; j < k; ++j) d -= L(k, j) * L(k, j);
    if (!(d > min_ratio * m(k, k)) || !(d > 0.0)) return k;
    L(k, k) = std::sqrt(d);
    for (int i = k + 1; i < n; ++i) {
      double c = m(i, k);
      for (int j = 0; j < k; ++j) c -= L(i, j) * L(k, j);
      L(i, k) = c / L(k, k);
    }
  }
  return n;
}

// L with L Lᵀ = 2tK(t). When e^{tB} grows, 2tK mixes scales e^{2λt} and O(t) and the
// trailing pivots are lost to cancellation. Those pivots are the covariance of the trailing
// coordinates given the leading ones, whose inverse is a block of the precision matrix
// e^{-tBᵀ}(2K̃)⁻¹e^{-tB}, K̃ = ∫₀ᵗ e^{-sB} Q e^{-sBᵀ} ds; that form has no cancellation.
void factor_covariance(const OperatorSpec& spec, double t, CovarianceState& st) {
  const int n = spec.dim;
  const Matrix m = 2.0 * st.tK_t;
  Matrix L;
  const int k = guarded_cholesky(m, L, 1e-6);
  if (k == n) {
    st.factor_L = L;
    return;
  }
  Matrix einv, kb;
  bool backward = true;
  try {
    gramian(spec.Q, -spec.B, t, einv, kb);
  } catch (const NumericalError&) {
    backward = false;
  }
  if (backward) {
    const Eigen::LLT<Matrix> sb(2.0 * kb);
    if (sb.info() != Eigen::Success) backward = false;
    if (backward) {
      const Matrix prec = einv.transpose() * sb.solve(einv);
      const int r = n - k;
      const Eigen::LLT<Matrix> pb(0.5 * (prec.bottomRightCorner(r, r) + prec.bottomRightCorner(r, r).transpose()));
      if (pb.info() == Eigen::Success) {
        const Matrix cond = pb.solve(Matrix::Identity(r, r));
        L.bottomRightCorner(r, r) = lower_factor(0.5 * (cond + cond.transpose()));
        if (L.allFinite()) {
          st.factor_L = L;
          return;
        }
      }
    }
  }
  try {
    st.factor_L = lower_factor(m);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("covariance: factorization of 2tK(t) failed at t = ") + std::to_string(t) +
                         ": " + e.what());
  }
}

// Matrix sign function by scaled Newton iteration; a must have no eigenvalue on the
// imaginary axis.
Matrix matrix_sign(const Matrix& a) {
  Matrix z = a;
  for (int k = 0; k < 100; ++k) {
    const Eigen::PartialPivLU<Matrix> lu(z);
    const Matrix zi = lu.inverse();
    const double mu = std::pow(std::abs(lu.determinant()), -1.0 / static_cast<double>(z.rows()));
    const double g = std::isfinite(mu) && mu > 0.0 && k < 8 ? mu : 1.0;
    const Matrix next = 0.5 * (g * z + zi / g);
    const double change = max_abs(next - z);
    z = next;
    if (change <= 1e-14 * max_abs(z)) break;
  }
  return z;
}

// Orthonormal basis of the range of a rank-r projector.
Matrix range_basis(const Matrix& proj, int r) {
  const Eigen::ColPivHouseholderQR<Matrix> qr(proj);
  return Matrix(qr.householderQ()).leftCols(r);
}

// log det tK(t) when e^{tB} grows. B is split along its invariant subspaces at a real-part
// threshold c, tK is transformed to the split coordinates and the growing block is scaled
// by e^{-tB_u}, which leaves three integrals that converge as t → ∞:
//   M_uu = ∫₀ᵗ e^{-sB_u} Q_uu e^{-sB_uᵀ} ds,  M_ss = ∫₀ᵗ e^{sB_s} Q_ss e^{sB_sᵀ} ds,
//   M_us = ∫₀ᵗ e^{-(t-s)B_u} Q_us e^{sB_sᵀ} ds,
// and log det tK = 2 log|det X| + 2t tr B_u + log det M with X the split basis.
// Returns NaN when the split is not available.
double split_log_det(const OperatorSpec& spec, double t) {
  const int n = spec.dim;
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Matrix>(spec.B, false).eigenvalues();
  std::vector<double> re(n);
  for (int i = 0; i < n; ++i) re[i] = ev[i].real();
  std::sort(re.begin(), re.end());
  if (!(re.back() > 0.0)) return std::nan("");

  // Growth rate left in M for a threshold below re[j] (u = re[j..]).
  auto cost = [&](int j) { return std::max({0.0, -re[j], j > 0 ? re[j - 1] : 0.0}); };
  int best = 0;
  double c = re[0] - 1.0;
  for (int j = 1; j < n; ++j) {
    if (re[j] - re[j - 1] < 1e-6 * (1.0 + std::abs(re[j]))) continue;
    if (cost(j) < cost(best)) {
      best = j;
      c = 0.5 * (re[j - 1] + re[j]);
    }
  }
  const int ru = n - best, rs = best;

  Matrix x = Matrix::Identity(n, n);
  Matrix bp = spec.B, qp = spec.Q;
  double log_det_x = 0.0;
  if (rs > 0) {
    const Matrix z = matrix_sign(spec.B - c * Matrix::Identity(n, n));
    const Matrix id = Matrix::Identity(n, n);
    x.leftCols(ru) = range_basis(0.5 * (id + z), ru);
    x.rightCols(rs) = range_basis(0.5 * (id - z), rs);
    const Eigen::PartialPivLU<Matrix> lu(x);
    const Matrix xi = lu.inverse();
    bp = xi * spec.B * x;
    qp = xi * spec.Q * xi.transpose();
    qp = 0.5 * (qp + qp.transpose());
    if (max_abs(bp.topRightCorner(ru, rs)) + max_abs(bp.bottomLeftCorner(rs, ru)) > 1e-8 * (1.0 + max_abs(bp)))
      return std::nan("");
    log_det_x = std::log(std::abs(lu.determinant()));
  }
  const Matrix bu = bp.topLeftCorner(ru, ru);
  Matrix m(n, n), e, w;
  gramian(qp.topLeftCorner(ru, ru), -bu, t, e, w);
  m.topLeftCorner(ru, ru) = w;
  if (rs > 0) {
    const Matrix bs = bp.bottomRightCorner(rs, rs);
    gramian(qp.bottomRightCorner(rs, rs), bs, t, e, w);
    m.bottomRightCorner(rs, rs) = w;
    Matrix vl = Matrix::Zero(n, n);
    vl.topLeftCorner(ru, ru) = -bu;
    vl.topRightCorner(ru, rs) = qp.topRightCorner(ru, rs);
    vl.bottomRightCorner(rs, rs) = bs.transpose();
    const Matrix cross = matrix_exp(vl * t).topRightCorner(ru, rs);
    m.topRightCorner(ru, rs) = cross;
    m.bottomLeftCorner(rs, ru) = cross.transpose();
  }
  const Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success || !m.allFinite()) return std::nan("");
  double log_det_m = 0.0;
  for (int i = 0; i < n; ++i) log_det_m += 2.0 * std::log(llt.matrixLLT()(i, i));
  return 2.0 * log_det_x + 2.0 * t * bu.trace() + log_det_m;
}

}  // namespace

CovarianceState covariance(const OperatorSpec& spec, double t, bool cross_check) {
  if (!(t > 0.0)) throw std::invalid_argument("covariance: t must be positive");
  CovarianceState st;
  st.t = t;
  gramian(spec.Q, spec.B, t, st.exp_tB, st.tK_t);
  st.K_t = st.tK_t / t;

  if (cross_check) {
    const Matrix q = gramian_by_quadrature(spec, t);
    const double scale = max_abs(st.tK_t);
    const double diff = max_abs(q - st.tK_t);
    if (diff > 1e-8 * scale)
      throw NumericalError("covariance: block exponential and quadrature disagree at t = " + std::to_string(t) +
                           " (relative " + std::to_string(diff / scale) + ")");
  }

  factor_covariance(spec, t, st);
  double log_det_2tk = 0.0;
  for (int i = 0; i < spec.dim; ++i) log_det_2tk += 2.0 * std::log(st.factor_L(i, i));
  st.log_det_tK = log_det_2tk - spec.dim * std::log(2.0);
  if (spec.dim > 1) {
    double split = std::nan("");
    try {
      split = split_log_det(spec, t);
    } catch (const NumericalError&) {
    }
    if (std::isfinite(split)) st.log_det_tK = split;
  }
  st.V_t = unit_ball_volume(spec.dim) * std::exp(0.5 * st.log_det_tK);
  return st;
}

double volume(const OperatorSpec& spec, double t) { return covariance(spec, t).V_t; }

Matrix k_infinity(const OperatorSpec& spec) {
  const SpectralClassification c = classify_spectrum(spec);
  if (c.stability_regime != StabilityRegime::MaxReNegative)
    throw std::invalid_argument("k_infinity: drift spectrum is not stable (max Re λ = " +
                                std::to_string(c.max_re_lambda) + ")");
  const int n = spec.dim;
  const Matrix id = Matrix::Identity(n, n);
  Matrix kron(n * n, n * n);
  // Column-major vec: vec(B K) = (I ⊗ B) vec K, vec(K Bᵀ) = (B ⊗ I) vec K.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) kron.block(i * n, j * n, n, n) = id(i, j) * spec.B + spec.B(i, j) * id;
  Eigen::FullPivLU<Matrix> lu(kron);
  if (!lu.isInvertible()) throw NumericalError("k_infinity: Lyapunov operator is singular");
  const Vector rhs = -Eigen::Map<const Vector>(spec.Q.data(), n * n);
  const Vector sol = lu.solve(rhs);
  Matrix k = Eigen::Map<const Matrix>(sol.data(), n, n);
  k = 0.5 * (k + k.transpose());

  Matrix e, w;
  gramian(spec.Q, spec.B, 50.0 / std::abs(c.max_re_lambda), e, w);
  if (max_abs(w - k) > 1e-6 * max_abs(k))
    throw NumericalError("k_infinity: Lyapunov solution disagrees with long-time Gramian");
  return k;
}

GaussianShift gaussian_shift_and_factor(const OperatorSpec& spec, const Vector& X, double t) {
  const CovarianceState st = covariance(spec, t);
  return GaussianShift{st.exp_tB * X, st.factor_L};
}

void write_volume_table(const OperatorSpec& spec, const std::vector<double>& ts, std::ostream& out) {
  out << "t,V,V_over_sqrt_t,V_over_t,log_det_tK\n";
  out << std::setprecision(12);
  for (double t : ts) {
    const CovarianceState st = covariance(spec, t);
    out << t << ',' << st.V_t << ',' << st.V_t / std::sqrt(t) << ',' << st.V_t / t << ',' << st.log_det_tK << '\n';
  }
}

}  // namespace hormander
