#include "hormander/operator_model.hpp"

#include "hormander/covariance.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hormander {

namespace {

void validate_shapes(const Matrix& Q, const Matrix& B) {
  if (Q.rows() != Q.cols() || B.rows() != B.cols())
    throw std::invalid_argument("build_operator: Q and B must be square");
  if (Q.rows() != B.rows())
    throw std::invalid_argument("build_operator: dimension mismatch (Q is " + std::to_string(Q.rows()) +
                                "x" + std::to_string(Q.cols()) + ", B is " + std::to_string(B.rows()) + "x" +
                                std::to_string(B.cols()) + ")");
  if (Q.rows() == 0) throw std::invalid_argument("build_operator: empty matrices");
  if (!Q.allFinite() || !B.allFinite()) throw std::invalid_argument("build_operator: non-finite entries");
}

}  // namespace

OperatorSpec build_operator_unchecked(const Matrix& Q, const Matrix& B, std::string name) {
  validate_shapes(Q, B);
  return OperatorSpec{static_cast<int>(Q.rows()), 0.5 * (Q + Q.transpose()), B, std::move(name)};
}

OperatorSpec build_operator(const Matrix& Q, const Matrix& B, std::string name) {
  validate_shapes(Q, B);
  if (max_abs(Q - Q.transpose()) > 1e-12) throw std::invalid_argument("build_operator: Q is not symmetric");
  OperatorSpec spec = build_operator_unchecked(Q, B, std::move(name));
  const double qmin = min_eigenvalue(spec.Q);
  if (qmin < -1e-8)
    throw std::invalid_argument("build_operator: Q is not positive semidefinite (min eigenvalue " +
                                std::to_string(qmin) + ")");

  const HypoellipticityReport rep = check_hypoellipticity(spec, {0.01, 1.0, 10.0});
  if (!rep.passed) throw std::invalid_argument("build_operator: " + rep.message);
  return spec;
}

HypoellipticityReport check_hypoellipticity(const OperatorSpec& spec, const std::vector<double>& t_samples) {
  if (t_samples.empty()) throw std::invalid_argument("check_hypoellipticity: no sample times");
  HypoellipticityReport rep;
  rep.t_samples = t_samples;
  rep.passed = true;

  const int n = spec.dim;
  const Matrix root = symmetric_sqrt(spec.Q);
  Matrix blocks(n, n * n);
  Matrix power = root;
  for (int k = 0; k < n; ++k) {
    blocks.middleCols(k * n, n) = power;
    power = spec.B * power;
  }
  Eigen::JacobiSVD<Matrix> svd(blocks);
  const Vector sv = svd.singularValues();
  const double top = sv.size() ? sv(0) : 0.0;
  rep.algebraic_rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-10 * std::max(top, 1.0)) ++rep.algebraic_rank;
  std::ostringstream msg;
  if (rep.algebraic_rank < n) {
    rep.passed = false;
    msg << "K(t) singular: controllability rank " << rep.algebraic_rank << " < " << n << "; ";
  }

  for (double t : t_samples) {
    if (!(t > 0.0)) throw std::invalid_argument("check_hypoellipticity: sample times must be positive");
    double lam = 0.0;
    try {
      Matrix e, w;
      gramian(spec.Q, spec.B, t, e, w);
      const Matrix k = w / t;
      lam = min_eigenvalue(k);
      if (lam <= 1e-13 * std::max(max_abs(k), 1e-300)) lam = std::min(lam, 0.0);
    } catch (const NumericalError&) {
      lam = std::nan("");
    }
    rep.min_eigenvalue.push_back(lam);
    if (!(lam > 0.0)) {
      rep.passed = false;
      msg << "K(" << t << ") min eigenvalue " << lam << "; ";
    }
  }
  rep.message = rep.passed ? "ok" : msg.str();
  return rep;
}

SpectralClassification classify_spectrum(const OperatorSpec& spec, double tol) {
  SpectralClassification c;
  c.trace_B = spec.B.trace();
  Eigen::EigenSolver<Matrix> es(spec.B, false);
  if (es.info() != Eigen::Success) throw NumericalError("classify_spectrum: eigensolver did not converge");
  c.max_re_lambda = es.eigenvalues().real().maxCoeff();

  if (std::abs(c.trace_B) <= tol)
    c.drift_regime = DriftRegime::TraceZero;
  else
    c.drift_regime = c.trace_B > tol ? DriftRegime::TracePositive : DriftRegime::TraceNegative;
  c.stability_regime = c.max_re_lambda < -tol ? StabilityRegime::MaxReNegative : StabilityRegime::MaxReNonnegative;

  if (c.trace_B > 0.0) {
    const double bnorm = spec.B.norm();
    const double slack = 1e-8 * std::max(1.0, bnorm);
    if (!(c.max_re_lambda > -spec.dim * bnorm - slack) || c.trace_B > spec.dim * c.max_re_lambda + slack)
      throw NumericalError("classify_spectrum: eigenvalues inconsistent with trace");
  }
  return c;
}

OperatorSpec catalog(const std::string& name, int size_param) {
  if (size_param < 1) throw std::invalid_argument("catalog: size parameter must be >= 1");
  const int k = size_param;
  if (name == "heat") return build_operator(Matrix::Identity(k, k), Matrix::Zero(k, k), "heat");
  if (name == "ornstein_uhlenbeck")
    return build_operator(Matrix::Identity(k, k), -Matrix::Identity(k, k), "ornstein_uhlenbeck");
  if (name == "kolmogorov" || name == "kolmogorov_friction") {
    Matrix Q = Matrix::Zero(2 * k, 2 * k), B = Matrix::Zero(2 * k, 2 * k);
    Q.topLeftCorner(k, k).setIdentity();
    B.bottomLeftCorner(k, k).setIdentity();
    if (name == "kolmogorov_friction") B.topLeftCorner(k, k).setIdentity();
    return build_operator(Q, B, name);
  }
  throw std::invalid_argument("catalog: unknown operator '" + name + "'");
}

const char* to_string(DriftRegime r) {
  switch (r) {
    case DriftRegime::TraceZero: return "TraceZero";
    case DriftRegime::TracePositive: return "TracePositive";
    case DriftRegime::TraceNegative: return "TraceNegative";
  }
  return "?";
}

const char* to_string(StabilityRegime r) {
  return r == StabilityRegime::MaxReNegative ? "MaxReNegative" : "MaxReNonnegative";
}

nlohmann::json to_json(const OperatorSpec& spec) {
  nlohmann::json j;
  j["dim"] = spec.dim;
  std::vector<double> q, b;
  for (int r = 0; r < spec.dim; ++r)
    for (int c = 0; c < spec.dim; ++c) {
      q.push_back(spec.Q(r, c));
      b.push_back(spec.B(r, c));
    }
  j["Q"] = q;
  j["B"] = b;
  j["name"] = spec.name;
  return j;
}

namespace {

Matrix matrix_field(const nlohmann::json& j, const char* key, int dim) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("operator: missing field '") + key + "'");
  const auto& a = j.at(key);
  if (!a.is_array()) throw std::invalid_argument(std::string("operator: field '") + key + "' must be an array");
  std::vector<double> flat;
  for (const auto& e : a) {
    if (e.is_array())
      for (const auto& v : e) flat.push_back(v.get<double>());
    else
      flat.push_back(e.get<double>());
  }
  if (static_cast<int>(flat.size()) != dim * dim)
    throw std::invalid_argument(std::string("operator: field '") + key + "' needs " + std::to_string(dim * dim) +
                                " entries, got " + std::to_string(flat.size()));
  Matrix m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) m(r, c) = flat[r * dim + c];
  return m;
}

}  // namespace

OperatorSpec operator_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("operator: expected an object");
  if (!j.contains("dim") || !j.at("dim").is_number_integer())
    throw std::invalid_argument("operator: field 'dim' must be a positive integer");
  const int dim = j.at("dim").get<int>();
  if (dim < 1) throw std::invalid_argument("operator: field 'dim' must be a positive integer");
  return build_operator(matrix_field(j, "Q", dim), matrix_field(j, "B", dim), j.value("name", std::string()));
}

}  // namespace hormander
