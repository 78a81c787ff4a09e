#include "hormander/quadrature.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace hormander {

void Rule::append(const Rule& other) {
  x.insert(x.end(), other.x.begin(), other.x.end());
  w.insert(w.end(), other.w.begin(), other.w.end());
}

double Rule::apply(const std::function<double(double)>& g) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += w[i] * g(x[i]);
  return sum;
}

namespace {

Rule compute_legendre(int n) {
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

Rule compute_hermite(int n) {
  // Jacobi matrix of the monic probabilists' Hermite recurrence: off-diagonal sqrt(k).
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) j(k, k - 1) = j(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  if (es.info() != Eigen::Success) throw std::runtime_error("gauss_hermite_normal: eigensolver failed");
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    r.x[i] = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    r.w[i] = v * v;
    total += r.w[i];
  }
  for (double& w : r.w) w /= total;
  // Symmetrize against eigensolver round-off.
  for (int i = 0; i < n / 2; ++i) {
    const double xm = 0.5 * (r.x[n - 1 - i] - r.x[i]);
    const double wm = 0.5 * (r.w[n - 1 - i] + r.w[i]);
    r.x[i] = -xm;
    r.x[n - 1 - i] = xm;
    r.w[i] = r.w[n - 1 - i] = wm;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

template <Rule (*Compute)(int)>
const Rule& cached(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<Rule>> cache;
  if (n < 1) throw std::invalid_argument("quadrature order must be positive");
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Rule>(Compute(n));
  return *slot;
}

}  // namespace

const Rule& gauss_legendre(int n) { return cached<compute_legendre>(n); }

const Rule& gauss_hermite_normal(int n) { return cached<compute_hermite>(n); }

Rule gauss_legendre(int n, double a, double b) {
  const Rule& ref = gauss_legendre(n);
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    r.x[i] = mid + half * ref.x[i];
    r.w[i] = half * ref.w[i];
  }
  return r;
}

Rule log_rule(int n, double a, double b) {
  if (!(a > 0.0 && b > a)) throw std::invalid_argument("log_rule: need 0 < a < b");
  Rule r = gauss_legendre(n, std::log(a), std::log(b));
  for (int i = 0; i < n; ++i) {
    r.x[i] = std::exp(r.x[i]);
    r.w[i] *= r.x[i];
  }
  return r;
}

Rule graded_rule(double a, double b, int nodes_per_panel, int panels, double finest, double ratio,
                 bool grade_left, bool grade_right) {
  if (!(b > a) || panels < 1 || ratio <= 1.0 || finest <= 0.0)
    throw std::invalid_argument("graded_rule: bad arguments");
  const double h = (b - a) / panels;
  const double limit = (grade_left && grade_right) ? 0.5 * (b - a) : (b - a);

  std::vector<double> left{a}, right{b};
  if (grade_left) {
    double w = finest, e = a;
    while (w < h && e + w < a + limit) {
      e += w;
      left.push_back(e);
      w *= ratio;
    }
  }
  if (grade_right) {
    double w = finest, e = b;
    while (w < h && e - w > b - limit) {
      e -= w;
      right.push_back(e);
      w *= ratio;
    }
  }
  std::vector<double> edges = left;
  const double lo = left.back(), hi = right.back();
  if (hi > lo) {
    const int mid = std::max(1, static_cast<int>(std::ceil((hi - lo) / h - 1e-9)));
    for (int k = 1; k < mid; ++k) edges.push_back(lo + (hi - lo) * k / mid);
  }
  for (auto it = right.rbegin(); it != right.rend(); ++it)
    if (*it > edges.back()) edges.push_back(*it);

  Rule r;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k)
    r.append(gauss_legendre(nodes_per_panel, edges[k], edges[k + 1]));
  return r;
}

double integrate_adaptive(const std::function<double(double)>& g, double a, double b, double rel_tol,
                          double* error) {
  double err = 0.0;
  double v;
  if (std::isfinite(b)) {
    // Tanh-sinh tolerates integrable endpoint singularities.
    thread_local boost::math::quadrature::tanh_sinh<double> ts;
    v = ts.integrate([&g](double x) { return g(x); }, a, b, rel_tol, &err);
  } else {
    thread_local boost::math::quadrature::exp_sinh<double> es;
    v = es.integrate([&g](double x) { return g(x); }, a, b, rel_tol, &err);
  }
  if (error) *error = err;
  return v;
}

}  // namespace hormander
