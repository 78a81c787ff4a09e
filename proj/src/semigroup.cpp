#include "hormander/semigroup.hpp"

#include "hormander/parallel.hpp"
#include "hormander/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hormander {

QuadMode resolve_mode(const SemigroupQuadrature& q, int dim) {
  if (q.mode != QuadMode::Auto) return q.mode;
  return dim <= 4 ? QuadMode::Deterministic : QuadMode::MonteCarlo;
}

int resolve_gh_order(const SemigroupQuadrature& q, int dim) {
  if (q.gh_order != 0) {
    if (q.gh_order < 2) throw std::invalid_argument("Gauss-Hermite order must be >= 2");
    return q.gh_order;
  }
  return dim <= 2 ? 40 : 20;
}

double pow_abs(double d, double p) {
  const double a = std::abs(d);
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  return std::exp(p * std::log(std::max(a, 1e-300)));
}

double kernel_density(const CovarianceState& st, const Vector& X, const Vector& Y) {
  const int n = static_cast<int>(X.size());
  const Vector d = Y - st.exp_tB * X;
  // With L Lᵀ = 2tK: ⟨K⁻¹d, d⟩/(4t) = |L⁻¹d|²/2 and (4π)^{-N/2} det(tK)^{-1/2} = (2π)^{-N/2} det(L)^{-1}.
  const Vector u = st.factor_L.triangularView<Eigen::Lower>().solve(d);
  double log_det_l = 0.0;
  for (int i = 0; i < n; ++i) log_det_l += std::log(st.factor_L(i, i));
  return std::exp(-0.5 * u.squaredNorm() - log_det_l - 0.5 * n * std::log(2.0 * std::numbers::pi));
}

double kernel_density(const OperatorSpec& spec, const Vector& X, const Vector& Y, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("kernel_density: t must be positive");
  return kernel_density(covariance(spec, t), X, Y);
}

double gauss_hermite_expectation(const Vector& mean, const Matrix& L, int order,
                                 const std::function<double(const double*)>& g) {
  const int n = static_cast<int>(mean.size());
  if (std::pow(static_cast<double>(order), n) > kMaxGaussHermiteNodes)
    throw std::invalid_argument("Gauss-Hermite: order^N exceeds the node budget");
  const Rule& r = gauss_hermite_normal(order);
  std::vector<int> idx(n, 0);
  Vector z(n), y(n);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (int k = 0; k < n; ++k) {
      z(k) = r.x[idx[k]];
      w *= r.w[idx[k]];
    }
    y.noalias() = mean + L.triangularView<Eigen::Lower>() * z;
    total += w * g(y.data());
    int k = 0;
    while (k < n && ++idx[k] == order) idx[k++] = 0;
    if (k == n) break;
  }
  return total;
}

namespace {

bool use_box(const TestFunction& f) { return f.support().has_value() && !f.constant(); }

}  // namespace

double apply_semigroup(const OperatorSpec& spec, const TestFunction& f, const Vector& X, double t,
                       const SemigroupQuadrature& quad) {
  if (!(t > 0.0)) throw std::invalid_argument("apply_semigroup: t must be positive");
  if (f.dim() != spec.dim || X.size() != spec.dim) throw std::invalid_argument("apply_semigroup: dimension mismatch");
  if (resolve_mode(quad, spec.dim) == QuadMode::MonteCarlo)
    return apply_semigroup_mc(spec, f, X, t, quad.mc_samples, quad.seed).value;
  const CovarianceState st = covariance(spec, t);
  const Vector mean = st.exp_tB * X;
  if (use_box(f)) {
    double acc = 0.0;
    box_rule(mean, st.factor_L, *f.support(), quad.box, [&](const double* y, double w) { acc += w * f(y); });
    return acc;
  }
  return gauss_hermite_expectation(mean, st.factor_L, resolve_gh_order(quad, spec.dim),
                                   [&](const double* y) { return f(y); });
}

Matrix apply_semigroup_table(const OperatorSpec& spec, const TestFunction& f, const Matrix& points,
                             const std::vector<double>& times, const SemigroupQuadrature& quad) {
  if (f.dim() != spec.dim || points.rows() != spec.dim)
    throw std::invalid_argument("apply_semigroup_table: dimension mismatch");
  const Eigen::Index m = points.cols();
  Matrix out(m, static_cast<Eigen::Index>(times.size()));
  const bool mc = resolve_mode(quad, spec.dim) == QuadMode::MonteCarlo;
  double last_bound = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (!(times[j] > 0.0)) throw std::invalid_argument("apply_semigroup_table: t must be positive");
    if (f.constant()) {
      out.col(j).setConstant(f(points.col(0)));
      continue;
    }
    if (mc) {
      parallel_for(m, [&](std::size_t i) {
        const std::uint64_t seed = splitmix64(quad.seed ^ splitmix64(j * 0x100000001ull + i));
        out(i, j) = apply_semigroup_mc(spec, f, points.col(i), times[j], quad.mc_samples, seed).value;
      });
      continue;
    }
    CovarianceState st;
    try {
      st = covariance(spec, times[j]);
    } catch (const NumericalError&) {
      // e^{tB} overflowed; acceptable only once the kernel peak times sup|f|·|box| is already negligible.
      if (f.support() && std::isfinite(f.sup_abs()) && last_bound < 1e-100) {
        out.col(j).setZero();
        continue;
      }
      throw;
    }
    if (f.support() && std::isfinite(f.sup_abs()))
      last_bound = f.sup_abs() * f.support()->volume() *
                   std::exp(-0.5 * st.log_det_tK - 0.5 * spec.dim * std::log(4.0 * std::numbers::pi));
    const int order = use_box(f) ? 0 : resolve_gh_order(quad, spec.dim);
    parallel_for(m, [&](std::size_t i) {
      const Vector mean = st.exp_tB * points.col(i);
      double acc = 0.0;
      if (order == 0)
        box_rule(mean, st.factor_L, *f.support(), quad.box, [&](const double* y, double w) { acc += w * f(y); });
      else
        acc = gauss_hermite_expectation(mean, st.factor_L, order, [&](const double* y) { return f(y); });
      out(i, j) = acc;
    });
  }
  return out;
}

McEstimate apply_semigroup_mc(const OperatorSpec& spec, const TestFunction& f, const Vector& X, double t,
                              std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("apply_semigroup_mc: need at least two samples");
  const CovarianceState st = covariance(spec, t);
  const Vector mean = st.exp_tB * X;
  const std::size_t shards = (samples + kShardSize - 1) / kShardSize;
  std::vector<double> s1(shards), s2(shards);
  parallel_for(shards, [&](std::size_t k) {
    auto rng = shard_rng(seed, k);
    std::normal_distribution<double> normal;
    const std::size_t n = std::min(kShardSize, samples - k * kShardSize);
    Vector z(spec.dim), y(spec.dim);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (int j = 0; j < spec.dim; ++j) z(j) = normal(rng);
      y.noalias() = mean + st.factor_L * z;
      const double v = f(y);
      a += v;
      b += v * v;
    }
    s1[k] = a;
    s2[k] = b;
  });
  double a = 0.0, b = 0.0;
  for (std::size_t k = 0; k < shards; ++k) {
    a += s1[k];
    b += s2[k];
  }
  const double m = a / samples;
  const double var = std::max(0.0, (b / samples - m * m) * samples / (samples - 1.0));
  return McEstimate{m, std::sqrt(var / samples), samples};
}

double apply_semigroup_centered_p(const OperatorSpec& spec, const TestFunction& f, const Vector& X, double t,
                                  double p, const SemigroupQuadrature& quad) {
  if (!(p >= 1.0)) throw std::invalid_argument("apply_semigroup_centered_p: p must be >= 1");
  if (f.constant()) return 0.0;
  const double fx = f(X);
  if (use_box(f) && resolve_mode(quad, spec.dim) == QuadMode::Deterministic) {
    const CovarianceState st = covariance(spec, t);
    const Vector mean = st.exp_tB * X;
    double acc = 0.0, pin = 0.0;
    box_rule(mean, st.factor_L, *f.support(), quad.box, [&](const double* y, double w) {
      acc += w * pow_abs(f(y) - fx, p);
      pin += w;
    });
    return acc + pow_abs(fx, p) * std::max(0.0, 1.0 - pin);
  }
  TestFunction g(spec.dim, [&](const double* y) { return pow_abs(f(y) - fx, p); }, "centered");
  return apply_semigroup(spec, g, X, t, quad);
}

McEstimate adjoint_mass(const OperatorSpec& spec, const Vector& Y, double t, std::size_t n_mc, std::uint64_t seed) {
  if (!(t > 0.0)) throw std::invalid_argument("adjoint_mass: t must be positive");
  if (n_mc < 2) throw std::invalid_argument("adjoint_mass: need at least two samples");
  const int n = spec.dim;
  const CovarianceState st = covariance(spec, t);
  // Proposal N(E⁻¹Y, c·E⁻¹ΣE⁻ᵀ) with Σ = 2tK and c = 2; heavier than the target in every direction.
  constexpr double inflation = 2.0;
  const Eigen::PartialPivLU<Matrix> lu(st.exp_tB);
  const Vector center = lu.solve(Y);
  // E⁻¹ΣE⁻ᵀ is 2∫₀ᵗ e^{-sB}Qe^{-sBᵀ}ds; computed directly it keeps its small directions when
  // e^{tB} grows. When e^{-tB} overflows instead, the two solves are well conditioned.
  Matrix back;
  bool have_back = true;
  try {
    Matrix e;
    gramian(spec.Q, -spec.B, t, e, back);
    back *= 2.0;
  } catch (const NumericalError&) {
    have_back = false;
    back = lu.solve(lu.solve(2.0 * st.tK_t).transpose());
  }
  const Matrix g = lower_factor(back);
  const Matrix prop_factor = std::sqrt(inflation) * g;
  double log_det_prop = 0.0;
  for (int i = 0; i < n; ++i) log_det_prop += std::log(prop_factor(i, i));
  // For large e^{tB}, Y - e^{tB}X cancels; the same density is then evaluated as
  // |det E|⁻¹ N(X; E⁻¹Y, GGᵀ) with GGᵀ = E⁻¹ΣE⁻ᵀ.
  const double cond = max_abs(st.exp_tB) * max_abs(lu.inverse());
  const bool transformed = have_back && cond > 1e6;
  double log_det_e = 0.0, log_det_g = 0.0;
  for (int i = 0; i < n; ++i) {
    log_det_e += std::log(std::abs(lu.matrixLU()(i, i)));
    log_det_g += std::log(g(i, i));
  }
  const double log_norm = -0.5 * n * std::log(2.0 * std::numbers::pi);

  const std::size_t shards = (n_mc + kShardSize - 1) / kShardSize;
  std::vector<double> s1(shards), s2(shards);
  parallel_for(shards, [&](std::size_t k) {
    auto rng = shard_rng(seed, k);
    std::normal_distribution<double> normal;
    const std::size_t m = std::min(kShardSize, n_mc - k * kShardSize);
    Vector z(n), x(n);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) z(j) = normal(rng);
      x.noalias() = center + prop_factor * z;
      const double q = std::exp(log_norm - log_det_prop - 0.5 * z.squaredNorm());
      double p;
      if (transformed) {
        const Vector u = g.triangularView<Eigen::Lower>().solve(center - x);
        p = std::exp(log_norm - log_det_e - log_det_g - 0.5 * u.squaredNorm());
      } else {
        p = kernel_density(st, x, Y);
      }
      const double w = p / q;
      a += w;
      b += w * w;
    }
    s1[k] = a;
    s2[k] = b;
  });
  double a = 0.0, b = 0.0;
  for (std::size_t k = 0; k < shards; ++k) {
    a += s1[k];
    b += s2[k];
  }
  const double mean = a / n_mc;
  const double var = std::max(0.0, (b / n_mc - mean * mean) * n_mc / (n_mc - 1.0));
  return McEstimate{mean, std::sqrt(var / n_mc), n_mc};
}

Vector sde_sample(const OperatorSpec& spec, const Vector& X0, double t, int n_steps, std::mt19937_64& rng) {
  if (n_steps < 1) throw std::invalid_argument("sde_sample: n_steps must be >= 1");
  const int n = spec.dim;
  const double h = t / n_steps;
  const Matrix root = std::sqrt(2.0 * h) * symmetric_sqrt(spec.Q);
  std::normal_distribution<double> normal;
  Vector x = X0, xi(n), drift(n);
  for (int k = 0; k < n_steps; ++k) {
    for (int j = 0; j < n; ++j) xi(j) = normal(rng);
    drift.noalias() = spec.B * x;
    x += h * drift;
    x.noalias() += root * xi;
  }
  return x;
}

Vector sde_sample(const OperatorSpec& spec, const Vector& X0, double t, int n_steps, std::uint64_t seed) {
  auto rng = shard_rng(seed, 0);
  return sde_sample(spec, X0, t, n_steps, rng);
}

SdeMoments sde_moments(const OperatorSpec& spec, const Vector& X0, double t, std::size_t n_paths, int n_steps,
                       std::uint64_t seed) {
  if (n_paths < 2) throw std::invalid_argument("sde_moments: need at least two paths");
  const int n = spec.dim;
  Matrix ends(n, static_cast<Eigen::Index>(n_paths));
  const std::size_t shards = (n_paths + kShardSize - 1) / kShardSize;
  parallel_for(shards, [&](std::size_t k) {
    auto rng = shard_rng(seed, k);
    const std::size_t lo = k * kShardSize, hi = std::min(n_paths, lo + kShardSize);
    for (std::size_t i = lo; i < hi; ++i) ends.col(static_cast<Eigen::Index>(i)) = sde_sample(spec, X0, t, n_steps, rng);
  });
  SdeMoments m;
  m.paths = n_paths;
  const double np = static_cast<double>(n_paths);
  m.mean = ends.rowwise().mean();
  const Matrix d = ends.colwise() - m.mean;
  m.covariance = d * d.transpose() / (np - 1.0);
  m.mean_std_error = (m.covariance.diagonal() / np).cwiseSqrt();
  m.covariance_std_error.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Eigen::ArrayXd prod = d.row(i).array() * d.row(j).array();
      const double var = (prod - prod.mean()).square().sum() / (np - 1.0);
      m.covariance_std_error(i, j) = std::sqrt(var / np);
    }
  return m;
}

double invariant_mean(const OperatorSpec& spec, const TestFunction& f, const SemigroupQuadrature& quad) {
  const Matrix kinf = k_infinity(spec);
  const Matrix L = lower_factor(2.0 * kinf);
  const Vector mean = Vector::Zero(spec.dim);
  if (use_box(f)) {
    double acc = 0.0;
    box_rule(mean, L, *f.support(), quad.box, [&](const double* y, double w) { acc += w * f(y); });
    return acc;
  }
  return gauss_hermite_expectation(mean, L, resolve_gh_order(quad, spec.dim), [&](const double* y) { return f(y); });
}

}  // namespace hormander
