#include "hormander/fractional.hpp"

#include "hormander/covariance.hpp"
#include "hormander/parallel.hpp"
#include "hormander/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace hormander {

void FractionalConfig::validate() const {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("FractionalConfig.s: must lie in (0, 1)");
  if (!(t_split > 0.0)) throw std::invalid_argument("FractionalConfig.t_split: must be positive");
  if (!(t_cut > 0.0 && t_cut < t_split)) throw std::invalid_argument("FractionalConfig.t_cut: must lie in (0, t_split)");
  if (near_nodes < 2 || far_nodes < 2) throw std::invalid_argument("FractionalConfig: need at least two nodes per grid");
  if (T_max != 0.0 && !(T_max > t_split)) throw std::invalid_argument("FractionalConfig.T_max: must exceed t_split");
}

double fractional_t_max(const SpectralClassification& cls, double s, double p) {
  const double p_conj = std::isinf(p) ? 1.0 : (p > 1.0 ? p / (p - 1.0) : std::numeric_limits<double>::infinity());
  // Rates the classification already calls zero stay zero; the horizon is capped at 10⁶.
  double rate = cls.drift_regime == DriftRegime::TracePositive ? cls.trace_B : 0.0;
  if (cls.stability_regime == StabilityRegime::MaxReNegative) rate = std::max(rate, 0.5 * std::abs(cls.max_re_lambda));
  if (std::isfinite(p_conj)) rate = std::max(rate, 1.0 / (2.0 * p_conj * s));
  if (!(rate > 0.0)) return 1e3;
  return std::clamp(50.0 / rate, 1e3, 1e6);
}

namespace {

// ∫₀^{t_c} t^{−1−s} D(t) dt with D(t) = a t + b t² through D(t_c) = d1 and D(t_c/2) = d2.
double near_model(double d1, double d2, double tc, double s) {
  const double b = 2.0 * (d1 - 2.0 * d2) / (tc * tc);
  const double a = (d1 - b * tc * tc) / tc;
  return a * std::pow(tc, 1.0 - s) / (1.0 - s) + b * std::pow(tc, 2.0 - s) / (2.0 - s);
}

double prefactor(double s) { return -s / std::tgamma(1.0 - s); }

void check_s(double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("fractional power: s must lie in (0, 1)");
}

struct TGrid {
  std::vector<double> t, w;
};

TGrid make_grid(int n, double a, double b) {
  const Rule r = log_rule(n, a, b);
  return TGrid{r.x, r.w};
}

Rule composite(double a, double b, int panels, int nodes) {
  Rule r;
  for (int j = 0; j < panels; ++j) r.append(gauss_legendre(nodes, a + (b - a) * j / panels, a + (b - a) * (j + 1) / panels));
  return r;
}

PointRule tensor(const std::vector<Rule>& rules) {
  const int n = static_cast<int>(rules.size());
  std::size_t m = 1;
  for (const Rule& r : rules) m *= r.size();
  PointRule out;
  out.points.resize(n, static_cast<Eigen::Index>(m));
  out.weights.resize(m);
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t i = 0; i < m; ++i) {
    double w = 1.0;
    for (int k = 0; k < n; ++k) {
      out.points(k, static_cast<Eigen::Index>(i)) = rules[k].x[idx[k]];
      w *= rules[k].w[idx[k]];
    }
    out.weights[i] = w;
    for (int k = 0; k < n && ++idx[k] == rules[k].size(); ++k) idx[k] = 0;
  }
  return out;
}

int default_panels(int n) { return n == 1 ? 4 : 3; }
int default_nodes(int n) { return n == 1 ? 16 : (n == 2 ? 14 : 6); }

bool sampled_nonneg(const TestFunction& f, const Matrix& points) {
  if (f.nonneg()) return true;
  for (Eigen::Index i = 0; i < points.cols(); ++i)
    if (f(points.col(i)) < 0.0) return false;
  return true;
}

const Box& require_support(const TestFunction& f, const char* who) {
  if (!f.support()) throw std::invalid_argument(std::string(who) + ": f needs a support box");
  return *f.support();
}

double half_width(const Box& b) { return 0.5 * (b.hi - b.lo).maxCoeff(); }

}  // namespace

PointRule expanding_point_rule(const Box& box, double radius, int core_panels, int nodes, double ratio) {
  std::vector<Rule> rules;
  for (int k = 0; k < box.dim(); ++k) {
    const double lo = box.lo(k), hi = box.hi(k), c = 0.5 * (lo + hi);
    Rule r = composite(lo, hi, core_panels, nodes);
    const double h0 = (hi - lo) / core_panels;
    double h = h0, right = hi, left = lo;
    while (right < c + radius) {
      h *= ratio;
      const double next = std::min(right + h, c + radius);
      r.append(gauss_legendre(nodes, right, next));
      right = next;
    }
    h = h0;
    while (left > c - radius) {
      h *= ratio;
      const double next = std::max(left - h, c - radius);
      r.append(gauss_legendre(nodes, next, left));
      left = next;
    }
    rules.push_back(std::move(r));
  }
  return tensor(rules);
}

FractionalProfile::FractionalProfile(const OperatorSpec& spec, const TestFunction& f, Matrix points, double s_max,
                                     const FractionalConfig& cfg, double p)
    : spec_(spec), cfg_(cfg), points_(std::move(points)) {
  cfg_.validate();
  check_s(s_max);
  if (points_.rows() != spec.dim || f.dim() != spec.dim) throw std::invalid_argument("FractionalProfile: dimension mismatch");
  cls_ = classify_spectrum(spec);
  stable_ = cls_.stability_regime == StabilityRegime::MaxReNegative;
  constant_ = f.constant();
  integrable_ = f.support().has_value();
  t_max_ = cfg_.T_max > 0.0 ? cfg_.T_max : fractional_t_max(cls_, s_max, p);
  if (!(t_max_ > cfg_.t_split)) throw std::invalid_argument("FractionalProfile: T_max must exceed t_split");
  if (stable_) m_inf_ = invariant_mean(spec, f, cfg_.semigroup_quad);

  const Eigen::Index m = points_.cols();
  fx_.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) fx_(i) = f(points_.col(i));

  // One ascending table over every node so overflow at large t can be recognized as decay.
  const TGrid near = make_grid(cfg_.near_nodes, cfg_.t_cut, cfg_.t_split);
  const TGrid far = make_grid(cfg_.far_nodes, cfg_.t_split, t_max_);
  TGrid near_h, far_h;
  if (cfg_.error_estimate) {
    near_h = make_grid(std::max(2, cfg_.near_nodes / 2), cfg_.t_cut, cfg_.t_split);
    far_h = make_grid(std::max(2, cfg_.far_nodes / 2), cfg_.t_split, t_max_);
  }
  std::vector<double> times{0.5 * cfg_.t_cut, cfg_.t_cut, 0.25 * t_max_, 0.5 * t_max_, t_max_};
  for (const TGrid* g : std::initializer_list<const TGrid*>{&near, &far, &near_h, &far_h}) times.insert(times.end(), g->t.begin(), g->t.end());
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const Matrix table = apply_semigroup_table(spec, f, points_, times, cfg_.semigroup_quad);
  auto column = [&](double t) {
    return table.col(std::lower_bound(times.begin(), times.end(), t) - times.begin());
  };
  auto fill = [&](Grid& g, const TGrid& tg) {
    g.t = tg.t;
    g.w = tg.w;
    g.pf.resize(m, static_cast<Eigen::Index>(tg.t.size()));
    for (std::size_t j = 0; j < tg.t.size(); ++j) g.pf.col(j) = column(tg.t[j]);
  };
  fill(near_, near);
  fill(far_, far);
  if (cfg_.error_estimate) {
    fill(near_half_, near_h);
    fill(far_half_, far_h);
  }
  p_cut_ = column(cfg_.t_cut);
  p_cut_half_ = column(0.5 * cfg_.t_cut);
  p_end_prev_ = column(0.5 * t_max_);
  p_end_prev2_ = column(0.25 * t_max_);
  p_end_ = column(t_max_);
}

void FractionalProfile::sum(double s, const Grid& near, const Grid& far, Vector& near_out, Vector& far_out,
                            Vector& tail_spread) const {
  const Eigen::Index m = points_.cols();
  const double c = prefactor(s);
  const double tc = cfg_.t_cut, T = t_max_;
  near_out.setZero(m);
  far_out.setZero(m);
  tail_spread.setZero(m);
  for (std::size_t j = 0; j < near.t.size(); ++j)
    near_out += near.w[j] * std::pow(near.t[j], -1.0 - s) * (near.pf.col(j) - fx_);
  for (std::size_t j = 0; j < far.t.size(); ++j)
    far_out += far.w[j] * std::pow(far.t[j], -1.0 - s) * (far.pf.col(j) - fx_);
  const double ts = std::pow(T, -s);
  for (Eigen::Index i = 0; i < m; ++i) {
    near_out(i) += near_model(p_cut_(i) - fx_(i), p_cut_half_(i) - fx_(i), tc, s);
    double tail;
    if (stable_) {
      tail = (m_inf_ - fx_(i)) * ts / s;
      tail_spread(i) = std::abs(p_end_(i) - m_inf_) * ts / s;
    } else {
      // P_t f(X) ≈ P_T f(X)(T/t)^γ beyond T, γ from (T/2, T); for integrable f at least 1/2
      // since V(t) grows at least like √t. The drift of γ from (T/4, T/2) sets the spread.
      const double a0 = p_end_prev2_(i), a = p_end_prev_(i), b = p_end_(i);
      auto exponent = [](double u, double v) {
        return u * v > 0.0 && std::abs(u) > std::abs(v) ? std::log(u / v) / std::numbers::ln2 : 0.0;
      };
      const double raw = exponent(a, b), raw0 = exponent(a0, a);
      const double gamma = std::max(integrable_ ? 0.5 : 0.0, raw);
      tail = b * ts / (s + gamma) - fx_(i) * ts / s;
      tail_spread(i) = std::abs(b) * ts *
                       (std::abs(1.0 / (s + gamma) - 1.0 / (s + std::max(raw, 0.0))) +
                        std::abs(1.0 / (s + std::max(raw, 0.0)) - 1.0 / (s + std::max(raw0, 0.0))));
    }
    far_out(i) += tail;
  }
  near_out *= c;
  far_out *= c;
  tail_spread *= std::abs(c);
}

std::vector<FractionalEstimate> FractionalProfile::evaluate(double s) const {
  check_s(s);
  if (constant_) return std::vector<FractionalEstimate>(points_.cols());
  Vector near, far, spread;
  sum(s, near_, far_, near, far, spread);
  Vector err = spread;
  if (!near_half_.t.empty()) {
    Vector nh, fh, sh;
    sum(s, near_half_, far_half_, nh, fh, sh);
    err += ((nh + fh) - (near + far)).cwiseAbs();
  }
  std::vector<FractionalEstimate> out(points_.cols());
  for (Eigen::Index i = 0; i < points_.cols(); ++i) out[i] = FractionalEstimate{near(i) + far(i), near(i), far(i), err(i)};
  return out;
}

Vector FractionalProfile::values(double s) const {
  const auto est = evaluate(s);
  Vector v(static_cast<Eigen::Index>(est.size()));
  for (std::size_t i = 0; i < est.size(); ++i) v(i) = est[i].value;
  return v;
}

FractionalEstimate fractional_power_estimate(const OperatorSpec& spec, const TestFunction& f, const Vector& X,
                                             const FractionalConfig& cfg) {
  if (X.size() != spec.dim) throw std::invalid_argument("fractional_power: X has the wrong dimension");
  Matrix pts = X;
  return FractionalProfile(spec, f, pts, cfg.s, cfg).evaluate(cfg.s).front();
}

double fractional_power(const OperatorSpec& spec, const TestFunction& f, const Vector& X, const FractionalConfig& cfg) {
  return fractional_power_estimate(spec, f, X, cfg).value;
}

double balakrishnan_weight_check(double s, const FractionalConfig& cfg) {
  check_s(s);
  cfg.validate();
  const double T = cfg.T_max > 0.0 ? cfg.T_max : 1e3;
  const TGrid near = make_grid(cfg.near_nodes, cfg.t_cut, cfg.t_split);
  const TGrid far = make_grid(cfg.far_nodes, cfg.t_split, T);
  double acc = 0.0;
  for (std::size_t j = 0; j < near.t.size(); ++j) acc += near.w[j] * std::pow(near.t[j], -1.0 - s) * -std::expm1(-near.t[j]);
  for (std::size_t j = 0; j < far.t.size(); ++j) acc += far.w[j] * std::pow(far.t[j], -1.0 - s) * -std::expm1(-far.t[j]);
  acc += near_model(-std::expm1(-cfg.t_cut), -std::expm1(-0.5 * cfg.t_cut), cfg.t_cut, s);
  acc += std::pow(T, -s) / s;
  return s / std::tgamma(1.0 - s) * acc;
}

LimitSeries pointwise_limit_sweep(const OperatorSpec& spec, const TestFunction& f, const Vector& X,
                                  const std::vector<double>& s_list, const FractionalConfig& cfg) {
  if (s_list.size() < 2) throw std::invalid_argument("pointwise_limit_sweep: need at least two s values");
  for (std::size_t i = 0; i < s_list.size(); ++i) {
    check_s(s_list[i]);
    if (i > 0 && !(s_list[i] < s_list[i - 1]))
      throw std::invalid_argument("pointwise_limit_sweep: s_list must be strictly decreasing");
  }
  if (X.size() != spec.dim) throw std::invalid_argument("pointwise_limit_sweep: X has the wrong dimension");
  Matrix pts = X;
  const FractionalProfile prof(spec, f, pts, s_list.front(), cfg);
  LimitSeries out;
  for (double s : s_list) {
    const FractionalEstimate e = prof.evaluate(s).front();
    out.x.push_back(s);
    out.value.push_back(e.value);
    out.error.push_back(e.error);
  }
  out.fit = affine_fit_smallest(out.x, out.value, out.error, 4);
  out.limit = out.fit.intercept;
  out.limit_error = out.fit.intercept_se;
  return out;
}

namespace {

struct NormContext {
  PointRule rule;
  bool identity = false;  // p = 1, f >= 0: integrate over the support box only
  double trace_b = 0.0;
};

NormContext norm_context(const OperatorSpec& spec, const TestFunction& f, double p) {
  const Box& box = require_support(f, "fractional norm");
  const int n = spec.dim;
  NormContext ctx;
  ctx.trace_b = std::max(classify_spectrum(spec).trace_B, 0.0);
  if (p == 1.0) {
    PointRule r = expanding_point_rule(box, 0.0, default_panels(n), default_nodes(n));
    if (!sampled_nonneg(f, r.points))
      throw std::invalid_argument("fractional L1 norm: f must be nonnegative");
    if (classify_spectrum(spec).drift_regime == DriftRegime::TraceNegative)
      throw std::invalid_argument("fractional L1 norm: requires tr B >= 0");
    ctx.rule = std::move(r);
    ctx.identity = true;
    return ctx;
  }
  const double radius = std::max(4.0 * half_width(box), 60.0);
  ctx.rule = expanding_point_rule(box, radius, default_panels(n), n == 1 ? 16 : 8);
  return ctx;
}

double lp_sum(const PointRule& r, const Vector& v, double p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < r.weights.size(); ++i) acc += r.weights[i] * pow_abs(v(i), p);
  return std::pow(acc, 1.0 / p);
}

}  // namespace

NormSweep fractional_norm_sweep(const OperatorSpec& spec, const TestFunction& f, const std::vector<double>& s_list,
                                double p, const FractionalConfig& cfg) {
  if (!(p >= 1.0)) throw std::invalid_argument("fractional norm: p must be >= 1");
  if (s_list.empty()) throw std::invalid_argument("fractional norm: empty s list");
  for (double s : s_list) check_s(s);
  NormSweep out;
  out.s = s_list;
  if (f.constant() && f.sup_abs() == 0.0) {
    out.norm.assign(s_list.size(), NormEstimate{});
    out.difference.assign(s_list.size(), NormEstimate{});
    return out;
  }
  NormContext ctx = norm_context(spec, f, p);
  FractionalConfig c = cfg;
  const double s_max = *std::max_element(s_list.begin(), s_list.end());
  if (!ctx.identity && c.T_max == 0.0) {
    const double r = std::max(4.0 * half_width(*f.support()), 60.0);
    c.T_max = std::max(fractional_t_max(classify_spectrum(spec), s_max, p), 4.0 * r * r);
  }
  const FractionalProfile prof(spec, f, ctx.rule.points, s_max, c, p);
  const Vector& fx = prof.f_values();
  const auto& w = ctx.rule.weights;
  double f_l1 = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) f_l1 += w[i] * fx(i);

  for (double s : s_list) {
    const auto est = prof.evaluate(s);
    const Eigen::Index m = static_cast<Eigen::Index>(est.size());
    Vector g(m), e(m), nr(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      g(i) = est[i].value;
      e(i) = est[i].error;
      nr(i) = est[i].near;
    }
    NormEstimate norm, diff;
    if (ctx.identity) {
      const double shift = std::pow(ctx.trace_b, s) * f_l1;
      double a = 0.0, b = 0.0, err = 0.0, nn = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        a += w[i] * std::max(g(i), 0.0);
        b += w[i] * (std::abs(g(i) - fx(i)) + g(i));
        err += w[i] * e(i);
        nn += w[i] * std::abs(nr(i));
      }
      norm = NormEstimate{2.0 * a - shift, 2.0 * err, nn};
      diff = NormEstimate{b - shift, 2.0 * err, nn};
    } else {
      const double nn = lp_sum(ctx.rule, nr, p);
      norm = NormEstimate{lp_sum(ctx.rule, g, p), lp_sum(ctx.rule, e, p), nn};
      diff = NormEstimate{lp_sum(ctx.rule, g - fx, p), lp_sum(ctx.rule, e, p), nn};
    }
    out.norm.push_back(norm);
    out.difference.push_back(diff);
  }
  return out;
}

NormEstimate fractional_l1_norm(const OperatorSpec& spec, const TestFunction& f, double s, const FractionalConfig& cfg) {
  return fractional_norm_sweep(spec, f, {s}, 1.0, cfg).norm.front();
}

NormEstimate fractional_lp_norm(const OperatorSpec& spec, const TestFunction& f, double s, double p,
                                const FractionalConfig& cfg) {
  return fractional_norm_sweep(spec, f, {s}, p, cfg).norm.front();
}

NormEstimate lp_limit_error(const OperatorSpec& spec, const TestFunction& f, double s, double p,
                            const FractionalConfig& cfg) {
  if (p == 1.0 && classify_spectrum(spec).drift_regime != DriftRegime::TracePositive)
    throw std::invalid_argument(
        "lp_limit_error: p = 1 needs tr B > 0; for tr B = 0 the L1 limit of (-A)^s f does not exist "
        "(the norm tends to 2||f||_1)");
  return fractional_norm_sweep(spec, f, {s}, p, cfg).difference.front();
}

namespace {

Vector resolvent_table(const OperatorSpec& spec, const TestFunction& f, const Matrix& points, double lambda, int nodes,
                       const SemigroupQuadrature& quad) {
  constexpr double t0 = 1e-9;
  const double T = 50.0 / lambda;
  TGrid g = make_grid(nodes / 2, t0, std::min(1.0, T));
  if (T > 1.0) {
    const TGrid far = make_grid(nodes, 1.0, T);
    g.t.insert(g.t.end(), far.t.begin(), far.t.end());
    g.w.insert(g.w.end(), far.w.begin(), far.w.end());
  }
  const Matrix pf = apply_semigroup_table(spec, f, points, g.t, quad);
  Vector out(points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) out(i) = f(points.col(i)) * t0;
  for (std::size_t j = 0; j < g.t.size(); ++j) out += g.w[j] * std::exp(-lambda * g.t[j]) * pf.col(j);
  return out;
}

}  // namespace

double resolvent_apply(const OperatorSpec& spec, const TestFunction& f, const Vector& X, double lambda,
                       const FractionalConfig& cfg) {
  if (!(lambda > 0.0)) throw std::invalid_argument("resolvent_apply: lambda must be positive");
  if (X.size() != spec.dim) throw std::invalid_argument("resolvent_apply: X has the wrong dimension");
  if (f.constant()) return f(X) / lambda;  // P_t c = c
  Matrix pts = X;
  return resolvent_table(spec, f, pts, lambda, 96, cfg.semigroup_quad)(0);
}

namespace {

// Y ~ f/‖f‖₁ by rejection from the support box.
Vector sample_density(const TestFunction& f, const Box& box, double sup, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector y(box.dim());
  for (;;) {
    for (int k = 0; k < box.dim(); ++k) y(k) = box.lo(k) + (box.hi(k) - box.lo(k)) * u(rng);
    if (u(rng) * sup <= f(y)) return y;
  }
}

McEstimate resolvent_l1_mc(const OperatorSpec& spec, const TestFunction& f, double lambda, const ResolventConfig& cfg) {
  const Box& box = require_support(f, "balakrishnan_condition");
  double sup = f.sup_abs();
  if (!std::isfinite(sup)) {
    const PointRule r = expanding_point_rule(box, 0.0, 8, 8);
    sup = 0.0;
    for (Eigen::Index i = 0; i < r.points.cols(); ++i) sup = std::max(sup, f(r.points.col(i)));
    sup *= 1.1;
  }
  const double norm1 = f.lp_norm_pow(1.0);
  const int n = spec.dim;
  const std::size_t samples = cfg.mc_samples;
  const std::size_t shards = (samples + kShardSize - 1) / kShardSize;
  std::vector<double> s1(shards), s2(shards);
  parallel_for(shards, [&](std::size_t k) {
    auto rng = shard_rng(cfg.seed, k);
    std::normal_distribution<double> normal;
    std::exponential_distribution<double> expo(lambda);
    const std::size_t cnt = std::min(kShardSize, samples - k * kShardSize);
    Vector z(n), x(n);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < cnt; ++i) {
      const double t = std::max(expo(rng), 1e-12);
      const Vector y = sample_density(f, box, sup, rng);
      const CovarianceState st = covariance(spec, t);
      // X ~ N(e^{-tB}Y, 2 e^{-tB}(2tK)e^{-tBᵀ}): the target kernel in X is a Gaussian with half this covariance.
      const Eigen::PartialPivLU<Matrix> lu(st.exp_tB);
      const Vector center = lu.solve(y);
      const Matrix pf = lower_factor(2.0 * lu.solve(lu.solve(2.0 * st.tK_t).transpose()));
      double log_det = 0.0;
      for (int j = 0; j < n; ++j) log_det += std::log(pf(j, j));
      for (int j = 0; j < n; ++j) z(j) = normal(rng);
      x.noalias() = center + pf * z;
      const double q = std::exp(-0.5 * n * std::log(2.0 * std::numbers::pi) - log_det - 0.5 * z.squaredNorm());
      const double v = norm1 * kernel_density(st, x, y) / q;
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
  const double mean = a / samples;
  const double var = std::max(0.0, (b / samples - mean * mean) * samples / (samples - 1.0));
  return McEstimate{mean, std::sqrt(var / samples), samples};
}

}  // namespace

LimitSeries balakrishnan_condition(const OperatorSpec& spec, const TestFunction& f, double p,
                                   const std::vector<double>& lambdas, const ResolventConfig& cfg) {
  if (!(p >= 1.0)) throw std::invalid_argument("balakrishnan_condition: p must be >= 1");
  if (lambdas.empty()) throw std::invalid_argument("balakrishnan_condition: empty lambda list");
  for (double l : lambdas)
    if (!(l > 0.0)) throw std::invalid_argument("balakrishnan_condition: lambda must be positive");
  LimitSeries out;
  if (f.constant()) {
    // λR(λ)c = c pointwise: infinite L^p norm unless c = 0.
    for (double l : lambdas) {
      out.x.push_back(l);
      out.value.push_back(f.sup_abs() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
      out.error.push_back(0.0);
    }
    return out;
  }
  const Box& box = require_support(f, "balakrishnan_condition");
  const bool mc = p == 1.0 && sampled_nonneg(f, expanding_point_rule(box, 0.0, 4, 8).points);
  for (double l : lambdas) {
    out.x.push_back(l);
    if (mc) {
      ResolventConfig c = cfg;
      c.seed = splitmix64(cfg.seed + out.x.size());
      const McEstimate e = resolvent_l1_mc(spec, f, l, c);
      out.value.push_back(e.value);
      out.error.push_back(e.std_error);
      continue;
    }
    const int n = spec.dim;
    const double radius = std::max({4.0 * half_width(box), 60.0, 10.0 / std::sqrt(l)});
    const PointRule r = expanding_point_rule(box, radius, default_panels(n), n == 1 ? 16 : 8, 1.4);
    const Vector v = l * resolvent_table(spec, f, r.points, l, cfg.t_nodes, cfg.base.semigroup_quad);
    out.value.push_back(lp_sum(r, v, p));
    out.error.push_back(0.0);
  }
  if (out.x.size() >= 2) {
    out.fit = affine_fit_smallest(out.x, out.value, out.error, 4);
    out.limit = out.fit.intercept;
    out.limit_error = out.fit.intercept_se;
  }
  return out;
}

double seminorm_lp_bound(double s, double sigma, double p, double n_sigma, double f_norm) {
  check_s(s);
  if (!(p >= 1.0)) throw std::invalid_argument("seminorm_lp_bound: p must be >= 1");
  const double g = std::tgamma(1.0 - s);
  if (p == 1.0) {
    if (!(2.0 * s <= sigma && sigma < 1.0)) throw std::invalid_argument("seminorm_lp_bound: p = 1 needs 2s <= sigma < 1");
    return s / g * n_sigma + 2.0 / g * f_norm;
  }
  if (!(2.0 * s < sigma && sigma < 1.0)) throw std::invalid_argument("seminorm_lp_bound: needs 0 < 2s < sigma < 1");
  const double pc = p / (p - 1.0);
  return s / g * std::pow(2.0 / ((sigma - 2.0 * s) * pc), 1.0 / pc) * n_sigma + 2.0 / g * f_norm;
}

}  // namespace hormander
