#include "hormander/seminorms.hpp"

#include "hormander/covariance.hpp"
#include "hormander/parallel.hpp"
#include "hormander/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <numbers>
#include <stdexcept>

namespace hormander {

namespace {

struct TensorRule {
  std::vector<double> points;  // M × N, point-major
  std::vector<double> weights;
};

TensorRule tensor(const std::vector<Rule>& rules) {
  const int n = static_cast<int>(rules.size());
  TensorRule out;
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    double w = 1.0;
    for (int k = 0; k < n; ++k) {
      out.points.push_back(rules[k].x[idx[k]]);
      w *= rules[k].w[idx[k]];
    }
    out.weights.push_back(w);
    int k = 0;
    while (k < n && ++idx[k] == rules[k].size()) idx[k++] = 0;
    if (k == n) break;
  }
  return out;
}

Rule composite(double a, double b, int panels, int nodes) {
  Rule r;
  for (int j = 0; j < panels; ++j) r.append(gauss_legendre(nodes, a + (b - a) * j / panels, a + (b - a) * (j + 1) / panels));
  return r;
}

int default_panels(int n) { return n == 1 ? 4 : (n == 2 ? 3 : 2); }
int default_nodes(int n) { return n == 1 ? 16 : (n == 2 ? 14 : 8); }

// ∫_T^∞ e^{-t c} t^{-a-1} dt for c >= 0, a > 0.
double upper_tail(double c, double a, double T) {
  if (c <= 0.0) return std::pow(T, -a) / a;
  if (c * T > 700.0) return 0.0;
  // t = T(1 + u) keeps the integrand O(1).
  const double k = c * T;
  const double rest = integrate_adaptive([&](double u) { return std::exp(-k * u) * std::pow(1.0 + u, -a - 1.0); }, 0.0,
                                         std::numeric_limits<double>::infinity(), 1e-13);
  return std::pow(T, -a) * std::exp(-k) * rest;
}

void check_sp(double s, double p) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("seminorm: s must lie in (0, 1)");
  if (!(p >= 1.0)) throw std::invalid_argument("seminorm: p must be >= 1");
}

}  // namespace

BesovProfile::BesovProfile(const OperatorSpec& spec, const TestFunction& f, double p, const SeminormConfig& cfg)
    : spec_(spec), f_(f), p_(p), cfg_(cfg) {
  if (!(p >= 1.0)) throw std::invalid_argument("seminorm: p must be >= 1");
  if (f.dim() != spec.dim) throw std::invalid_argument("seminorm: dimension mismatch");
  s_min_ = cfg.s_min;
  if (!(s_min_ > 0.0 && s_min_ < 1.0)) throw std::invalid_argument("seminorm: s_min must lie in (0, 1)");
  const SpectralClassification cls = classify_spectrum(spec);
  if (cls.drift_regime == DriftRegime::TraceNegative)
    throw std::invalid_argument("seminorm: tr B < 0 makes the seminorm infinite (adjoint mass grows like e^{-t tr B})");
  trace_b_ = cls.drift_regime == DriftRegime::TraceZero ? 0.0 : cls.trace_B;
  if (cfg_.x_panels == 0) cfg_.x_panels = default_panels(spec.dim);
  if (cfg_.x_nodes_per_panel == 0) cfg_.x_nodes_per_panel = default_nodes(spec.dim);
  mode_ = cfg_.mode == QuadMode::Auto ? (spec.dim <= 4 ? QuadMode::Deterministic : QuadMode::MonteCarlo) : cfg_.mode;

  trivial_ = f.constant() || f.sup_abs() == 0.0;
  if (trivial_) return;
  if (!f.support()) throw std::invalid_argument("seminorm: '" + f.label() + "' needs a support box");
  growth_ = f.indicator() ? 0.5 : 0.5 * p;
  t_max_ = 1e4 / (s_min_ * p);

  // Smooth integrands share one X-rule; indicators get a t-dependent graded rule.
  const Box& box = *f.support();
  std::vector<Rule> rules;
  for (int k = 0; k < spec.dim; ++k)
    rules.push_back(composite(box.lo(k), box.hi(k), cfg_.x_panels, cfg_.x_nodes_per_panel));
  TensorRule tr = tensor(rules);
  x_points_ = std::move(tr.points);
  x_rule_.w = std::move(tr.weights);
  fx_pow_.resize(x_rule_.w.size());
  norm_p_ = 0.0;
  for (std::size_t i = 0; i < fx_pow_.size(); ++i) {
    fx_pow_[i] = pow_abs(f(&x_points_[i * spec.dim]), p);
    norm_p_ += x_rule_.w[i] * fx_pow_[i];
  }
  if (f.indicator()) norm_p_ = box.volume();
  if (mode_ == QuadMode::MonteCarlo) norm_p_ = f.lp_norm_pow(p);

  const int n_near = f.indicator() ? 2 * cfg_.near_nodes : cfg_.near_nodes;
  const Rule near = log_rule(n_near, cfg_.t_cut, 1.0);
  const Rule far = log_rule(cfg_.far_nodes, 1.0, t_max_);
  near_.t = near.x;
  near_.w = near.w;
  far_.t = far.x;
  far_.w = far.w;
  if (cfg_.error_estimate && mode_ == QuadMode::Deterministic) {
    const Rule nh = log_rule(std::max(2, n_near / 2), cfg_.t_cut, 1.0);
    const Rule fh = log_rule(std::max(2, cfg_.far_nodes / 2), 1.0, t_max_);
    near_half_.t = nh.x;
    near_half_.w = nh.w;
    far_half_.t = fh.x;
    far_half_.w = fh.w;
  }

  // Find where the cross term becomes negligible; det(tK) is nondecreasing in t.
  t_star_ = std::numeric_limits<double>::infinity();
  std::vector<double> times = near_.t;
  times.insert(times.end(), far_.t.begin(), far_.t.end());
  times.insert(times.end(), near_half_.t.begin(), near_half_.t.end());
  times.insert(times.end(), far_half_.t.begin(), far_half_.t.end());
  times.push_back(cfg_.t_cut);
  times.push_back(t_max_);
  std::sort(times.begin(), times.end());
  for (double t : times) {
    double log_det;
    try {
      log_det = covariance(spec, t).log_det_tK;
    } catch (const NumericalError&) {
      t_star_ = t;  // only reached when e^{tB} overflows, far past any cutoff
      break;
    }
    if (negligible(t, log_det)) {
      t_star_ = t;
      break;
    }
  }

  fill(near_);
  fill(far_);
  fill(near_half_);
  fill(far_half_);
  double se = 0.0;
  i_cut_ = mode_ == QuadMode::Deterministic ? integrand(cfg_.t_cut) : integrand_mc(cfg_.t_cut, 1u << 30, se);
  const double i_end = mode_ == QuadMode::Deterministic ? integrand(t_max_) : integrand_mc(t_max_, (1u << 30) + 1, se);
  r_end_ = i_end - norm_p_ * (1.0 + std::exp(-t_max_ * trace_b_));
}

BesovProfile BesovProfile::build(const OperatorSpec& spec, const TestFunction& f, double p, double s_min,
                                 SeminormConfig cfg) {
  cfg.s_min = s_min;
  return BesovProfile(spec, f, p, cfg);
}

bool BesovProfile::negligible(double t, double log_det_tK) const {
  (void)t;
  const double sup = f_.sup_abs();
  if (!std::isfinite(sup)) return false;
  const double vol = f_.support()->volume();
  const double log_bound = -0.5 * spec_.dim * std::log(4.0 * std::numbers::pi) - 0.5 * log_det_tK +
                           2.0 * std::log(vol) + std::log(std::pow(2.0, p_) + 2.0) + p_ * std::log(sup);
  return log_bound < std::log(1e-15 * std::max(norm_p_, 1e-300));
}

void BesovProfile::fill(Grid& g) const {
  g.value.assign(g.t.size(), 0.0);
  g.error.assign(g.t.size(), 0.0);
  for (std::size_t i = 0; i < g.t.size(); ++i) {
    if (mode_ == QuadMode::Deterministic) {
      g.value[i] = integrand(g.t[i]);
    } else {
      const std::uint64_t stream = splitmix64(static_cast<std::uint64_t>(std::llround(std::log(g.t[i]) * 1e9)));
      g.value[i] = integrand_mc(g.t[i], stream, g.error[i]);
    }
  }
}

double BesovProfile::integrand(double t) const {
  if (trivial_) return 0.0;
  if (t >= t_star_) return norm_p_ * (1.0 + std::exp(-t * trace_b_));
  if (mode_ == QuadMode::MonteCarlo) {
    double se = 0.0;
    return integrand_mc(t, splitmix64(static_cast<std::uint64_t>(std::llround(std::log(t) * 1e9))), se);
  }
  return integrand_deterministic(t);
}

double BesovProfile::integrand_deterministic(double t) const {
  const int n = spec_.dim;
  const CovarianceState st = covariance(spec_, t);
  const Box& box = *f_.support();
  const double mass = std::exp(-t * trace_b_);

  if (f_.indicator()) {
    // I(t) = |E|(e^{-t tr B} - 1) + 2 ∫_E P(Y ∉ E | X) dX, X-rule graded toward the faces of E
    // at the kernel scale of each coordinate.
    const Matrix cov = st.factor_L * st.factor_L.transpose();
    std::vector<Rule> rules;
    for (int k = 0; k < n; ++k) {
      const double width = box.hi(k) - box.lo(k);
      const double sigma = std::sqrt(cov(k, k));
      const double finest = std::min(0.5 * sigma, width / 16.0);
      rules.push_back(graded_rule(box.lo(k), box.hi(k), 4, 8, finest, 2.0));
    }
    const TensorRule tr = tensor(rules);
    const std::size_t m = tr.weights.size();
    std::vector<double> out(m, 0.0);
    parallel_for(m, [&](std::size_t i) {
      Vector x = Eigen::Map<const Vector>(&tr.points[i * n], n);
      const Vector mean = st.exp_tB * x;
      bool deep = true;
      for (int k = 0; k < n && deep; ++k) {
        const double sig = std::sqrt(cov(k, k));
        deep = std::min(mean(k) - box.lo(k), box.hi(k) - mean(k)) > 9.5 * sig;
      }
      out[i] = deep ? 0.0 : box_exit_probability(mean, st.factor_L, box, cfg_.box);
    });
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += tr.weights[i] * out[i];
    return std::max(0.0, norm_p_ * (mass - 1.0) + 2.0 * acc);
  }

  const std::size_t m = x_rule_.w.size();
  std::vector<double> s1(m), s2(m);
  parallel_for(m, [&](std::size_t i) {
    const double* xp = &x_points_[i * n];
    const Vector x = Eigen::Map<const Vector>(xp, n);
    const Vector mean = st.exp_tB * x;
    const double fx = f_(xp);
    double a = 0.0, b = 0.0, pin = 0.0;
    box_rule(mean, st.factor_L, box, cfg_.box, [&](const double* y, double w) {
      const double fy = f_(y);
      a += w * pow_abs(fy - fx, p_);
      b += w * pow_abs(fy, p_);
      pin += w;
    });
    s1[i] = a + fx_pow_[i] * std::max(0.0, 1.0 - pin);
    s2[i] = b;
  });
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    a += x_rule_.w[i] * s1[i];
    b += x_rule_.w[i] * s2[i];
  }
  return std::max(0.0, a + (mass * norm_p_ - b));
}

double BesovProfile::integrand_mc(double t, std::uint64_t stream, double& std_error) const {
  std_error = 0.0;
  if (trivial_) return 0.0;
  const double mass = std::exp(-t * trace_b_);
  if (t >= t_star_) return norm_p_ * (1.0 + mass);
  // I(t) = ‖f‖^p (1 + e^{-t tr B}) + |box| E[R(f(X), f(Y))], X uniform on the box, Y ~ p(X, ·, t),
  // with R(a, b) = |a - b|^p - |a|^p - |b|^p (zero whenever either argument is).
  const int n = spec_.dim;
  const CovarianceState st = covariance(spec_, t);
  const Box& box = *f_.support();
  const double vol = box.volume();
  const std::size_t samples = std::max<std::size_t>(cfg_.mc_samples, 2);
  const std::size_t shards = (samples + kShardSize - 1) / kShardSize;
  std::vector<double> s1(shards), s2(shards);
  parallel_for(shards, [&](std::size_t k) {
    auto rng = shard_rng(cfg_.seed ^ stream, k);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t cnt = std::min(kShardSize, samples - k * kShardSize);
    Vector x(n), z(n), y(n);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < cnt; ++i) {
      for (int j = 0; j < n; ++j) x(j) = box.lo(j) + (box.hi(j) - box.lo(j)) * unif(rng);
      for (int j = 0; j < n; ++j) z(j) = normal(rng);
      y.noalias() = st.exp_tB * x + st.factor_L * z;
      const double fx = f_(x), fy = f_(y);
      const double r = vol * (pow_abs(fx - fy, p_) - pow_abs(fx, p_) - pow_abs(fy, p_));
      a += r;
      b += r * r;
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
  std_error = std::sqrt(var / samples);
  return std::max(0.0, norm_p_ * (1.0 + mass) + mean);
}

BesovProfile::Parts BesovProfile::integrate(double s, const Grid& near, const Grid& far) const {
  const double a = 0.5 * s * p_;
  Parts out{0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < near.t.size(); ++i) {
    const double w = near.w[i] * std::pow(near.t[i], -a - 1.0);
    out.near += w * near.value[i];
    out.near_var += w * w * near.error[i] * near.error[i];
  }
  out.near += i_cut_ * std::pow(cfg_.t_cut, -a) / (growth_ - a);
  for (std::size_t i = 0; i < far.t.size(); ++i) {
    const double w = far.w[i] * std::pow(far.t[i], -a - 1.0);
    out.far += w * far.value[i];
    out.far_var += w * w * far.error[i] * far.error[i];
  }
  // Beyond T: the mass terms exactly, the cross term decaying at least like t^{-1/2}.
  out.far += norm_p_ * (std::pow(t_max_, -a) / a + upper_tail(trace_b_, a, t_max_));
  out.far += r_end_ * std::pow(t_max_, -a) / (a + 0.5);
  return out;
}

SeminormEstimate BesovProfile::evaluate(double s) const {
  check_sp(s, p_);
  SeminormEstimate est;
  est.config = cfg_;
  est.s = s;
  est.p = p_;
  if (trivial_) return est;
  if (s < s_min_ * (1.0 - 1e-12))
    throw std::invalid_argument("BesovProfile: s below the s_min the far grid was built for");
  if (!(growth_ > 0.5 * s * p_)) throw std::invalid_argument("BesovProfile: near-zero model not integrable");
  const Parts full = integrate(s, near_, far_);
  est.near_part = full.near;
  est.far_part = full.far;
  est.value_p = full.near + full.far;
  if (mode_ == QuadMode::MonteCarlo) {
    est.std_error = std::sqrt(full.near_var + full.far_var);
  } else if (!near_half_.t.empty()) {
    const Parts half = integrate(s, near_half_, far_half_);
    const double a = 0.5 * s * p_;
    est.std_error = std::abs(half.near + half.far - est.value_p) + std::abs(r_end_ * std::pow(t_max_, -a) / (a + 0.5));
  }
  return est;
}

SeminormEstimate besov_seminorm(const OperatorSpec& spec, const TestFunction& f, double s, double p,
                                const SeminormConfig& cfg) {
  check_sp(s, p);
  SeminormConfig c = cfg;
  if (c.s_min == 0.0 || c.s_min > s) c.s_min = s;
  return BesovProfile(spec, f, p, c).evaluate(s);
}

BesovSplit besov_split(const OperatorSpec& spec, const TestFunction& f, double s, double p, const SeminormConfig& cfg) {
  const SeminormEstimate e = besov_seminorm(spec, f, s, p, cfg);
  return BesovSplit{e.near_part, e.far_part};
}

double far_tail_closed_form(double trB, double s, double p, double fnorm_p) {
  if (trB < 0.0) throw std::invalid_argument("far_tail_closed_form: tr B must be >= 0");
  check_sp(s, p);
  const double a = 0.5 * s * p;
  if (trB == 0.0) return 4.0 / p * fnorm_p;
  const double tail = integrate_adaptive([&](double t) { return std::exp(-trB * t) * std::pow(t, -a - 1.0); }, 1.0,
                                         std::numeric_limits<double>::infinity(), 1e-14);
  return s * fnorm_p * (1.0 / a + tail);
}

double heat_equivalence_constant(int N, double s, double p) {
  if (N < 1) throw std::invalid_argument("heat_equivalence_constant: N must be >= 1");
  check_sp(s, p);
  return std::pow(2.0, s * p) * std::tgamma(0.5 * (N + s * p)) / std::pow(std::numbers::pi, 0.5 * N);
}

namespace {

// For f = 1_E with E the support box: [f]^p = 2∫_E ∫_{S^{N-1}} r_out(x, θ)^{-sp}/(sp) dθ dx, with
// r_out the exit distance of the ray from x. The x-rules grade toward the faces, where the
// integrand blows up like d^{-sp}; in N = 2 the circle is split at the corner directions so
// r_out is smooth on every arc.
GagliardoEstimate gagliardo_indicator(const Box& box, double sp, int N, const GagliardoConfig& cfg) {
  if (!(sp < 1.0)) throw std::invalid_argument("gagliardo_seminorm: an indicator has infinite seminorm for s·p >= 1");
  const int nodes = cfg.x_nodes_per_panel ? cfg.x_nodes_per_panel : 8;
  std::vector<Rule> rules;
  for (int k = 0; k < N; ++k) {
    const double w = box.hi(k) - box.lo(k);
    rules.push_back(graded_rule(box.lo(k), box.hi(k), nodes, 4, 1e-10 * w, 2.0));
  }
  const TensorRule xr = tensor(rules);
  const double r0 = cfg.r0;
  const Rule& arc = gauss_legendre(16);
  // Contribution of one ray, split at r0.
  auto ray = [&](double r_out, double& near, double& far) {
    if (r_out < r0) {
      near += (std::pow(r_out, -sp) - std::pow(r0, -sp)) / sp;
      far += std::pow(r0, -sp) / sp;
    } else {
      far += std::pow(r_out, -sp) / sp;
    }
  };
  std::vector<double> near_acc(xr.weights.size()), far_acc(xr.weights.size());
  parallel_for(xr.weights.size(), [&](std::size_t i) {
    const double* x = &xr.points[i * N];
    double near = 0.0, far = 0.0;
    if (N == 1) {
      ray(box.hi(0) - x[0], near, far);
      ray(x[0] - box.lo(0), near, far);
    } else {
      std::array<double, 5> cut;
      for (int c = 0; c < 4; ++c) {
        const double cx = (c & 1) ? box.hi(0) : box.lo(0), cy = (c & 2) ? box.hi(1) : box.lo(1);
        double a = std::atan2(cy - x[1], cx - x[0]);
        if (a < 0.0) a += 2.0 * std::numbers::pi;
        cut[c] = a;
      }
      std::sort(cut.begin(), cut.begin() + 4);
      cut[4] = cut[0] + 2.0 * std::numbers::pi;
      for (int c = 0; c < 4; ++c) {
        const double half = 0.5 * (cut[c + 1] - cut[c]), mid = 0.5 * (cut[c + 1] + cut[c]);
        for (std::size_t j = 0; j < arc.size(); ++j) {
          const double th = mid + half * arc.x[j];
          const double w[2] = {std::cos(th), std::sin(th)};
          double r_out = std::numeric_limits<double>::infinity();
          for (int k = 0; k < 2; ++k) {
            if (w[k] > 0.0) r_out = std::min(r_out, (box.hi(k) - x[k]) / w[k]);
            if (w[k] < 0.0) r_out = std::min(r_out, (box.lo(k) - x[k]) / w[k]);
          }
          double n1 = 0.0, f1 = 0.0;
          ray(r_out, n1, f1);
          near += half * arc.w[j] * n1;
          far += half * arc.w[j] * f1;
        }
      }
    }
    near_acc[i] = 2.0 * near;
    far_acc[i] = 2.0 * far;
  });
  GagliardoEstimate est;
  for (std::size_t i = 0; i < xr.weights.size(); ++i) {
    est.near_part += xr.weights[i] * near_acc[i];
    est.far_part += xr.weights[i] * far_acc[i];
  }
  est.value_p = est.near_part + est.far_part;
  return est;
}

}  // namespace

GagliardoEstimate gagliardo_seminorm(const TestFunction& f, double s, double p, int N, const GagliardoConfig& cfg) {
  check_sp(s, p);
  if (f.dim() != N) throw std::invalid_argument("gagliardo_seminorm: dimension mismatch");
  if (N < 1 || N > 2) throw std::invalid_argument("gagliardo_seminorm: only N = 1 and N = 2 are supported");
  GagliardoEstimate est;
  if (f.constant() || f.sup_abs() == 0.0) return est;
  if (!f.support()) throw std::invalid_argument("gagliardo_seminorm: f needs a support box");
  const Box& box = *f.support();
  if (f.indicator()) return gagliardo_indicator(box, s * p, N, cfg);
  const int panels = cfg.x_panels ? cfg.x_panels : (N == 1 ? 6 : 3);
  const int nodes = cfg.x_nodes_per_panel ? cfg.x_nodes_per_panel : (N == 1 ? 16 : 14);
  const double r0 = cfg.r0;
  const double sp = s * p;

  std::vector<double> dir, dir_w;  // unit vectors, point-major
  if (N == 1) {
    dir = {1.0, -1.0};
    dir_w = {1.0, 1.0};
  } else {
    for (int j = 0; j < cfg.angle_nodes; ++j) {
      const double th = 2.0 * std::numbers::pi * j / cfg.angle_nodes;
      dir.push_back(std::cos(th));
      dir.push_back(std::sin(th));
      dir_w.push_back(2.0 * std::numbers::pi / cfg.angle_nodes);
    }
  }
  const std::size_t nd = dir_w.size();

  std::vector<Rule> near_rules, far_rules;
  for (int k = 0; k < N; ++k) {
    const int extra = std::max(1, static_cast<int>(std::ceil(r0 / ((box.hi(k) - box.lo(k)) / panels))));
    near_rules.push_back(composite(box.lo(k) - r0, box.hi(k) + r0, panels + 2 * extra, nodes));
    far_rules.push_back(composite(box.lo(k), box.hi(k), panels, nodes));
  }
  const TensorRule xn = tensor(near_rules), xf = tensor(far_rules);
  const double r_min = r0 * cfg.r_min_ratio;
  const Rule rn = log_rule(cfg.r_nodes, r_min, r0);
  const double diam = (box.hi - box.lo).norm();
  const Rule rf = diam > r0 ? log_rule(cfg.r_nodes, r0, diam) : Rule{};

  std::vector<double> near_acc(xn.weights.size()), far_acc(xf.weights.size());
  parallel_for(xn.weights.size(), [&](std::size_t i) {
    const double* x = &xn.points[i * N];
    const double fx = f(x);
    double y[2];
    double acc = 0.0;
    for (std::size_t d = 0; d < nd; ++d) {
      const double* w = &dir[d * N];
      double inner = 0.0;
      for (std::size_t j = 0; j < rn.size(); ++j) {
        for (int k = 0; k < N; ++k) y[k] = x[k] + rn.x[j] * w[k];
        inner += rn.w[j] * pow_abs(f(y) - fx, p) * std::pow(rn.x[j], -1.0 - sp);
      }
      for (int k = 0; k < N; ++k) y[k] = x[k] + r_min * w[k];
      inner += pow_abs(f(y) - fx, p) * std::pow(r_min, -sp) / (p - sp);
      acc += dir_w[d] * inner;
    }
    near_acc[i] = acc;
  });
  parallel_for(xf.weights.size(), [&](std::size_t i) {
    const double* x = &xf.points[i * N];
    const double fx = f(x);
    const double ax = pow_abs(fx, p);
    double y[2];
    double acc = 0.0;
    for (std::size_t d = 0; d < nd; ++d) {
      const double* w = &dir[d * N];
      double inner = 0.0;
      for (std::size_t j = 0; j < rf.size(); ++j) {
        for (int k = 0; k < N; ++k) y[k] = x[k] + rf.x[j] * w[k];
        const double fy = f(y);
        inner += rf.w[j] * (pow_abs(fy - fx, p) - ax - pow_abs(fy, p)) * std::pow(rf.x[j], -1.0 - sp);
      }
      acc += dir_w[d] * inner;
    }
    far_acc[i] = acc;
  });
  for (std::size_t i = 0; i < near_acc.size(); ++i) est.near_part += xn.weights[i] * near_acc[i];
  double cross = 0.0;
  for (std::size_t i = 0; i < far_acc.size(); ++i) cross += xf.weights[i] * far_acc[i];
  est.far_part = 2.0 * f.lp_norm_pow(p) * unit_sphere_measure(N) * std::pow(r0, -sp) / sp + cross;
  est.value_p = est.near_part + est.far_part;
  return est;
}

SeminormEstimate s_perimeter(const OperatorSpec& spec, const TestFunction& E, double s, const SeminormConfig& cfg) {
  if (!(s > 0.0 && s < 0.5)) throw std::invalid_argument("s_perimeter: s must lie in (0, 1/2)");
  if (!E.indicator()) throw std::invalid_argument("s_perimeter: E must be an indicator (see indicator_box)");
  return besov_seminorm(spec, E, 2.0 * s, 1.0, cfg);
}

}  // namespace hormander
