#include "hormander/test_function.hpp"

#include "hormander/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hormander {

double Box::volume() const { return (hi - lo).prod(); }

bool Box::contains(const double* x) const {
  for (int k = 0; k < dim(); ++k)
    if (x[k] < lo(k) || x[k] > hi(k)) return false;
  return true;
}

Box Box::bounding_union(const Box& other) const { return Box{lo.cwiseMin(other.lo), hi.cwiseMax(other.hi)}; }

TestFunction::TestFunction(int dim, Eval eval, std::string label)
    : dim_(dim), eval_(std::move(eval)), label_(std::move(label)) {
  if (dim < 1) throw std::invalid_argument("TestFunction: dimension must be positive");
}

TestFunction& TestFunction::with_support(Box box, double eps) {
  if (box.dim() != dim_) throw std::invalid_argument("TestFunction: support box dimension mismatch");
  support_ = std::move(box);
  support_eps_ = eps;
  return *this;
}

TestFunction& TestFunction::with_flags(bool nonneg, bool indicator, bool constant, double sup_abs) {
  nonneg_ = nonneg;
  indicator_ = indicator;
  constant_ = constant;
  sup_abs_ = sup_abs;
  return *this;
}

TestFunction& TestFunction::with_norm(std::function<double(double)> lp_pow) {
  lp_pow_ = std::move(lp_pow);
  return *this;
}

double TestFunction::lp_norm_pow(double p) const {
  if (lp_pow_) return lp_pow_(p);
  return lp_norm_pow_quadrature(p);
}

double TestFunction::lp_norm(double p) const { return std::pow(lp_norm_pow(p), 1.0 / p); }

double TestFunction::lp_norm_pow_quadrature(double p, int panels, int nodes) const {
  if (!support_) throw std::logic_error("lp_norm: '" + label_ + "' has no support box");
  if (dim_ > 2) {
    panels = std::min(panels, 4);
    nodes = std::min(nodes, 10);
  }
  std::vector<Rule> rules;
  for (int k = 0; k < dim_; ++k) {
    Rule r;
    const double a = support_->lo(k), b = support_->hi(k);
    for (int j = 0; j < panels; ++j) r.append(gauss_legendre(nodes, a + (b - a) * j / panels, a + (b - a) * (j + 1) / panels));
    rules.push_back(std::move(r));
  }
  std::vector<std::size_t> idx(dim_, 0);
  std::vector<double> x(dim_);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (int k = 0; k < dim_; ++k) {
      x[k] = rules[k].x[idx[k]];
      w *= rules[k].w[idx[k]];
    }
    total += w * std::pow(std::abs(eval_(x.data())), p);
    int k = 0;
    while (k < dim_ && ++idx[k] == rules[k].size()) idx[k++] = 0;
    if (k == dim_) break;
  }
  return total;
}

namespace {

double gaussian_radius(double width) { return width * std::sqrt(2.0 * std::log(1.0 / kGaussianTail)); }

}  // namespace

TestFunction gaussian(int dim, double amplitude, double width, const Vector& center) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian: width must be positive");
  const Vector c = center.size() == 0 ? Vector::Zero(dim) : center;
  if (c.size() != dim) throw std::invalid_argument("gaussian: center dimension mismatch");
  const double inv = 1.0 / (2.0 * width * width);
  TestFunction f(
      dim,
      [=](const double* x) {
        double r2 = 0.0;
        for (int k = 0; k < dim; ++k) r2 += (x[k] - c(k)) * (x[k] - c(k));
        return amplitude * std::exp(-r2 * inv);
      },
      "gaussian");
  const double r = gaussian_radius(width);
  f.with_support(Box{c.array() - r, c.array() + r}, std::abs(amplitude) * kGaussianTail);
  f.with_flags(amplitude >= 0.0, false, amplitude == 0.0, std::abs(amplitude));
  f.with_norm([=](double p) {
    return std::pow(std::abs(amplitude), p) * std::pow(2.0 * std::numbers::pi * width * width / p, 0.5 * dim);
  });
  return f;
}

TestFunction gaussian_mixture(const std::vector<GaussianBump>& bumps, std::string label) {
  if (bumps.empty()) throw std::invalid_argument("gaussian_mixture: no bumps");
  const int dim = static_cast<int>(bumps.front().center.size());
  std::optional<Box> box;
  bool nonneg = true;
  double sup = 0.0;
  for (const auto& b : bumps) {
    if (b.center.size() != dim) throw std::invalid_argument("gaussian_mixture: inconsistent dimensions");
    if (!(b.width > 0.0)) throw std::invalid_argument("gaussian_mixture: width must be positive");
    const double r = gaussian_radius(b.width);
    Box bb{b.center.array() - r, b.center.array() + r};
    box = box ? box->bounding_union(bb) : bb;
    nonneg = nonneg && b.amplitude >= 0.0;
    sup += std::abs(b.amplitude);
  }
  TestFunction f(
      dim,
      [bumps, dim](const double* x) {
        double v = 0.0;
        for (const auto& b : bumps) {
          double r2 = 0.0;
          for (int k = 0; k < dim; ++k) r2 += (x[k] - b.center(k)) * (x[k] - b.center(k));
          v += b.amplitude * std::exp(-r2 / (2.0 * b.width * b.width));
        }
        return v;
      },
      std::move(label));
  f.with_support(*box, sup * kGaussianTail);
  f.with_flags(nonneg, false, sup == 0.0, sup);
  return f;
}

TestFunction indicator_box(const Box& box) {
  if (!((box.hi - box.lo).minCoeff() > 0.0)) throw std::invalid_argument("indicator_box: empty box");
  TestFunction f(box.dim(), [box](const double* x) { return box.contains(x) ? 1.0 : 0.0; }, "indicator");
  f.with_support(box, 0.0);
  f.with_flags(true, true, false, 1.0);
  const double vol = box.volume();
  f.with_norm([vol](double) { return vol; });
  return f;
}

TestFunction constant_function(int dim, double c) {
  TestFunction f(dim, [c](const double*) { return c; }, "constant");
  f.with_flags(c >= 0.0, false, true, std::abs(c));
  if (c == 0.0) {
    f.with_support(Box{Vector::Zero(dim), Vector::Zero(dim)}, 0.0);
    f.with_norm([](double) { return 0.0; });
  }
  return f;
}

TestFunction coordinate(int dim, int k) {
  if (k < 0 || k >= dim) throw std::invalid_argument("coordinate: index out of range");
  return TestFunction(dim, [k](const double* x) { return x[k]; }, "coordinate");
}

TestFunction sum(const TestFunction& f, const TestFunction& g) {
  if (f.dim() != g.dim()) throw std::invalid_argument("sum: dimension mismatch");
  TestFunction h(f.dim(), [f, g](const double* x) { return f(x) + g(x); }, f.label() + "+" + g.label());
  if (f.support() && g.support())
    h.with_support(f.support()->bounding_union(*g.support()), f.support_epsilon() + g.support_epsilon());
  h.with_flags(f.nonneg() && g.nonneg(), false, f.constant() && g.constant(), f.sup_abs() + g.sup_abs());
  return h;
}

TestFunction scaled(double c, const TestFunction& f) {
  TestFunction h(f.dim(), [c, f](const double* x) { return c * f(x); }, "scaled_" + f.label());
  if (f.support()) h.with_support(*f.support(), std::abs(c) * f.support_epsilon());
  h.with_flags(c >= 0.0 ? f.nonneg() : false, false, f.constant(), std::abs(c) * f.sup_abs());
  if (f.support()) h.with_norm([c, f](double p) { return std::pow(std::abs(c), p) * f.lp_norm_pow(p); });
  return h;
}

TestFunction function_catalog(const std::string& label, int dim) {
  if (label == "gaussian") return gaussian(dim);
  if (label == "indicator_interval") {
    if (dim != 1) throw std::invalid_argument("indicator_interval is one-dimensional");
    return indicator_box(Box{Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)});
  }
  if (label == "indicator_square") {
    if (dim != 2) throw std::invalid_argument("indicator_square is two-dimensional");
    return indicator_box(Box{Vector::Constant(2, -0.5), Vector::Constant(2, 0.5)});
  }
  if (label == "constant") return constant_function(dim, 1.0);
  throw std::invalid_argument("function_catalog: unknown function '" + label + "'");
}

}  // namespace hormander
