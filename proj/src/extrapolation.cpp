#include "hormander/extrapolation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hormander {

AffineFit affine_fit(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& errors) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("affine_fit: need at least two (x, y) pairs");
  if (!errors.empty() && errors.size() != n) throw std::invalid_argument("affine_fit: error list length mismatch");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("affine_fit: x values must not all coincide");
  AffineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  fit.residual_rms = std::sqrt(rss / n);
  const double lever = 1.0 / n + mx * mx / sxx;
  if (n > 2) fit.intercept_se = std::sqrt(rss / (n - 2) * lever);
  // Per-point errors through the linear map y ↦ intercept.
  if (!errors.empty()) {
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = 1.0 / n - mx * (x[i] - mx) / sxx;
      var += c * c * errors[i] * errors[i];
    }
    fit.intercept_se = std::hypot(fit.intercept_se, std::sqrt(var));
  }
  return fit;
}

AffineFit affine_fit_smallest(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& errors, std::size_t count) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  idx.resize(std::min(count, idx.size()));
  std::vector<double> xs, ys, es;
  for (std::size_t i : idx) {
    xs.push_back(x[i]);
    ys.push_back(y[i]);
    if (!errors.empty()) es.push_back(errors[i]);
  }
  return affine_fit(xs, ys, es);
}

}  // namespace hormander
