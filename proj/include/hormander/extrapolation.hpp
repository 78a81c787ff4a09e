#pragma once

#include <vector>

namespace hormander {

/// Least-squares line y ≈ intercept + slope·x. intercept_se is the usual OLS standard error
/// scaled by the residual, or propagated from per-point errors when they are given and the
/// fit is exact (two points).
struct AffineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_se = 0.0;
  double residual_rms = 0.0;
};

/// Fit on all points; errors (optional, same length) only enter the propagated uncertainty.
AffineFit affine_fit(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& errors = {});

/// Keep the `count` smallest x before fitting.
AffineFit affine_fit_smallest(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& errors, std::size_t count = 4);

}  // namespace hormander
