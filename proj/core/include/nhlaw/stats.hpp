#pragma once

#include <vector>

namespace nhlaw {

double mean(const std::vector<double>& v);
double median(std::vector<double> v);
/// Linear-interpolation quantile (Hyndman-Fan type 7), q in [0, 1].
double quantile(std::vector<double> v, double q);
inline double p95(const std::vector<double>& v) { return quantile(v, 0.95); }

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

/// Ordinary least squares y = intercept + slope x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);
/// Fit of log y against log x.
LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nhlaw
