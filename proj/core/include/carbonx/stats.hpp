#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace carbonx::stats {

struct CorrelationResult {
  double rho = 0.0;  // product-moment correlation, in [-1, 1]
  double p = 1.0;    // two-sided Student-t significance
  int n = 0;
};

struct OlsFit {
  double b0 = 0.0;  // intercept, units of y
  double b1 = 0.0;  // slope, units of y per x
  double r2 = 0.0;
  int n = 0;
};

// Compensated accumulator; summing in a fixed index order makes every global
// reduction bitwise reproducible regardless of thread count.
class KahanSum {
public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

private:
  double s_ = 0.0;
  double c_ = 0.0;
};

inline bool is_defined(double v) { return !std::isnan(v); }

// Nearest-rank quantile: ascending sort, element at rank ceil(p*n) (1-based).
// Always returns a member of the input multiset.
double quantile_nearest_rank(std::vector<double> values, double p);

// Pearson correlation with two-sided Student-t significance on n-2 dof.
// Zero variance in either argument is a numeric error.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

OlsFit ols(std::span<const double> x, std::span<const double> y);

// Centered moving average of w points. Entries without a full window are NaN.
std::vector<double> moving_average(std::span<const double> series, int w);

// OLS slope of the series against its 0-based index (units per step).
double linear_trend(std::span<const double> series);

// OLS slope together with its standard error, for significance checks on
// recovered rates.
struct TrendFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  int n = 0;
};
TrendFit linear_trend_with_stderr(std::span<const double> series);

double reduce_sum_deterministic(std::span<const double> values);

}  // namespace carbonx::stats
