#include "carbonx/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstddef>
#include <limits>

#include "carbonx/error.hpp"

namespace carbonx::stats {

double quantile_nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) fail_data("quantile_nearest_rank: empty input");
  if (!(p > 0.0 && p <= 1.0)) fail_config("quantile_nearest_rank: p must be in (0,1]");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  return values[rank - 1];
}

namespace {

struct Moments {
  double mean_x, mean_y, sxx, syy, sxy;
};

Moments moments(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  KahanSum sx, sy;
  for (std::size_t i = 0; i < n; ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
  }
  const double mx = sx.value() / static_cast<double>(n);
  const double my = sy.value() / static_cast<double>(n);
  KahanSum sxx, syy, sxy;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx.add(dx * dx);
    syy.add(dy * dy);
    sxy.add(dx * dy);
  }
  return {mx, my, sxx.value(), syy.value(), sxy.value()};
}

}  // namespace

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail_data("pearson: length mismatch");
  if (x.size() < 3) fail_data("pearson: need at least 3 samples");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      fail_numeric("pearson: non-finite sample");
  const auto m = moments(x, y);
  if (m.sxx <= 0.0) fail_numeric("pearson: zero variance in x");
  if (m.syy <= 0.0) fail_numeric("pearson: zero variance in y");
  const int n = static_cast<int>(x.size());
  double rho = m.sxy / std::sqrt(m.sxx * m.syy);
  rho = std::clamp(rho, -1.0, 1.0);

  const double one_minus_r2 = (1.0 - rho) * (1.0 + rho);
  double p;
  if (one_minus_r2 <= 0.0) {
    p = 0.0;  // perfectly linear
  } else {
    const double t = std::fabs(rho) * std::sqrt(static_cast<double>(n - 2) / one_minus_r2);
    boost::math::students_t dist(static_cast<double>(n - 2));
    p = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
  }
  return {rho, p, n};
}

OlsFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail_data("ols: length mismatch");
  if (x.size() < 2) fail_data("ols: need at least 2 samples");
  const auto m = moments(x, y);
  if (m.sxx <= 0.0) fail_numeric("ols: zero variance in x");
  const int n = static_cast<int>(x.size());
  const double b1 = m.sxy / m.sxx;
  const double b0 = m.mean_y - b1 * m.mean_x;
  double r2 = 1.0;
  if (m.syy > 0.0) {
    KahanSum ssr;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (b0 + b1 * x[i]);
      ssr.add(r * r);
    }
    r2 = std::clamp(1.0 - ssr.value() / m.syy, 0.0, 1.0);
  }
  return {b0, b1, r2, n};
}

std::vector<double> moving_average(std::span<const double> series, int w) {
  const std::size_t n = series.size();
  if (w < 1) fail_config("moving_average: window must be positive");
  if (static_cast<std::size_t>(w) > n) fail_data("moving_average: window exceeds series length");
  // window around i: [i-left, i+right], left+right+1 = w
  const int left = w / 2;
  const int right = w - 1 - left;
  std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) {
    const long lo = static_cast<long>(i) - left;
    const long hi = static_cast<long>(i) + right;
    if (lo < 0 || hi >= static_cast<long>(n)) continue;
    KahanSum s;
    for (long j = lo; j <= hi; ++j) s.add(series[static_cast<std::size_t>(j)]);
    out[i] = s.value() / static_cast<double>(w);
  }
  return out;
}

double linear_trend(std::span<const double> series) {
  if (series.size() < 2) fail_data("linear_trend: need at least 2 points");
  std::vector<double> t(series.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
  const auto m = moments(t, series);
  return m.sxy / m.sxx;
}

TrendFit linear_trend_with_stderr(std::span<const double> series) {
  if (series.size() < 3) fail_data("linear_trend_with_stderr: need at least 3 points");
  std::vector<double> t(series.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
  const auto fit = ols(t, series);
  KahanSum ssr;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = series[i] - (fit.b0 + fit.b1 * t[i]);
    ssr.add(r * r);
  }
  const auto m = moments(t, series);
  const double n = static_cast<double>(series.size());
  const double se = std::sqrt(ssr.value() / (n - 2.0) / m.sxx);
  return {fit.b1, se, fit.n};
}

double reduce_sum_deterministic(std::span<const double> values) {
  KahanSum s;
  for (double v : values) s.add(v);
  return s.value();
}

}  // namespace carbonx::stats
