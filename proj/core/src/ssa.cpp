#include "carbonx/ssa.hpp"

#include <cmath>

#include "carbonx/error.hpp"

namespace carbonx::ssa {

Eigen::MatrixXd embed(std::span<const double> series, int L) {
  const int n = static_cast<int>(series.size());
  if (L < 2 || L > n / 2) fail_data("embed: window must satisfy 2 <= L <= N/2");
  const int k = n - L + 1;
  Eigen::MatrixXd x(L, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < L; ++i) x(i, j) = series[static_cast<std::size_t>(i + j)];
  return x;
}

// Zero-padding factor for the classification periodogram. The raw L-point
// grid is too coarse to separate the harmonic bins from their neighbours
// (and from slow pulse-train harmonics), which lets broadband energy leak
// into the trend/MAC groups.
constexpr int kPeriodogramPad = 4;

double dominant_period(const Eigen::VectorXd& u) {
  const int L = static_cast<int>(u.size());
  if (L < 4) fail_data("dominant_period: vector too short");
  // L_fft-point periodogram of the zero-padded vector, bins k = 0 .. L_fft/2
  const int lfft = kPeriodogramPad * L;
  std::vector<double> cs(static_cast<std::size_t>(lfft)), sn(static_cast<std::size_t>(lfft));
  for (int m = 0; m < lfft; ++m) {
    const double w = 2.0 * M_PI * static_cast<double>(m) / static_cast<double>(lfft);
    cs[static_cast<std::size_t>(m)] = std::cos(w);
    sn[static_cast<std::size_t>(m)] = std::sin(w);
  }
  double best_power = -1.0;
  int best_k = 0;
  for (int k = 0; k <= lfft / 2; ++k) {
    double re = 0.0, im = 0.0;
    for (int i = 0; i < L; ++i) {
      const int m = (k * i) % lfft;
      re += u[i] * cs[static_cast<std::size_t>(m)];
      im += u[i] * sn[static_cast<std::size_t>(m)];
    }
    const double power = re * re + im * im;
    if (power > best_power) {
      best_power = power;
      best_k = k;
    }
  }
  if (best_k == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(lfft) / static_cast<double>(best_k);
}

namespace {

std::vector<Eigentriple> collect_triples(const Eigen::MatrixXd& trajectory,
                                         const Eigen::VectorXd& sigma,
                                         const Eigen::MatrixXd& u_mat,
                                         const Eigen::MatrixXd& v_mat) {
  const int r = static_cast<int>(sigma.size());
  // verify energy closure against the Frobenius norm
  const double fro2 = trajectory.squaredNorm();
  double sum2 = 0.0;
  for (int i = 0; i < r; ++i) sum2 += sigma[i] * sigma[i];
  if (fro2 > 0.0 && std::fabs(sum2 - fro2) > 1e-9 * fro2)
    fail_numeric("decompose: SVD energy closure violated");
  std::vector<Eigentriple> triples;
  triples.reserve(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    Eigentriple t;
    t.sigma = sigma[i];
    t.u = u_mat.col(i);
    t.v = v_mat.col(i);
    t.dominant_period = dominant_period(t.u);
    triples.push_back(std::move(t));
  }
  return triples;
}

}  // namespace

std::vector<Eigentriple> decompose(const Eigen::MatrixXd& trajectory) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(trajectory, Eigen::ComputeThinU | Eigen::ComputeThinV);
  // BDCSVD's deflation can emit NaN vectors on heavily rank-deficient input;
  // retry with the slower but robust Jacobi algorithm.
  if (!svd.matrixU().allFinite() || !svd.matrixV().allFinite()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> jac(trajectory,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (!jac.matrixU().allFinite() || !jac.matrixV().allFinite())
      fail_numeric("decompose: SVD did not converge");
    return collect_triples(trajectory, jac.singularValues(), jac.matrixU(), jac.matrixV());
  }
  return collect_triples(trajectory, svd.singularValues(), svd.matrixU(), svd.matrixV());
}

std::vector<double> hankelize(const Eigen::MatrixXd& m) {
  const int L = static_cast<int>(m.rows());
  const int K = static_cast<int>(m.cols());
  const int n = L + K - 1;
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  std::vector<int> count(static_cast<std::size_t>(n), 0);
  for (int j = 0; j < K; ++j)
    for (int i = 0; i < L; ++i) {
      out[static_cast<std::size_t>(i + j)] += m(i, j);
      ++count[static_cast<std::size_t>(i + j)];
    }
  for (int s = 0; s < n; ++s) out[static_cast<std::size_t>(s)] /= count[static_cast<std::size_t>(s)];
  return out;
}

Decomposition ssa_split(std::span<const double> series, const SsaOptions& opt) {
  const int n = static_cast<int>(series.size());
  const int L = opt.window;
  if (n < 3 * L) fail_data("ssa_split: series too short (need N >= 3L)");
  for (double v : series)
    if (!std::isfinite(v)) fail_data("ssa_split: non-finite value in series");

  const Eigen::MatrixXd x = embed(series, L);
  const auto triples = decompose(x);

  double sigma_max = 0.0;
  for (const auto& t : triples) sigma_max = std::max(sigma_max, t.sigma);
  const double sigma_floor = 1e-14 * sigma_max;

  // A triple is MAC when its argmax lands on the padded-periodogram bin
  // nearest a harmonic frequency and the bin period sits within the
  // tolerance. Comparing raw periods against the tolerance would sweep in
  // wide bands of high-frequency bins (bin spacing in period shrinks like
  // L/k^2), pulling broadband noise out of the anomaly.
  const double lfft = static_cast<double>(kPeriodogramPad * L);
  auto is_mac_period = [&](double period) {
    if (!std::isfinite(period) || period <= 0.0) return false;
    const double k = std::round(lfft / period);
    for (double h : opt.mac_harmonics) {
      const double kh = lfft / h;
      if (kh < 1.0 || kh > lfft / 2.0) continue;
      if (k == std::round(kh) && std::fabs(period - h) <= opt.harmonic_tol) return true;
    }
    return false;
  };

  const int K = static_cast<int>(x.cols());
  Eigen::MatrixXd trend_m = Eigen::MatrixXd::Zero(L, K);
  Eigen::MatrixXd mac_m = Eigen::MatrixXd::Zero(L, K);
  bool any_trend = false, any_mac = false;
  for (const auto& t : triples) {
    if (t.sigma <= sigma_floor) continue;
    if (std::isinf(t.dominant_period) || t.dominant_period >= opt.trend_min_period) {
      trend_m.noalias() += t.sigma * t.u * t.v.transpose();
      any_trend = true;
    } else if (is_mac_period(t.dominant_period)) {
      mac_m.noalias() += t.sigma * t.u * t.v.transpose();
      any_mac = true;
    }
  }

  Decomposition d;
  d.trend = any_trend ? hankelize(trend_m) : std::vector<double>(series.size(), 0.0);
  d.mac = any_mac ? hankelize(mac_m) : std::vector<double>(series.size(), 0.0);
  d.anomaly.resize(series.size());
  for (std::size_t i = 0; i < series.size(); ++i)
    d.anomaly[i] = series[i] - d.trend[i] - d.mac[i];
  return d;
}

}  // namespace carbonx::ssa
