#pragma once

#include <Eigen/Dense>
#include <limits>
#include <span>
#include <vector>

namespace carbonx::ssa {

struct Eigentriple {
  double sigma = 0.0;
  Eigen::VectorXd u;              // left singular vector, length L
  Eigen::VectorXd v;              // right singular vector, length K
  double dominant_period = std::numeric_limits<double>::infinity();  // months
};

struct Decomposition {
  std::vector<double> trend;    // periods >= trend_min_period
  std::vector<double> mac;      // 12-month cycle and harmonics
  std::vector<double> anomaly;  // residual; trend + mac + anomaly == input
};

struct SsaOptions {
  int window = 120;                 // embedding window L, months
  double trend_min_period = 120.0;  // months
  std::vector<double> mac_harmonics = {12.0, 6.0, 4.0, 3.0, 2.4, 2.0};
  double harmonic_tol = 0.35;       // months
};

// Hankel trajectory matrix, element (i, j) = series[i + j]. Requires
// 2 <= L <= N/2.
Eigen::MatrixXd embed(std::span<const double> series, int L);

// Full SVD of the trajectory matrix, singular values descending, each triple
// annotated with the dominant period of its left vector.
std::vector<Eigentriple> decompose(const Eigen::MatrixXd& trajectory);

// Periodogram argmax of an eigenvector: period = L / k* months for the
// maximal nonzero frequency bin, infinity when the zero bin dominates.
double dominant_period(const Eigen::VectorXd& u);

// Diagonal averaging (Hankelization) of a trajectory-shaped matrix back to a
// series of length L + K - 1.
std::vector<double> hankelize(const Eigen::MatrixXd& m);

// Trend / modulated-annual-cycle / anomaly split of one monthly series.
// Requires N >= 3L and no fill values.
Decomposition ssa_split(std::span<const double> series, const SsaOptions& opt = {});

}  // namespace carbonx::ssa
