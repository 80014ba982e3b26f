#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "carbonx/error.hpp"
#include "carbonx/ssa.hpp"
#include "carbonx/stats.hpp"
#include "carbonx/synth.hpp"

using namespace carbonx;

namespace {

double corr(const std::vector<double>& a, const std::vector<double>& b) {
  return stats::pearson(a, b).rho;
}

double rms(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("embed builds the Hankel matrix") {
  const std::vector<double> s = {1, 2, 3, 4};
  const auto X = ssa::embed(s, 2);
  CHECK(X.rows() == 2);
  CHECK(X.cols() == 3);
  CHECK(X(0, 0) == 1);
  CHECK(X(0, 1) == 2);
  CHECK(X(0, 2) == 3);
  CHECK(X(1, 0) == 2);
  CHECK(X(1, 1) == 3);
  CHECK(X(1, 2) == 4);
  CHECK_THROWS_AS(ssa::embed(s, 3), Error);  // L > N/2
  CHECK_THROWS_AS(ssa::embed(s, 1), Error);
}

TEST_CASE("hankelize inverts embed") {
  std::vector<double> s(50);
  synth::SplitMix64 rng(7);
  for (auto& x : s) x = rng.normal();
  const auto back = ssa::hankelize(ssa::embed(s, 12));
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    CHECK(back[i] == doctest::Approx(s[i]).epsilon(1e-12));
}

TEST_CASE("decompose satisfies energy closure") {
  std::vector<double> s(240);
  synth::SplitMix64 rng(11);
  for (auto& x : s) x = rng.normal();
  const auto X = ssa::embed(s, 60);
  const auto triples = ssa::decompose(X);
  double energy = 0.0;
  for (const auto& t : triples) energy += t.sigma * t.sigma;
  CHECK(energy == doctest::Approx(X.squaredNorm()).epsilon(1e-11));
  for (std::size_t i = 1; i < triples.size(); ++i)
    CHECK(triples[i].sigma <= triples[i - 1].sigma);
}

TEST_CASE("rank-1 signal yields one dominant triple") {
  // outer-product structure: s[i] = 2^i would blow up, use exp ramp on a sine
  std::vector<double> s(64);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = 3.0 * std::pow(0.97, static_cast<double>(i));
  const auto triples = ssa::decompose(ssa::embed(s, 16));
  REQUIRE(triples.size() >= 2);
  CHECK(triples[1].sigma <= 1e-10 * triples[0].sigma);
}

TEST_CASE("pure sinusoid concentrates in a sigma pair with the right period") {
  const int N = 600, L = 120;
  std::vector<double> s(N);
  for (int i = 0; i < N; ++i)
    s[static_cast<std::size_t>(i)] = std::sin(2.0 * std::numbers::pi * i / 12.0);
  const auto triples = ssa::decompose(ssa::embed(s, L));
  REQUIRE(triples.size() >= 3);
  // leading pair carries essentially all the energy, split near-evenly
  CHECK(triples[0].sigma == doctest::Approx(triples[1].sigma).epsilon(0.05));
  CHECK(triples[2].sigma <= 0.01 * triples[0].sigma);
  CHECK(triples[0].dominant_period == doctest::Approx(12.0).epsilon(0.05));
  CHECK(triples[1].dominant_period == doctest::Approx(12.0).epsilon(0.05));
}

TEST_CASE("dominant_period basics") {
  const int L = 120;
  Eigen::VectorXd flat = Eigen::VectorXd::Ones(L);
  CHECK(std::isinf(ssa::dominant_period(flat)));
  Eigen::VectorXd annual(L);
  for (int i = 0; i < L; ++i) annual(i) = std::cos(2.0 * std::numbers::pi * i / 12.0);
  CHECK(ssa::dominant_period(annual) == doctest::Approx(12.0));
  Eigen::VectorXd semi(L);
  for (int i = 0; i < L; ++i) semi(i) = std::sin(2.0 * std::numbers::pi * i / 6.0);
  CHECK(ssa::dominant_period(semi) == doctest::Approx(6.0));
}

TEST_CASE("split additivity is exact by construction") {
  std::vector<double> s(600);
  synth::SplitMix64 rng(13);
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = 5.0 + 0.01 * static_cast<double>(i) +
           2.0 * std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / 12.0) + rng.normal();
  const auto d = ssa::ssa_split(s);
  double worst = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    worst = std::max(worst, std::fabs(s[i] - d.trend[i] - d.mac[i] - d.anomaly[i]));
  CHECK(worst <= 1e-9);
}

TEST_CASE("constant series is pure trend") {
  const std::vector<double> s(480, 5.0);
  const auto d = ssa::ssa_split(s);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(d.trend[i] == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(std::fabs(d.mac[i]) <= 1e-8);
    CHECK(std::fabs(d.anomaly[i]) <= 1e-8);
  }
}

TEST_CASE("trend and cycle are recovered from a clean composite") {
  const int N = 600;
  std::vector<double> s(N), trend(N), cycle(N);
  for (int i = 0; i < N; ++i) {
    trend[static_cast<std::size_t>(i)] = 10.0 + 0.02 * i;
    cycle[static_cast<std::size_t>(i)] = 3.0 * std::sin(2.0 * std::numbers::pi * i / 12.0);
    s[static_cast<std::size_t>(i)] =
        trend[static_cast<std::size_t>(i)] + cycle[static_cast<std::size_t>(i)];
  }
  const auto d = ssa::ssa_split(s);
  CHECK(corr(d.trend, trend) >= 0.999);
  CHECK(corr(d.mac, cycle) >= 0.999);
  CHECK(rms(d.anomaly) <= 0.05 * rms(cycle));
}

TEST_CASE("white noise stays in the anomaly") {
  // averaged over seeds, most noise energy must land in the residual
  const int N = 360, seeds = 20;
  double ratio_sum = 0.0;
  for (int seed = 0; seed < seeds; ++seed) {
    synth::SplitMix64 rng(static_cast<std::uint64_t>(100 + seed));
    std::vector<double> s(N);
    for (auto& x : s) x = rng.normal();
    const auto d = ssa::ssa_split(s);
    ratio_sum += rms(d.anomaly) / rms(s);
  }
  CHECK(ratio_sum / seeds >= 0.8);
}

TEST_CASE("split is linear in its input") {
  std::vector<double> s(400);
  synth::SplitMix64 rng(19);
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / 12.0) + 0.3 * rng.normal();
  std::vector<double> s3(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) s3[i] = -3.0 * s[i];
  const auto d1 = ssa::ssa_split(s);
  const auto d3 = ssa::ssa_split(s3);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(d3.trend[i] == doctest::Approx(-3.0 * d1.trend[i]).epsilon(1e-8));
    CHECK(d3.mac[i] == doctest::Approx(-3.0 * d1.mac[i]).epsilon(1e-8));
  }
}

TEST_CASE("an isolated spike survives into the anomaly") {
  const int N = 600;
  std::vector<double> s(N);
  for (int i = 0; i < N; ++i)
    s[static_cast<std::size_t>(i)] = std::sin(2.0 * std::numbers::pi * i / 12.0);
  const double A = 10.0;
  s[300] += A;
  const auto d = ssa::ssa_split(s);
  CHECK(std::fabs(d.anomaly[300]) >= 0.5 * A);
}

TEST_CASE("split input validation") {
  std::vector<double> short_series(200, 1.0);  // < 3L for L=120
  CHECK_THROWS_AS(ssa::ssa_split(short_series), Error);
  std::vector<double> with_nan(600, 1.0);
  with_nan[5] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ssa::ssa_split(with_nan), Error);
}
