#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "carbonx/attribution.hpp"
#include "carbonx/error.hpp"
#include "carbonx/stats.hpp"
#include "carbonx/synth.hpp"

using namespace carbonx;
using attr::Driver;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

extremes::TceEvent event_at(int cell, extremes::Sign sign, std::vector<int> months) {
  extremes::TceEvent e;
  e.cell = cell;
  e.sign = sign;
  e.start_month = months.front();
  e.end_month = months.back();
  e.extreme_months = std::move(months);
  return e;
}

attr::AttributionRecord rec(Driver d, double rho, double p) {
  attr::AttributionRecord r;
  r.driver = d;
  r.lag = 1;
  r.rho = rho;
  r.p = p;
  r.n = 10;
  return r;
}

}  // namespace

TEST_CASE("driver names round-trip") {
  for (Driver d : attr::kDrivers) CHECK(attr::driver_from_name(attr::driver_name(d)) == d);
  CHECK(!attr::driver_from_name("Wind").has_value());
}

TEST_CASE("lagged_driver worked example") {
  const std::vector<double> dri = {0, 1, 2, 3, 4};
  const auto x = attr::lagged_driver(dri, 2);
  REQUIRE(x.size() == 5);
  CHECK(!stats::is_defined(x[0]));
  CHECK(!stats::is_defined(x[1]));
  CHECK(x[2] == 0.5);
  CHECK(x[3] == 1.5);
  CHECK(x[4] == 2.5);
}

TEST_CASE("lag 0 is the identity, bitwise") {
  synth::SplitMix64 rng(41);
  std::vector<double> dri(100);
  for (auto& v : dri) v = rng.normal() * 1e9;
  const auto x = attr::lagged_driver(dri, 0);
  CHECK(x == dri);
}

TEST_CASE("constant series stays constant under any lag") {
  const std::vector<double> dri(20, 3.5);
  for (int lag = 1; lag <= 4; ++lag) {
    const auto x = attr::lagged_driver(dri, lag);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i < static_cast<std::size_t>(lag))
        CHECK(!stats::is_defined(x[i]));
      else
        CHECK(x[i] == 3.5);
    }
  }
  CHECK_THROWS_AS(attr::lagged_driver(dri, 5), Error);
  CHECK_THROWS_AS(attr::lagged_driver(dri, -1), Error);
}

TEST_CASE("cell qualification needs two TCEs of each sign") {
  using extremes::Sign;
  std::vector<extremes::TceEvent> evs;
  evs.push_back(event_at(0, Sign::Negative, {1, 2, 3}));
  CHECK(!attr::cell_qualifies(evs));
  evs.push_back(event_at(0, Sign::Negative, {10, 11, 12}));
  evs.push_back(event_at(0, Sign::Positive, {20, 21, 22}));
  CHECK(!attr::cell_qualifies(evs));
  evs.push_back(event_at(0, Sign::Positive, {30, 31, 32}));
  CHECK(attr::cell_qualifies(evs));
}

TEST_CASE("attribute_cell reproduces the closed-form correlation") {
  // TCE months 1..6 with nbp anomalies [-9,-8,-7,7,8,9]; the lag-1 driver
  // mean at those months must equal [-3,-2.5,-2,2,2.5,3]
  std::vector<double> nbp(10, 0.0);
  std::vector<double> sm(10, 0.0);
  const std::vector<double> nbp_vals = {-9, -8, -7, 7, 8, 9};
  const std::vector<double> sm_lagged = {-3, -2.5, -2, 2, 2.5, 3};
  for (int i = 0; i < 6; ++i) {
    nbp[static_cast<std::size_t>(i + 1)] = nbp_vals[static_cast<std::size_t>(i)];
    sm[static_cast<std::size_t>(i)] = sm_lagged[static_cast<std::size_t>(i)];  // value at t-1
  }
  std::vector<extremes::TceEvent> evs;
  evs.push_back(event_at(0, extremes::Sign::Negative, {1, 2, 3}));
  evs.push_back(event_at(0, extremes::Sign::Negative, {1, 2, 3}));
  evs.push_back(event_at(0, extremes::Sign::Positive, {4, 5, 6}));
  evs.push_back(event_at(0, extremes::Sign::Positive, {4, 5, 6}));

  const auto r = attr::attribute_cell(nbp, evs, sm, Driver::SM, 1);
  REQUIRE(r.has_value());
  // independent oracle: direct Pearson on the worked values
  const auto want = stats::pearson(sm_lagged, nbp_vals);
  CHECK(r->rho == doctest::Approx(want.rho).epsilon(1e-12));
  // closed form: 122 / sqrt(38.5 * 388)
  CHECK(r->rho == doctest::Approx(122.0 / std::sqrt(38.5 * 388.0)).epsilon(1e-12));
  CHECK(r->p < 0.01);
  CHECK(r->lag == 1);
  CHECK(r->driver == Driver::SM);
}

TEST_CASE("attribute_cell drops degenerate drivers and thin samples") {
  std::vector<double> nbp(10);
  for (std::size_t i = 0; i < nbp.size(); ++i) nbp[i] = static_cast<double>(i);
  std::vector<extremes::TceEvent> evs;
  evs.push_back(event_at(0, extremes::Sign::Negative, {2, 3, 4}));
  evs.push_back(event_at(0, extremes::Sign::Positive, {6, 7, 8}));
  const std::vector<double> flat(10, 1.0);
  CHECK(!attr::attribute_cell(nbp, evs, flat, Driver::TAS, 0).has_value());

  // lag-4 leaves months 2,3 undefined; months 4,6,7,8 remain -> still >= 3
  std::vector<double> dri(10);
  synth::SplitMix64 rng(1);
  for (auto& v : dri) v = rng.normal();
  const auto r = attr::attribute_cell(nbp, evs, dri, Driver::Prcp, 4);
  if (r) CHECK(r->n == 4);

  // only two usable months -> dropped
  std::vector<extremes::TceEvent> thin;
  thin.push_back(event_at(0, extremes::Sign::Negative, {0, 1}));
  thin.push_back(event_at(0, extremes::Sign::Positive, {2, 3}));
  CHECK(!attr::attribute_cell(nbp, thin, dri, Driver::Prcp, 2).has_value());
}

TEST_CASE("eq-1 and eq-2 agree at lag 0") {
  synth::SplitMix64 rng(43);
  std::vector<double> nbp(60), dri(60);
  for (std::size_t i = 0; i < nbp.size(); ++i) {
    nbp[i] = rng.normal();
    dri[i] = 0.7 * nbp[i] + 0.3 * rng.normal();
  }
  std::vector<extremes::TceEvent> evs;
  evs.push_back(event_at(0, extremes::Sign::Negative, {5, 6, 7, 8}));
  evs.push_back(event_at(0, extremes::Sign::Negative, {15, 16, 17}));
  evs.push_back(event_at(0, extremes::Sign::Positive, {25, 26, 27}));
  evs.push_back(event_at(0, extremes::Sign::Positive, {40, 41, 42}));
  const auto via_lag = attr::attribute_cell(nbp, evs, dri, Driver::SM, 0);
  REQUIRE(via_lag.has_value());
  // direct Eq. 1 path: raw driver values at the same months
  std::vector<double> xs, ys;
  for (const auto& e : evs)
    for (int m : e.extreme_months) {
      xs.push_back(dri[static_cast<std::size_t>(m)]);
      ys.push_back(nbp[static_cast<std::size_t>(m)]);
    }
  const auto direct = stats::pearson(xs, ys);
  CHECK(via_lag->rho == direct.rho);  // bitwise
  CHECK(via_lag->p == direct.p);
}

TEST_CASE("dominant_driver selection and tie-breaks") {
  {
    const std::vector<attr::AttributionRecord> rs = {rec(Driver::SM, 0.8, 0.01),
                                                     rec(Driver::TAS, -0.6, 0.01)};
    CHECK(attr::dominant_driver(rs) == Driver::SM);
  }
  {
    const std::vector<attr::AttributionRecord> rs = {rec(Driver::SM, 0.5, 0.2),
                                                     rec(Driver::TAS, -0.9, 0.06)};
    CHECK(!attr::dominant_driver(rs).has_value());
  }
  {
    // equal |rho|: smaller p wins
    const std::vector<attr::AttributionRecord> rs = {rec(Driver::TAS, -0.7, 0.001),
                                                     rec(Driver::Fire, 0.7, 0.01)};
    CHECK(attr::dominant_driver(rs) == Driver::TAS);
  }
  {
    // equal |rho| and p: priority order SM > Prcp
    const std::vector<attr::AttributionRecord> rs = {rec(Driver::Prcp, 0.7, 0.01),
                                                     rec(Driver::SM, -0.7, 0.01)};
    CHECK(attr::dominant_driver(rs) == Driver::SM);
  }
}

TEST_CASE("dominant_driver is invariant under positive affine driver rescaling") {
  synth::SplitMix64 rng(47);
  std::vector<double> nbp(60), sm(60), tas(60);
  for (std::size_t i = 0; i < nbp.size(); ++i) {
    nbp[i] = rng.normal();
    sm[i] = 0.9 * nbp[i] + 0.1 * rng.normal();
    tas[i] = -0.4 * nbp[i] + 0.6 * rng.normal();
  }
  std::vector<extremes::TceEvent> evs;
  evs.push_back(event_at(0, extremes::Sign::Negative, {5, 6, 7}));
  evs.push_back(event_at(0, extremes::Sign::Negative, {20, 21, 22}));
  evs.push_back(event_at(0, extremes::Sign::Positive, {30, 31, 32}));
  evs.push_back(event_at(0, extremes::Sign::Positive, {45, 46, 47}));
  auto run = [&](const std::vector<double>& smv) {
    std::vector<attr::AttributionRecord> rs;
    if (auto r = attr::attribute_cell(nbp, evs, smv, Driver::SM, 0)) rs.push_back(*r);
    if (auto r = attr::attribute_cell(nbp, evs, tas, Driver::TAS, 0)) rs.push_back(*r);
    return attr::dominant_driver(rs);
  };
  std::vector<double> sm_scaled(sm.size());
  for (std::size_t i = 0; i < sm.size(); ++i) sm_scaled[i] = 250.0 * sm[i] + 17.0;
  CHECK(run(sm) == run(sm_scaled));
  CHECK(run(sm) == Driver::SM);
}

TEST_CASE("dominance_summary percentages and response signs") {
  std::vector<std::pair<std::optional<Driver>, double>> cells;
  for (int i = 0; i < 9; ++i) cells.emplace_back(Driver::SM, 0.8);
  cells.emplace_back(Driver::TAS, -0.7);
  cells.emplace_back(std::nullopt, 0.0);  // unattributable, excluded from the base
  const auto s = attr::dominance_summary(cells);
  REQUIRE(s.size() == 2);
  CHECK(s[0].driver == Driver::SM);
  CHECK(s[0].percent == doctest::Approx(90.0));
  CHECK(s[0].response == '+');
  CHECK(s[1].driver == Driver::TAS);
  CHECK(s[1].percent == doctest::Approx(10.0));
  CHECK(s[1].response == '-');
  CHECK(attr::dominance_summary({}).empty());
}

TEST_CASE("compound_label rule application") {
  {
    const std::vector<attr::AttributionRecord> rs = {
        rec(Driver::SM, 0.7, 0.01), rec(Driver::TAS, -0.65, 0.01), rec(Driver::Fire, -0.8, 0.01)};
    const auto l = attr::compound_label(rs);
    CHECK(l.dry);
    CHECK(l.hot);
    CHECK(l.fire);
    CHECK(!l.wet);
    CHECK(!l.cold);
    CHECK(l.key() == "hot&dry&fire");
  }
  {
    const std::vector<attr::AttributionRecord> rs = {rec(Driver::Prcp, 0.65, 0.01)};
    const auto l = attr::compound_label(rs);
    CHECK(l.dry);
    CHECK(l.key() == "dry");
  }
  {
    // below tau or not significant -> empty
    const std::vector<attr::AttributionRecord> rs = {rec(Driver::SM, 0.6, 0.01),
                                                     rec(Driver::TAS, -0.9, 0.2)};
    CHECK(attr::compound_label(rs).empty());
    CHECK(attr::compound_label(rs).key() == "none");
  }
  {
    // SM wins a moisture sign conflict with Prcp
    const std::vector<attr::AttributionRecord> rs = {rec(Driver::SM, 0.9, 0.01),
                                                     rec(Driver::Prcp, -0.8, 0.01)};
    const auto l = attr::compound_label(rs);
    CHECK(l.dry);
    CHECK(!l.wet);
  }
  {
    // TAS positive -> cold; fire either sign
    const std::vector<attr::AttributionRecord> rs = {rec(Driver::TAS, 0.75, 0.01),
                                                     rec(Driver::Fire, 0.61, 0.04)};
    const auto l = attr::compound_label(rs);
    CHECK(l.cold);
    CHECK(l.fire);
  }
}

TEST_CASE("all_label_combinations enumerates 18 distinct labels") {
  const auto all = attr::all_label_combinations();
  CHECK(all.size() == 18);
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(!(all[i].hot && all[i].cold));
    CHECK(!(all[i].dry && all[i].wet));
    for (std::size_t j = i + 1; j < all.size(); ++j) CHECK(!(all[i] == all[j]));
  }
}

TEST_CASE("compound_fractions set algebra") {
  attr::CompoundLabel hot_dry;
  hot_dry.hot = hot_dry.dry = true;
  attr::CompoundLabel dry;
  dry.dry = true;
  attr::CompoundLabel dry_fire;
  dry_fire.dry = dry_fire.fire = true;
  attr::CompoundLabel hot;
  hot.hot = true;

  auto find = [](const std::vector<attr::CompoundFraction>& fs, const attr::CompoundLabel& c) {
    for (const auto& f : fs)
      if (f.combo == c) return f;
    REQUIRE(false);
    return fs.front();
  };

  {
    // every TCE labeled {hot, dry}
    const auto fs = attr::compound_fractions({{hot_dry, 4}});
    CHECK(find(fs, hot).inclusive == doctest::Approx(1.0));
    CHECK(find(fs, hot).exclusive == doctest::Approx(0.0));
    CHECK(find(fs, hot_dry).inclusive == doctest::Approx(1.0));
    CHECK(find(fs, hot_dry).exclusive == doctest::Approx(1.0));
  }
  {
    // 50/50 between {dry} and {dry, fire}, weighted by TCE counts
    const auto fs = attr::compound_fractions({{dry, 5}, {dry_fire, 5}});
    CHECK(find(fs, dry).inclusive == doctest::Approx(1.0));
    CHECK(find(fs, dry).exclusive == doctest::Approx(0.5));
    CHECK(find(fs, dry_fire).exclusive == doctest::Approx(0.5));
  }
  {
    // exclusive <= inclusive everywhere; exclusive sums to 1 over all combos
    const attr::CompoundLabel none;
    const auto fs = attr::compound_fractions({{dry, 3}, {hot_dry, 2}, {none, 5}});
    double excl_sum = 0.0;
    for (const auto& f : fs) {
      CHECK(f.exclusive <= f.inclusive + 1e-12);
      excl_sum += f.exclusive;
    }
    CHECK(excl_sum == doctest::Approx(1.0));
    CHECK(find(fs, none).exclusive == doctest::Approx(0.5));
  }
}

TEST_CASE("constructed lag-1 coupling is recovered with high confidence") {
  // nbp extreme months derive from SM at t-1 plus tiny noise
  synth::SplitMix64 rng(53);
  const int n = 300;
  std::vector<double> sm(n), nbp(n, 0.0);
  for (auto& v : sm) v = rng.normal();
  std::vector<extremes::TceEvent> evs;
  int sign_toggle = 0;
  for (int start = 10; start + 3 < n && evs.size() < 8; start += 40) {
    std::vector<int> months = {start, start + 1, start + 2};
    for (int m : months) nbp[static_cast<std::size_t>(m)] = 5.0 * sm[static_cast<std::size_t>(m - 1)] + 0.01 * rng.normal();
    evs.push_back(event_at(0, (sign_toggle++ % 2) ? extremes::Sign::Positive
                                                  : extremes::Sign::Negative,
                           months));
  }
  const auto r = attr::attribute_cell(nbp, evs, sm, Driver::SM, 1);
  REQUIRE(r.has_value());
  CHECK(r->rho >= 0.99);
  CHECK(r->p < 0.001);
}
