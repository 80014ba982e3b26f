#include "carbonx/regional.hpp"

#include <cmath>

#include "carbonx/error.hpp"

namespace carbonx::regional {

std::vector<double> region_series(const grid::GridStack& stack, const grid::RegionMask& mask,
                                  int region_id, AggregateMode mode) {
  if (mask.region_id.size() != static_cast<std::size_t>(stack.n_cell()))
    fail_data("region_series: mask shape mismatch");
  if (region_id != 0 && !mask.table.count(region_id))
    fail_data("region_series: unknown region id");
  std::vector<int> cells;
  for (int c = 0; c < stack.n_cell(); ++c)
    if (mask.region_id[static_cast<std::size_t>(c)] == region_id && stack.is_land(c))
      cells.push_back(c);
  if (cells.empty()) fail_data("region_series: region has no land cells");

  const auto areas = grid::cell_areas(stack);
  std::vector<double> out(static_cast<std::size_t>(stack.n_time));
  for (int t = 0; t < stack.n_time; ++t) {
    stats::KahanSum acc, wsum;
    for (int c : cells) {
      if (mode == AggregateMode::Sum) {
        acc.add(stack.at(t, c));
      } else {
        acc.add(stack.at(t, c) * areas[static_cast<std::size_t>(c)]);
        wsum.add(areas[static_cast<std::size_t>(c)]);
      }
    }
    out[static_cast<std::size_t>(t)] =
        mode == AggregateMode::Sum ? acc.value() : acc.value() / wsum.value();
  }
  return out;
}

std::vector<RegionWindowSummary> window_net_extremes(const grid::GridStack& anomalies,
                                                     const extremes::WindowRange& range,
                                                     const extremes::Masks& masks,
                                                     std::span<const extremes::TceEvent> catalog,
                                                     const grid::RegionMask& mask,
                                                     const extremes::WindowSpec& window) {
  if (mask.region_id.size() != static_cast<std::size_t>(anomalies.n_cell()))
    fail_data("window_net_extremes: mask shape mismatch");
  std::vector<RegionWindowSummary> out;
  for (const auto& [region_id, info] : mask.table) {
    RegionWindowSummary s;
    s.region_id = region_id;
    s.window_start_year = window.start_year;
    stats::KahanSum pos, neg;
    for (int t = 0; t < range.count; ++t) {
      for (int c = 0; c < masks.n_cell; ++c) {
        if (mask.region_id[static_cast<std::size_t>(c)] != region_id) continue;
        if (masks.pos_at(t, c)) pos.add(anomalies.at(range.first + t, c));
        if (masks.neg_at(t, c)) neg.add(anomalies.at(range.first + t, c));
      }
    }
    s.pos_total_gc = pos.value();
    s.neg_total_gc = neg.value();
    s.net_extreme_gc = s.pos_total_gc + s.neg_total_gc;
    stats::KahanSum neg_tce;
    for (const auto& e : catalog) {
      if (mask.region_id[static_cast<std::size_t>(e.cell)] != region_id) continue;
      if (e.sign == extremes::Sign::Positive) {
        ++s.n_pos_tce;
      } else {
        ++s.n_neg_tce;
        neg_tce.add(e.integrated_anomaly);
      }
    }
    s.neg_tce_total_gc = neg_tce.value();
    s.dominance = s.net_extreme_gc > 0 ? '+' : (s.net_extreme_gc < 0 ? '-' : '0');
    out.push_back(s);
  }
  return out;
}

DominanceCounts dominance_counts(std::span<const RegionWindowSummary> summaries) {
  DominanceCounts c;
  for (const auto& s : summaries) {
    if (s.dominance == '+')
      ++c.n_positive;
    else if (s.dominance == '-')
      ++c.n_negative;
    else
      ++c.n_zero;
  }
  const int total = c.n_positive + c.n_negative + c.n_zero;
  if (total > 0) {
    c.percent_positive = 100.0 * c.n_positive / total;
    c.percent_negative = 100.0 * c.n_negative / total;
  }
  return c;
}

std::vector<FluxPhase> uptake_release_split(std::span<const double> nbp_series) {
  std::vector<FluxPhase> out(nbp_series.size());
  for (std::size_t i = 0; i < nbp_series.size(); ++i)
    out[i] = nbp_series[i] > 0.0 ? FluxPhase::Uptake : FluxPhase::Release;
  return out;
}

std::vector<SensitivityRecord> sensitivity(std::span<const double> region_nbp_gc,
                                           std::span<const double> region_tas,
                                           int t0_year, int start_year, int n_decades,
                                           int detrend_window) {
  if (region_nbp_gc.size() != region_tas.size()) fail_data("sensitivity: length mismatch");
  const auto nbp_ma = stats::moving_average(region_nbp_gc, detrend_window);
  const auto tas_ma = stats::moving_average(region_tas, detrend_window);

  std::vector<SensitivityRecord> out;
  for (int d = 0; d < n_decades; ++d) {
    const int year = start_year + d * 10;
    const int first = (year - t0_year) * 12;
    const int count = 120;
    if (first < 0 || first + count > static_cast<int>(region_nbp_gc.size()))
      fail_data("sensitivity: decade outside the series");
    std::vector<double> x, y;
    for (int t = first; t < first + count; ++t) {
      const std::size_t i = static_cast<std::size_t>(t);
      if (!stats::is_defined(nbp_ma[i]) || !stats::is_defined(tas_ma[i])) continue;
      x.push_back(region_tas[i] - tas_ma[i]);
      y.push_back((region_nbp_gc[i] - nbp_ma[i]) / 1e9);  // gC -> GgC
    }
    if (static_cast<int>(x.size()) < 24)
      fail_data("sensitivity: fewer than 24 defined months in a decade");
    const auto fit = stats::ols(x, y);
    SensitivityRecord rec;
    rec.region_id = 0;  // caller fills in
    rec.start_year = year;
    rec.b0_ggc = fit.b0;
    rec.b1_ggc_per_degc = fit.b1;
    rec.r2 = fit.r2;
    rec.n = fit.n;
    out.push_back(rec);
  }
  return out;
}

std::vector<QuantileTrend> temperature_quantiles(std::span<const double> region_tas,
                                                 int t0_year,
                                                 std::span<const extremes::WindowSpec> windows,
                                                 std::span<const double> levels) {
  std::vector<QuantileTrend> out;
  std::vector<double> centers;  // window center, months from series origin
  for (const auto& w : windows) {
    const int first = (w.start_year - t0_year) * 12;
    if (first < 0 || first + w.n_months() > static_cast<int>(region_tas.size()))
      fail_data("temperature_quantiles: window outside the series");
    centers.push_back(first + (w.n_months() - 1) / 2.0);
  }
  for (double p : levels) {
    QuantileTrend qt;
    qt.quantile = p;
    for (const auto& w : windows) {
      const int first = (w.start_year - t0_year) * 12;
      std::vector<double> sample(region_tas.begin() + first,
                                 region_tas.begin() + first + w.n_months());
      qt.per_window.push_back(stats::quantile_nearest_rank(std::move(sample), p));
    }
    if (windows.size() >= 2) {
      const auto fit = stats::ols(centers, qt.per_window);
      qt.rate_per_decade = fit.b1 * 120.0;  // per month -> per decade
    }
    out.push_back(std::move(qt));
  }
  return out;
}

}  // namespace carbonx::regional
