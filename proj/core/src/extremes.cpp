#include "carbonx/extremes.hpp"

#include <cmath>

#include "carbonx/error.hpp"
#include "carbonx/stats.hpp"

namespace carbonx::extremes {

std::vector<WindowSpec> tile_windows(int start_year, int length_years, int count) {
  if (length_years < 1 || count < 1) fail_config("tile_windows: invalid window spec");
  std::vector<WindowSpec> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out.push_back({start_year + i * length_years, length_years});
  return out;
}

WindowRange window_range(const grid::GridStack& stack, const WindowSpec& w) {
  const int first = stack.month_offset(w.start_year, 1);
  const int count = w.n_months();
  if (first < 0 || first + count > stack.n_time)
    fail_data("window_range: window falls outside the stack time axis");
  return {first, count};
}

std::vector<double> window_samples(const grid::GridStack& anomalies, const WindowRange& range,
                                   std::span<const int> land) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(range.count) * land.size());
  for (int m = 0; m < range.count; ++m)
    for (int c : land) out.push_back(anomalies.at(range.first + m, c));
  return out;
}

double threshold_q(std::span<const double> anomalies) {
  if (anomalies.empty()) fail_data("threshold_q: empty window sample");
  std::vector<double> mag(anomalies.size());
  for (std::size_t i = 0; i < anomalies.size(); ++i) mag[i] = std::fabs(anomalies[i]);
  return stats::quantile_nearest_rank(std::move(mag), 0.95);
}

Masks extreme_masks(const grid::GridStack& anomalies, const WindowRange& range, double q) {
  if (q < 0.0) fail_data("extreme_masks: negative threshold");
  Masks m;
  m.n_months = range.count;
  m.n_cell = anomalies.n_cell();
  const std::size_t total = static_cast<std::size_t>(m.n_months) * m.n_cell;
  m.pos.assign(total, 0);
  m.neg.assign(total, 0);
  for (int t = 0; t < range.count; ++t) {
    for (int c = 0; c < m.n_cell; ++c) {
      if (!anomalies.is_land(c)) continue;
      const double a = anomalies.at(range.first + t, c);
      const std::size_t idx = static_cast<std::size_t>(t) * m.n_cell + c;
      if (a > q)
        m.pos[idx] = 1;
      else if (a < -q)
        m.neg[idx] = 1;
    }
  }
  return m;
}

IntensitySeries intensity_series(const grid::GridStack& anomalies, const WindowRange& range,
                                 const Masks& masks) {
  if (masks.n_months != range.count || masks.n_cell != anomalies.n_cell())
    fail_data("intensity_series: mask shape mismatch");
  IntensitySeries out;
  out.pos.resize(static_cast<std::size_t>(range.count));
  out.neg.resize(static_cast<std::size_t>(range.count));
  for (int t = 0; t < range.count; ++t) {
    stats::KahanSum pos, neg;
    for (int c = 0; c < masks.n_cell; ++c) {
      if (masks.pos_at(t, c)) pos.add(anomalies.at(range.first + t, c));
      if (masks.neg_at(t, c)) neg.add(anomalies.at(range.first + t, c));
    }
    out.pos[static_cast<std::size_t>(t)] = pos.value();
    out.neg[static_cast<std::size_t>(t)] = neg.value();
  }
  return out;
}

std::vector<TceEvent> detect_tces(std::span<const std::uint8_t> cell_mask, Sign sign) {
  // maximal runs of flagged months
  struct Run {
    int start, end;
  };
  std::vector<Run> runs;
  const int n = static_cast<int>(cell_mask.size());
  int i = 0;
  while (i < n) {
    if (!cell_mask[static_cast<std::size_t>(i)]) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < n && cell_mask[static_cast<std::size_t>(j + 1)]) ++j;
    runs.push_back({i, j});
    i = j + 1;
  }

  std::vector<TceEvent> events;
  std::size_t r = 0;
  while (r < runs.size()) {
    // merge runs while the gap to the next run is at most 2 months
    std::size_t last = r;
    bool has_season = runs[r].end - runs[r].start + 1 >= 3;
    while (last + 1 < runs.size() && runs[last + 1].start - runs[last].end - 1 <= 2) {
      ++last;
      has_season = has_season || runs[last].end - runs[last].start + 1 >= 3;
    }
    if (has_season) {
      TceEvent e;
      e.sign = sign;
      e.start_month = runs[r].start;
      e.end_month = runs[last].end;
      for (std::size_t k = r; k <= last; ++k)
        for (int m = runs[k].start; m <= runs[k].end; ++m) e.extreme_months.push_back(m);
      events.push_back(std::move(e));
    }
    r = last + 1;
  }
  return events;
}

std::vector<TceEvent> tce_catalog(const grid::GridStack& anomalies, const WindowRange& range,
                                  const Masks& masks, std::span<const int> land) {
  std::vector<TceEvent> out;
  std::vector<std::uint8_t> series(static_cast<std::size_t>(range.count));
  for (int c : land) {
    for (Sign sign : {Sign::Negative, Sign::Positive}) {
      const auto& mask = sign == Sign::Positive ? masks.pos : masks.neg;
      for (int t = 0; t < range.count; ++t)
        series[static_cast<std::size_t>(t)] = mask[static_cast<std::size_t>(t) * masks.n_cell + c];
      for (TceEvent& e : detect_tces(series, sign)) {
        e.cell = c;
        stats::KahanSum s;
        for (int m : e.extreme_months) s.add(anomalies.at(range.first + m, c));
        e.integrated_anomaly = s.value();
        out.push_back(std::move(e));
      }
    }
  }
  return out;
}

}  // namespace carbonx::extremes
