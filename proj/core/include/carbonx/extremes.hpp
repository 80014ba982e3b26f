#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "carbonx/gridstore.hpp"

namespace carbonx::extremes {

struct WindowSpec {
  int start_year = 1850;
  int length_years = 25;
  int n_months() const { return length_years * 12; }
};

// Contiguous windows starting at start_year: e.g. 1850-74, 1875-99, ...
std::vector<WindowSpec> tile_windows(int start_year, int length_years, int count);

// Month-offset range of a window inside a stack; errors if out of range.
struct WindowRange {
  int first = 0;
  int count = 0;
};
WindowRange window_range(const grid::GridStack& stack, const WindowSpec& w);

// All land-cell anomaly samples of a window, month-major then cell order.
std::vector<double> window_samples(const grid::GridStack& anomalies, const WindowRange& range,
                                   std::span<const int> land);

// q such that 95% of anomalies lie within (-q, q): nearest-rank 95th
// percentile of |a|. Extremes are the strict exceedances |a| > q.
double threshold_q(std::span<const double> anomalies);

// Per-window boolean masks over (month, cell); ocean cells are never flagged.
struct Masks {
  int n_months = 0;
  int n_cell = 0;
  std::vector<std::uint8_t> pos;
  std::vector<std::uint8_t> neg;
  bool pos_at(int m, int c) const { return pos[static_cast<std::size_t>(m) * n_cell + c] != 0; }
  bool neg_at(int m, int c) const { return neg[static_cast<std::size_t>(m) * n_cell + c] != 0; }
};
Masks extreme_masks(const grid::GridStack& anomalies, const WindowRange& range, double q);

// Per-month global sums of flagged anomalies, split by sign (gC/month).
struct IntensitySeries {
  std::vector<double> pos;
  std::vector<double> neg;
};
IntensitySeries intensity_series(const grid::GridStack& anomalies, const WindowRange& range,
                                 const Masks& masks);

enum class Sign : int { Positive = +1, Negative = -1 };

// One time-continuous extreme at one cell. Months are window-relative.
struct TceEvent {
  int cell = -1;
  Sign sign = Sign::Negative;
  int start_month = 0;  // first flagged month of the event
  int end_month = 0;    // last flagged month, inclusive
  std::vector<int> extreme_months;
  double integrated_anomaly = 0.0;  // gC, sum over extreme months
};

// Runs of flagged months merged across gaps <= 2; a merged candidate
// qualifies iff at least one constituent run spans >= 3 months. Gaps >= 3
// separate events.
std::vector<TceEvent> detect_tces(std::span<const std::uint8_t> cell_mask, Sign sign);

// Events for every land cell of one window, ordered by cell, then sign
// (negative first), then start month. Integrated anomalies filled in.
std::vector<TceEvent> tce_catalog(const grid::GridStack& anomalies, const WindowRange& range,
                                  const Masks& masks, std::span<const int> land);

}  // namespace carbonx::extremes
