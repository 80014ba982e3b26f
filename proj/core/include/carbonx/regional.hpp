#pragma once

#include <span>
#include <vector>

#include "carbonx/extremes.hpp"
#include "carbonx/gridstore.hpp"
#include "carbonx/stats.hpp"

namespace carbonx::regional {

enum class AggregateMode { Sum, AreaWeightedMean };

// Monthly regional series: deterministic sum for budgets, area-weighted mean
// for intensive quantities such as temperature.
std::vector<double> region_series(const grid::GridStack& stack, const grid::RegionMask& mask,
                                  int region_id, AggregateMode mode);

struct RegionWindowSummary {
  int region_id = 0;
  int window_start_year = 0;
  double net_extreme_gc = 0.0;  // pos_total + neg_total
  double pos_total_gc = 0.0;
  double neg_total_gc = 0.0;
  int n_pos_tce = 0;
  int n_neg_tce = 0;
  double neg_tce_total_gc = 0.0;  // integrated anomaly of negative TCEs
  char dominance = '0';           // sign of net_extreme
};

// Per-region extreme budgets for one window. Every region in the mask table
// gets a row; cells with region id 0 are skipped.
std::vector<RegionWindowSummary> window_net_extremes(const grid::GridStack& anomalies,
                                                     const extremes::WindowRange& range,
                                                     const extremes::Masks& masks,
                                                     std::span<const extremes::TceEvent> catalog,
                                                     const grid::RegionMask& mask,
                                                     const extremes::WindowSpec& window);

struct DominanceCounts {
  int n_positive = 0;
  int n_negative = 0;
  int n_zero = 0;
  double percent_positive = 0.0;  // of all regions
  double percent_negative = 0.0;
};
DominanceCounts dominance_counts(std::span<const RegionWindowSummary> summaries);

enum class FluxPhase { Uptake, Release };
// NBP > 0 is uptake; zero counts as release.
std::vector<FluxPhase> uptake_release_split(std::span<const double> nbp_series);

struct SensitivityRecord {
  int region_id = 0;
  int start_year = 0;  // decade start
  double b0_ggc = 0.0;            // GgC/month
  double b1_ggc_per_degc = 0.0;   // GgC/month per degC
  double r2 = 0.0;
  int n = 0;  // defined months used
};

// Decadal OLS of detrended regional NBP (GgC/month) on detrended regional
// TAS (degC). Both series are detrended by subtracting their own centered
// 120-month moving average; months without a defined mean are dropped
// pairwise. Decades with fewer than 24 defined months are an error.
std::vector<SensitivityRecord> sensitivity(std::span<const double> region_nbp_gc,
                                           std::span<const double> region_tas,
                                           int t0_year, int start_year, int n_decades,
                                           int detrend_window = 120);

struct QuantileTrend {
  double quantile = 0.0;  // probability level
  std::vector<double> per_window;  // nearest-rank value per window, degC
  double rate_per_decade = 0.0;    // OLS across window centers, degC/decade
};

// Window quantiles of monthly regional TAS plus their cross-window trends.
std::vector<QuantileTrend> temperature_quantiles(std::span<const double> region_tas,
                                                 int t0_year,
                                                 std::span<const extremes::WindowSpec> windows,
                                                 std::span<const double> levels);

}  // namespace carbonx::regional
