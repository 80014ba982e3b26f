#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carbonx/extremes.hpp"

namespace carbonx::attr {

// Priority order for tie-breaks: SM > Prcp > TAS > Fire.
enum class Driver : int { SM = 0, Prcp = 1, TAS = 2, Fire = 3 };
inline constexpr std::array<Driver, 4> kDrivers = {Driver::SM, Driver::Prcp, Driver::TAS,
                                                   Driver::Fire};
const std::string& driver_name(Driver d);
std::optional<Driver> driver_from_name(const std::string& name);

struct AttributionRecord {
  int cell = -1;
  Driver driver = Driver::SM;
  int lag = 0;  // months, 0..4
  double rho = 0.0;
  double p = 1.0;
  int n = 0;  // TCE months used
};

// Lag-averaged driver series: lag 0 is the identity; lag L >= 1 replaces x_t
// by the mean of the preceding L values. The first L entries are NaN.
std::vector<double> lagged_driver(std::span<const double> driver_anoms, int lag);

// True iff the cell has at least two negative and two positive TCEs.
bool cell_qualifies(std::span<const extremes::TceEvent> cell_events);

// Pooled regression over the extreme months of all TCEs (both signs) of one
// cell in one window. Sample months whose lagged driver value is undefined
// are dropped. Returns nothing when the driver is constant over the sample
// or fewer than 3 usable months remain.
std::optional<AttributionRecord> attribute_cell(std::span<const double> nbp_window,
                                                std::span<const extremes::TceEvent> cell_events,
                                                std::span<const double> driver_window,
                                                Driver driver, int lag);

// Among records with p < p_max, the maximal |rho|; ties broken by smaller p,
// then by driver priority. Empty when no record passes.
std::optional<Driver> dominant_driver(std::span<const AttributionRecord> records,
                                      double p_max = 0.05);

struct DominanceShare {
  Driver driver;
  double percent = 0.0;  // of cells with any dominant driver
  int cells = 0;
  char response = '0';  // sign of the median rho among dominated cells
};
std::vector<DominanceShare> dominance_summary(
    const std::vector<std::pair<std::optional<Driver>, double>>& dominant_rho_per_cell);

// Driver classes at a cell: moisture axis (dry/wet), temperature axis
// (hot/cold), fire. Axes are mutually exclusive by construction.
struct CompoundLabel {
  bool hot = false, cold = false, dry = false, wet = false, fire = false;
  bool empty() const { return !(hot || cold || dry || wet || fire); }
  bool superset_of(const CompoundLabel& o) const {
    return (!o.hot || hot) && (!o.cold || cold) && (!o.dry || dry) && (!o.wet || wet) &&
           (!o.fire || fire);
  }
  bool operator==(const CompoundLabel& o) const = default;
  std::string key() const;  // canonical "hot&dry&fire" form, "none" when empty
};

// SM/Prcp with |rho| > tau, p < p_max set the moisture axis (rho > 0 -> dry,
// rho < 0 -> wet; SM wins a sign conflict with Prcp). TAS sets hot (rho < 0)
// or cold (rho > 0). Fire qualifies with either sign.
CompoundLabel compound_label(std::span<const AttributionRecord> records, double tau = 0.6,
                             double p_max = 0.05);

// All 18 valid class combinations (moisture x temperature x fire), including
// the empty one.
std::vector<CompoundLabel> all_label_combinations();

struct CompoundFraction {
  CompoundLabel combo;
  double inclusive = 0.0;  // fraction of TCEs whose label is a superset
  double exclusive = 0.0;  // fraction of TCEs whose label matches exactly
};

// TCE-weighted fractions: each entry is (cell label, TCE count at the cell).
std::vector<CompoundFraction> compound_fractions(
    const std::vector<std::pair<CompoundLabel, int>>& labeled_cells);

}  // namespace carbonx::attr
