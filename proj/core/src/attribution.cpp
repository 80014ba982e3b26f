#include "carbonx/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "carbonx/error.hpp"
#include "carbonx/stats.hpp"

namespace carbonx::attr {

const std::string& driver_name(Driver d) {
  static const std::array<std::string, 4> names = {"SM", "Prcp", "TAS", "Fire"};
  return names[static_cast<std::size_t>(d)];
}

std::optional<Driver> driver_from_name(const std::string& name) {
  for (Driver d : kDrivers)
    if (driver_name(d) == name) return d;
  return std::nullopt;
}

std::vector<double> lagged_driver(std::span<const double> driver_anoms, int lag) {
  if (lag < 0 || lag > 4) fail_config("lagged_driver: lag must be in 0..4");
  std::vector<double> out(driver_anoms.begin(), driver_anoms.end());
  if (lag == 0) return out;
  if (static_cast<int>(driver_anoms.size()) <= lag)
    fail_data("lagged_driver: series shorter than lag");
  for (int t = static_cast<int>(driver_anoms.size()) - 1; t >= 0; --t) {
    if (t < lag) {
      out[static_cast<std::size_t>(t)] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double s = 0.0;
    for (int l = 1; l <= lag; ++l) s += driver_anoms[static_cast<std::size_t>(t - l)];
    out[static_cast<std::size_t>(t)] = s / static_cast<double>(lag);
  }
  return out;
}

bool cell_qualifies(std::span<const extremes::TceEvent> cell_events) {
  int n_pos = 0, n_neg = 0;
  for (const auto& e : cell_events)
    (e.sign == extremes::Sign::Positive ? n_pos : n_neg) += 1;
  return n_pos >= 2 && n_neg >= 2;
}

std::optional<AttributionRecord> attribute_cell(std::span<const double> nbp_window,
                                                std::span<const extremes::TceEvent> cell_events,
                                                std::span<const double> driver_window,
                                                Driver driver, int lag) {
  if (nbp_window.size() != driver_window.size())
    fail_data("attribute_cell: series length mismatch");
  const auto lagged = lagged_driver(driver_window, lag);
  std::vector<double> x, y;
  for (const auto& e : cell_events) {
    for (int m : e.extreme_months) {
      const double xv = lagged[static_cast<std::size_t>(m)];
      if (!stats::is_defined(xv)) continue;  // lag reaches before the window
      x.push_back(xv);
      y.push_back(nbp_window[static_cast<std::size_t>(m)]);
    }
  }
  if (x.size() < 3) return std::nullopt;
  AttributionRecord rec;
  rec.cell = cell_events.empty() ? -1 : cell_events.front().cell;
  rec.driver = driver;
  rec.lag = lag;
  try {
    const auto corr = stats::pearson(x, y);
    rec.rho = corr.rho;
    rec.p = corr.p;
    rec.n = corr.n;
  } catch (const Error&) {
    return std::nullopt;  // degenerate driver variance over the sample
  }
  return rec;
}

std::optional<Driver> dominant_driver(std::span<const AttributionRecord> records,
                                      double p_max) {
  const AttributionRecord* best = nullptr;
  for (const auto& r : records) {
    if (!(r.p < p_max)) continue;
    if (best == nullptr) {
      best = &r;
      continue;
    }
    const double a = std::fabs(r.rho);
    const double b = std::fabs(best->rho);
    if (a > b || (a == b && (r.p < best->p ||
                             (r.p == best->p && static_cast<int>(r.driver) <
                                                    static_cast<int>(best->driver)))))
      best = &r;
  }
  if (!best) return std::nullopt;
  return best->driver;
}

std::vector<DominanceShare> dominance_summary(
    const std::vector<std::pair<std::optional<Driver>, double>>& dominant_rho_per_cell) {
  std::array<std::vector<double>, 4> rhos;
  int attributable = 0;
  for (const auto& [drv, rho] : dominant_rho_per_cell) {
    if (!drv) continue;
    ++attributable;
    rhos[static_cast<std::size_t>(*drv)].push_back(rho);
  }
  std::vector<DominanceShare> out;
  for (Driver d : kDrivers) {
    auto& r = rhos[static_cast<std::size_t>(d)];
    if (r.empty()) continue;
    DominanceShare s;
    s.driver = d;
    s.cells = static_cast<int>(r.size());
    s.percent = 100.0 * s.cells / attributable;
    std::sort(r.begin(), r.end());
    const double med = r.size() % 2 == 1 ? r[r.size() / 2]
                                         : 0.5 * (r[r.size() / 2 - 1] + r[r.size() / 2]);
    s.response = med > 0 ? '+' : (med < 0 ? '-' : '0');
    out.push_back(s);
  }
  return out;
}

std::string CompoundLabel::key() const {
  std::string s;
  auto append = [&s](const char* name) {
    if (!s.empty()) s += "&";
    s += name;
  };
  if (hot) append("hot");
  if (cold) append("cold");
  if (dry) append("dry");
  if (wet) append("wet");
  if (fire) append("fire");
  return s.empty() ? "none" : s;
}

CompoundLabel compound_label(std::span<const AttributionRecord> records, double tau,
                             double p_max) {
  CompoundLabel label;
  const AttributionRecord* sm = nullptr;
  const AttributionRecord* prcp = nullptr;
  for (const auto& r : records) {
    if (!(std::fabs(r.rho) > tau && r.p < p_max)) continue;
    switch (r.driver) {
      case Driver::SM:
        sm = &r;
        break;
      case Driver::Prcp:
        prcp = &r;
        break;
      case Driver::TAS:
        label.hot = r.rho < 0.0;
        label.cold = r.rho > 0.0;
        break;
      case Driver::Fire:
        label.fire = true;
        break;
    }
  }
  // SM settles the moisture axis when both qualify
  const AttributionRecord* moisture = sm ? sm : prcp;
  if (moisture) {
    label.dry = moisture->rho > 0.0;
    label.wet = moisture->rho < 0.0;
  }
  return label;
}

std::vector<CompoundLabel> all_label_combinations() {
  std::vector<CompoundLabel> out;
  for (int m = 0; m < 3; ++m)        // moisture: none / dry / wet
    for (int t = 0; t < 3; ++t)      // temperature: none / hot / cold
      for (int f = 0; f < 2; ++f) {  // fire: no / yes
        CompoundLabel l;
        l.dry = m == 1;
        l.wet = m == 2;
        l.hot = t == 1;
        l.cold = t == 2;
        l.fire = f == 1;
        out.push_back(l);
      }
  return out;
}

std::vector<CompoundFraction> compound_fractions(
    const std::vector<std::pair<CompoundLabel, int>>& labeled_cells) {
  long total = 0;
  for (const auto& [label, n] : labeled_cells) total += n;
  std::vector<CompoundFraction> out;
  for (const CompoundLabel& combo : all_label_combinations()) {
    CompoundFraction f;
    f.combo = combo;
    if (total > 0) {
      long incl = 0, excl = 0;
      for (const auto& [label, n] : labeled_cells) {
        if (label.superset_of(combo)) incl += n;
        if (label == combo) excl += n;
      }
      f.inclusive = static_cast<double>(incl) / static_cast<double>(total);
      f.exclusive = static_cast<double>(excl) / static_cast<double>(total);
    }
    out.push_back(f);
  }
  return out;
}

}  // namespace carbonx::attr
