#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "carbonx/attribution.hpp"
#include "carbonx/gridstore.hpp"

namespace carbonx::synth {

// Deterministic per-cell substreams: splitmix64 over a mixed (seed, tag,
// index) state, so parallel generation order cannot change the output.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  std::uint64_t next();
  double uniform01();         // in (0, 1)
  double normal();            // standard normal, Box-Muller
private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index);

struct Ar1Spec {
  double phi = 0.0;    // must be in [0, 1)
  double sigma = 0.0;  // innovation scale
};

struct InjectionSpec {
  bool enabled = true;
  double amplitude = 5e9;            // gC/month at t = 0
  double neg_growth_per_month = 0.0; // amplitude growth of negative events
  double pos_growth_per_month = 0.0;
  int length = 3;                    // months per event
  int period = 135;                  // months between same-sign events
};

enum class CouplingScope { All, Compound, Complement };

struct CouplingSpec {
  attr::Driver driver = attr::Driver::SM;
  int lag = 1;          // months the driver leads the response
  double gain = 0.0;    // driver units per unit of normalized injection
  Ar1Spec noise{0.0, 0.1};
  CouplingScope scope = CouplingScope::All;
};

struct TasSpec {
  double base = 15.0;             // degC
  double cycle_amplitude = 0.0;   // degC
  double trend_per_century = 0.0; // degC
  Ar1Spec cell_noise{0.0, 0.1};
};

struct SensitivitySpec {
  double b1_ggc_per_degc = 0.0;  // programmed regional sensitivity
  int region_rows = 2;           // latitude bands forming the region mask
  Ar1Spec signal{0.8, 1.0};      // shared regional TAS signal, degC
};

struct SynthConfig {
  std::string name = "synth";
  std::uint64_t seed = 1;
  int n_lat = 8;
  int n_lon = 8;
  int start_year = 1850;
  int years = 100;
  double lat0 = -30.0, dlat = 1.0;
  double lon0 = 0.0, dlon = 1.0;
  double cycle_amplitude = 2e9;     // gC/month
  double trend_per_century = 1e9;   // gC/month
  Ar1Spec noise{0.5, 2e8};
  InjectionSpec injections;
  std::vector<CouplingSpec> couplings;
  double compound_fraction = 0.0;   // share of cells in the compound set
  TasSpec tas;
  SensitivitySpec sensitivity;

  int n_time() const { return years * 12; }
  int n_cell() const { return n_lat * n_lon; }
};

SynthConfig parse_config(const std::string& json_text);
SynthConfig load_config(const std::string& path);

struct InjectedEvent {
  int cell = -1;
  int sign = -1;       // -1 or +1
  int start = 0, end = 0;  // absolute month offsets
};

struct GroundTruth {
  std::uint64_t seed = 0;
  std::optional<attr::Driver> expected_dominant;
  int expected_lag = 0;
  std::vector<InjectedEvent> events;
  std::vector<double> monthly_injected_pos;  // gC/month, global
  std::vector<double> monthly_injected_neg;
  double injected_total = 0.0;               // gC, all events
  double neg_intensity_slope = 0.0;          // gC/month per month
  double pos_intensity_slope = 0.0;
  std::vector<int> compound_cells;
  double compound_target = 0.0;
  std::map<int, double> region_b1;           // region id -> GgC/month/degC

  std::string to_json() const;
  static GroundTruth from_json(const std::string& text);
};

struct SynthOutput {
  grid::GridStack nbp;   // gC/month
  grid::GridStack prcp;  // anomaly-like units
  grid::GridStack sm;
  grid::GridStack tas;   // degC
  grid::GridStack fire;
  grid::RegionMask regions;
  GroundTruth truth;
};

SynthOutput generate(const SynthConfig& config);

struct Scorecard {
  double tce_recall = 0.0;
  double tce_precision = 0.0;
  double dominant_driver_accuracy = 0.0;
  double compound_fraction_error = 0.0;      // |recovered - target|
  double sensitivity_rel_error = 0.0;        // mean |b1_rec/b1_prog - 1|
  double neg_slope_rel_error = 0.0;
  double pos_slope_rel_error = 0.0;
  std::string to_json() const;
};

struct PipelineResults {
  // detected events: (cell, sign, absolute start month, absolute end month)
  std::vector<InjectedEvent> detected_events;
  // (cell, window) pairs with a dominant driver at the expected lag
  int attributable_cells = 0;
  int correct_dominant = 0;
  double recovered_compound_exclusive = 0.0;
  std::map<int, std::vector<double>> region_b1;  // recovered, per decade
  double neg_intensity_slope = 0.0;
  double pos_intensity_slope = 0.0;
};

Scorecard score(const GroundTruth& truth, const PipelineResults& results);

}  // namespace carbonx::synth
