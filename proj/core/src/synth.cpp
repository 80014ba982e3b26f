#include "carbonx/synth.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "carbonx/error.hpp"
#include "carbonx/stats.hpp"

namespace carbonx::synth {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform01() {
  // 53-bit mantissa, strictly inside (0, 1)
  return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double SplitMix64::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * M_PI * u2);
  have_spare_ = true;
  return r * std::cos(2.0 * M_PI * u2);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  SplitMix64 s(seed ^ (tag * 0xD1342543DE82EF95ULL) ^ (index * 0xFF51AFD7ED558CCDULL));
  return s.next();
}

namespace {

using nlohmann::json;

Ar1Spec parse_ar1(const json& j, Ar1Spec dflt) {
  Ar1Spec a = dflt;
  if (j.contains("phi")) a.phi = j["phi"].get<double>();
  if (j.contains("sigma")) a.sigma = j["sigma"].get<double>();
  if (!(a.phi >= 0.0 && a.phi < 1.0)) fail_config("synth: AR(1) phi must be in [0,1)");
  return a;
}

CouplingScope parse_scope(const std::string& s) {
  if (s == "all") return CouplingScope::All;
  if (s == "compound") return CouplingScope::Compound;
  if (s == "complement") return CouplingScope::Complement;
  fail_config("synth: unknown coupling scope " + s);
}

// AR(1) path with stationary start.
std::vector<double> ar1_path(const Ar1Spec& spec, SplitMix64& rng, int n) {
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  if (spec.sigma <= 0.0 || n == 0) return out;
  const double stationary = spec.sigma / std::sqrt(1.0 - spec.phi * spec.phi);
  out[0] = stationary * rng.normal();
  for (int t = 1; t < n; ++t)
    out[static_cast<std::size_t>(t)] =
        spec.phi * out[static_cast<std::size_t>(t - 1)] + spec.sigma * rng.normal();
  return out;
}

}  // namespace

SynthConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    fail_config("synth config: malformed JSON: " + std::string(e.what()));
  }
  SynthConfig c;
  if (j.contains("name")) c.name = j["name"].get<std::string>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("n_lat")) c.n_lat = j["n_lat"].get<int>();
  if (j.contains("n_lon")) c.n_lon = j["n_lon"].get<int>();
  if (j.contains("start_year")) c.start_year = j["start_year"].get<int>();
  if (j.contains("years")) c.years = j["years"].get<int>();
  if (j.contains("lat0")) c.lat0 = j["lat0"].get<double>();
  if (j.contains("dlat")) c.dlat = j["dlat"].get<double>();
  if (j.contains("lon0")) c.lon0 = j["lon0"].get<double>();
  if (j.contains("dlon")) c.dlon = j["dlon"].get<double>();
  if (j.contains("cycle_amplitude")) c.cycle_amplitude = j["cycle_amplitude"].get<double>();
  if (j.contains("trend_per_century")) c.trend_per_century = j["trend_per_century"].get<double>();
  if (j.contains("noise")) c.noise = parse_ar1(j["noise"], c.noise);
  if (j.contains("injections")) {
    const auto& ji = j["injections"];
    if (ji.contains("enabled")) c.injections.enabled = ji["enabled"].get<bool>();
    if (ji.contains("amplitude")) c.injections.amplitude = ji["amplitude"].get<double>();
    if (ji.contains("neg_growth_per_month"))
      c.injections.neg_growth_per_month = ji["neg_growth_per_month"].get<double>();
    if (ji.contains("pos_growth_per_month"))
      c.injections.pos_growth_per_month = ji["pos_growth_per_month"].get<double>();
    if (ji.contains("length")) c.injections.length = ji["length"].get<int>();
    if (ji.contains("period")) c.injections.period = ji["period"].get<int>();
  }
  if (j.contains("couplings")) {
    for (const auto& jc : j["couplings"]) {
      CouplingSpec s;
      const auto name = jc.at("driver").get<std::string>();
      const auto d = attr::driver_from_name(name);
      if (!d) fail_config("synth config: unknown driver " + name);
      s.driver = *d;
      if (jc.contains("lag")) s.lag = jc["lag"].get<int>();
      if (jc.contains("gain")) s.gain = jc["gain"].get<double>();
      if (jc.contains("noise")) s.noise = parse_ar1(jc["noise"], s.noise);
      if (jc.contains("scope")) s.scope = parse_scope(jc["scope"].get<std::string>());
      for (const auto& prev : c.couplings)
        if (prev.driver == s.driver)
          fail_config("synth config: duplicate coupling for driver " + name);
      c.couplings.push_back(s);
    }
  }
  if (j.contains("compound_fraction")) c.compound_fraction = j["compound_fraction"].get<double>();
  if (j.contains("tas")) {
    const auto& jt = j["tas"];
    if (jt.contains("base")) c.tas.base = jt["base"].get<double>();
    if (jt.contains("cycle_amplitude")) c.tas.cycle_amplitude = jt["cycle_amplitude"].get<double>();
    if (jt.contains("trend_per_century"))
      c.tas.trend_per_century = jt["trend_per_century"].get<double>();
    if (jt.contains("cell_noise")) c.tas.cell_noise = parse_ar1(jt["cell_noise"], c.tas.cell_noise);
  }
  if (j.contains("sensitivity")) {
    const auto& js = j["sensitivity"];
    if (js.contains("b1_ggc_per_degc"))
      c.sensitivity.b1_ggc_per_degc = js["b1_ggc_per_degc"].get<double>();
    if (js.contains("region_rows")) c.sensitivity.region_rows = js["region_rows"].get<int>();
    if (js.contains("signal")) c.sensitivity.signal = parse_ar1(js["signal"], c.sensitivity.signal);
  }
  if (c.n_lat < 1 || c.n_lon < 1 || c.years < 1) fail_config("synth config: bad dimensions");
  if (c.injections.length < 1 || c.injections.period < 2)
    fail_config("synth config: bad injection schedule");
  return c;
}

SynthConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_data("synth config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

grid::GridStack blank_stack(const SynthConfig& c, const std::string& name,
                            const std::string& units) {
  grid::GridStack s;
  s.name = name;
  s.units = units;
  s.t0_year = c.start_year;
  s.t0_month = 1;
  s.n_time = c.n_time();
  for (int i = 0; i < c.n_lat; ++i) s.lats.push_back(c.lat0 + i * c.dlat);
  for (int i = 0; i < c.n_lon; ++i) s.lons.push_back(c.lon0 + i * c.dlon);
  s.values.assign(static_cast<std::size_t>(s.n_time) * s.n_cell(), 0.0);
  return s;
}

// Injection amplitude for cell `cell` at absolute month t; 0 when inactive.
struct InjectionTrain {
  const InjectionSpec& spec;
  int n_time;

  int offset(int cell, bool positive) const {
    int o = (cell * 37) % spec.period;
    if (positive) o = (o + spec.period / 2) % spec.period;
    return o;
  }
  double value(int cell, int t, bool positive) const {
    if (!spec.enabled) return 0.0;
    const int o = offset(cell, positive);
    const int rel = (t - o) % spec.period;
    if (rel < 0 || rel >= spec.length) return 0.0;
    const double growth = positive ? spec.pos_growth_per_month : spec.neg_growth_per_month;
    const double amp = spec.amplitude + growth * static_cast<double>(t);
    return positive ? amp : -amp;
  }
};

constexpr std::uint64_t kTagNoise = 1, kTagPhase = 2, kTagDriverNoise = 3, kTagTasNoise = 4,
                        kTagRegionSignal = 5;

}  // namespace

SynthOutput generate(const SynthConfig& c) {
  SynthOutput out{blank_stack(c, c.name + ".nbp", grid::kMassUnits),
                  blank_stack(c, c.name + ".prcp", "anom"),
                  blank_stack(c, c.name + ".sm", "anom"),
                  blank_stack(c, c.name + ".tas", "degC"),
                  blank_stack(c, c.name + ".fire", "anom"),
                  {},
                  {}};
  const int n_time = c.n_time();
  const int n_cell = c.n_cell();

  // region mask: latitude bands
  const int rows = std::max(1, c.sensitivity.region_rows);
  out.regions.region_id.resize(static_cast<std::size_t>(n_cell));
  for (int cell = 0; cell < n_cell; ++cell) {
    const int ilat = cell / c.n_lon;
    const int rid = 1 + std::min(rows - 1, ilat * rows / c.n_lat);
    out.regions.region_id[static_cast<std::size_t>(cell)] = rid;
  }
  for (int r = 1; r <= rows; ++r)
    out.regions.table[r] = {"R" + std::to_string(r), "Band " + std::to_string(r)};

  // shared regional TAS signal driving the programmed sensitivity
  std::vector<std::vector<double>> region_signal(static_cast<std::size_t>(rows + 1));
  for (int r = 1; r <= rows; ++r) {
    SplitMix64 rng(mix_seed(c.seed, kTagRegionSignal, static_cast<std::uint64_t>(r)));
    region_signal[static_cast<std::size_t>(r)] = ar1_path(c.sensitivity.signal, rng, n_time);
  }
  std::vector<int> region_cells(static_cast<std::size_t>(rows + 1), 0);
  for (int cell = 0; cell < n_cell; ++cell)
    ++region_cells[static_cast<std::size_t>(out.regions.region_id[static_cast<std::size_t>(cell)])];

  const int n_compound = static_cast<int>(std::lround(c.compound_fraction * n_cell));
  auto in_compound = [&](int cell) { return cell < n_compound; };

  const InjectionTrain train{c.injections, n_time};
  const double inj_norm = c.injections.amplitude > 0 ? c.injections.amplitude : 1.0;

  GroundTruth& gt = out.truth;
  gt.seed = c.seed;
  gt.compound_target = c.compound_fraction;
  gt.monthly_injected_pos.assign(static_cast<std::size_t>(n_time), 0.0);
  gt.monthly_injected_neg.assign(static_cast<std::size_t>(n_time), 0.0);
  for (int cell = 0; cell < n_cell; ++cell)
    if (in_compound(cell)) gt.compound_cells.push_back(cell);
  for (int r = 1; r <= rows; ++r)
    if (c.sensitivity.b1_ggc_per_degc != 0.0) gt.region_b1[r] = c.sensitivity.b1_ggc_per_degc;

  // expected dominant driver: largest |gain| among couplings covering all cells
  const CouplingSpec* strongest = nullptr;
  for (const auto& cp : c.couplings)
    if (cp.gain != 0.0 && (!strongest || std::fabs(cp.gain) > std::fabs(strongest->gain)))
      strongest = &cp;
  if (strongest) {
    gt.expected_dominant = strongest->driver;
    gt.expected_lag = strongest->lag;
  }

  stats::KahanSum injected_total;
  for (int cell = 0; cell < n_cell; ++cell) {
    const int rid = out.regions.region_id[static_cast<std::size_t>(cell)];
    const double b1_cell =
        c.sensitivity.b1_ggc_per_degc * 1e9 / static_cast<double>(region_cells[static_cast<std::size_t>(rid)]);

    SplitMix64 phase_rng(mix_seed(c.seed, kTagPhase, static_cast<std::uint64_t>(cell)));
    const double phase = phase_rng.uniform01() * 12.0;

    SplitMix64 noise_rng(mix_seed(c.seed, kTagNoise, static_cast<std::uint64_t>(cell)));
    const auto noise = ar1_path(c.noise, noise_rng, n_time);
    SplitMix64 tas_rng(mix_seed(c.seed, kTagTasNoise, static_cast<std::uint64_t>(cell)));
    const auto tas_noise = ar1_path(c.tas.cell_noise, tas_rng, n_time);

    for (int t = 0; t < n_time; ++t) {
      const double inj_neg = train.value(cell, t, /*positive=*/false);
      const double inj_pos = train.value(cell, t, /*positive=*/true);
      const double inj = inj_neg + inj_pos;
      gt.monthly_injected_neg[static_cast<std::size_t>(t)] += inj_neg;
      gt.monthly_injected_pos[static_cast<std::size_t>(t)] += inj_pos;
      injected_total.add(inj);

      double nbp = c.trend_per_century * static_cast<double>(t) / 1200.0 +
                   c.cycle_amplitude * std::sin(2.0 * M_PI * (t + phase) / 12.0) +
                   noise[static_cast<std::size_t>(t)] + inj +
                   b1_cell * region_signal[static_cast<std::size_t>(rid)][static_cast<std::size_t>(t)];
      out.nbp.at(t, cell) = nbp;

      out.tas.at(t, cell) = c.tas.base +
                            c.tas.cycle_amplitude * std::sin(2.0 * M_PI * (t + phase) / 12.0) +
                            c.tas.trend_per_century * static_cast<double>(t) / 1200.0 +
                            tas_noise[static_cast<std::size_t>(t)] +
                            region_signal[static_cast<std::size_t>(rid)][static_cast<std::size_t>(t)];
    }

    // driver fields: independent noise plus the programmed lagged coupling
    for (attr::Driver d : attr::kDrivers) {
      grid::GridStack* target = nullptr;
      switch (d) {
        case attr::Driver::SM: target = &out.sm; break;
        case attr::Driver::Prcp: target = &out.prcp; break;
        case attr::Driver::TAS: target = &out.tas; break;
        case attr::Driver::Fire: target = &out.fire; break;
      }
      const CouplingSpec* cp = nullptr;
      for (const auto& s : c.couplings)
        if (s.driver == d) cp = &s;
      if (d != attr::Driver::TAS) {
        SplitMix64 drn(mix_seed(c.seed, kTagDriverNoise + 16 * (1 + static_cast<std::uint64_t>(d)),
                                static_cast<std::uint64_t>(cell)));
        const Ar1Spec noise_spec = cp ? cp->noise : Ar1Spec{0.0, 0.1};
        const auto dn = ar1_path(noise_spec, drn, n_time);
        for (int t = 0; t < n_time; ++t) target->at(t, cell) = dn[static_cast<std::size_t>(t)];
      }
      if (!cp || cp->gain == 0.0) continue;
      const bool covered = cp->scope == CouplingScope::All ||
                           (cp->scope == CouplingScope::Compound && in_compound(cell)) ||
                           (cp->scope == CouplingScope::Complement && !in_compound(cell));
      if (!covered) continue;
      // driver leads the response by `lag` months
      for (int t = 0; t < n_time; ++t) {
        const int tr = t + cp->lag;
        if (tr >= n_time) break;
        const double inj = train.value(cell, tr, false) + train.value(cell, tr, true);
        target->at(t, cell) += cp->gain * inj / inj_norm;
      }
    }

    // injected event list
    if (c.injections.enabled) {
      for (int positive = 0; positive < 2; ++positive) {
        const int o = train.offset(cell, positive != 0);
        for (int start = o; start < n_time; start += c.injections.period) {
          InjectedEvent e;
          e.cell = cell;
          e.sign = positive ? +1 : -1;
          e.start = start;
          e.end = std::min(n_time - 1, start + c.injections.length - 1);
          gt.events.push_back(e);
        }
      }
    }
  }
  gt.injected_total = injected_total.value();
  gt.neg_intensity_slope = stats::linear_trend(gt.monthly_injected_neg);
  gt.pos_intensity_slope = stats::linear_trend(gt.monthly_injected_pos);
  return out;
}

std::string GroundTruth::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["expected_dominant"] = expected_dominant ? attr::driver_name(*expected_dominant) : "";
  j["expected_lag"] = expected_lag;
  nlohmann::ordered_json events_j = nlohmann::ordered_json::array();
  for (const auto& e : events)
    events_j.push_back({{"cell", e.cell}, {"sign", e.sign}, {"start", e.start}, {"end", e.end}});
  j["events"] = events_j;
  j["monthly_injected_pos"] = monthly_injected_pos;
  j["monthly_injected_neg"] = monthly_injected_neg;
  j["injected_total"] = injected_total;
  j["neg_intensity_slope"] = neg_intensity_slope;
  j["pos_intensity_slope"] = pos_intensity_slope;
  j["compound_cells"] = compound_cells;
  j["compound_target"] = compound_target;
  nlohmann::ordered_json rb;
  for (const auto& [r, b1] : region_b1) rb[std::to_string(r)] = b1;
  j["region_b1"] = rb;
  return j.dump(2);
}

GroundTruth GroundTruth::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail_data("GroundTruth: malformed JSON: " + std::string(e.what()));
  }
  GroundTruth gt;
  gt.seed = j.at("seed").get<std::uint64_t>();
  const auto dom = j.at("expected_dominant").get<std::string>();
  if (!dom.empty()) gt.expected_dominant = attr::driver_from_name(dom);
  gt.expected_lag = j.at("expected_lag").get<int>();
  for (const auto& e : j.at("events")) {
    gt.events.push_back({e.at("cell").get<int>(), e.at("sign").get<int>(),
                         e.at("start").get<int>(), e.at("end").get<int>()});
  }
  gt.monthly_injected_pos = j.at("monthly_injected_pos").get<std::vector<double>>();
  gt.monthly_injected_neg = j.at("monthly_injected_neg").get<std::vector<double>>();
  gt.injected_total = j.at("injected_total").get<double>();
  gt.neg_intensity_slope = j.at("neg_intensity_slope").get<double>();
  gt.pos_intensity_slope = j.at("pos_intensity_slope").get<double>();
  gt.compound_cells = j.at("compound_cells").get<std::vector<int>>();
  gt.compound_target = j.at("compound_target").get<double>();
  for (auto it = j.at("region_b1").begin(); it != j.at("region_b1").end(); ++it)
    gt.region_b1[std::stoi(it.key())] = it.value().get<double>();
  return gt;
}

std::string Scorecard::to_json() const {
  nlohmann::ordered_json j;
  j["tce_recall"] = tce_recall;
  j["tce_precision"] = tce_precision;
  j["dominant_driver_accuracy"] = dominant_driver_accuracy;
  j["compound_fraction_error"] = compound_fraction_error;
  j["sensitivity_rel_error"] = sensitivity_rel_error;
  j["neg_slope_rel_error"] = neg_slope_rel_error;
  j["pos_slope_rel_error"] = pos_slope_rel_error;
  return j.dump(2);
}

Scorecard score(const GroundTruth& truth, const PipelineResults& results) {
  Scorecard sc;
  // TCE recovery: an injected event is recalled when a detected event of the
  // same cell and sign overlaps it; a detected event is precise when it
  // overlaps some injected event.
  int recalled = 0;
  for (const auto& e : truth.events) {
    bool hit = false;
    for (const auto& d : results.detected_events) {
      if (d.cell != e.cell || d.sign != e.sign) continue;
      if (d.start <= e.end && e.start <= d.end) {
        hit = true;
        break;
      }
    }
    recalled += hit ? 1 : 0;
  }
  sc.tce_recall = truth.events.empty() ? 1.0 : static_cast<double>(recalled) / truth.events.size();
  int precise = 0;
  for (const auto& d : results.detected_events) {
    bool hit = false;
    for (const auto& e : truth.events) {
      if (d.cell != e.cell || d.sign != e.sign) continue;
      if (d.start <= e.end && e.start <= d.end) {
        hit = true;
        break;
      }
    }
    precise += hit ? 1 : 0;
  }
  sc.tce_precision = results.detected_events.empty()
                         ? (truth.events.empty() ? 1.0 : 0.0)
                         : static_cast<double>(precise) / results.detected_events.size();

  if (truth.expected_dominant && results.attributable_cells > 0)
    sc.dominant_driver_accuracy = static_cast<double>(results.correct_dominant) /
                                  static_cast<double>(results.attributable_cells);

  sc.compound_fraction_error =
      std::fabs(results.recovered_compound_exclusive - truth.compound_target);

  if (!truth.region_b1.empty()) {
    double err = 0.0;
    int n = 0;
    for (const auto& [region, b1_prog] : truth.region_b1) {
      const auto it = results.region_b1.find(region);
      if (it == results.region_b1.end() || b1_prog == 0.0) continue;
      for (double b1_rec : it->second) {
        err += std::fabs(b1_rec / b1_prog - 1.0);
        ++n;
      }
    }
    sc.sensitivity_rel_error = n > 0 ? err / n : 0.0;
  }

  if (truth.neg_intensity_slope != 0.0)
    sc.neg_slope_rel_error =
        std::fabs(results.neg_intensity_slope / truth.neg_intensity_slope - 1.0);
  if (truth.pos_intensity_slope != 0.0)
    sc.pos_slope_rel_error =
        std::fabs(results.pos_intensity_slope / truth.pos_intensity_slope - 1.0);
  return sc;
}

}  // namespace carbonx::synth
