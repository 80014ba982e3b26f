#include "carbonx/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "carbonx/error.hpp"
#include "carbonx/parallel.hpp"
#include "carbonx/regional.hpp"
#include "carbonx/ssa.hpp"
#include "carbonx/stats.hpp"
#include "carbonx/svg.hpp"

namespace carbonx::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// shortest round-trip formatting keeps CSV output bit-stable
std::string num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}
std::string num(int v) { return std::to_string(v); }

class CsvWriter {
public:
  CsvWriter(const std::string& path, const std::string& header) : out_(path, std::ios::trunc) {
    if (!out_) fail_data("cannot open output file " + path);
    out_ << header << "\n";
  }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ",";
      out_ << fields[i];
    }
    out_ << "\n";
  }

private:
  std::ofstream out_;
};

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_data("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

// window-relative per-cell series
std::vector<double> cell_window_series(const grid::GridStack& stack,
                                       const extremes::WindowRange& range, int cell) {
  std::vector<double> out(static_cast<std::size_t>(range.count));
  for (int t = 0; t < range.count; ++t)
    out[static_cast<std::size_t>(t)] = stack.at(range.first + t, cell);
  return out;
}

struct Context {
  RunConfig cfg;
  Options opt;

  grid::GridStack nbp;
  std::map<attr::Driver, grid::GridStack> drivers;
  std::optional<grid::RegionMask> regions;
  std::vector<int> land;

  grid::GridStack nbp_trend, nbp_mac, nbp_anom;
  std::map<attr::Driver, grid::GridStack> driver_anom;

  std::vector<extremes::WindowSpec> windows;
  std::vector<extremes::WindowRange> ranges;
  std::vector<double> thresholds;
  std::vector<extremes::Masks> masks;
  std::vector<extremes::IntensitySeries> intensity;
  std::vector<std::vector<extremes::TceEvent>> catalogs;

  struct WindowAttribution {
    std::vector<int> qualifying_cells;
    // [lag index][qualifying-cell index] -> records for all drivers
    std::vector<std::vector<std::vector<attr::AttributionRecord>>> records;
  };
  std::vector<WindowAttribution> attribution;

  bool loaded = false, decomposed = false, extremes_done = false, tces_done = false,
       attribution_done = false;
};

grid::GridStack load_input(const std::string& path) {
  if (!fs::exists(path)) fail_data("input file not found: " + path);
  grid::GridStack s = grid::load_gridstack(path);
  if (s.units == grid::kFluxUnits) s = grid::flux_to_mass(s, grid::cell_areas(s));
  return s;
}

void stage_load(Context& ctx) {
  if (ctx.loaded) return;
  if (ctx.cfg.inputs.nbp.empty()) fail_config("run config: inputs.nbp is required");
  ctx.nbp = load_input(ctx.cfg.inputs.nbp);
  ctx.land = ctx.nbp.land_cells();
  const std::pair<attr::Driver, const std::string*> driver_paths[] = {
      {attr::Driver::SM, &ctx.cfg.inputs.sm},
      {attr::Driver::Prcp, &ctx.cfg.inputs.prcp},
      {attr::Driver::TAS, &ctx.cfg.inputs.tas},
      {attr::Driver::Fire, &ctx.cfg.inputs.fire},
  };
  for (const auto& [d, path] : driver_paths) {
    if (path->empty()) continue;
    grid::GridStack s = load_input(*path);
    if (s.n_time != ctx.nbp.n_time || s.n_cell() != ctx.nbp.n_cell())
      fail_data("driver grid shape differs from nbp: " + *path);
    ctx.drivers.emplace(d, std::move(s));
  }
  if (!ctx.cfg.inputs.region_mask.empty()) {
    ctx.regions =
        grid::load_region_mask(ctx.cfg.inputs.region_mask, ctx.cfg.inputs.region_table);
  } else if (!ctx.cfg.inputs.region_rects.empty()) {
    ctx.regions =
        grid::region_mask_from_rects(ctx.cfg.inputs.region_rects, ctx.nbp.lats, ctx.nbp.lons);
  }
  if (ctx.regions && ctx.regions->region_id.size() != static_cast<std::size_t>(ctx.nbp.n_cell()))
    fail_data("region mask shape differs from nbp grid");
  ctx.loaded = true;
}

// split one stack into (trend, mac, anomaly) stacks, cells in parallel
void decompose_stack(const grid::GridStack& in, int ssa_window, int threads,
                     const std::vector<int>& land, grid::GridStack* trend,
                     grid::GridStack* mac, grid::GridStack& anom) {
  anom = in;
  anom.name = in.name + ".anomaly";
  if (trend) {
    *trend = in;
    trend->name = in.name + ".trend";
  }
  if (mac) {
    *mac = in;
    mac->name = in.name + ".mac";
  }
  ssa::SsaOptions opt;
  opt.window = ssa_window;
  parallel_for(land.size(), threads, [&](std::size_t i) {
    const int c = land[i];
    std::vector<double> series(static_cast<std::size_t>(in.n_time));
    for (int t = 0; t < in.n_time; ++t) series[static_cast<std::size_t>(t)] = in.at(t, c);
    const auto d = ssa::ssa_split(series, opt);
    for (int t = 0; t < in.n_time; ++t) {
      anom.at(t, c) = d.anomaly[static_cast<std::size_t>(t)];
      if (trend) trend->at(t, c) = d.trend[static_cast<std::size_t>(t)];
      if (mac) mac->at(t, c) = d.mac[static_cast<std::size_t>(t)];
    }
  });
}

void stage_decompose(Context& ctx) {
  if (ctx.decomposed) return;
  stage_load(ctx);
  decompose_stack(ctx.nbp, ctx.cfg.ssa_window, ctx.opt.threads, ctx.land, &ctx.nbp_trend,
                  &ctx.nbp_mac, ctx.nbp_anom);
  for (const auto& [d, stack] : ctx.drivers) {
    grid::GridStack anom;
    decompose_stack(stack, ctx.cfg.ssa_window, ctx.opt.threads, ctx.land, nullptr, nullptr,
                    anom);
    ctx.driver_anom.emplace(d, std::move(anom));
  }
  ctx.decomposed = true;
}

void stage_extremes(Context& ctx) {
  if (ctx.extremes_done) return;
  stage_decompose(ctx);
  ctx.windows = extremes::tile_windows(ctx.cfg.window_start_year, ctx.cfg.window_length_years,
                                       ctx.cfg.window_count);
  for (const auto& w : ctx.windows) {
    const auto range = extremes::window_range(ctx.nbp_anom, w);
    const auto samples = extremes::window_samples(ctx.nbp_anom, range, ctx.land);
    const double q = extremes::threshold_q(samples);
    ctx.ranges.push_back(range);
    ctx.thresholds.push_back(q);
    ctx.masks.push_back(extremes::extreme_masks(ctx.nbp_anom, range, q));
    ctx.intensity.push_back(extremes::intensity_series(ctx.nbp_anom, range, ctx.masks.back()));
  }
  ctx.extremes_done = true;
}

void stage_tces(Context& ctx) {
  if (ctx.tces_done) return;
  stage_extremes(ctx);
  for (std::size_t w = 0; w < ctx.windows.size(); ++w)
    ctx.catalogs.push_back(
        extremes::tce_catalog(ctx.nbp_anom, ctx.ranges[w], ctx.masks[w], ctx.land));
  ctx.tces_done = true;
}

void stage_attribution(Context& ctx) {
  if (ctx.attribution_done) return;
  stage_tces(ctx);
  if (ctx.drivers.empty()) fail_config("attribution requires driver inputs");
  for (std::size_t w = 0; w < ctx.windows.size(); ++w) {
    Context::WindowAttribution wa;
    // group events by cell (catalog is ordered by cell)
    std::map<int, std::vector<extremes::TceEvent>> by_cell;
    for (const auto& e : ctx.catalogs[w]) by_cell[e.cell].push_back(e);
    for (const auto& [cell, events] : by_cell)
      if (attr::cell_qualifies(events)) wa.qualifying_cells.push_back(cell);

    wa.records.resize(ctx.cfg.lags.size());
    for (auto& per_lag : wa.records) per_lag.resize(wa.qualifying_cells.size());

    parallel_for(wa.qualifying_cells.size(), ctx.opt.threads, [&](std::size_t i) {
      const int cell = wa.qualifying_cells[i];
      const auto& events = by_cell.at(cell);
      const auto nbp_series = cell_window_series(ctx.nbp_anom, ctx.ranges[w], cell);
      std::map<attr::Driver, std::vector<double>> driver_series;
      for (const auto& [d, anom] : ctx.driver_anom)
        driver_series.emplace(d, cell_window_series(anom, ctx.ranges[w], cell));
      for (std::size_t li = 0; li < ctx.cfg.lags.size(); ++li) {
        for (const auto& [d, series] : driver_series) {
          auto rec = attr::attribute_cell(nbp_series, events, series, d, ctx.cfg.lags[li]);
          if (rec) wa.records[li][i].push_back(*rec);
        }
      }
    });
    ctx.attribution.push_back(std::move(wa));
  }
  ctx.attribution_done = true;
}

std::string out_path(const Context& ctx, const std::string& name) {
  fs::create_directories(ctx.opt.out_dir);
  return (fs::path(ctx.opt.out_dir) / name).string();
}

int plot_lag(const RunConfig& cfg) {
  for (int l : cfg.lags)
    if (l == 1) return 1;
  return cfg.lags.empty() ? 0 : cfg.lags.front();
}

void write_decompose(Context& ctx) {
  stage_decompose(ctx);
  grid::save_gridstack(ctx.nbp_trend, out_path(ctx, "nbp_trend.grid"));
  grid::save_gridstack(ctx.nbp_mac, out_path(ctx, "nbp_mac.grid"));
  grid::save_gridstack(ctx.nbp_anom, out_path(ctx, "nbp_anomaly.grid"));
  for (const auto& [d, anom] : ctx.driver_anom) {
    std::string name = attr::driver_name(d);
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    grid::save_gridstack(anom, out_path(ctx, name + "_anomaly.grid"));
  }
}

void write_extremes(Context& ctx) {
  stage_extremes(ctx);
  CsvWriter th(out_path(ctx, "thresholds.csv"), "window_start_year,q_gc_per_month");
  for (std::size_t w = 0; w < ctx.windows.size(); ++w)
    th.row({num(ctx.windows[w].start_year), num(ctx.thresholds[w])});

  CsvWriter in(out_path(ctx, "intensity.csv"),
               "window_start_year,month_index,year,month,pos_gc_per_month,neg_gc_per_month");
  for (std::size_t w = 0; w < ctx.windows.size(); ++w) {
    for (int m = 0; m < ctx.ranges[w].count; ++m) {
      const auto [year, month] = ctx.nbp.calendar_month(ctx.ranges[w].first + m);
      in.row({num(ctx.windows[w].start_year), num(m), num(year), num(month),
              num(ctx.intensity[w].pos[static_cast<std::size_t>(m)]),
              num(ctx.intensity[w].neg[static_cast<std::size_t>(m)])});
    }
  }
  if (ctx.opt.svg) {
    svgplot::Series pos{"positive", {}}, neg{"negative", {}};
    for (const auto& s : ctx.intensity) {
      pos.y.insert(pos.y.end(), s.pos.begin(), s.pos.end());
      neg.y.insert(neg.y.end(), s.neg.begin(), s.neg.end());
    }
    svgplot::write_file(out_path(ctx, "intensity.svg"),
                        svgplot::line_chart("extreme intensity (gC/month)", {pos, neg}));
  }
}

void write_tces(Context& ctx) {
  stage_tces(ctx);
  CsvWriter out(out_path(ctx, "tce_events.csv"),
                "cell_lat,cell_lon,window_start_year,sign,start_month,end_month,"
                "n_extreme_months,integrated_gc");
  for (std::size_t w = 0; w < ctx.windows.size(); ++w) {
    for (const auto& e : ctx.catalogs[w]) {
      out.row({num(ctx.nbp.cell_lat(e.cell)), num(ctx.nbp.cell_lon(e.cell)),
               num(ctx.windows[w].start_year),
               e.sign == extremes::Sign::Positive ? "pos" : "neg", num(e.start_month),
               num(e.end_month), num(static_cast<int>(e.extreme_months.size())),
               num(e.integrated_anomaly)});
    }
  }
}

void write_attribution(Context& ctx) {
  stage_attribution(ctx);
  CsvWriter rec(out_path(ctx, "attribution.csv"),
                "cell_lat,cell_lon,window_start_year,driver,lag,rho,p,n");
  CsvWriter dom(out_path(ctx, "dominant.csv"),
                "cell_lat,cell_lon,window_start_year,lag,driver,rho");
  CsvWriter sum(out_path(ctx, "dominance_summary.csv"),
                "window_start_year,lag,driver,percent,cells,response");
  for (std::size_t w = 0; w < ctx.windows.size(); ++w) {
    const auto& wa = ctx.attribution[w];
    for (std::size_t li = 0; li < ctx.cfg.lags.size(); ++li) {
      std::vector<std::pair<std::optional<attr::Driver>, double>> dom_per_cell;
      for (std::size_t i = 0; i < wa.qualifying_cells.size(); ++i) {
        const int cell = wa.qualifying_cells[i];
        const auto& records = wa.records[li][i];
        for (const auto& r : records) {
          rec.row({num(ctx.nbp.cell_lat(cell)), num(ctx.nbp.cell_lon(cell)),
                   num(ctx.windows[w].start_year), attr::driver_name(r.driver), num(r.lag),
                   num(r.rho), num(r.p), num(r.n)});
        }
        const auto d = attr::dominant_driver(records, ctx.cfg.p_max);
        double rho = 0.0;
        if (d) {
          for (const auto& r : records)
            if (r.driver == *d) rho = r.rho;
          dom.row({num(ctx.nbp.cell_lat(cell)), num(ctx.nbp.cell_lon(cell)),
                   num(ctx.windows[w].start_year), num(ctx.cfg.lags[li]),
                   attr::driver_name(*d), num(rho)});
        }
        dom_per_cell.emplace_back(d, rho);
      }
      for (const auto& s : attr::dominance_summary(dom_per_cell)) {
        sum.row({num(ctx.windows[w].start_year), num(ctx.cfg.lags[li]),
                 attr::driver_name(s.driver), num(s.percent), num(s.cells),
                 std::string(1, s.response)});
      }
    }
  }
  if (ctx.opt.svg && !ctx.windows.empty()) {
    // dominance shares of the last window at the plot lag
    const std::size_t w = ctx.windows.size() - 1;
    std::size_t li = 0;
    for (std::size_t i = 0; i < ctx.cfg.lags.size(); ++i)
      if (ctx.cfg.lags[i] == plot_lag(ctx.cfg)) li = i;
    std::vector<std::pair<std::optional<attr::Driver>, double>> dom_per_cell;
    for (std::size_t i = 0; i < ctx.attribution[w].qualifying_cells.size(); ++i) {
      const auto& records = ctx.attribution[w].records[li][i];
      const auto d = attr::dominant_driver(records, ctx.cfg.p_max);
      double rho = 0.0;
      if (d)
        for (const auto& r : records)
          if (r.driver == *d) rho = r.rho;
      dom_per_cell.emplace_back(d, rho);
    }
    std::vector<svgplot::Bar> bars;
    for (const auto& s : attr::dominance_summary(dom_per_cell))
      bars.push_back({attr::driver_name(s.driver) + " (" + s.response + ")", s.percent});
    svgplot::write_file(out_path(ctx, "dominance.svg"),
                        svgplot::bar_chart("dominant driver share (%)", bars));
  }
}

void write_compound(Context& ctx) {
  stage_attribution(ctx);
  CsvWriter out(out_path(ctx, "compound.csv"),
                "window_start_year,lag,combo,inclusive,exclusive");
  std::vector<svgplot::Bar> bars;
  for (std::size_t w = 0; w < ctx.windows.size(); ++w) {
    const auto& wa = ctx.attribution[w];
    // TCE counts per qualifying cell
    std::map<int, int> tce_count;
    for (const auto& e : ctx.catalogs[w]) ++tce_count[e.cell];
    for (std::size_t li = 0; li < ctx.cfg.lags.size(); ++li) {
      std::vector<std::pair<attr::CompoundLabel, int>> labeled;
      for (std::size_t i = 0; i < wa.qualifying_cells.size(); ++i) {
        const int cell = wa.qualifying_cells[i];
        labeled.emplace_back(
            attr::compound_label(wa.records[li][i], ctx.cfg.tau, ctx.cfg.p_max),
            tce_count[cell]);
      }
      for (const auto& f : attr::compound_fractions(labeled)) {
        out.row({num(ctx.windows[w].start_year), num(ctx.cfg.lags[li]), f.combo.key(),
                 num(f.inclusive), num(f.exclusive)});
        if (ctx.opt.svg && w == ctx.windows.size() - 1 &&
            ctx.cfg.lags[li] == plot_lag(ctx.cfg) && f.exclusive > 0.0)
          bars.push_back({f.combo.key(), f.exclusive});
      }
    }
  }
  if (ctx.opt.svg)
    svgplot::write_file(out_path(ctx, "compound.svg"),
                        svgplot::bar_chart("exclusive driver combinations (fraction of TCEs)",
                                           bars));
}

void write_regions(Context& ctx) {
  stage_tces(ctx);
  if (!ctx.regions) fail_config("regional outputs require a region mask input");
  const auto& mask = *ctx.regions;
  constexpr double kPg = 1e15;

  CsvWriter net(out_path(ctx, "regions_net.csv"),
                "region_id,abbr,window_start_year,pos_pgc,neg_pgc,net_pgc,n_pos_tce,"
                "n_neg_tce,neg_tce_pgc,dominance");
  CsvWriter counts(out_path(ctx, "region_dominance_counts.csv"),
                   "window_start_year,n_positive,n_negative,n_zero,percent_positive,"
                   "percent_negative");
  for (std::size_t w = 0; w < ctx.windows.size(); ++w) {
    const auto summaries = regional::window_net_extremes(
        ctx.nbp_anom, ctx.ranges[w], ctx.masks[w], ctx.catalogs[w], mask, ctx.windows[w]);
    for (const auto& s : summaries) {
      net.row({num(s.region_id), mask.table.at(s.region_id).abbr, num(s.window_start_year),
               num(s.pos_total_gc / kPg), num(s.neg_total_gc / kPg),
               num(s.net_extreme_gc / kPg), num(s.n_pos_tce), num(s.n_neg_tce),
               num(s.neg_tce_total_gc / kPg), std::string(1, s.dominance)});
    }
    const auto c = regional::dominance_counts(summaries);
    counts.row({num(ctx.windows[w].start_year), num(c.n_positive), num(c.n_negative),
                num(c.n_zero), num(c.percent_positive), num(c.percent_negative)});
  }

  CsvWriter phase(out_path(ctx, "uptake_release.csv"),
                  "region_id,month_index,year,month,nbp_gc_per_month,phase");
  for (const auto& [region_id, info] : mask.table) {
    const auto series =
        regional::region_series(ctx.nbp, mask, region_id, regional::AggregateMode::Sum);
    const auto phases = regional::uptake_release_split(series);
    for (int t = 0; t < ctx.nbp.n_time; ++t) {
      const auto [year, month] = ctx.nbp.calendar_month(t);
      phase.row({num(region_id), num(t), num(year), num(month),
                 num(series[static_cast<std::size_t>(t)]),
                 phases[static_cast<std::size_t>(t)] == regional::FluxPhase::Uptake
                     ? "uptake"
                     : "release"});
    }
  }

  if (ctx.drivers.count(attr::Driver::TAS)) {
    CsvWriter qcsv(out_path(ctx, "tas_quantiles.csv"),
                   "region_id,abbr,quantile,window_start_year,value_degc,rate_degc_per_decade");
    for (const auto& [region_id, info] : mask.table) {
      const auto tas = regional::region_series(ctx.drivers.at(attr::Driver::TAS), mask,
                                               region_id,
                                               regional::AggregateMode::AreaWeightedMean);
      const auto trends = regional::temperature_quantiles(
          tas, ctx.nbp.t0_year, ctx.windows, ctx.cfg.quantile_levels);
      for (const auto& qt : trends)
        for (std::size_t w = 0; w < ctx.windows.size(); ++w)
          qcsv.row({num(region_id), info.abbr, num(qt.quantile),
                    num(ctx.windows[w].start_year), num(qt.per_window[w]),
                    num(qt.rate_per_decade)});
    }
  }
}

void write_sensitivity(Context& ctx) {
  stage_load(ctx);
  if (!ctx.regions) fail_config("sensitivity requires a region mask input");
  if (!ctx.drivers.count(attr::Driver::TAS)) fail_config("sensitivity requires a TAS input");
  const auto& mask = *ctx.regions;
  CsvWriter out(out_path(ctx, "sensitivity.csv"),
                "region_id,abbr,decade_start_year,b0_ggc,b1_ggc_per_degc,r2,n");
  std::vector<svgplot::Series> lines;
  for (const auto& [region_id, info] : mask.table) {
    const auto nbp =
        regional::region_series(ctx.nbp, mask, region_id, regional::AggregateMode::Sum);
    const auto tas = regional::region_series(ctx.drivers.at(attr::Driver::TAS), mask,
                                             region_id,
                                             regional::AggregateMode::AreaWeightedMean);
    auto records = regional::sensitivity(nbp, tas, ctx.nbp.t0_year,
                                         ctx.cfg.sensitivity_start_year,
                                         ctx.cfg.sensitivity_n_decades);
    svgplot::Series line{info.abbr, {}};
    for (auto& r : records) {
      r.region_id = region_id;
      out.row({num(r.region_id), info.abbr, num(r.start_year), num(r.b0_ggc),
               num(r.b1_ggc_per_degc), num(r.r2), num(r.n)});
      line.y.push_back(r.b1_ggc_per_degc);
    }
    lines.push_back(std::move(line));
  }
  if (ctx.opt.svg)
    svgplot::write_file(out_path(ctx, "sensitivity.svg"),
                        svgplot::line_chart("decadal sensitivity b1 (GgC/month/degC)", lines));
}

}  // namespace

RunConfig RunConfig::parse(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    fail_config("run config: malformed JSON: " + std::string(e.what()));
  }
  RunConfig c;
  if (j.contains("inputs")) {
    const auto& ji = j["inputs"];
    auto get = [&ji](const char* key) {
      return ji.contains(key) ? ji[key].get<std::string>() : std::string();
    };
    c.inputs.nbp = get("nbp");
    c.inputs.prcp = get("prcp");
    c.inputs.sm = get("sm");
    c.inputs.tas = get("tas");
    c.inputs.fire = get("fire");
    c.inputs.region_mask = get("region_mask");
    c.inputs.region_table = get("region_table");
    c.inputs.region_rects = get("region_rects");
  }
  if (j.contains("windows")) {
    const auto& jw = j["windows"];
    if (jw.contains("start_year")) c.window_start_year = jw["start_year"].get<int>();
    if (jw.contains("length_years")) c.window_length_years = jw["length_years"].get<int>();
    if (jw.contains("count")) c.window_count = jw["count"].get<int>();
  }
  if (j.contains("ssa") && j["ssa"].contains("window"))
    c.ssa_window = j["ssa"]["window"].get<int>();
  if (j.contains("lags")) c.lags = j["lags"].get<std::vector<int>>();
  if (j.contains("tau")) c.tau = j["tau"].get<double>();
  if (j.contains("p_max")) c.p_max = j["p_max"].get<double>();
  if (j.contains("sensitivity")) {
    const auto& js = j["sensitivity"];
    if (js.contains("start_year")) c.sensitivity_start_year = js["start_year"].get<int>();
    if (js.contains("n_decades")) c.sensitivity_n_decades = js["n_decades"].get<int>();
  }
  if (j.contains("quantiles")) c.quantile_levels = j["quantiles"].get<std::vector<double>>();
  for (int l : c.lags)
    if (l < 0 || l > 4) fail_config("run config: lags must be within 0..4");
  if (c.window_length_years < 1 || c.window_count < 1)
    fail_config("run config: invalid window spec");
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_config("run config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void cmd_decompose(const RunConfig& cfg, const Options& opt) {
  Context ctx{cfg, opt};
  write_decompose(ctx);
}
void cmd_extremes(const RunConfig& cfg, const Options& opt) {
  Context ctx{cfg, opt};
  write_extremes(ctx);
}
void cmd_tce(const RunConfig& cfg, const Options& opt) {
  Context ctx{cfg, opt};
  write_tces(ctx);
}
void cmd_attribute(const RunConfig& cfg, const Options& opt) {
  Context ctx{cfg, opt};
  write_attribution(ctx);
}
void cmd_compound(const RunConfig& cfg, const Options& opt) {
  Context ctx{cfg, opt};
  write_compound(ctx);
}
void cmd_regions(const RunConfig& cfg, const Options& opt) {
  Context ctx{cfg, opt};
  write_regions(ctx);
}
void cmd_sensitivity(const RunConfig& cfg, const Options& opt) {
  Context ctx{cfg, opt};
  write_sensitivity(ctx);
}
void cmd_pipeline(const RunConfig& cfg, const Options& opt) {
  Context ctx{cfg, opt};
  write_decompose(ctx);
  write_extremes(ctx);
  write_tces(ctx);
  stage_load(ctx);
  if (!ctx.drivers.empty()) {
    write_attribution(ctx);
    write_compound(ctx);
  }
  if (ctx.regions) {
    write_regions(ctx);
    if (ctx.drivers.count(attr::Driver::TAS)) write_sensitivity(ctx);
  }
}

void cmd_synth(const std::string& synth_config_path, const Options& opt,
               std::optional<std::uint64_t> seed_override) {
  synth::SynthConfig sc = synth::load_config(synth_config_path);
  if (seed_override) sc.seed = *seed_override;
  const auto out = synth::generate(sc);
  fs::create_directories(opt.out_dir);
  auto path = [&](const std::string& name) {
    return (fs::path(opt.out_dir) / name).string();
  };
  grid::save_gridstack(out.nbp, path("nbp.grid"));
  grid::save_gridstack(out.prcp, path("prcp.grid"));
  grid::save_gridstack(out.sm, path("sm.grid"));
  grid::save_gridstack(out.tas, path("tas.grid"));
  grid::save_gridstack(out.fire, path("fire.grid"));
  grid::save_region_mask(out.regions, out.nbp, path("region_mask.grid"),
                         path("region_table.json"));
  {
    std::ofstream gt(path("ground_truth.json"), std::ios::trunc);
    gt << out.truth.to_json() << "\n";
  }
  // matching run config for the pipeline
  nlohmann::ordered_json rc;
  rc["inputs"] = {{"nbp", path("nbp.grid")},     {"prcp", path("prcp.grid")},
                  {"sm", path("sm.grid")},       {"tas", path("tas.grid")},
                  {"fire", path("fire.grid")},   {"region_mask", path("region_mask.grid")},
                  {"region_table", path("region_table.json")}};
  const int window_years = 25;
  rc["windows"] = {{"start_year", sc.start_year},
                   {"length_years", window_years},
                   {"count", sc.years / window_years}};
  rc["ssa"] = {{"window", 120}};
  rc["lags"] = std::vector<int>{0, 1, 2, 3, 4};
  rc["tau"] = 0.6;
  rc["p_max"] = 0.05;
  rc["sensitivity"] = {{"start_year", sc.start_year}, {"n_decades", sc.years / 10}};
  std::ofstream rcf(path("run_config.json"), std::ios::trunc);
  rcf << rc.dump(2) << "\n";
}

synth::PipelineResults gather_results(const RunConfig& cfg, const std::string& out_dir,
                                      const synth::GroundTruth& truth) {
  synth::PipelineResults res;
  const grid::GridStack nbp = grid::load_gridstack(cfg.inputs.nbp);
  auto cell_of = [&nbp](double lat, double lon) {
    auto idx = [](const std::vector<double>& axis, double v) {
      for (std::size_t i = 0; i < axis.size(); ++i)
        if (std::fabs(axis[i] - v) < 1e-9) return static_cast<int>(i);
      fail_data("gather_results: coordinate not on the grid");
    };
    return nbp.cell_index(idx(nbp.lats, lat), idx(nbp.lons, lon));
  };
  const auto art = [&out_dir](const std::string& name) {
    return (fs::path(out_dir) / name).string();
  };

  for (const auto& row : read_csv(art("tce_events.csv"))) {
    synth::InjectedEvent e;
    e.cell = cell_of(std::stod(row[0]), std::stod(row[1]));
    const int window_start = (std::stoi(row[2]) - nbp.t0_year) * 12;
    e.sign = row[3] == "pos" ? +1 : -1;
    e.start = window_start + std::stoi(row[4]);
    e.end = window_start + std::stoi(row[5]);
    res.detected_events.push_back(e);
  }

  // dominant driver per qualifying (cell, window) pair at the expected lag
  for (const auto& row : read_csv(art("dominant.csv"))) {
    if (std::stoi(row[3]) != truth.expected_lag) continue;
    const auto d = attr::driver_from_name(row[4]);
    if (!d) fail_data("gather_results: unknown driver in dominant.csv");
    ++res.attributable_cells;
    if (truth.expected_dominant && *d == *truth.expected_dominant) ++res.correct_dominant;
  }

  // compound exclusive fraction for the target combination, mean over windows
  {
    attr::CompoundLabel target;
    target.hot = target.dry = target.fire = true;
    double sum = 0.0;
    int n = 0;
    for (const auto& row : read_csv(art("compound.csv"))) {
      if (std::stoi(row[1]) != truth.expected_lag) continue;
      if (row[2] != target.key()) continue;
      sum += std::stod(row[4]);
      ++n;
    }
    res.recovered_compound_exclusive = n > 0 ? sum / n : 0.0;
  }

  if (fs::exists(art("sensitivity.csv"))) {
    for (const auto& row : read_csv(art("sensitivity.csv"))) {
      if (std::stoi(row[6]) < 100) continue;  // decades with enough defined months
      res.region_b1[std::stoi(row[0])].push_back(std::stod(row[4]));
    }
  }

  {
    std::vector<double> pos, neg;
    for (const auto& row : read_csv(art("intensity.csv"))) {
      pos.push_back(std::stod(row[4]));
      neg.push_back(std::stod(row[5]));
    }
    if (pos.size() >= 2) {
      res.pos_intensity_slope = stats::linear_trend(pos);
      res.neg_intensity_slope = stats::linear_trend(neg);
    }
  }
  return res;
}

synth::Scorecard cmd_scorecard(const RunConfig& cfg, const Options& opt,
                               const std::string& truth_path) {
  std::ifstream in(truth_path);
  if (!in) fail_data("scorecard: cannot open " + truth_path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto truth = synth::GroundTruth::from_json(ss.str());
  const auto results = gather_results(cfg, opt.out_dir, truth);
  const auto sc = synth::score(truth, results);
  fs::create_directories(opt.out_dir);
  std::ofstream out((fs::path(opt.out_dir) / "scorecard.json").string(), std::ios::trunc);
  out << sc.to_json() << "\n";
  return sc;
}

}  // namespace carbonx::pipeline
