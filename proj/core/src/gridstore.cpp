#include "carbonx/gridstore.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "carbonx/error.hpp"

namespace carbonx::grid {

namespace {

using ordered_json = nlohmann::ordered_json;

void check_axis(const std::vector<double>& axis, const char* what, double lo, double hi,
                bool strict_bounds) {
  if (axis.empty()) fail_data(std::string(what) + ": empty axis");
  for (double v : axis) {
    const bool inside = strict_bounds ? (v > lo && v < hi) : (v >= lo && v < hi);
    if (!inside) fail_data(std::string(what) + ": coordinate out of bounds");
  }
  if (axis.size() > 1) {
    const double step = axis[1] - axis[0];
    if (step <= 0.0) fail_data(std::string(what) + ": axis not strictly ascending");
    for (std::size_t i = 1; i < axis.size(); ++i) {
      const double d = axis[i] - axis[i - 1];
      if (d <= 0.0) fail_data(std::string(what) + ": axis not strictly ascending");
      if (std::fabs(d - step) > 1e-9 * std::max(1.0, std::fabs(step)))
        fail_data(std::string(what) + ": axis spacing not uniform");
    }
  }
}

}  // namespace

std::vector<int> GridStack::land_cells() const {
  std::vector<int> out;
  for (int c = 0; c < n_cell(); ++c)
    if (is_land(c)) out.push_back(c);
  return out;
}

void GridStack::validate() const {
  if (n_time < 1) fail_data("GridStack: n_time must be positive");
  if (t0_month < 1 || t0_month > 12) fail_data("GridStack: t0_month out of range");
  check_axis(lats, "lats", -90.0, 90.0, /*strict_bounds=*/true);
  // longitudes may use either [0,360) or [-180,180)
  const bool lon_0_360 = lons.empty() || lons.front() >= 0.0;
  if (lon_0_360)
    check_axis(lons, "lons", 0.0, 360.0, /*strict_bounds=*/false);
  else
    check_axis(lons, "lons", -180.0, 180.0, /*strict_bounds=*/false);
  const std::size_t expected =
      static_cast<std::size_t>(n_time) * static_cast<std::size_t>(n_cell());
  if (values.size() != expected) fail_data("GridStack: payload length mismatch");
  // all-or-nothing fill per cell
  for (int c = 0; c < n_cell(); ++c) {
    const bool land = at(0, c) != fill;
    for (int t = 1; t < n_time; ++t) {
      if ((at(t, c) != fill) != land)
        fail_data("GridStack: cell masked for part of the time axis");
    }
  }
}

std::vector<int> RegionMask::region_ids() const {
  std::set<int> ids;
  for (int id : region_id)
    if (id != 0) ids.insert(id);
  return {ids.begin(), ids.end()};
}

void RegionMask::validate() const {
  for (int id : region_id) {
    if (id < 0) fail_data("RegionMask: negative region id");
    if (id != 0 && !table.count(id)) fail_data("RegionMask: id missing from table");
  }
}

GridStack load_gridstack(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_data("load_gridstack: cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) fail_data("load_gridstack: missing header line");
  ordered_json j;
  try {
    j = ordered_json::parse(header);
  } catch (const std::exception& e) {
    fail_data("load_gridstack: malformed header: " + std::string(e.what()));
  }
  GridStack s;
  try {
    s.name = j.at("name").get<std::string>();
    s.units = j.at("units").get<std::string>();
    s.t0_year = j.at("t0_year").get<int>();
    s.t0_month = j.at("t0_month").get<int>();
    s.n_time = j.at("n_time").get<int>();
    s.lats = j.at("lats").get<std::vector<double>>();
    s.lons = j.at("lons").get<std::vector<double>>();
    s.fill = j.at("fill").get<double>();
    if (j.at("dtype").get<std::string>() != "f64")
      fail_data("load_gridstack: unsupported dtype");
    if (j.at("byte_order").get<std::string>() != "LE")
      fail_data("load_gridstack: unsupported byte order");
  } catch (const ordered_json::exception& e) {
    fail_data("load_gridstack: malformed header: " + std::string(e.what()));
  }
  const std::size_t count = static_cast<std::size_t>(s.n_time) *
                            static_cast<std::size_t>(s.lats.size()) *
                            static_cast<std::size_t>(s.lons.size());
  s.values.resize(count);
  in.read(reinterpret_cast<char*>(s.values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double))
    fail_data("load_gridstack: payload shorter than header declares");
  char extra;
  if (in.read(&extra, 1)) fail_data("load_gridstack: payload longer than header declares");
  s.validate();
  return s;
}

void save_gridstack(const GridStack& stack, const std::string& path) {
  stack.validate();
  ordered_json j;
  j["name"] = stack.name;
  j["units"] = stack.units;
  j["t0_year"] = stack.t0_year;
  j["t0_month"] = stack.t0_month;
  j["n_time"] = stack.n_time;
  j["lats"] = stack.lats;
  j["lons"] = stack.lons;
  j["fill"] = stack.fill;
  j["dtype"] = "f64";
  j["byte_order"] = "LE";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_data("save_gridstack: cannot open " + path);
  out << j.dump() << "\n";
  out.write(reinterpret_cast<const char*>(stack.values.data()),
            static_cast<std::streamsize>(stack.values.size() * sizeof(double)));
  if (!out) fail_data("save_gridstack: write failed for " + path);
}

GridStack ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_data("ingest_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail_data("ingest_csv: empty file");

  struct Row {
    int year, month;
    double lat, lon, value;
  };
  std::vector<Row> rows;
  std::set<double> lat_set, lon_set;
  int min_m = 0, max_m = 0;
  bool first = true;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    Row r;
    char comma;
    if (!(ss >> r.year >> comma >> r.month >> comma >> r.lat >> comma >> r.lon >> comma >>
          r.value))
      fail_data("ingest_csv: bad row at line " + std::to_string(line_no));
    const int m = r.year * 12 + (r.month - 1);
    if (first) {
      min_m = max_m = m;
      first = false;
    } else {
      min_m = std::min(min_m, m);
      max_m = std::max(max_m, m);
    }
    lat_set.insert(r.lat);
    lon_set.insert(r.lon);
    rows.push_back(r);
  }
  if (rows.empty()) fail_data("ingest_csv: no data rows");

  GridStack s;
  s.name = "csv";
  s.units = "unknown";
  s.lats.assign(lat_set.begin(), lat_set.end());
  s.lons.assign(lon_set.begin(), lon_set.end());
  s.t0_year = min_m / 12;
  s.t0_month = min_m % 12 + 1;
  s.n_time = max_m - min_m + 1;
  s.values.assign(static_cast<std::size_t>(s.n_time) * s.n_cell(), s.fill);

  std::vector<uint8_t> seen(s.values.size(), 0);
  auto axis_index = [](const std::vector<double>& axis, double v) {
    return static_cast<int>(std::lower_bound(axis.begin(), axis.end(), v) - axis.begin());
  };
  for (const Row& r : rows) {
    const int t = (r.year * 12 + r.month - 1) - min_m;
    const int cell = s.cell_index(axis_index(s.lats, r.lat), axis_index(s.lons, r.lon));
    const std::size_t idx = static_cast<std::size_t>(t) * s.n_cell() + cell;
    if (seen[idx]) fail_data("ingest_csv: duplicate (year,month,lat,lon) row");
    seen[idx] = 1;
    s.values[idx] = r.value;
  }
  // a cell present at any month must be present at every month
  for (int c = 0; c < s.n_cell(); ++c) {
    int n_present = 0;
    for (int t = 0; t < s.n_time; ++t)
      n_present += seen[static_cast<std::size_t>(t) * s.n_cell() + c];
    if (n_present != 0 && n_present != s.n_time)
      fail_data("ingest_csv: ragged time coverage for a cell");
  }
  s.validate();
  return s;
}

double cell_area(double lat, double dlat, double dlon) {
  if (std::fabs(lat) + dlat / 2.0 > 90.0 + 1e-12) fail_data("cell_area: band crosses a pole");
  const double deg = M_PI / 180.0;
  const double s_hi = std::sin((lat + dlat / 2.0) * deg);
  const double s_lo = std::sin((lat - dlat / 2.0) * deg);
  return kEarthRadiusM * kEarthRadiusM * (dlon * deg) * (s_hi - s_lo);
}

std::vector<double> cell_areas(const GridStack& stack) {
  const double dlat = stack.lats.size() > 1 ? stack.lats[1] - stack.lats[0] : 1.0;
  const double dlon = stack.lons.size() > 1 ? stack.lons[1] - stack.lons[0] : 1.0;
  std::vector<double> areas(static_cast<std::size_t>(stack.n_cell()));
  for (int c = 0; c < stack.n_cell(); ++c)
    areas[static_cast<std::size_t>(c)] = cell_area(stack.cell_lat(c), dlat, dlon);
  return areas;
}

GridStack flux_to_mass(const GridStack& stack, const std::vector<double>& areas) {
  if (stack.units != kFluxUnits)
    fail_data("flux_to_mass: expected units " + std::string(kFluxUnits) + ", got " +
              stack.units);
  if (areas.size() != static_cast<std::size_t>(stack.n_cell()))
    fail_data("flux_to_mass: area vector shape mismatch");
  GridStack out = stack;
  out.units = kMassUnits;
  for (int t = 0; t < out.n_time; ++t) {
    const double sec = CalendarSpec::seconds_in_month((out.t0_month - 1) + t);
    for (int c = 0; c < out.n_cell(); ++c) {
      if (!out.is_land(c)) continue;
      out.at(t, c) = stack.at(t, c) * areas[static_cast<std::size_t>(c)] * sec * 1000.0;
    }
  }
  return out;
}

RegionMask load_region_mask(const std::string& grid_path, const std::string& table_path) {
  const GridStack g = load_gridstack(grid_path);
  if (g.n_time != 1) fail_data("load_region_mask: mask grid must have n_time = 1");
  RegionMask m;
  m.region_id.resize(static_cast<std::size_t>(g.n_cell()));
  for (int c = 0; c < g.n_cell(); ++c) {
    const double v = g.at(0, c);
    const double r = std::round(v);
    if (v == g.fill) {
      m.region_id[static_cast<std::size_t>(c)] = 0;
      continue;
    }
    if (std::fabs(v - r) > 1e-9 || r < 0)
      fail_data("load_region_mask: non-integer region id in payload");
    m.region_id[static_cast<std::size_t>(c)] = static_cast<int>(r);
  }
  std::ifstream in(table_path);
  if (!in) fail_data("load_region_mask: cannot open " + table_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail_data("load_region_mask: malformed table: " + std::string(e.what()));
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    const int id = std::stoi(it.key());
    m.table[id] = {it.value().at("abbr").get<std::string>(),
                   it.value().at("name").get<std::string>()};
  }
  m.validate();
  return m;
}

void save_region_mask(const RegionMask& mask, const GridStack& geometry,
                      const std::string& grid_path, const std::string& table_path) {
  mask.validate();
  GridStack g;
  g.name = "region_mask";
  g.units = "region_id";
  g.t0_year = geometry.t0_year;
  g.t0_month = geometry.t0_month;
  g.n_time = 1;
  g.lats = geometry.lats;
  g.lons = geometry.lons;
  g.values.resize(static_cast<std::size_t>(g.n_cell()));
  for (int c = 0; c < g.n_cell(); ++c)
    g.values[static_cast<std::size_t>(c)] =
        static_cast<double>(mask.region_id[static_cast<std::size_t>(c)]);
  save_gridstack(g, grid_path);

  ordered_json j;
  for (const auto& [id, info] : mask.table) {
    ordered_json entry;
    entry["abbr"] = info.abbr;
    entry["name"] = info.name;
    j[std::to_string(id)] = entry;
  }
  std::ofstream out(table_path, std::ios::trunc);
  if (!out) fail_data("save_region_mask: cannot open " + table_path);
  out << j.dump(2) << "\n";
}

RegionMask region_mask_from_rects(const std::string& json_path,
                                  const std::vector<double>& lats,
                                  const std::vector<double>& lons) {
  std::ifstream in(json_path);
  if (!in) fail_data("region_mask_from_rects: cannot open " + json_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail_data("region_mask_from_rects: malformed JSON: " + std::string(e.what()));
  }
  RegionMask m;
  m.region_id.assign(lats.size() * lons.size(), 0);
  for (const auto& r : j.at("regions")) {
    const int id = r.at("id").get<int>();
    if (id < 1) fail_data("region_mask_from_rects: region id must be >= 1");
    m.table[id] = {r.at("abbr").get<std::string>(), r.at("name").get<std::string>()};
    const double lat_min = r.at("lat_min").get<double>();
    const double lat_max = r.at("lat_max").get<double>();
    const double lon_min = r.at("lon_min").get<double>();
    const double lon_max = r.at("lon_max").get<double>();
    for (std::size_t i = 0; i < lats.size(); ++i) {
      if (lats[i] < lat_min || lats[i] > lat_max) continue;
      for (std::size_t k = 0; k < lons.size(); ++k) {
        if (lons[k] < lon_min || lons[k] > lon_max) continue;
        m.region_id[i * lons.size() + k] = id;  // later rectangles win overlaps
      }
    }
  }
  m.validate();
  return m;
}

}  // namespace carbonx::grid
