#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace carbonx::grid {

// 365-day model calendar with fixed month lengths.
struct CalendarSpec {
  static constexpr std::array<int, 12> month_lengths = {31, 28, 31, 30, 31, 30,
                                                        31, 31, 30, 31, 30, 31};
  // month_index counts months since the stack origin
  static int days_in_month(int month_index) {
    int m = month_index % 12;
    if (m < 0) m += 12;
    return month_lengths[static_cast<std::size_t>(m)];
  }
  static double seconds_in_month(int month_index) {
    return static_cast<double>(days_in_month(month_index)) * 86400.0;
  }
};

// Dense monthly (time x lat x lon) field. Layout is time-major:
// values[t * n_cell + ilat * n_lon + ilon]. A cell is land iff every timestep
// differs from `fill`; partial-time masking is rejected on validation.
struct GridStack {
  std::string name;
  std::string units;
  int t0_year = 1850;
  int t0_month = 1;  // 1..12
  int n_time = 0;
  std::vector<double> lats;  // degrees north, ascending, uniform spacing
  std::vector<double> lons;  // degrees east, ascending, uniform spacing
  double fill = -9.99e33;
  std::vector<double> values;

  int n_lat() const { return static_cast<int>(lats.size()); }
  int n_lon() const { return static_cast<int>(lons.size()); }
  int n_cell() const { return n_lat() * n_lon(); }

  double& at(int t, int cell) { return values[static_cast<std::size_t>(t) * n_cell() + cell]; }
  double at(int t, int cell) const {
    return values[static_cast<std::size_t>(t) * n_cell() + cell];
  }
  int cell_index(int ilat, int ilon) const { return ilat * n_lon() + ilon; }
  double cell_lat(int cell) const { return lats[cell / n_lon()]; }
  double cell_lon(int cell) const { return lons[cell % n_lon()]; }

  bool is_land(int cell) const { return at(0, cell) != fill; }
  std::vector<int> land_cells() const;

  // (year, month) of a month offset from the origin
  std::pair<int, int> calendar_month(int t) const {
    const int m0 = (t0_year * 12) + (t0_month - 1) + t;
    return {m0 / 12, m0 % 12 + 1};
  }
  // month offset of a calendar (year, month); may be out of range
  int month_offset(int year, int month) const {
    return (year - t0_year) * 12 + (month - t0_month);
  }

  void validate() const;  // throws Error(Data) on any invariant violation
};

// Integer region assignment per cell. 0 = unassigned, 1..N map into `table`.
struct RegionInfo {
  std::string abbr;
  std::string name;
};
struct RegionMask {
  std::vector<int> region_id;  // one per cell, lat-major like GridStack cells
  std::map<int, RegionInfo> table;

  std::vector<int> region_ids() const;
  void validate() const;
};

// Container format: one-line JSON header then raw little-endian f64 payload.
GridStack load_gridstack(const std::string& path);
void save_gridstack(const GridStack& stack, const std::string& path);

// CSV with header (year,month,lat,lon,value); missing cells become fill.
GridStack ingest_csv(const std::string& path);

// Spherical quadrilateral area of a cell centered at `lat` spanning
// dlat x dlon degrees, on a sphere of radius 6 371 000 m.
double cell_area(double lat, double dlat, double dlon);

// Per-cell areas for a uniform grid.
std::vector<double> cell_areas(const GridStack& stack);

// kg C m^-2 s^-1  ->  gC/month per cell.
GridStack flux_to_mass(const GridStack& stack, const std::vector<double>& areas);

// RegionMask stored as a GridStack container with integer payload (n_time=1)
// plus a JSON side table {id: {abbr, name}}.
RegionMask load_region_mask(const std::string& grid_path, const std::string& table_path);
void save_region_mask(const RegionMask& mask, const GridStack& geometry,
                      const std::string& grid_path, const std::string& table_path);

// Rectangle-list fallback: JSON {"regions":[{id,abbr,name,lat_min,lat_max,
// lon_min,lon_max}, ...]} rasterized onto the given coordinate axes.
RegionMask region_mask_from_rects(const std::string& json_path,
                                  const std::vector<double>& lats,
                                  const std::vector<double>& lons);

inline constexpr double kEarthRadiusM = 6.371e6;
inline constexpr const char* kFluxUnits = "kg/m2/s";
inline constexpr const char* kMassUnits = "gC/month";

}  // namespace carbonx::grid
