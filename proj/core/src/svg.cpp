#include "carbonx/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "carbonx/error.hpp"

namespace carbonx::svgplot {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string line_chart(const std::string& title, const std::vector<Series>& series, int width,
                       int height) {
  const int ml = 70, mr = 20, mt = 40, mb = 30;
  double ymin = 0.0, ymax = 1.0;
  std::size_t nmax = 1;
  bool first = true;
  for (const auto& s : series) {
    nmax = std::max(nmax, s.y.size());
    for (double v : s.y) {
      if (!std::isfinite(v)) continue;
      if (first) {
        ymin = ymax = v;
        first = false;
      } else {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
    }
  }
  if (ymax == ymin) ymax = ymin + 1.0;
  const double px = static_cast<double>(width - ml - mr);
  const double py = static_cast<double>(height - mt - mb);
  auto sx = [&](std::size_t i) {
    return ml + px * (nmax > 1 ? static_cast<double>(i) / (nmax - 1) : 0.5);
  };
  auto sy = [&](double v) { return mt + py * (1.0 - (v - ymin) / (ymax - ymin)); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n";
  out << "<text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << height - mb << "\" stroke=\"#444\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
      << "\" y2=\"" << height - mb << "\" stroke=\"#444\"/>\n";
  out << "<text x=\"4\" y=\"" << sy(ymax) + 4 << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt(ymax) << "</text>\n";
  out << "<text x=\"4\" y=\"" << sy(ymin) + 4 << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt(ymin) << "</text>\n";
  int ci = 0;
  for (const auto& s : series) {
    const char* color = kPalette[ci % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      out << fmt(sx(i)) << "," << fmt(sy(s.y[i])) << " ";
    }
    out << "\"/>\n";
    out << "<text x=\"" << ml + 10 + 120 * ci << "\" y=\"" << mt - 6
        << "\" fill=\"" << color << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label
        << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
  return out.str();
}

std::string bar_chart(const std::string& title, const std::vector<Bar>& bars, int width,
                      int height) {
  const int ml = 70, mr = 20, mt = 40, mb = 80;
  double ymin = 0.0, ymax = 0.0;
  for (const auto& b : bars) {
    ymin = std::min(ymin, b.value);
    ymax = std::max(ymax, b.value);
  }
  if (ymax == ymin) ymax = ymin + 1.0;
  const double px = static_cast<double>(width - ml - mr);
  const double py = static_cast<double>(height - mt - mb);
  auto sy = [&](double v) { return mt + py * (1.0 - (v - ymin) / (ymax - ymin)); };
  const double slot = bars.empty() ? px : px / bars.size();

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n";
  out << "<text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << fmt(sy(0.0)) << "\" x2=\"" << width - mr
      << "\" y2=\"" << fmt(sy(0.0)) << "\" stroke=\"#444\"/>\n";
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double x = ml + slot * i + slot * 0.15;
    const double w = slot * 0.7;
    const double y0 = sy(std::max(0.0, bars[i].value));
    const double h = std::fabs(sy(bars[i].value) - sy(0.0));
    out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(w)
        << "\" height=\"" << fmt(h) << "\" fill=\"" << kPalette[i % 6] << "\"/>\n";
    out << "<text x=\"" << fmt(x) << "\" y=\"" << height - mb + 16
        << "\" font-family=\"sans-serif\" font-size=\"10\" transform=\"rotate(30 " << fmt(x)
        << " " << height - mb + 16 << ")\">" << bars[i].label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail_data("svg: cannot open " + path);
  out << content;
}

}  // namespace carbonx::svgplot
