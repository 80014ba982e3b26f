#pragma once

#include <string>
#include <vector>

namespace carbonx::svgplot {

struct Series {
  std::string label;
  std::vector<double> y;
};

// Self-contained line chart; x is the sample index.
std::string line_chart(const std::string& title, const std::vector<Series>& series,
                       int width = 900, int height = 420);

struct Bar {
  std::string label;
  double value = 0.0;
};

std::string bar_chart(const std::string& title, const std::vector<Bar>& bars, int width = 900,
                      int height = 420);

void write_file(const std::string& path, const std::string& content);

}  // namespace carbonx::svgplot
