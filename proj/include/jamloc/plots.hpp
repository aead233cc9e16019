#pragma once

#include <string>
#include <vector>

namespace jamloc::plots {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

void write_series_csv(const std::string& path, const std::string& x_label,
                      const std::string& y_label, const std::vector<Series>& series);

/// Minimal self-contained SVG line chart.
void write_svg_line_chart(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series);

}  // namespace jamloc::plots
