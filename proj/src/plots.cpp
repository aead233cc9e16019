#include "jamloc/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace jamloc::plots {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

void write_series_csv(const std::string& path, const std::string& x_label,
                      const std::string& y_label, const std::vector<Series>& series) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "series," << x_label << "," << y_label << "\n";
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      out << s.label << "," << fmt(s.x[i]) << "," << fmt(s.y[i]) << "\n";
    }
  }
}

void write_svg_line_chart(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series) {
  const double width = 640, height = 420;
  const double ml = 70, mr = 140, mt = 40, mb = 50;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (double v : s.x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (!std::isfinite(xmin) || !std::isfinite(ymin)) {
    throw std::invalid_argument("write_svg_line_chart: no data points");
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  ymin = std::min(ymin, 0.0);

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "' font-family='sans-serif' font-size='12'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << width / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
      << "</text>\n";

  for (int t = 0; t <= 4; ++t) {
    const double yv = ymin + (ymax - ymin) * t / 4.0;
    const double xv = xmin + (xmax - xmin) * t / 4.0;
    out << "<line x1='" << ml << "' y1='" << py(yv) << "' x2='" << ml + pw << "' y2='" << py(yv)
        << "' stroke='#dddddd'/>\n";
    out << "<text x='" << ml - 6 << "' y='" << py(yv) + 4 << "' text-anchor='end'>"
        << fmt_short(yv) << "</text>\n";
    out << "<text x='" << px(xv) << "' y='" << mt + ph + 18 << "' text-anchor='middle'>"
        << fmt_short(xv) << "</text>\n";
  }
  out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << mt + ph
      << "' stroke='black'/>\n";
  out << "<line x1='" << ml << "' y1='" << mt + ph << "' x2='" << ml + pw << "' y2='" << mt + ph
      << "' stroke='black'/>\n";
  out << "<text x='" << ml + pw / 2 << "' y='" << height - 10 << "' text-anchor='middle'>"
      << x_label << "</text>\n";
  out << "<text x='18' y='" << mt + ph / 2
      << "' text-anchor='middle' transform='rotate(-90 18 " << mt + ph / 2 << ")'>" << y_label
      << "</text>\n";

  int color = 0;
  for (const auto& s : series) {
    const char* stroke = kPalette[color % 8];
    out << "<polyline fill='none' stroke='" << stroke << "' stroke-width='1.5' points='";
    for (size_t i = 0; i < s.x.size(); ++i) out << px(s.x[i]) << "," << py(s.y[i]) << " ";
    out << "'/>\n";
    for (size_t i = 0; i < s.x.size(); ++i) {
      out << "<circle cx='" << px(s.x[i]) << "' cy='" << py(s.y[i]) << "' r='2.5' fill='"
          << stroke << "'/>\n";
    }
    out << "<text x='" << ml + pw + 8 << "' y='" << mt + 14 + 16 * color << "' fill='" << stroke
        << "'>" << s.label << "</text>\n";
    ++color;
  }
  out << "</svg>\n";
}

}  // namespace jamloc::plots
