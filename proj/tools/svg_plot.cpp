#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

namespace sipmlink::tools {
namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                         "#8c564b", "#e377c2", "#7f7f7f", "#17becf", "#bcbd22"};

std::size_t column_index(const CsvTable& t, const std::string& name) {
  const auto& h = t.header();
  const auto it = std::find(h.begin(), h.end(), name);
  if (it == h.end()) throw std::invalid_argument("plot: no column '" + name + "'");
  return static_cast<std::size_t>(it - h.begin());
}

double to_number(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

struct Axis {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool log = false;

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double map(double v) const { return log ? std::log10(v) : v; }
  double frac(double v) const {
    const double a = map(lo);
    const double b = map(hi);
    return b > a ? (map(v) - a) / (b - a) : 0.5;
  }
};

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

void write_svg_plot(const CsvTable& table, const PlotSpec& spec, const std::filesystem::path& path) {
  const std::size_t xi = column_index(table, spec.x_column);
  const bool grouped = !spec.group_column.empty();
  const std::size_t gi = grouped ? column_index(table, spec.group_column) : 0;

  // series name -> points
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  std::vector<std::string> order;
  Axis ax{.log = spec.log_x};
  Axis ay{.log = spec.log_y};
  for (const auto& ycol : spec.y_columns) {
    const std::size_t yi = column_index(table, ycol);
    for (const auto& row : table.rows()) {
      const double x = to_number(row[xi]);
      const double y = to_number(row[yi]);
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if ((spec.log_x && x <= 0.0) || (spec.log_y && y <= 0.0)) continue;
      std::string name = ycol;
      if (grouped) name += " " + spec.group_column + "=" + row[gi];
      if (!series.count(name)) order.push_back(name);
      series[name].emplace_back(x, y);
      ax.add(x);
      ay.add(y);
    }
  }

  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << spec.title << "</text>\n";
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15
     << "\" text-anchor=\"middle\">" << spec.x_column << (spec.log_x ? " (log)" : "")
     << "</text>\n";

  if (order.empty()) {
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight / 2
       << "\" text-anchor=\"middle\">no plottable data</text>\n</svg>\n";
    return;
  }
  for (int k = 0; k <= 4; ++k) {
    const double f = k / 4.0;
    const double xv = ax.log ? std::pow(10.0, ax.map(ax.lo) + f * (ax.map(ax.hi) - ax.map(ax.lo)))
                             : ax.lo + f * (ax.hi - ax.lo);
    const double yv = ay.log ? std::pow(10.0, ay.map(ay.lo) + f * (ay.map(ay.hi) - ay.map(ay.lo)))
                             : ay.lo + f * (ay.hi - ay.lo);
    os << "<text x=\"" << kLeft + f * pw << "\" y=\"" << kTop + ph + 18
       << "\" text-anchor=\"middle\">" << label(xv) << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + ph - f * ph + 4
       << "\" text-anchor=\"end\">" << label(yv) << "</text>\n";
  }
  std::size_t c = 0;
  for (const auto& name : order) {
    const char* color = kColors[c % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[name]) {
      os << kLeft + ax.frac(x) * pw << ',' << kTop + ph - ay.frac(y) * ph << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << kLeft + 8 << "\" y=\"" << kTop + 16 + 14 * static_cast<double>(c)
       << "\" fill=\"" << color << "\">" << name << "</text>\n";
    ++c;
  }
  os << "</svg>\n";
}

}  // namespace sipmlink::tools
