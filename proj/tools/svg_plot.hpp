#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sipmlink/csv.hpp"

namespace sipmlink::tools {

struct PlotSpec {
  std::string title;
  std::string x_column;
  std::vector<std::string> y_columns;
  bool log_x = false;
  bool log_y = false;
  /// Optional column whose distinct values split the rows into series.
  std::string group_column;
};

/// Static line plot of numeric CSV columns. Non-finite and (on log axes)
/// non-positive values are skipped.
void write_svg_plot(const CsvTable& table, const PlotSpec& spec, const std::filesystem::path& path);

}  // namespace sipmlink::tools
