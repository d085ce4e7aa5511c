#pragma once

#include <string>
#include <utility>
#include <vector>

namespace vspinn {

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Minimal static line chart (no external plotting dependency); CSVs remain
/// the ground truth. Non-positive values are dropped on log axes.
void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<SvgSeries>& series, bool log_x, bool log_y);

}  // namespace vspinn
