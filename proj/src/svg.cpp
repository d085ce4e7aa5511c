#include "vspinn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace vspinn {

namespace {

constexpr int kWidth = 640, kHeight = 420;
constexpr int kMarginLeft = 70, kMarginRight = 20, kMarginTop = 40, kMarginBottom = 50;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<SvgSeries>& series, bool log_x, bool log_y) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if ((log_x && !(x > 0)) || (log_y && !(y > 0))) continue;
      const double px = log_x ? std::log10(x) : x;
      const double py = log_y ? std::log10(y) : y;
      xmin = std::min(xmin, px);
      xmax = std::max(xmax, px);
      ymin = std::min(ymin, py);
      ymax = std::max(ymax, py);
    }
  }
  if (!(xmax >= xmin) || !(ymax >= ymin)) {
    throw std::invalid_argument("svg chart: no drawable points");
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto sx = [&](double x) {
    const double px = log_x ? std::log10(x) : x;
    return kMarginLeft + (px - xmin) / (xmax - xmin) * plot_w;
  };
  auto sy = [&](double y) {
    const double py = log_y ? std::log10(y) : y;
    return kMarginTop + plot_h - (py - ymin) / (ymax - ymin) * plot_h;
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open svg for writing: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
         "font-family=\"sans-serif\">" << title << "</text>\n";

  // axes
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
      << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + plot_h << "\" x2=\""
      << kMarginLeft + plot_w << "\" y2=\"" << kMarginTop + plot_h << "\" stroke=\"black\"/>\n";

  char buf[64];
  for (int k = 0; k <= 4; ++k) {
    const double fx = xmin + (xmax - xmin) * k / 4.0;
    const double fy = ymin + (ymax - ymin) * k / 4.0;
    const double vx = log_x ? std::pow(10.0, fx) : fx;
    const double vy = log_y ? std::pow(10.0, fy) : fy;
    const double px = kMarginLeft + plot_w * k / 4.0;
    const double py = kMarginTop + plot_h - plot_h * k / 4.0;
    std::snprintf(buf, sizeof buf, "%.3g", vx);
    out << "<text x=\"" << px << "\" y=\"" << kMarginTop + plot_h + 18
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << buf
        << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.3g", vy);
    out << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << py + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << buf
        << "</text>\n";
  }
  out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << x_label
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << kMarginTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 16 " << kMarginTop + plot_h / 2 << ")\">" << y_label
      << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = kColors[si % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[si].points) {
      if ((log_x && !(x > 0)) || (log_y && !(y > 0))) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", sx(x), sy(y));
      out << buf;
    }
    out << "\"/>\n";
    out << "<text x=\"" << kMarginLeft + plot_w - 8 << "\" y=\""
        << kMarginTop + 16 + 16 * static_cast<double>(si)
        << "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\" fill=\"" << color
        << "\">" << series[si].label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace vspinn
