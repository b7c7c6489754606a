#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lbsgd/harness.hpp"

namespace lbsgd {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 50.0;
constexpr int kTicks = 5;

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(3);
  s << v;
  return s.str();
}

}  // namespace

std::string render_band_svg(const PlotSeries& series, const std::string& title,
                            const std::string& x_label, const std::string& y_label, bool log_y) {
  const auto transform = [log_y](double v) { return log_y ? std::log10(v) : v; };
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  for (std::size_t k = 0; k < series.x.size(); ++k) {
    x_min = std::min(x_min, series.x[k]);
    x_max = std::max(x_max, series.x[k]);
    for (double v : {series.lower[k], series.upper[k], series.median[k]}) {
      if (!std::isfinite(transform(v))) continue;
      y_min = std::min(y_min, transform(v));
      y_max = std::max(y_max, transform(v));
    }
  }
  if (!std::isfinite(x_min)) x_min = 0.0, x_max = 1.0;
  if (!std::isfinite(y_min)) y_min = 0.0, y_max = 1.0;
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  const auto py = [&](double y) {
    const double t = std::clamp(transform(y), y_min, y_max);
    return kTop + (1.0 - (t - y_min) / (y_max - y_min)) * plot_h;
  };

  std::ostringstream svg;
  svg.imbue(std::locale::classic());
  svg.precision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(title) << "</text>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int k = 0; k <= kTicks; ++k) {
    const double xv = x_min + (x_max - x_min) * k / kTicks;
    const double yv = y_min + (y_max - y_min) * k / kTicks;
    const double yl = log_y ? std::pow(10.0, yv) : yv;
    svg << "<text x=\"" << px(xv) << "\" y=\"" << kHeight - kBottom + 16
        << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yl) + 4 << "\" text-anchor=\"end\">"
        << tick_label(yl) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  svg << "<text transform=\"translate(16," << kTop + plot_h / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label)
      << (log_y ? " (log)" : "") << "</text>\n";

  if (!series.x.empty()) {
    svg << "<polygon fill=\"steelblue\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
    for (std::size_t k = 0; k < series.x.size(); ++k)
      svg << px(series.x[k]) << ',' << py(series.upper[k]) << ' ';
    for (std::size_t k = series.x.size(); k-- > 0;)
      svg << px(series.x[k]) << ',' << py(series.lower[k]) << ' ';
    svg << "\"/>\n<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < series.x.size(); ++k)
      svg << px(series.x[k]) << ',' << py(series.median[k]) << ' ';
    svg << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace lbsgd
