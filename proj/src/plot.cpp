#include "veristat/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace veristat {

namespace {

constexpr double kWidth = 480;
constexpr double kHeight = 360;
constexpr double kLeft = 60;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 50;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Range {
  double lo;
  double hi;

  double span() const { return hi - lo; }
};

Range padded_range(const std::vector<double>& v) {
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  Range r{*lo, *hi};
  if (r.span() == 0) {
    r.lo -= 1;
    r.hi += 1;
  }
  const double pad = 0.05 * r.span();
  return {r.lo - pad, r.hi + pad};
}

void open_svg(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
       << escape(title) << "</text>\n";
  }
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight
     << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
     << kHeight - kBottom << "\" stroke=\"black\"/>\n";
}

void axis_labels(std::ostringstream& os, const std::string& x_label, const std::string& y_label) {
  os << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (kTop + kHeight - kBottom) / 2
     << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
     << (kTop + kHeight - kBottom) / 2 << ")\">" << escape(y_label) << "</text>\n";
}

void tick_labels(std::ostringstream& os, Range xr, Range yr) {
  os << "<text x=\"" << kLeft << "\" y=\"" << kHeight - kBottom + 14
     << "\" font-size=\"10\" text-anchor=\"middle\">" << num(xr.lo) << "</text>\n";
  os << "<text x=\"" << kWidth - kRight << "\" y=\"" << kHeight - kBottom + 14
     << "\" font-size=\"10\" text-anchor=\"middle\">" << num(xr.hi) << "</text>\n";
  os << "<text x=\"" << kLeft - 4 << "\" y=\"" << kHeight - kBottom
     << "\" font-size=\"10\" text-anchor=\"end\">" << num(yr.lo) << "</text>\n";
  os << "<text x=\"" << kLeft - 4 << "\" y=\"" << kTop + 4
     << "\" font-size=\"10\" text-anchor=\"end\">" << num(yr.hi) << "</text>\n";
}

}  // namespace

int sturges_bins(std::size_t n) {
  if (n <= 1) return 1;
  return static_cast<int>(std::ceil(std::log2(static_cast<double>(n)))) + 1;
}

std::string render_histogram_svg(const std::vector<double>& values, const std::string& title,
                                 const std::string& x_label) {
  std::ostringstream os;
  open_svg(os, title);
  const int bins = sturges_bins(values.size());
  const Range xr = values.empty() ? Range{-1, 1} : padded_range(values);
  std::vector<int> counts(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    auto b = static_cast<int>((v - xr.lo) / xr.span() * bins);
    b = std::clamp(b, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  const int peak = std::max(1, *std::max_element(counts.begin(), counts.end()));
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double bar_w = plot_w / bins;
  for (int b = 0; b < bins; ++b) {
    const double h = plot_h * counts[static_cast<std::size_t>(b)] / peak;
    os << "<rect x=\"" << num(kLeft + b * bar_w) << "\" y=\"" << num(kHeight - kBottom - h)
       << "\" width=\"" << num(bar_w) << "\" height=\"" << num(h)
       << "\" fill=\"lightgray\" stroke=\"black\"/>\n";
  }
  tick_labels(os, xr, Range{0, static_cast<double>(peak)});
  axis_labels(os, x_label, "Frequency");
  os << "</svg>\n";
  return os.str();
}

std::string render_scatter_svg(const std::vector<double>& x, const std::vector<double>& y,
                               const std::string& x_label, const std::string& y_label) {
  std::ostringstream os;
  open_svg(os, "");
  std::vector<double> ys = y;
  ys.push_back(0.0);
  const Range xr = x.empty() ? Range{-1, 1} : padded_range(x);
  const Range yr = padded_range(ys);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (v - xr.lo) / xr.span() * plot_w; };
  auto py = [&](double v) { return kHeight - kBottom - (v - yr.lo) / yr.span() * plot_h; };
  os << "<line x1=\"" << kLeft << "\" y1=\"" << num(py(0)) << "\" x2=\"" << kWidth - kRight
     << "\" y2=\"" << num(py(0)) << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    os << "<circle cx=\"" << num(px(x[i])) << "\" cy=\"" << num(py(y[i]))
       << "\" r=\"2.5\" fill=\"black\"/>\n";
  }
  tick_labels(os, xr, yr);
  axis_labels(os, x_label, y_label);
  os << "</svg>\n";
  return os.str();
}

}  // namespace veristat
