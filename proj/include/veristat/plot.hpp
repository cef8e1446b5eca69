#pragma once

#include <string>
#include <vector>

namespace veristat {

/// Number of histogram bins by Sturges' rule, ceil(log2 n) + 1.
int sturges_bins(std::size_t n);

/// Standalone SVG histogram of `values`.
std::string render_histogram_svg(const std::vector<double>& values, const std::string& title,
                                 const std::string& x_label);

/// Standalone SVG scatter plot with a dashed horizontal line at y = 0.
std::string render_scatter_svg(const std::vector<double>& x, const std::vector<double>& y,
                               const std::string& x_label, const std::string& y_label);

}  // namespace veristat
