#pragma once

#include <string>
#include <vector>

namespace dawc {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    /// Fixed y range when lo < hi; otherwise fitted to the data.
    double y_lo = 0.0;
    double y_hi = 0.0;
};

/// Deterministic SVG text: fixed number formatting, no timestamps.
std::string render_svg(const LineChart& chart);

void write_svg(const std::string& path, const LineChart& chart);

}  // namespace dawc
