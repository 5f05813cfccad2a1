#pragma once

#include <string>
#include <vector>

#include "varlab/variability.hpp"

namespace varlab::svg {

/// One filled-rect heatmap per field, laid out in a grid of `ncols` panels.
/// Values are expected in [0, 1]; anything else is clamped.
std::string heatmap_grid(const std::vector<SurfaceField>& fields, std::size_t ncols,
                         std::size_t panel_px = 220);

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
};

/// Polyline chart. With log_y the y values are plotted as log10 (nonpositive
/// points are dropped).
std::string line_chart(const std::vector<Series>& series, const std::string& x_label,
                       const std::string& y_label, bool log_y = false,
                       std::size_t width_px = 640, std::size_t height_px = 420);

/// Simple bar chart over categorical x positions.
std::string bar_chart(const std::vector<double>& x, const std::vector<double>& heights,
                      const std::string& x_label, const std::string& y_label,
                      std::size_t width_px = 640, std::size_t height_px = 420);

}  // namespace varlab::svg
