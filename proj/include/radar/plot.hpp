#pragma once

// Standalone SVG scatter plots with optional fitted-line overlays.

#include "radar/scaling.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace radar::plot {

struct Series {
    std::string label;
    std::vector<scaling::Point> points;
    bool fit_line = true;
};

struct AxesSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = true;
    bool log_y = true;
};

struct RenderedPlot {
    std::string svg;
    /// Fit in plotted coordinates per series; empty when no line was drawn
    /// (fit disabled or fewer than three points).
    std::vector<std::optional<scaling::RegressionResult>> fits;
};

/// Throws DomainError for an empty series list, a series without points, or
/// a non-positive coordinate on a logarithmic axis.
RenderedPlot render_svg(std::span<const Series> series, const AxesSpec& axes);

/// Renders and writes the plot; throws IoError when the file cannot be written.
RenderedPlot emit_plot(std::span<const Series> series, const AxesSpec& axes, const std::filesystem::path& path);

}  // namespace radar::plot
