#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace isofdr::io {

struct LineSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;  // NaN breaks the line
    std::string color = "#000000";
    bool dashed = false;
};

struct BandSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> lo;
    std::vector<double> hi;
    std::string color = "#888888";
};

struct PlotSpec {
    std::string title;
    std::string x_label = "t";
    std::string y_label;
    std::optional<double> x_min, x_max;
    double y_min = 0.0;
    double y_max = 1.05;
    std::vector<double> vertical_markers;
    std::vector<BandSeries> bands;
    std::vector<LineSeries> lines;
};

/// Self-contained SVG document for one line/band panel.
std::string render_svg(const PlotSpec& plot);

/// Several panels stacked vertically in one document.
std::string render_svg_panels(const std::vector<PlotSpec>& panels);

void write_svg(const std::filesystem::path& path, const std::string& svg);

}  // namespace isofdr::io
