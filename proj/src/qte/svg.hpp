#pragma once

#include <string>
#include <vector>

namespace qte::svg {

/// Hand-rolled SVG line plots and histograms. Figures are qualitative views;
/// every plotted number also lives in a CSV artifact. Output is a pure
/// function of the inputs, so artifacts are byte-stable across runs.

struct Series {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    int width = 720;
    int height = 480;
};

std::string line_plot(const std::vector<Series>& series, const PlotOptions& opts);

std::string histogram(const std::vector<double>& values, std::size_t bins,
                      const PlotOptions& opts);

}  // namespace qte::svg
