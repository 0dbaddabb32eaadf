#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace snnbp {

struct PlotSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f6fb2";
    bool points = true;
    bool line = false;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<PlotSeries> series;
};

// Self-contained static SVG; log axes render the data in log10 with
// power-of-ten tick labels.
std::string render_svg_plot(const PlotSpec& spec);
void write_svg_plot(const PlotSpec& spec, const std::filesystem::path& path);

// Mean curve with a shaded +/- half_width band and a dashed reference curve.
struct BandPlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<double> x;
    std::vector<double> mean;
    std::vector<double> half_width;
    std::vector<double> truth;
};

std::string render_svg_band_plot(const BandPlotSpec& spec);
void write_svg_band_plot(const BandPlotSpec& spec, const std::filesystem::path& path);

}  // namespace snnbp
