#include "snnbp/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "snnbp/io.hpp"

namespace snnbp {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 24.0;
constexpr double kTop = 44.0;
constexpr double kBottom = 58.0;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v, bool log_axis) {
    char buf[64];
    if (log_axis) {
        std::snprintf(buf, sizeof(buf), "%.3g", std::pow(10.0, v));
    } else {
        std::snprintf(buf, sizeof(buf), "%.3g", v);
    }
    return buf;
}

std::string escape_text(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') {
            out += "&lt;";
        } else if (c == '>') {
            out += "&gt;";
        } else if (c == '&') {
            out += "&amp;";
        } else {
            out += c;
        }
    }
    return out;
}

struct Canvas {
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
    bool log_x = false, log_y = false;

    double tx(double v) const {
        const double u = log_x ? std::log10(v) : v;
        return kLeft + (u - x_min) / (x_max - x_min) * (kWidth - kLeft - kRight);
    }
    double ty(double v) const {
        const double u = log_y ? std::log10(v) : v;
        return kHeight - kBottom - (u - y_min) / (y_max - y_min) * (kHeight - kTop - kBottom);
    }
};

void expand_range(double& lo, double& hi) {
    if (!(hi > lo)) {
        const double pad = (std::abs(lo) > 0.0) ? 0.1 * std::abs(lo) : 1.0;
        lo -= pad;
        hi += pad;
    } else {
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
}

std::string axes_markup(const Canvas& canvas, const std::string& title,
                        const std::string& x_label, const std::string& y_label) {
    std::string out;
    out += "<rect x='" + num(kLeft) + "' y='" + num(kTop) + "' width='" +
           num(kWidth - kLeft - kRight) + "' height='" + num(kHeight - kTop - kBottom) +
           "' fill='none' stroke='#444444'/>\n";
    for (int i = 0; i < 5; ++i) {
        const double fx = canvas.x_min + (canvas.x_max - canvas.x_min) * i / 4.0;
        const double fy = canvas.y_min + (canvas.y_max - canvas.y_min) * i / 4.0;
        const double px = kLeft + (kWidth - kLeft - kRight) * i / 4.0;
        const double py = kHeight - kBottom - (kHeight - kTop - kBottom) * i / 4.0;
        out += "<line x1='" + num(px) + "' y1='" + num(kHeight - kBottom) + "' x2='" + num(px) +
               "' y2='" + num(kHeight - kBottom + 5) + "' stroke='#444444'/>\n";
        out += "<text x='" + num(px) + "' y='" + num(kHeight - kBottom + 20) +
               "' font-size='12' text-anchor='middle'>" + tick_label(fx, canvas.log_x) +
               "</text>\n";
        out += "<line x1='" + num(kLeft - 5) + "' y1='" + num(py) + "' x2='" + num(kLeft) +
               "' y2='" + num(py) + "' stroke='#444444'/>\n";
        out += "<text x='" + num(kLeft - 8) + "' y='" + num(py + 4) +
               "' font-size='12' text-anchor='end'>" + tick_label(fy, canvas.log_y) +
               "</text>\n";
    }
    out += "<text x='" + num((kLeft + kWidth - kRight) / 2) + "' y='24' font-size='15' "
           "text-anchor='middle'>" +
           escape_text(title) + "</text>\n";
    out += "<text x='" + num((kLeft + kWidth - kRight) / 2) + "' y='" + num(kHeight - 14) +
           "' font-size='13' text-anchor='middle'>" + escape_text(x_label) + "</text>\n";
    out += "<text x='18' y='" + num((kTop + kHeight - kBottom) / 2) +
           "' font-size='13' text-anchor='middle' transform='rotate(-90 18 " +
           num((kTop + kHeight - kBottom) / 2) + ")'>" + escape_text(y_label) + "</text>\n";
    return out;
}

std::string svg_open() {
    return "<svg xmlns='http://www.w3.org/2000/svg' width='" + num(kWidth) + "' height='" +
           num(kHeight) + "' viewBox='0 0 " + num(kWidth) + " " + num(kHeight) + "'>\n" +
           "<rect width='100%' height='100%' fill='white'/>\n";
}

std::string polyline(const Canvas& canvas, const std::vector<double>& x,
                     const std::vector<double>& y, const std::string& color,
                     const std::string& extra = "") {
    std::string pts;
    for (std::size_t i = 0; i < x.size(); ++i) {
        pts += num(canvas.tx(x[i])) + "," + num(canvas.ty(y[i])) + " ";
    }
    return "<polyline points='" + pts + "' fill='none' stroke='" + color +
           "' stroke-width='1.6'" + extra + "/>\n";
}

}  // namespace

std::string render_svg_plot(const PlotSpec& spec) {
    Canvas canvas;
    canvas.log_x = spec.log_x;
    canvas.log_y = spec.log_y;
    bool seeded = false;
    for (const auto& s : spec.series) {
        if (s.x.size() != s.y.size()) {
            throw std::invalid_argument("svg plot: series size mismatch");
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double vx = s.x[i], vy = s.y[i];
            if (spec.log_x) {
                if (vx <= 0.0) throw std::invalid_argument("svg plot: log axis needs x > 0");
                vx = std::log10(vx);
            }
            if (spec.log_y) {
                if (vy <= 0.0) throw std::invalid_argument("svg plot: log axis needs y > 0");
                vy = std::log10(vy);
            }
            if (!seeded) {
                canvas.x_min = canvas.x_max = vx;
                canvas.y_min = canvas.y_max = vy;
                seeded = true;
            } else {
                canvas.x_min = std::min(canvas.x_min, vx);
                canvas.x_max = std::max(canvas.x_max, vx);
                canvas.y_min = std::min(canvas.y_min, vy);
                canvas.y_max = std::max(canvas.y_max, vy);
            }
        }
    }
    if (!seeded) throw std::invalid_argument("svg plot: no data");
    expand_range(canvas.x_min, canvas.x_max);
    expand_range(canvas.y_min, canvas.y_max);

    std::string out = svg_open();
    out += axes_markup(canvas, spec.title, spec.x_label, spec.y_label);
    for (const auto& s : spec.series) {
        if (s.line && s.x.size() >= 2) out += polyline(canvas, s.x, s.y, s.color);
        if (s.points) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                out += "<circle cx='" + num(canvas.tx(s.x[i])) + "' cy='" +
                       num(canvas.ty(s.y[i])) + "' r='3.2' fill='" + s.color + "'/>\n";
            }
        }
    }
    out += "</svg>\n";
    return out;
}

void write_svg_plot(const PlotSpec& spec, const std::filesystem::path& path) {
    atomic_write_text(path, render_svg_plot(spec));
}

std::string render_svg_band_plot(const BandPlotSpec& spec) {
    const std::size_t n = spec.x.size();
    if (n < 2 || spec.mean.size() != n || spec.half_width.size() != n ||
        spec.truth.size() != n) {
        throw std::invalid_argument("svg band plot: inconsistent column lengths");
    }
    Canvas canvas;
    canvas.x_min = spec.x.front();
    canvas.x_max = spec.x.front();
    bool seeded = false;
    for (std::size_t i = 0; i < n; ++i) {
        canvas.x_min = std::min(canvas.x_min, spec.x[i]);
        canvas.x_max = std::max(canvas.x_max, spec.x[i]);
        for (double v : {spec.mean[i] - spec.half_width[i], spec.mean[i] + spec.half_width[i],
                         spec.truth[i]}) {
            if (!seeded) {
                canvas.y_min = canvas.y_max = v;
                seeded = true;
            } else {
                canvas.y_min = std::min(canvas.y_min, v);
                canvas.y_max = std::max(canvas.y_max, v);
            }
        }
    }
    expand_range(canvas.x_min, canvas.x_max);
    expand_range(canvas.y_min, canvas.y_max);

    std::string out = svg_open();
    out += axes_markup(canvas, spec.title, spec.x_label, spec.y_label);
    std::string pts;
    for (std::size_t i = 0; i < n; ++i) {
        pts += num(canvas.tx(spec.x[i])) + "," +
               num(canvas.ty(spec.mean[i] + spec.half_width[i])) + " ";
    }
    for (std::size_t i = n; i-- > 0;) {
        pts += num(canvas.tx(spec.x[i])) + "," +
               num(canvas.ty(spec.mean[i] - spec.half_width[i])) + " ";
    }
    out += "<polygon points='" + pts + "' fill='#1f6fb2' fill-opacity='0.18' stroke='none'/>\n";
    out += polyline(canvas, spec.x, spec.truth, "#b22222", " stroke-dasharray='6,4'");
    out += polyline(canvas, spec.x, spec.mean, "#1f6fb2");
    out += "</svg>\n";
    return out;
}

void write_svg_band_plot(const BandPlotSpec& spec, const std::filesystem::path& path) {
    atomic_write_text(path, render_svg_band_plot(spec));
}

}  // namespace snnbp
