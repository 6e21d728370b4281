#include "nipah/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace nipah {

namespace {

constexpr double kWidth = 960;
constexpr double kHeight = 600;
constexpr double kMarginLeft = 78;
constexpr double kMarginRight = 24;
constexpr double kMarginTop = 48;
constexpr double kMarginBottom = 56;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    if (v == 0) {
        v = 0; // never print -0
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Largest "nice" step (1/2/5 times a power of ten) giving <= 7 ticks.
double nice_step(double range) {
    const double raw = range / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0}) {
        if (raw <= m * mag) {
            return m * mag;
        }
    }
    return 10.0 * mag;
}

} // namespace

void emit_chart_svg(std::span<const ChartSeries> series, const std::filesystem::path& path,
                    const std::string& title, const std::string& x_label,
                    const std::string& y_label) {
    if (series.empty()) {
        throw ValidationError("emit_chart_svg: no series given");
    }
    for (const ChartSeries& s : series) {
        if (s.points.size() < 2) {
            throw ValidationError("emit_chart_svg: series '" + s.name +
                                  "' needs at least 2 points");
        }
    }

    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = xmin;
    double ymax = -xmin;
    for (const ChartSeries& s : series) {
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmax == xmin) {
        xmax = xmin + 1;
    }
    if (ymax == ymin) {
        const double pad = ymin == 0 ? 1.0 : std::abs(ymin) * 0.1;
        ymin -= pad;
        ymax += pad;
    } else {
        const double pad = (ymax - ymin) * 0.05;
        ymin -= pad;
        ymax += pad;
    }

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    auto sx = [&](double x) { return kMarginLeft + (x - xmin) / (xmax - xmin) * plot_w; };
    auto sy = [&](double y) { return kMarginTop + plot_h - (y - ymin) / (ymax - ymin) * plot_h; };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kWidth) + "\" height=\"" +
           px(kHeight) + "\" viewBox=\"0 0 " + px(kWidth) + " " + px(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + px(kWidth / 2) + "\" y=\"28\" font-family=\"sans-serif\" font-size=\"18\""
           " text-anchor=\"middle\">" + xml_escape(title) + "</text>\n";

    // gridlines and ticks
    const double ystep = nice_step(ymax - ymin);
    for (double v = std::ceil(ymin / ystep) * ystep; v <= ymax + 1e-12 * ystep; v += ystep) {
        const double y = sy(v);
        svg += "<line x1=\"" + px(kMarginLeft) + "\" y1=\"" + px(y) + "\" x2=\"" +
               px(kWidth - kMarginRight) + "\" y2=\"" + px(y) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + px(kMarginLeft - 8) + "\" y=\"" + px(y + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" +
               tick_label(v) + "</text>\n";
    }
    const double xstep = nice_step(xmax - xmin);
    for (double v = std::ceil(xmin / xstep) * xstep; v <= xmax + 1e-12 * xstep; v += xstep) {
        const double x = sx(v);
        svg += "<line x1=\"" + px(x) + "\" y1=\"" + px(kMarginTop) + "\" x2=\"" + px(x) +
               "\" y2=\"" + px(kHeight - kMarginBottom) +
               "\" stroke=\"#eeeeee\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + px(x) + "\" y=\"" + px(kHeight - kMarginBottom + 18) +
               "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
               tick_label(v) + "</text>\n";
    }

    // axes
    svg += "<line x1=\"" + px(kMarginLeft) + "\" y1=\"" + px(kMarginTop) + "\" x2=\"" +
           px(kMarginLeft) + "\" y2=\"" + px(kHeight - kMarginBottom) +
           "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    svg += "<line x1=\"" + px(kMarginLeft) + "\" y1=\"" + px(kHeight - kMarginBottom) +
           "\" x2=\"" + px(kWidth - kMarginRight) + "\" y2=\"" + px(kHeight - kMarginBottom) +
           "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + px(kMarginLeft + plot_w / 2) + "\" y=\"" + px(kHeight - 12) +
           "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" +
           xml_escape(x_label) + "</text>\n";
    if (!y_label.empty()) {
        svg += "<text x=\"20\" y=\"" + px(kMarginTop + plot_h / 2) +
               "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" "
               "transform=\"rotate(-90 20 " + px(kMarginTop + plot_h / 2) + ")\">" +
               xml_escape(y_label) + "</text>\n";
    }

    // curves
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = kPalette[k % std::size(kPalette)];
        svg += "<polyline fill=\"none\" stroke=\"";
        svg += color;
        svg += "\" stroke-width=\"1.8\" points=\"";
        for (const auto& [x, y] : series[k].points) {
            svg += px(sx(x)) + "," + px(sy(y)) + " ";
        }
        svg += "\"/>\n";
    }

    // legend
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = kPalette[k % std::size(kPalette)];
        const double y = kMarginTop + 14 + 18 * static_cast<double>(k);
        const double x = kWidth - kMarginRight - 170;
        svg += "<line class=\"legend\" x1=\"" + px(x) + "\" y1=\"" + px(y) + "\" x2=\"" +
               px(x + 26) + "\" y2=\"" + px(y) + "\" stroke=\"";
        svg += color;
        svg += "\" stroke-width=\"3\"/>\n";
        svg += "<text x=\"" + px(x + 32) + "\" y=\"" + px(y + 4) +
               "\" font-family=\"sans-serif\" font-size=\"13\">" + xml_escape(series[k].name) +
               "</text>\n";
    }

    svg += "</svg>\n";

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open file for writing: " + path.string());
    }
    out << svg;
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

} // namespace nipah
