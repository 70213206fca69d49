#include "evosts/eval_report.hpp"

#include "evosts/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace evosts {

namespace {

constexpr int kWidth = 960;
constexpr int kHeight = 540;
constexpr int kMargin = 64;
constexpr int kTicks = 5;

const char* const kPalette[] = {"#1b1b1b", "#d62728", "#1f77b4", "#2ca02c",
                                "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

std::string polyline(const std::vector<double>& values, double x_scale, double y_min,
                     double y_scale, const char* color) {
    std::string points;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double px = kMargin + static_cast<double>(i) * x_scale;
        const double py = kHeight - kMargin - (values[i] - y_min) * y_scale;
        points += fmt("%.2f", px) + "," + fmt("%.2f", py) + " ";
    }
    if (!points.empty()) points.pop_back();
    return "  <polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.2\" points=\"" + points + "\"/>\n";
}

} // namespace

void plot_signal(const Signal& actual, const std::vector<PlotSeries>& predictions,
                 const std::filesystem::path& path) {
    if (actual.samples.empty()) throw EmptyInputError("plot_signal: empty signal segment");
    for (const PlotSeries& s : predictions) {
        if (s.values.empty())
            throw EmptyInputError("plot_signal: empty series '" + s.label + "'");
    }

    std::vector<PlotSeries> series;
    series.push_back({actual.source_id.empty() ? "signal" : actual.source_id, actual.samples});
    series.insert(series.end(), predictions.begin(), predictions.end());

    std::size_t max_len = 0;
    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -std::numeric_limits<double>::infinity();
    for (const PlotSeries& s : series) {
        max_len = std::max(max_len, s.values.size());
        for (double v : s.values) {
            if (!std::isfinite(v)) throw NonFiniteInputError("plot_signal: non-finite value");
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
        }
    }
    if (y_max == y_min) { // flat series still need a visible band
        y_min -= 1.0;
        y_max += 1.0;
    }
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    const double x_span = max_len > 1 ? static_cast<double>(max_len - 1) : 1.0;
    const double x_scale = static_cast<double>(kWidth - 2 * kMargin) / x_span;
    const double y_scale = static_cast<double>(kHeight - 2 * kMargin) / (y_max - y_min);

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
           "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " +
           std::to_string(kWidth) + " " + std::to_string(kHeight) + "\">\n";
    svg += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Axes.
    svg += "  <line x1=\"" + std::to_string(kMargin) + "\" y1=\"" +
           std::to_string(kHeight - kMargin) + "\" x2=\"" + std::to_string(kWidth - kMargin) +
           "\" y2=\"" + std::to_string(kHeight - kMargin) +
           "\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    svg += "  <line x1=\"" + std::to_string(kMargin) + "\" y1=\"" + std::to_string(kMargin) +
           "\" x2=\"" + std::to_string(kMargin) + "\" y2=\"" +
           std::to_string(kHeight - kMargin) + "\" stroke=\"#444\" stroke-width=\"1\"/>\n";

    for (int t = 0; t <= kTicks; ++t) {
        const double frac = static_cast<double>(t) / kTicks;
        const double tx = kMargin + frac * (kWidth - 2 * kMargin);
        const double sample = frac * x_span;
        svg += "  <line x1=\"" + fmt("%.2f", tx) + "\" y1=\"" +
               std::to_string(kHeight - kMargin) + "\" x2=\"" + fmt("%.2f", tx) + "\" y2=\"" +
               std::to_string(kHeight - kMargin + 5) + "\" stroke=\"#444\"/>\n";
        svg += "  <text x=\"" + fmt("%.2f", tx) + "\" y=\"" +
               std::to_string(kHeight - kMargin + 20) +
               "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">" +
               fmt("%.6g", sample) + "</text>\n";

        const double ty = kHeight - kMargin - frac * (kHeight - 2 * kMargin);
        const double value = y_min + frac * (y_max - y_min);
        svg += "  <line x1=\"" + std::to_string(kMargin - 5) + "\" y1=\"" + fmt("%.2f", ty) +
               "\" x2=\"" + std::to_string(kMargin) + "\" y2=\"" + fmt("%.2f", ty) +
               "\" stroke=\"#444\"/>\n";
        svg += "  <text x=\"" + std::to_string(kMargin - 8) + "\" y=\"" + fmt("%.2f", ty + 4) +
               "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">" +
               fmt("%.6g", value) + "</text>\n";
    }

    for (std::size_t i = 0; i < series.size(); ++i) {
        svg += polyline(series[i].values, x_scale, y_min, y_scale,
                        kPalette[i % kPaletteSize]);
    }

    // Legend, top-right.
    const int legend_x = kWidth - kMargin - 220;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const int ly = kMargin + 8 + static_cast<int>(i) * 18;
        svg += "  <line x1=\"" + std::to_string(legend_x) + "\" y1=\"" + std::to_string(ly) +
               "\" x2=\"" + std::to_string(legend_x + 24) + "\" y2=\"" + std::to_string(ly) +
               "\" stroke=\"" + kPalette[i % kPaletteSize] + "\" stroke-width=\"2\"/>\n";
        svg += "  <text x=\"" + std::to_string(legend_x + 30) + "\" y=\"" +
               std::to_string(ly + 4) + "\" font-family=\"monospace\" font-size=\"12\">" +
               series[i].label + "</text>\n";
    }

    svg += "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("plot_signal: cannot write " + path.string());
    out << svg;
    if (!out) throw IoError("plot_signal: short write to " + path.string());
}

} // namespace evosts
