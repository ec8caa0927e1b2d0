#ifndef ASYNCBO_SVG_HPP
#define ASYNCBO_SVG_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <asyncbo/aggregate.hpp>
#include <asyncbo/csv.hpp>

namespace asyncbo {

struct SvgStyle {
    std::string title;
    bool log_y = true;
    /// Losses below this are drawn at the floor on a log axis.
    double log_floor = 1e-6;
    int panel_width = 380;
    int panel_height = 300;
};

namespace detail {

inline std::string fmt2(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string tick_label(double v)
{
    char buf[32];
    if (v != 0.0 && (std::abs(v) < 1e-2 || std::abs(v) >= 1e4))
        std::snprintf(buf, sizeof(buf), "%.0e", v);
    else
        std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

inline std::string xml_escape(const std::string& s)
{
    std::string out;
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

inline constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Panel {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::function<double(const AggregateCurves&, std::size_t)> x;
    std::function<double(const AggregateCurves&, std::size_t)> y;
};

} // namespace detail

/// Three-panel line chart: (A) median loss vs experiment, (B) median loss
/// vs effective time, (C) IQR vs experiment. One polyline per cell.
inline std::string svg_string(const std::vector<AggregateCurves>& curves, const SvgStyle& style = {})
{
    using detail::fmt2;
    if (curves.empty())
        throw std::invalid_argument("render_svg: no curves to draw");

    const std::vector<detail::Panel> panels{
        {"A: median loss", "experiment", "median loss",
         [](const AggregateCurves&, std::size_t k) { return static_cast<double>(k + 1); },
         [](const AggregateCurves& c, std::size_t k) { return c.median_loss[k]; }},
        {"B: median loss vs effective time", "effective time", "median loss",
         [](const AggregateCurves& c, std::size_t k) { return c.effective_time[k]; },
         [](const AggregateCurves& c, std::size_t k) { return c.median_loss[k]; }},
        {"C: loss IQR", "experiment", "IQR",
         [](const AggregateCurves&, std::size_t k) { return static_cast<double>(k + 1); },
         [](const AggregateCurves& c, std::size_t k) { return c.iqr(k); }},
    };

    const int margin_l = 70, margin_r = 20, margin_t = 50, margin_b = 50;
    const int pw = style.panel_width, ph = style.panel_height;
    const int cell_w = margin_l + pw + margin_r;
    const int legend_rows = static_cast<int>((curves.size() + 3) / 4);
    const int width = cell_w * static_cast<int>(panels.size());
    const int height = margin_t + ph + margin_b + 20 + 18 * legend_rows + 10;

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(width) + "\" height=\""
         + std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" + std::to_string(height)
         + "\" fill=\"white\"/>\n";
    if (!style.title.empty())
        s += "<text x=\"" + std::to_string(width / 2) + "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
             + detail::xml_escape(style.title) + "</text>\n";

    for (std::size_t p = 0; p < panels.size(); ++p) {
        const auto& panel = panels[p];
        auto ty = [&](double v) { return style.log_y ? std::log10(std::max(v, style.log_floor)) : v; };
        double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
        double ymin = xmin, ymax = -xmin;
        for (const auto& c : curves)
            for (std::size_t k = 0; k < c.size(); ++k) {
                xmin = std::min(xmin, panel.x(c, k));
                xmax = std::max(xmax, panel.x(c, k));
                ymin = std::min(ymin, ty(panel.y(c, k)));
                ymax = std::max(ymax, ty(panel.y(c, k)));
            }
        if (!(xmax > xmin))
            xmax = xmin + 1.0;
        if (style.log_y) {
            ymin = std::floor(ymin);
            ymax = std::ceil(ymax);
        }
        if (!(ymax > ymin))
            ymax = ymin + 1.0;

        const double ox = static_cast<double>(cell_w) * static_cast<double>(p) + margin_l;
        const double oy = margin_t;
        auto px = [&](double v) { return ox + (v - xmin) / (xmax - xmin) * pw; };
        auto py = [&](double v) { return oy + ph - (v - ymin) / (ymax - ymin) * ph; };

        s += "<g>\n";
        s += "<text x=\"" + fmt2(ox + pw / 2.0) + "\" y=\"" + fmt2(oy - 10) + "\" text-anchor=\"middle\" font-size=\"12\">"
             + detail::xml_escape(panel.title) + "</text>\n";
        s += "<rect x=\"" + fmt2(ox) + "\" y=\"" + fmt2(oy) + "\" width=\"" + std::to_string(pw) + "\" height=\""
             + std::to_string(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int t = 0; t <= 4; ++t) {
            const double xv = xmin + (xmax - xmin) * t / 4.0;
            s += "<line x1=\"" + fmt2(px(xv)) + "\" y1=\"" + fmt2(oy + ph) + "\" x2=\"" + fmt2(px(xv)) + "\" y2=\""
                 + fmt2(oy + ph + 4) + "\" stroke=\"black\"/>\n";
            s += "<text x=\"" + fmt2(px(xv)) + "\" y=\"" + fmt2(oy + ph + 16) + "\" text-anchor=\"middle\">"
                 + detail::tick_label(xv) + "</text>\n";
        }
        const int yticks = style.log_y ? static_cast<int>(ymax - ymin) : 4;
        for (int t = 0; t <= yticks; ++t) {
            const double yv = ymin + (ymax - ymin) * t / std::max(yticks, 1);
            const double label = style.log_y ? std::pow(10.0, yv) : yv;
            s += "<line x1=\"" + fmt2(ox - 4) + "\" y1=\"" + fmt2(py(yv)) + "\" x2=\"" + fmt2(ox) + "\" y2=\""
                 + fmt2(py(yv)) + "\" stroke=\"black\"/>\n";
            s += "<text x=\"" + fmt2(ox - 6) + "\" y=\"" + fmt2(py(yv) + 4) + "\" text-anchor=\"end\">"
                 + detail::tick_label(label) + "</text>\n";
        }
        s += "<text x=\"" + fmt2(ox + pw / 2.0) + "\" y=\"" + fmt2(oy + ph + 34) + "\" text-anchor=\"middle\">"
             + detail::xml_escape(panel.x_label) + "</text>\n";
        s += "<text x=\"" + fmt2(ox - 55) + "\" y=\"" + fmt2(oy + ph / 2.0) + "\" text-anchor=\"middle\" transform=\"rotate(-90 "
             + fmt2(ox - 55) + " " + fmt2(oy + ph / 2.0) + ")\">" + detail::xml_escape(panel.y_label)
             + (style.log_y ? " (log)" : "") + "</text>\n";

        for (std::size_t i = 0; i < curves.size(); ++i) {
            const auto& c = curves[i];
            s += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" + std::string(detail::kPalette[i % detail::kPalette.size()])
                 + "\" points=\"";
            for (std::size_t k = 0; k < c.size(); ++k) {
                if (k)
                    s += ' ';
                s += fmt2(px(panel.x(c, k))) + "," + fmt2(py(ty(panel.y(c, k))));
            }
            s += "\"/>\n";
        }
        s += "</g>\n";
    }

    const int ly0 = margin_t + ph + margin_b + 20;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const int col = static_cast<int>(i % 4), row = static_cast<int>(i / 4);
        const int lx = margin_l + col * 200;
        const int ly = ly0 + row * 18;
        const char* color = detail::kPalette[i % detail::kPalette.size()];
        s += "<line x1=\"" + std::to_string(lx) + "\" y1=\"" + std::to_string(ly - 4) + "\" x2=\"" + std::to_string(lx + 24)
             + "\" y2=\"" + std::to_string(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        s += "<text x=\"" + std::to_string(lx + 30) + "\" y=\"" + std::to_string(ly) + "\">"
             + detail::xml_escape(cell_label(curves[i].key)) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

inline void render_svg(const std::vector<AggregateCurves>& curves, const SvgStyle& style,
                       const std::filesystem::path& path)
{
    write_text_file(path, svg_string(curves, style));
}

} // namespace asyncbo

#endif
