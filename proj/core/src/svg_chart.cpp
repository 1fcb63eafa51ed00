#include "dehum/svg_chart.hpp"

#include "dehum/error.hpp"
#include "dehum/strings.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dehum {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

// round tick spacing to 1/2/5 times a power of ten
double nice_step(double span, int target_ticks) {
    if (span <= 0) return 1.0;
    double raw = span / target_ticks;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double norm = raw / mag;
    double step;
    if (norm < 1.5) step = 1.0;
    else if (norm < 3.5) step = 2.0;
    else if (norm < 7.5) step = 5.0;
    else step = 10.0;
    return step * mag;
}

std::string fmt(double v) { return format_fixed(v, 2); }

std::string fmt_tick(double v) {
    // trim trailing zeros for axis labels
    std::string s = format_fixed(v, 4);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    if (s.empty() || s == "-0") s = "0";
    return s;
}

} // namespace

std::string render_line_chart(const ChartSpec& spec, const std::vector<ChartSeries>& series) {
    if (series.empty()) throw Error("render_line_chart: no series");
    for (const auto& s : series) {
        if (s.points.empty()) throw Error("render_line_chart: series '" + s.name + "' is empty");
        if (!s.smoothed.empty() && s.smoothed.size() != s.points.size())
            throw Error("render_line_chart: smoothed overlay misaligned in '" + s.name + "'");
    }

    double x_min = series[0].points[0].x;
    double x_max = x_min;
    double y_min = series[0].points[0].y;
    double y_max = y_min;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.points.size(); ++i) {
            const auto& p = s.points[i];
            x_min = std::min(x_min, p.x);
            x_max = std::max(x_max, p.x);
            double lo = p.has_ci ? std::min(p.y, p.ci_low) : p.y;
            double hi = p.has_ci ? std::max(p.y, p.ci_high) : p.y;
            if (!s.smoothed.empty()) {
                lo = std::min(lo, s.smoothed[i]);
                hi = std::max(hi, s.smoothed[i]);
            }
            y_min = std::min(y_min, lo);
            y_max = std::max(y_max, hi);
        }
    }
    if (x_max == x_min) {
        x_min -= 1;
        x_max += 1;
    }
    if (y_max == y_min) {
        y_min -= 1;
        y_max += 1;
    }
    double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    const double margin_left = 70;
    const double margin_right = 160;
    const double margin_top = 40;
    const double margin_bottom = 50;
    const double plot_w = spec.width - margin_left - margin_right;
    const double plot_h = spec.height - margin_top - margin_bottom;

    auto sx = [&](double x) { return margin_left + (x - x_min) / (x_max - x_min) * plot_w; };
    auto sy = [&](double y) { return margin_top + (y_max - y) / (y_max - y_min) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
        << spec.height << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n";
    svg << "<rect width=\"" << spec.width << "\" height=\"" << spec.height
        << "\" fill=\"white\"/>\n";
    if (!spec.title.empty())
        svg << "<text x=\"" << fmt(spec.width / 2.0)
            << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
            << xml_escape(spec.title) << "</text>\n";

    // gridlines and ticks
    double x_step = nice_step(x_max - x_min, 8);
    double y_step = nice_step(y_max - y_min, 6);
    svg << "<g class=\"axes\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (double tx = std::ceil(x_min / x_step) * x_step; tx <= x_max + 1e-9; tx += x_step) {
        double px = sx(tx);
        svg << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(margin_top) << "\" x2=\"" << fmt(px)
            << "\" y2=\"" << fmt(margin_top + plot_h) << "\" stroke=\"#eee\"/>\n";
        svg << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(margin_top + plot_h + 18)
            << "\" text-anchor=\"middle\">" << fmt_tick(tx) << "</text>\n";
    }
    for (double ty = std::ceil(y_min / y_step) * y_step; ty <= y_max + 1e-9; ty += y_step) {
        double py = sy(ty);
        svg << "<line x1=\"" << fmt(margin_left) << "\" y1=\"" << fmt(py) << "\" x2=\""
            << fmt(margin_left + plot_w) << "\" y2=\"" << fmt(py) << "\" stroke=\"#eee\"/>\n";
        svg << "<text x=\"" << fmt(margin_left - 8) << "\" y=\"" << fmt(py + 4)
            << "\" text-anchor=\"end\">" << fmt_tick(ty) << "</text>\n";
    }
    svg << "<line x1=\"" << fmt(margin_left) << "\" y1=\"" << fmt(margin_top + plot_h)
        << "\" x2=\"" << fmt(margin_left + plot_w) << "\" y2=\"" << fmt(margin_top + plot_h)
        << "\" stroke=\"#333\"/>\n";
    svg << "<line x1=\"" << fmt(margin_left) << "\" y1=\"" << fmt(margin_top) << "\" x2=\""
        << fmt(margin_left) << "\" y2=\"" << fmt(margin_top + plot_h) << "\" stroke=\"#333\"/>\n";
    if (!spec.x_label.empty())
        svg << "<text x=\"" << fmt(margin_left + plot_w / 2) << "\" y=\""
            << fmt(spec.height - 10.0) << "\" text-anchor=\"middle\">"
            << xml_escape(spec.x_label) << "</text>\n";
    if (!spec.y_label.empty())
        svg << "<text x=\"18\" y=\"" << fmt(margin_top + plot_h / 2)
            << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
            << fmt(margin_top + plot_h / 2) << ")\">" << xml_escape(spec.y_label) << "</text>\n";
    svg << "</g>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % kPaletteSize];

        if (spec.draw_bands) {
            bool any_ci = false;
            for (const auto& p : s.points)
                if (p.has_ci) any_ci = true;
            if (any_ci) {
                svg << "<polygon class=\"band\" fill=\"" << color
                    << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
                for (const auto& p : s.points)
                    svg << fmt(sx(p.x)) << ',' << fmt(sy(p.has_ci ? p.ci_high : p.y)) << ' ';
                for (auto it = s.points.rbegin(); it != s.points.rend(); ++it)
                    svg << fmt(sx(it->x)) << ',' << fmt(sy(it->has_ci ? it->ci_low : it->y)) << ' ';
                svg << "\"/>\n";
            }
        }

        svg << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : s.points) svg << fmt(sx(p.x)) << ',' << fmt(sy(p.y)) << ' ';
        svg << "\"/>\n";

        for (const auto& p : s.points)
            svg << "<circle cx=\"" << fmt(sx(p.x)) << "\" cy=\"" << fmt(sy(p.y))
                << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";

        if (!s.smoothed.empty()) {
            svg << "<polyline class=\"lowess\" fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"2.5\" stroke-opacity=\"0.6\" stroke-dasharray=\"6 3\""
                << " points=\"";
            for (std::size_t i = 0; i < s.points.size(); ++i)
                svg << fmt(sx(s.points[i].x)) << ',' << fmt(sy(s.smoothed[i])) << ' ';
            svg << "\"/>\n";
        }

        double ly = margin_top + 16.0 * static_cast<double>(si);
        svg << "<rect x=\"" << fmt(margin_left + plot_w + 12) << "\" y=\"" << fmt(ly)
            << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
        svg << "<text x=\"" << fmt(margin_left + plot_w + 30) << "\" y=\"" << fmt(ly + 10)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(s.name)
            << "</text>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

} // namespace dehum
