#pragma once

#include <string>
#include <vector>

namespace dehum {

struct ChartPoint {
    double x = 0;
    double y = 0;
    double ci_low = 0;
    double ci_high = 0;
    bool has_ci = false;
};

struct ChartSeries {
    std::string name;
    std::vector<ChartPoint> points; // ascending x
    std::vector<double> smoothed;   // optional overlay, aligned with points
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 900;
    int height = 500;
    bool draw_bands = true;
};

// Self-contained SVG line chart: confidence bands as translucent polygons,
// data as polylines, optional smoothed overlays, axis ticks and a legend.
// Output is deterministic for identical input.
std::string render_line_chart(const ChartSpec& spec, const std::vector<ChartSeries>& series);

} // namespace dehum
