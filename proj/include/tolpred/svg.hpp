#pragma once

// Minimal static SVG line plots. Coordinates are written with two decimals
// so output is byte-stable across runs.

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tolpred::svg {

struct Series {
    enum class Style { Line, Step, Points, Bars };

    Series() = default;
    Series(std::string label_, std::vector<double> x_ = {}, std::vector<double> y_ = {}, Style style_ = Style::Line,
           std::string color_ = {}, bool dashed_ = false)
        : label(std::move(label_)), x(std::move(x_)), y(std::move(y_)), style(style_), color(std::move(color_)),
          dashed(dashed_) {}

    std::string label;
    std::vector<double> x, y;
    Style style = Style::Line;
    std::string color;  // empty: palette by position
    bool dashed = false;
};

struct Plot {
    std::string title, xlabel, ylabel;
    std::vector<Series> series;
    std::vector<double> hlines;  // dotted horizontal guides
    std::vector<double> vlines;
    std::optional<std::pair<double, double>> xrange, yrange;
    int width = 720;
    int height = 480;
};

// Renders the plot. Non-finite points are dropped.
std::string render(const Plot& plot);

// Axis tick positions covering [lo, hi] at a 1-2-5 step.
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

}  // namespace tolpred::svg
