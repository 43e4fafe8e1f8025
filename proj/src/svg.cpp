#include "tolpred/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace tolpred::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v, double step) {
    char buf[32];
    const int digits = std::max(0, static_cast<int>(-std::floor(std::log10(step) + 1e-9)));
    std::snprintf(buf, sizeof buf, "%.*f", std::min(digits, 6), std::abs(v) < 1e-12 * step ? 0.0 : v);
    return buf;
}

std::string escape(const std::string& s) {
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

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target) {
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / std::max(1, target);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> t;
    for (double v = std::ceil(lo / step - 1e-9) * step; v <= hi + 1e-9 * step; v += step) t.push_back(v);
    return t;
}

std::string render(const Plot& p) {
    const double ml = 70, mr = 20, mt = 40, mb = 55;
    const double W = p.width, H = p.height, pw = W - ml - mr, ph = H - mt - mb;

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : p.series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    for (const auto& s : p.series)
        if (s.style == Series::Style::Bars) y0 = std::min(y0, 0.0);
    if (p.xrange) std::tie(x0, x1) = *p.xrange;
    if (p.yrange) std::tie(y0, y1) = *p.yrange;
    if (x1 <= x0) x1 = x0 + 1.0;
    if (y1 <= y0) y1 = y0 + 1.0;

    auto X = [&](double x) { return ml + (x - x0) / (x1 - x0) * pw; };
    auto Y = [&](double y) { return mt + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << p.width << "\" height=\"" << p.height
      << "\" viewBox=\"0 0 " << p.width << ' ' << p.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!p.title.empty())
        o << "<text x=\"" << fmt(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(p.title)
          << "</text>\n";

    // axes and ticks
    o << "<g stroke=\"#333\" fill=\"none\"><rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(pw)
      << "\" height=\"" << fmt(ph) << "\"/></g>\n";
    const auto xt = nice_ticks(x0, x1);
    const auto yt = nice_ticks(y0, y1);
    const double xs = xt.size() > 1 ? xt[1] - xt[0] : 1.0, ys = yt.size() > 1 ? yt[1] - yt[0] : 1.0;
    o << "<g class=\"ticks\">\n";
    for (double v : xt)
        o << "<line x1=\"" << fmt(X(v)) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\"" << fmt(X(v)) << "\" y2=\""
          << fmt(mt + ph + 5) << "\" stroke=\"#333\"/><text x=\"" << fmt(X(v)) << "\" y=\"" << fmt(mt + ph + 18)
          << "\" text-anchor=\"middle\">" << tick_label(v, xs) << "</text>\n";
    for (double v : yt)
        o << "<line x1=\"" << fmt(ml - 5) << "\" y1=\"" << fmt(Y(v)) << "\" x2=\"" << fmt(ml) << "\" y2=\""
          << fmt(Y(v)) << "\" stroke=\"#333\"/><text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(Y(v) + 4)
          << "\" text-anchor=\"end\">" << tick_label(v, ys) << "</text>\n";
    o << "</g>\n";
    if (!p.xlabel.empty())
        o << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(H - 12) << "\" text-anchor=\"middle\">"
          << escape(p.xlabel) << "</text>\n";
    if (!p.ylabel.empty())
        o << "<text transform=\"translate(16 " << fmt(mt + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
          << escape(p.ylabel) << "</text>\n";

    o << "<g clip-path=\"url(#plot)\">\n<clipPath id=\"plot\"><rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt)
      << "\" width=\"" << fmt(pw) << "\" height=\"" << fmt(ph) << "\"/></clipPath>\n";
    for (double h : p.hlines)
        o << "<line class=\"guide\" x1=\"" << fmt(ml) << "\" y1=\"" << fmt(Y(h)) << "\" x2=\"" << fmt(ml + pw)
          << "\" y2=\"" << fmt(Y(h)) << "\" stroke=\"#999\" stroke-dasharray=\"2 3\"/>\n";
    for (double v : p.vlines)
        o << "<line class=\"guide\" x1=\"" << fmt(X(v)) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(X(v))
          << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"#999\" stroke-dasharray=\"2 3\"/>\n";

    for (std::size_t k = 0; k < p.series.size(); ++k) {
        const auto& s = p.series[k];
        const std::string color = s.color.empty() ? kPalette[k % 8] : s.color;
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (s.style == Series::Style::Points || s.style == Series::Style::Bars) {
            o << "<g class=\"series\" data-label=\"" << escape(s.label) << "\" fill=\"" << color << "\">\n";
            const double bw = n > 1 ? 0.8 * pw / static_cast<double>(n) : 10.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                if (s.style == Series::Style::Points)
                    o << "<circle cx=\"" << fmt(X(s.x[i])) << "\" cy=\"" << fmt(Y(s.y[i])) << "\" r=\"2.5\"/>\n";
                else
                    o << "<rect x=\"" << fmt(X(s.x[i]) - bw / 2) << "\" y=\"" << fmt(Y(s.y[i])) << "\" width=\""
                      << fmt(bw) << "\" height=\"" << fmt(std::max(0.0, Y(y0) - Y(s.y[i]))) << "\" opacity=\"0.5\"/>\n";
            }
            o << "</g>\n";
            continue;
        }
        std::string d;
        bool pen = false;
        double prev_y = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                pen = false;
                continue;
            }
            if (!pen) {
                d += "M" + fmt(X(s.x[i])) + "," + fmt(Y(s.y[i]));
                pen = true;
            } else {
                if (s.style == Series::Style::Step) d += "L" + fmt(X(s.x[i])) + "," + fmt(Y(prev_y));
                d += "L" + fmt(X(s.x[i])) + "," + fmt(Y(s.y[i]));
            }
            prev_y = s.y[i];
        }
        o << "<path class=\"series\" data-label=\"" << escape(s.label) << "\" d=\"" << d << "\" fill=\"none\" stroke=\""
          << color << "\" stroke-width=\"1.6\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    }
    o << "</g>\n";

    // legend
    int row = 0;
    for (std::size_t k = 0; k < p.series.size(); ++k) {
        if (p.series[k].label.empty()) continue;
        const std::string color = p.series[k].color.empty() ? kPalette[k % 8] : p.series[k].color;
        const double y = mt + 14 + 16 * row++;
        o << "<line x1=\"" << fmt(ml + pw - 150) << "\" y1=\"" << fmt(y - 4) << "\" x2=\"" << fmt(ml + pw - 130)
          << "\" y2=\"" << fmt(y - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\""
          << (p.series[k].dashed ? " stroke-dasharray=\"6 4\"" : "") << "/><text x=\"" << fmt(ml + pw - 124)
          << "\" y=\"" << fmt(y) << "\">" << escape(p.series[k].label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace tolpred::svg
