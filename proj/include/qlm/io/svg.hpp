#pragma once

// Minimal static SVG line plots: axes, ticks, polylines, horizontal reference
// lines and a legend.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace qlm::io {

struct Series {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct ReferenceLine {
    double y;
    std::string color;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    double width = 800.0;
    double height = 500.0;
    double margin_fraction = 0.05;  // data range padding on each side
};

struct AxisRange {
    double lo;
    double hi;
};

/// Data range padded by `fraction` of its span on both sides.
inline AxisRange padded_range(double lo, double hi, double fraction)
{
    if (!(lo < hi)) {
        const double c = std::isfinite(lo) ? lo : 0.0;
        const double h = std::fabs(c) > 0.0 ? 0.5 * std::fabs(c) : 0.5;
        return {c - h, c + h};
    }
    const double pad = fraction * (hi - lo);
    return {lo - pad, hi + pad};
}

namespace detail {

inline std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick_label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline std::string escape(const std::string& s)
{
    std::string o;
    for (char c : s) {
        switch (c) {
        case '<': o += "&lt;"; break;
        case '>': o += "&gt;"; break;
        case '&': o += "&amp;"; break;
        case '"': o += "&quot;"; break;
        default: o += c;
        }
    }
    return o;
}

inline std::vector<double> linear_ticks(double lo, double hi, int target = 6)
{
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step)
        t.push_back(std::fabs(v) < 1e-12 * step ? 0.0 : v);
    return t;
}

}  // namespace detail

struct PlotRanges {
    AxisRange x;  // log10 units when log_x
    AxisRange y;
};

/// Axis ranges: the data extent (with reference lines) padded by the margin.
/// With log_x, points with x <= 0 are skipped and the padding is in log10 space.
inline PlotRanges plot_ranges(const PlotSpec& spec, const std::vector<Series>& series,
                              const std::vector<ReferenceLine>& refs = {})
{
    auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (spec.log_x && !(s.x[i] > 0.0)) continue;
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xlo = std::min(xlo, tx(s.x[i]));
            xhi = std::max(xhi, tx(s.x[i]));
            ylo = std::min(ylo, s.y[i]);
            yhi = std::max(yhi, s.y[i]);
        }
    for (const auto& r : refs) {
        ylo = std::min(ylo, r.y);
        yhi = std::max(yhi, r.y);
    }
    return {padded_range(xlo, xhi, spec.margin_fraction), padded_range(ylo, yhi, spec.margin_fraction)};
}

inline std::string render_svg(const PlotSpec& spec, const std::vector<Series>& series,
                              const std::vector<ReferenceLine>& refs = {})
{
    auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };
    const PlotRanges ranges = plot_ranges(spec, series, refs);
    const AxisRange xr = ranges.x;
    const AxisRange yr = ranges.y;

    const double left = 80, right = 150, top = 40, bottom = 60;
    const double pw = spec.width - left - right;
    const double ph = spec.height - top - bottom;
    auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return top + (yr.hi - y) / (yr.hi - yr.lo) * ph; };
    using detail::num;

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(spec.width) << "\" height=\"" << num(spec.height)
      << "\" viewBox=\"0 0 " << num(spec.width) << ' ' << num(spec.height) << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<rect class=\"frame\" x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    // ticks
    std::vector<double> xt;
    if (spec.log_x) {
        for (double d = std::ceil(xr.lo); d <= xr.hi; d += 1.0) xt.push_back(d);
    } else {
        xt = detail::linear_ticks(xr.lo, xr.hi);
    }
    for (double v : xt) {
        const double x = px(v);
        o << "<line x1=\"" << num(x) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(x) << "\" y2=\""
          << num(top + ph + 5) << "\" stroke=\"black\"/>\n";
        const std::string lab = spec.log_x ? "1e" + detail::tick_label(v) : detail::tick_label(v);
        o << "<text x=\"" << num(x) << "\" y=\"" << num(top + ph + 20)
          << "\" font-size=\"12\" text-anchor=\"middle\">" << lab << "</text>\n";
    }
    for (double v : detail::linear_ticks(yr.lo, yr.hi)) {
        const double y = py(v);
        o << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left) << "\" y2=\""
          << num(y) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << num(left - 8) << "\" y=\"" << num(y + 4)
          << "\" font-size=\"12\" text-anchor=\"end\">" << detail::tick_label(v) << "</text>\n";
    }

    o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(spec.height - 15)
      << "\" font-size=\"14\" text-anchor=\"middle\">" << detail::escape(spec.x_label) << "</text>\n";
    o << "<text x=\"18\" y=\"" << num(top + ph / 2) << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << num(top + ph / 2) << ")\">" << detail::escape(spec.y_label) << "</text>\n";
    if (!spec.title.empty())
        o << "<text x=\"" << num(left + pw / 2) << "\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">"
          << detail::escape(spec.title) << "</text>\n";

    for (const auto& r : refs)
        o << "<line class=\"reference\" x1=\"" << num(left) << "\" y1=\"" << num(py(r.y)) << "\" x2=\""
          << num(left + pw) << "\" y2=\"" << num(py(r.y)) << "\" stroke=\"" << r.color
          << "\" stroke-width=\"0.7\" stroke-opacity=\"0.7\"/>\n";

    for (const auto& s : series) {
        o << "<polyline class=\"series\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
        if (s.dashed) o << " stroke-dasharray=\"6 4\"";
        o << " points=\"";
        bool first = true;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (spec.log_x && !(s.x[i] > 0.0)) continue;
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            o << (first ? "" : " ") << num(px(tx(s.x[i]))) << ',' << num(py(s.y[i]));
            first = false;
        }
        o << "\"/>\n";
    }

    double ly = top + 10;
    for (const auto& s : series) {
        o << "<line x1=\"" << num(left + pw + 15) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(left + pw + 40)
          << "\" y2=\"" << num(ly) << "\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
          << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
        o << "<text x=\"" << num(left + pw + 45) << "\" y=\"" << num(ly + 4) << "\" font-size=\"12\">"
          << detail::escape(s.label) << "</text>\n";
        ly += 18;
    }
    o << "</svg>\n";
    return o.str();
}

struct Cell {
    double x;
    double y;
    std::string color;
};

/// Square cells of side cell_w x cell_h (data units) centred on each point.
inline std::string render_cells(const PlotSpec& spec, const std::vector<Cell>& cells, double cell_w, double cell_h,
                                const std::vector<std::pair<std::string, std::string>>& legend)
{
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (const auto& c : cells) {
        xlo = std::min(xlo, c.x - cell_w / 2);
        xhi = std::max(xhi, c.x + cell_w / 2);
        ylo = std::min(ylo, c.y - cell_h / 2);
        yhi = std::max(yhi, c.y + cell_h / 2);
    }
    if (cells.empty()) xlo = ylo = 0.0, xhi = yhi = 1.0;
    const double left = 80, right = 170, top = 40, bottom = 60;
    const double pw = spec.width - left - right;
    const double ph = spec.height - top - bottom;
    auto px = [&](double x) { return left + (x - xlo) / (xhi - xlo) * pw; };
    auto py = [&](double y) { return top + (yhi - y) / (yhi - ylo) * ph; };
    using detail::num;

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(spec.width) << "\" height=\"" << num(spec.height)
      << "\" viewBox=\"0 0 " << num(spec.width) << ' ' << num(spec.height) << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    const double w = cell_w / (xhi - xlo) * pw;
    const double h = cell_h / (yhi - ylo) * ph;
    for (const auto& c : cells)
        o << "<rect class=\"cell\" x=\"" << num(px(c.x) - w / 2) << "\" y=\"" << num(py(c.y) - h / 2) << "\" width=\""
          << num(w) << "\" height=\"" << num(h) << "\" fill=\"" << c.color << "\"/>\n";
    o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double v : detail::linear_ticks(xlo, xhi))
        o << "<text x=\"" << num(px(v)) << "\" y=\"" << num(top + ph + 20) << "\" font-size=\"12\" text-anchor=\"middle\">"
          << detail::tick_label(v) << "</text>\n";
    for (double v : detail::linear_ticks(ylo, yhi))
        o << "<text x=\"" << num(left - 8) << "\" y=\"" << num(py(v) + 4) << "\" font-size=\"12\" text-anchor=\"end\">"
          << detail::tick_label(v) << "</text>\n";
    o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(spec.height - 15)
      << "\" font-size=\"14\" text-anchor=\"middle\">" << detail::escape(spec.x_label) << "</text>\n";
    o << "<text x=\"18\" y=\"" << num(top + ph / 2) << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << num(top + ph / 2) << ")\">" << detail::escape(spec.y_label) << "</text>\n";
    if (!spec.title.empty())
        o << "<text x=\"" << num(left + pw / 2) << "\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">"
          << detail::escape(spec.title) << "</text>\n";
    double ly = top + 10;
    for (const auto& [label, color] : legend) {
        o << "<rect x=\"" << num(left + pw + 15) << "\" y=\"" << num(ly - 6) << "\" width=\"12\" height=\"12\" fill=\""
          << color << "\"/>\n";
        o << "<text x=\"" << num(left + pw + 32) << "\" y=\"" << num(ly + 4) << "\" font-size=\"12\">"
          << detail::escape(label) << "</text>\n";
        ly += 18;
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace qlm::io
