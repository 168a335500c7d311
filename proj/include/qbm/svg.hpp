#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "qbm/format.hpp"

// Minimal static SVG emission: a line chart for time series and a heatmap for
// sweep grids. Data-first output; styling is deliberately plain.

namespace qbm::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

namespace detail {

struct Range {
    double lo = 0.0, hi = 1.0;
    double map(double v, double a, double b) const {
        if (hi == lo) return (a + b) / 2.0;
        return a + (v - lo) / (hi - lo) * (b - a);
    }
};

inline Range find_range(const std::vector<const std::vector<double>*>& cols) {
    Range r{1e300, -1e300};
    for (const auto* c : cols)
        for (double v : *c)
            if (std::isfinite(v)) {
                r.lo = std::min(r.lo, v);
                r.hi = std::max(r.hi, v);
            }
    if (r.lo > r.hi) r = {0.0, 1.0};
    if (r.lo == r.hi) {
        r.lo -= 0.5;
        r.hi += 0.5;
    }
    return r;
}

inline std::string color(int i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf"};
    return palette[i % 7];
}

/// Blue -> white -> red map on [0, 1].
inline std::string heat_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    auto lerp = [](double a, double b, double u) { return a + (b - a) * u; };
    double r, g, b;
    if (t < 0.5) {
        const double u = t * 2.0;
        r = lerp(33, 247, u); g = lerp(102, 247, u); b = lerp(172, 247, u);
    } else {
        const double u = t * 2.0 - 1.0;
        r = lerp(247, 178, u); g = lerp(247, 24, u); b = lerp(247, 43, u);
    }
    std::ostringstream os;
    os << "rgb(" << static_cast<int>(r) << ',' << static_cast<int>(g) << ','
       << static_cast<int>(b) << ')';
    return os.str();
}

}  // namespace detail

inline std::string line_chart(const std::vector<Series>& series, const std::string& x_label,
                              const std::string& y_label, int width = 720, int height = 480) {
    const double mL = 60, mR = 16, mT = 16, mB = 44;
    std::vector<const std::vector<double>*> xs, ys;
    for (const auto& s : series) {
        xs.push_back(&s.x);
        ys.push_back(&s.y);
    }
    const auto rx = detail::find_range(xs);
    const auto ry = detail::find_range(ys);

    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
       << "' font-family='sans-serif' font-size='12'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<rect x='" << mL << "' y='" << mT << "' width='" << width - mL - mR << "' height='"
       << height - mT - mB << "' fill='none' stroke='#444'/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
        const double px = rx.map(fx, mL, width - mR);
        const double py = ry.map(fy, height - mB, mT);
        os << "<text x='" << px << "' y='" << height - mB + 16
           << "' text-anchor='middle'>" << fmt(fx, 4) << "</text>\n";
        os << "<text x='" << mL - 6 << "' y='" << py + 4 << "' text-anchor='end'>" << fmt(fy, 4)
           << "</text>\n";
    }
    os << "<text x='" << (mL + width - mR) / 2 << "' y='" << height - 8
       << "' text-anchor='middle'>" << x_label << "</text>\n";
    os << "<text x='14' y='" << (mT + height - mB) / 2 << "' text-anchor='middle' transform='rotate(-90 14 "
       << (mT + height - mB) / 2 << ")'>" << y_label << "</text>\n";

    int idx = 0;
    for (const auto& s : series) {
        os << "<polyline fill='none' stroke='" << detail::color(idx) << "' stroke-width='1.5' points='";
        bool open = false;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i])) {
                open = false;
                continue;
            }
            if (open) os << ' ';
            os << rx.map(s.x[i], mL, width - mR) << ',' << ry.map(s.y[i], height - mB, mT);
            open = true;
        }
        os << "'/>\n";
        os << "<text x='" << width - mR - 8 << "' y='" << mT + 16 + 16 * idx
           << "' text-anchor='end' fill='" << detail::color(idx) << "'>" << s.name << "</text>\n";
        ++idx;
    }
    os << "</svg>\n";
    return os.str();
}

/// values[i][j] with i along axis1 (vertical, min at bottom) and j along axis2.
inline std::string heatmap(const std::vector<std::vector<double>>& values,
                           const std::string& x_label, const std::string& y_label,
                           int width = 720, int height = 560) {
    const double mL = 60, mR = 16, mT = 16, mB = 44;
    const int n1 = static_cast<int>(values.size());
    const int n2 = n1 > 0 ? static_cast<int>(values[0].size()) : 0;
    double lo = 1e300, hi = -1e300;
    for (const auto& row : values)
        for (double v : row)
            if (std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    if (lo > hi) { lo = 0.0; hi = 1.0; }
    if (lo == hi) hi = lo + 1.0;

    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
       << "' font-family='sans-serif' font-size='12'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    const double cw = (width - mL - mR) / std::max(1, n2);
    const double ch = (height - mT - mB) / std::max(1, n1);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            const double v = values[i][j];
            const std::string fill =
                std::isfinite(v) ? detail::heat_color((v - lo) / (hi - lo)) : "#bbbbbb";
            os << "<rect x='" << mL + j * cw << "' y='" << mT + (n1 - 1 - i) * ch << "' width='"
               << cw + 0.5 << "' height='" << ch + 0.5 << "' fill='" << fill << "'/>\n";
        }
    os << "<rect x='" << mL << "' y='" << mT << "' width='" << width - mL - mR << "' height='"
       << height - mT - mB << "' fill='none' stroke='#444'/>\n";
    os << "<text x='" << (mL + width - mR) / 2 << "' y='" << height - 8
       << "' text-anchor='middle'>" << x_label << " (range " << fmt(lo, 4) << " to " << fmt(hi, 4)
       << ")</text>\n";
    os << "<text x='14' y='" << (mT + height - mB) / 2 << "' text-anchor='middle' transform='rotate(-90 14 "
       << (mT + height - mB) / 2 << ")'>" << y_label << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace qbm::svg
