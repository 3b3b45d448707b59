#pragma once

// Minimal self-contained SVG plotting: site-time heatmaps and line plots.
// Long time axes are thinned to at most kMaxColumns samples.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magrelax/error.hpp"

namespace magrelax::svg {

inline constexpr std::size_t kMaxColumns = 400;

struct Line {
    std::string label;
    std::vector<double> x, y;
    std::string color = "#1f77b4";
    bool dashed = false;
};

struct Reference {
    std::string label;
    double y = 0.0;
    std::string color = "#555555";
};

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

// Sampled viridis endpoints, linearly interpolated.
inline std::string colormap(double u) {
    static constexpr double stops[5][3] = {
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
    u = std::clamp(std::isfinite(u) ? u : 0.0, 0.0, 1.0) * 4.0;
    const int i = std::min(int(u), 3);
    const double f = u - i;
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", int(stops[i][0] + f * (stops[i + 1][0] - stops[i][0])),
                  int(stops[i][1] + f * (stops[i + 1][1] - stops[i][1])),
                  int(stops[i][2] + f * (stops[i + 1][2] - stops[i][2])));
    return buf;
}

inline std::vector<std::size_t> thin(std::size_t count) {
    std::vector<std::size_t> idx;
    const std::size_t stride = std::max<std::size_t>(1, (count + kMaxColumns - 1) / kMaxColumns);
    for (std::size_t i = 0; i < count; i += stride) idx.push_back(i);
    if (!idx.empty() && idx.back() != count - 1) idx.push_back(count - 1);
    return idx;
}

struct Frame {
    double left = 70, top = 40, width = 560, height = 320;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    double px(double x) const { return left + (x - x0) / (x1 - x0) * width; }
    double py(double y) const { return top + height - (y - y0) / (y1 - y0) * height; }
};

inline void header(std::ostringstream& o, const std::string& title) {
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"760\" height=\"420\" font-family=\"sans-serif\" "
         "font-size=\"12\">\n<rect width=\"760\" height=\"420\" fill=\"white\"/>\n"
      << "<text x=\"380\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
}

inline void axes(std::ostringstream& o, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
    o << "<rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\"" << f.width << "\" height=\"" << f.height
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0, yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
        o << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << f.top + f.height + 16
          << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
        o << "<text x=\"" << f.left - 6 << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
          << "</text>\n";
    }
    o << "<text x=\"" << f.left + f.width / 2 << "\" y=\"" << f.top + f.height + 34
      << "\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
    o << "<text x=\"18\" y=\"" << f.top + f.height / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << f.top + f.height / 2 << ")\">" << escape(ylabel) << "</text>\n";
}

} // namespace detail

// values is T x N (rows are times); sites run bottom (1) to top (N).
inline std::string heatmap(const std::string& title, const std::vector<double>& times, const Eigen::MatrixXd& values,
                           const std::string& xlabel, const std::string& colorbar_label) {
    if (times.size() < 2 || values.rows() != Eigen::Index(times.size()) || values.cols() < 1)
        throw InvalidArgument("heatmap needs a T x N matrix matching at least two times");
    const double lo = values.minCoeff(), hi = values.maxCoeff();
    const double span = hi > lo ? hi - lo : 1.0;
    detail::Frame f;
    f.x0 = times.front();
    f.x1 = times.back();
    f.y0 = 0.5;
    f.y1 = double(values.cols()) + 0.5;
    std::ostringstream o;
    detail::header(o, title);
    const auto idx = detail::thin(times.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const double ta = k == 0 ? times[idx[k]] : 0.5 * (times[idx[k - 1]] + times[idx[k]]);
        const double tb = k + 1 == idx.size() ? times[idx[k]] : 0.5 * (times[idx[k]] + times[idx[k + 1]]);
        for (Eigen::Index n = 0; n < values.cols(); ++n) {
            const double yt = f.py(double(n) + 1.5), yb = f.py(double(n) + 0.5);
            o << "<rect x=\"" << detail::num(f.px(ta)) << "\" y=\"" << detail::num(yt) << "\" width=\""
              << detail::num(std::max(f.px(tb) - f.px(ta), 0.5) + 0.3) << "\" height=\"" << detail::num(yb - yt + 0.3)
              << "\" fill=\"" << detail::colormap((values(Eigen::Index(idx[k]), n) - lo) / span) << "\"/>\n";
        }
    }
    detail::axes(o, f, xlabel, "site n");
    for (int k = 0; k <= 20; ++k) {
        const double u = k / 20.0;
        o << "<rect x=\"650\" y=\"" << detail::num(f.top + f.height * (1.0 - u) - f.height / 20.0)
          << "\" width=\"18\" height=\"" << detail::num(f.height / 20.0 + 0.5) << "\" fill=\"" << detail::colormap(u)
          << "\"/>\n";
    }
    o << "<text x=\"672\" y=\"" << f.top + 4 << "\">" << detail::num(hi) << "</text>\n"
      << "<text x=\"672\" y=\"" << f.top + f.height << "\">" << detail::num(lo) << "</text>\n"
      << "<text x=\"650\" y=\"" << f.top + f.height + 20 << "\">" << detail::escape(colorbar_label) << "</text>\n"
      << "</svg>\n";
    return o.str();
}

inline std::string line_plot(const std::string& title, const std::vector<Line>& lines,
                             const std::vector<Reference>& refs, const std::string& xlabel,
                             const std::string& ylabel) {
    if (lines.empty()) throw InvalidArgument("line plot needs at least one series");
    detail::Frame f;
    f.x0 = lines.front().x.front();
    f.x1 = lines.front().x.back();
    double lo = 1e300, hi = -1e300;
    for (const auto& l : lines) {
        if (l.x.size() != l.y.size() || l.x.size() < 2) throw InvalidArgument("line series must have matching x, y");
        f.x0 = std::min(f.x0, l.x.front());
        f.x1 = std::max(f.x1, l.x.back());
        for (double v : l.y) lo = std::min(lo, v), hi = std::max(hi, v);
    }
    for (const auto& r : refs) lo = std::min(lo, r.y), hi = std::max(hi, r.y);
    const double pad = hi > lo ? 0.05 * (hi - lo) : 0.5;
    f.y0 = lo - pad;
    f.y1 = hi + pad;
    if (f.x1 <= f.x0) f.x1 = f.x0 + 1.0;

    std::ostringstream o;
    detail::header(o, title);
    detail::axes(o, f, xlabel, ylabel);
    for (const auto& r : refs) {
        o << "<line x1=\"" << f.left << "\" x2=\"" << f.left + f.width << "\" y1=\"" << detail::num(f.py(r.y))
          << "\" y2=\"" << detail::num(f.py(r.y)) << "\" stroke=\"" << r.color
          << "\" stroke-dasharray=\"6 4\"/>\n";
    }
    for (const auto& l : lines) {
        o << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"1.3\""
          << (l.dashed ? " stroke-dasharray=\"4 3\"" : "") << " points=\"";
        for (std::size_t i : detail::thin(l.x.size()))
            o << detail::num(f.px(l.x[i])) << ',' << detail::num(f.py(l.y[i])) << ' ';
        o << "\"/>\n";
    }
    double ly = f.top + 8;
    auto legend = [&](const std::string& label, const std::string& color, bool dashed) {
        o << "<line x1=\"640\" x2=\"665\" y1=\"" << ly << "\" y2=\"" << ly << "\" stroke=\"" << color << "\""
          << (dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n<text x=\"670\" y=\"" << ly + 4 << "\">"
          << detail::escape(label) << "</text>\n";
        ly += 18;
    };
    for (const auto& l : lines) legend(l.label, l.color, l.dashed);
    for (const auto& r : refs) legend(r.label, r.color, true);
    o << "</svg>\n";
    return o.str();
}

inline void write(const std::string& path, const std::string& document) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << document;
}

} // namespace magrelax::svg
