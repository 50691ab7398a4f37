#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddparab::output {

/// Rectangular numeric table with a header row.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// 17 significant digits: re-parsing with strtod reproduces the value bitwise.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c) out += ',';
        out += table.header[c];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) throw std::invalid_argument("to_csv: row width differs from header");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += format_double(row[c]);
        }
        out += '\n';
    }
    return out;
}

inline Table parse_csv(const std::string& text) {
    Table t;
    std::istringstream in(text);
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(l);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        return cells;
    };
    if (!std::getline(in, line)) return t;
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& c : split(line)) row.push_back(std::strtod(c.c_str(), nullptr));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    os << text;
    if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline void emit_csv(const Table& table, const std::filesystem::path& path) { write_text(path, to_csv(table)); }

/// Named polyline for line plots.
struct LineSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool dashed = false;
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<LineSeries> series;
};

namespace detail {

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace detail

inline std::string line_plot_svg(const LinePlot& plot) {
    constexpr double width = 640, height = 420, left = 80, right = 150, top = 40, bottom = 55;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& s : plot.series) {
        for (double v : s.x) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
        for (double v : s.y) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
    }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    const double pw = width - left - right, ph = height - top - bottom;
    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
      << detail::escape(plot.title) << "</text>\n"
      << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 5.0;
        const double yv = ymin + (ymax - ymin) * i / 5.0;
        o << "<text x=\"" << detail::px(sx(xv)) << "\" y=\"" << detail::px(top + ph + 18)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << detail::num(xv) << "</text>\n"
          << "<text x=\"" << detail::px(left - 6) << "\" y=\"" << detail::px(sy(yv) + 4)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << detail::num(yv) << "</text>\n"
          << "<line x1=\"" << detail::px(left) << "\" y1=\"" << detail::px(sy(yv)) << "\" x2=\"" << detail::px(left + pw)
          << "\" y2=\"" << detail::px(sy(yv)) << "\" stroke=\"#dddddd\"/>\n";
    }
    o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << detail::escape(plot.x_label)
      << "</text>\n"
      << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\""
      << " transform=\"rotate(-90 18 " << top + ph / 2 << ")\">" << detail::escape(plot.y_label) << "</text>\n";
    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& s = plot.series[k];
        o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\""
          << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            o << (i ? " " : "") << detail::px(sx(s.x[i])) << ',' << detail::px(sy(s.y[i]));
        }
        o << "\"/>\n";
        const double ly = top + 14 + 20.0 * static_cast<double>(k);
        o << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 34 << "\" y2=\"" << ly
          << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
          << "/>\n"
          << "<text x=\"" << left + pw + 40 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"12\">"
          << detail::escape(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

/// Nodal values on the (n+1) x (n+1) grid of the unit square, row-major with x2 outer.
struct HeatMap {
    std::string title;
    std::size_t n_intervals = 0;
    std::vector<double> values;
};

/// Diverging blue-white-red scale, symmetric about zero when the data change sign.
inline std::string heat_color(double v, double lo, double hi) {
    double t;
    if (lo < 0.0 && hi > 0.0) {
        const double m = std::max(-lo, hi);
        t = 0.5 + 0.5 * v / m;
    } else {
        t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
    }
    t = std::clamp(t, 0.0, 1.0);
    int r, g, b;
    if (t < 0.5) {
        const double s = t / 0.5;
        r = static_cast<int>(std::lround(59 + s * (255 - 59)));
        g = static_cast<int>(std::lround(76 + s * (255 - 76)));
        b = static_cast<int>(std::lround(192 + s * (255 - 192)));
    } else {
        const double s = (t - 0.5) / 0.5;
        r = static_cast<int>(std::lround(255 + s * (180 - 255)));
        g = static_cast<int>(std::lround(255 + s * (4 - 255)));
        b = static_cast<int>(std::lround(255 + s * (38 - 255)));
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

inline std::string heat_map_svg(const HeatMap& map) {
    const std::size_t np = map.n_intervals + 1;
    if (map.values.size() != np * np) throw std::invalid_argument("heat_map_svg: value count does not match grid");
    constexpr double size = 480, left = 40, top = 40;
    const double lo = *std::min_element(map.values.begin(), map.values.end());
    const double hi = *std::max_element(map.values.begin(), map.values.end());
    const double cell = size / static_cast<double>(np);
    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << size + 2 * left + 80 << "\" height=\""
      << size + 2 * top + 20 << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << left + size / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
      << detail::escape(map.title) << "</text>\n<g shape-rendering=\"crispEdges\">\n";
    for (std::size_t j = 0; j < np; ++j) {
        for (std::size_t i = 0; i < np; ++i) {
            const double v = map.values[j * np + i];
            // x2 grows upward.
            o << "<rect x=\"" << detail::px(left + static_cast<double>(i) * cell) << "\" y=\""
              << detail::px(top + static_cast<double>(np - 1 - j) * cell) << "\" width=\"" << detail::px(cell + 0.3)
              << "\" height=\"" << detail::px(cell + 0.3) << "\" fill=\"" << heat_color(v, lo, hi) << "\"/>\n";
        }
    }
    o << "</g>\n";
    const double bar_x = left + size + 20;
    for (int k = 0; k < 50; ++k) {
        const double v = hi - (hi - lo) * k / 49.0;
        o << "<rect x=\"" << bar_x << "\" y=\"" << detail::px(top + size * k / 50.0) << "\" width=\"18\" height=\""
          << detail::px(size / 50.0 + 0.5) << "\" fill=\"" << heat_color(v, lo, hi) << "\"/>\n";
    }
    o << "<text x=\"" << bar_x + 22 << "\" y=\"" << top + 10 << "\" font-family=\"sans-serif\" font-size=\"11\">max "
      << detail::num(hi) << "</text>\n"
      << "<text x=\"" << bar_x + 22 << "\" y=\"" << top + size << "\" font-family=\"sans-serif\" font-size=\"11\">min "
      << detail::num(lo) << "</text>\n"
      << "<text x=\"" << left << "\" y=\"" << top + size + 20
      << "\" font-family=\"sans-serif\" font-size=\"12\">min " << detail::num(lo) << ", max " << detail::num(hi)
      << "</text>\n</svg>\n";
    return o.str();
}

inline void emit_svg(const LinePlot& plot, const std::filesystem::path& path) { write_text(path, line_plot_svg(plot)); }
inline void emit_svg(const HeatMap& map, const std::filesystem::path& path) { write_text(path, heat_map_svg(map)); }

}  // namespace ddparab::output
