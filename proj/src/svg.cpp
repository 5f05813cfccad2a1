#include "varlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "varlab/io.hpp"

namespace varlab::svg {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string rgb(double t) {
    // dark blue -> yellow ramp
    t = std::clamp(t, 0.0, 1.0);
    int r = static_cast<int>(255.0 * t);
    int g = static_cast<int>(32.0 + 191.0 * t);
    int b = static_cast<int>(96.0 + 128.0 * (1.0 - t));
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

std::string svg_open(std::size_t w, std::size_t h) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
           "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " +
           std::to_string(h) + "\">\n";
}

std::string text(double x, double y, const std::string& s) {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"12\" fill=\"#333\">" +
           s + "</text>\n";
}

}  // namespace

std::string heatmap_grid(const std::vector<SurfaceField>& fields, std::size_t ncols,
                         std::size_t panel_px) {
    if (fields.empty()) return svg_open(1, 1) + "</svg>\n";
    ncols = std::max<std::size_t>(1, ncols);
    std::size_t nrows = (fields.size() + ncols - 1) / ncols;
    const std::size_t pad = 8;
    std::size_t w = ncols * (panel_px + pad) + pad;
    std::size_t h = nrows * (panel_px + pad) + pad;

    std::string out = svg_open(w, h);
    for (std::size_t fidx = 0; fidx < fields.size(); ++fidx) {
        const SurfaceField& f = fields[fidx];
        std::size_t n = f.grid.n;
        double cell = static_cast<double>(panel_px) / static_cast<double>(n);
        double ox = static_cast<double>(pad + (fidx % ncols) * (panel_px + pad));
        double oy = static_cast<double>(pad + (fidx / ncols) * (panel_px + pad));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double v = f.values[f.grid.index(i, j)];
                out += "<rect x=\"" + num(ox + i * cell) + "\" y=\"" +
                       num(oy + (n - 1 - j) * cell) + "\" width=\"" + num(cell + 0.5) +
                       "\" height=\"" + num(cell + 0.5) + "\" fill=\"" + rgb(v) + "\"/>\n";
            }
    }
    out += "</svg>\n";
    return out;
}

namespace {

struct Frame {
    double x0, x1, y0, y1;          // data range
    double px0, px1, py0, py1;      // pixel range (py0 is bottom)
    double px(double x) const { return px0 + (x - x0) / (x1 - x0) * (px1 - px0); }
    double py(double y) const { return py0 - (y - y0) / (y1 - y0) * (py0 - py1); }
};

std::string axes(const Frame& fr, const std::string& x_label, const std::string& y_label) {
    std::string out;
    out += "<line x1=\"" + num(fr.px0) + "\" y1=\"" + num(fr.py0) + "\" x2=\"" + num(fr.px1) +
           "\" y2=\"" + num(fr.py0) + "\" stroke=\"#333\"/>\n";
    out += "<line x1=\"" + num(fr.px0) + "\" y1=\"" + num(fr.py0) + "\" x2=\"" + num(fr.px0) +
           "\" y2=\"" + num(fr.py1) + "\" stroke=\"#333\"/>\n";
    out += text(fr.px1 - 60, fr.py0 + 28, x_label);
    out += text(fr.px0 - 36, fr.py1 - 8, y_label);
    out += text(fr.px0 - 8, fr.py0 + 16, io::format_double(fr.x0));
    out += text(fr.px1 - 8, fr.py0 + 16, io::format_double(fr.x1));
    out += text(fr.px0 - 44, fr.py0, io::format_double(fr.y0));
    out += text(fr.px0 - 44, fr.py1 + 10, io::format_double(fr.y1));
    return out;
}

}  // namespace

std::string line_chart(const std::vector<Series>& series, const std::string& x_label,
                       const std::string& y_label, bool log_y, std::size_t width_px,
                       std::size_t height_px) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
    double y0 = x0, y1 = -x0;
    std::vector<Series> plotted = series;
    for (auto& s : plotted) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double y = s.y[i];
            if (log_y) {
                if (y <= 0.0) continue;
                y = std::log10(y);
            }
            xs.push_back(s.x[i]);
            ys.push_back(y);
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
        s.x = xs;
        s.y = ys;
    }
    if (!(x0 < x1)) x1 = x0 + 1.0;
    if (!(y0 < y1)) y1 = y0 + 1.0;
    if (!std::isfinite(x0)) { x0 = 0; x1 = 1; y0 = 0; y1 = 1; }

    Frame fr{x0, x1, y0, y1, 60.0, width_px - 16.0, height_px - 40.0, 16.0};
    std::string out = svg_open(width_px, height_px);
    out += axes(fr, x_label, log_y ? "log10 " + y_label : y_label);
    double legend_y = 28.0;
    for (const auto& s : plotted) {
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i)
            pts += num(fr.px(s.x[i])) + "," + num(fr.py(s.y[i])) + " ";
        out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"" +
               pts + "\"/>\n";
        out += "<text x=\"" + num(fr.px0 + 10) + "\" y=\"" + num(legend_y) +
               "\" font-size=\"12\" fill=\"" + s.color + "\">" + s.label + "</text>\n";
        legend_y += 16.0;
    }
    out += "</svg>\n";
    return out;
}

std::string bar_chart(const std::vector<double>& x, const std::vector<double>& heights,
                      const std::string& x_label, const std::string& y_label,
                      std::size_t width_px, std::size_t height_px) {
    double y1 = 0.0;
    for (double h : heights) y1 = std::max(y1, h);
    if (y1 <= 0.0) y1 = 1.0;
    double x0 = x.empty() ? 0.0 : x.front();
    double x1 = x.empty() ? 1.0 : x.back();
    if (!(x0 < x1)) x1 = x0 + 1.0;

    Frame fr{x0, x1, 0.0, y1, 60.0, width_px - 16.0, height_px - 40.0, 16.0};
    double bar_w = (fr.px1 - fr.px0) / std::max<std::size_t>(1, x.size()) * 0.7;

    std::string out = svg_open(width_px, height_px);
    out += axes(fr, x_label, y_label);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double px = fr.px(x[i]) - bar_w / 2.0;
        double py = fr.py(heights[i]);
        out += "<rect x=\"" + num(px) + "\" y=\"" + num(py) + "\" width=\"" + num(bar_w) +
               "\" height=\"" + num(fr.py0 - py) + "\" fill=\"#1f77b4\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace varlab::svg
