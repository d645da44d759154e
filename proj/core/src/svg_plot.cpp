#include "isofdr/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "isofdr/error.hpp"

namespace isofdr::io {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 170.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 48.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
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

struct Frame {
    double x0, x1, y0, y1, offset_y;
    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const {
        const double c = std::clamp(y, y0, y1);
        return offset_y + kTop + (y1 - c) / (y1 - y0) * (kHeight - kTop - kBottom);
    }
    bool inside(double x) const { return x >= x0 && x <= x1; }
};

Frame frame_for(const PlotSpec& p, double offset_y) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    auto scan = [&](const std::vector<double>& xs) {
        for (double x : xs) {
            if (std::isfinite(x)) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
        }
    };
    for (const auto& l : p.lines) scan(l.x);
    for (const auto& b : p.bands) scan(b.x);
    if (!std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (p.x_min) lo = *p.x_min;
    if (p.x_max) hi = *p.x_max;
    if (!(hi > lo)) hi = lo + 1.0;
    return {lo, hi, p.y_min, p.y_max, offset_y};
}

std::string render_panel(const PlotSpec& p, double offset_y) {
    const Frame f = frame_for(p, offset_y);
    std::string s;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    s += "<g>\n";
    s += "<text x=\"" + num(kLeft) + "\" y=\"" + num(offset_y + 22) +
         "\" font-size=\"15\" font-family=\"sans-serif\">" + escape(p.title) + "</text>\n";
    s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(offset_y + kTop) + "\" width=\"" + num(plot_w) +
         "\" height=\"" + num(plot_h) + "\" fill=\"none\" stroke=\"#333\"/>\n";

    for (int i = 0; i <= 5; ++i) {
        const double xv = f.x0 + (f.x1 - f.x0) * i / 5.0;
        const double yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
        s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(offset_y + kHeight - kBottom + 16) +
             "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">" + num(xv) + "</text>\n";
        s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(f.py(yv) + 4) +
             "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">" + num(yv) + "</text>\n";
    }
    s += "<text x=\"" + num(kLeft + plot_w / 2) + "\" y=\"" + num(offset_y + kHeight - 8) +
         "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">" + escape(p.x_label) + "</text>\n";
    s += "<text x=\"14\" y=\"" + num(offset_y + kTop + plot_h / 2) +
         "\" font-size=\"12\" font-family=\"sans-serif\" transform=\"rotate(-90 14 " +
         num(offset_y + kTop + plot_h / 2) + ")\" text-anchor=\"middle\">" + escape(p.y_label) + "</text>\n";

    for (double m : p.vertical_markers) {
        if (!f.inside(m)) continue;
        s += "<line x1=\"" + num(f.px(m)) + "\" x2=\"" + num(f.px(m)) + "\" y1=\"" + num(offset_y + kTop) +
             "\" y2=\"" + num(offset_y + kTop + plot_h) + "\" stroke=\"#999\" stroke-dasharray=\"2,3\"/>\n";
    }

    double legend_y = offset_y + kTop + 10;
    auto legend = [&](const std::string& label, const std::string& color, bool filled) {
        const double lx = kWidth - kRight + 12;
        if (filled) {
            s += "<rect x=\"" + num(lx) + "\" y=\"" + num(legend_y - 8) + "\" width=\"18\" height=\"10\" fill=\"" +
                 color + "\" fill-opacity=\"0.25\"/>\n";
        } else {
            s += "<line x1=\"" + num(lx) + "\" x2=\"" + num(lx + 18) + "\" y1=\"" + num(legend_y - 3) +
                 "\" y2=\"" + num(legend_y - 3) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        }
        s += "<text x=\"" + num(lx + 24) + "\" y=\"" + num(legend_y) +
             "\" font-size=\"11\" font-family=\"sans-serif\">" + escape(label) + "</text>\n";
        legend_y += 16;
    };

    for (const auto& b : p.bands) {
        // One polygon per run of finite band values.
        std::size_t i = 0;
        while (i < b.x.size()) {
            while (i < b.x.size() && !(std::isfinite(b.lo[i]) && std::isfinite(b.hi[i]) && f.inside(b.x[i]))) ++i;
            const std::size_t start = i;
            while (i < b.x.size() && std::isfinite(b.lo[i]) && std::isfinite(b.hi[i]) && f.inside(b.x[i])) ++i;
            if (i - start < 2) continue;
            std::string pts;
            for (std::size_t j = start; j < i; ++j) pts += num(f.px(b.x[j])) + "," + num(f.py(b.hi[j])) + " ";
            for (std::size_t j = i; j-- > start;) pts += num(f.px(b.x[j])) + "," + num(f.py(b.lo[j])) + " ";
            s += "<polygon points=\"" + pts + "\" fill=\"" + b.color + "\" fill-opacity=\"0.25\" stroke=\"none\"/>\n";
        }
        legend(b.label, b.color, true);
    }
    for (const auto& l : p.lines) {
        std::string d;
        bool pen_down = false;
        for (std::size_t j = 0; j < l.x.size(); ++j) {
            if (!std::isfinite(l.y[j]) || !f.inside(l.x[j])) {
                pen_down = false;
                continue;
            }
            d += (pen_down ? "L" : "M") + num(f.px(l.x[j])) + " " + num(f.py(l.y[j])) + " ";
            pen_down = true;
        }
        if (!d.empty()) {
            s += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + l.color + "\" stroke-width=\"1.6\"" +
                 (l.dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
        }
        legend(l.label, l.color, false);
    }
    s += "</g>\n";
    return s;
}

}  // namespace

std::string render_svg_panels(const std::vector<PlotSpec>& panels) {
    const double total_h = kHeight * static_cast<double>(std::max<std::size_t>(1, panels.size()));
    std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(total_h) +
         "\" viewBox=\"0 0 " + num(kWidth) + " " + num(total_h) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i) s += render_panel(panels[i], kHeight * static_cast<double>(i));
    s += "</svg>\n";
    return s;
}

std::string render_svg(const PlotSpec& plot) { return render_svg_panels({plot}); }

void write_svg(const std::filesystem::path& path, const std::string& svg) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << svg;
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace isofdr::io
