#pragma once

#include "itecal/domain.hpp"
#include "itecal/error.hpp"
#include "itecal/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace itecal::io {

struct PlotLayer {
    ProcessPath path;
    std::string label;
};

// The first layer owns the guides and the secondary axes (top: ordering key
// at the matching time, right: unstandardized C on the same vertical scale).
struct PlotSpec {
    std::vector<PlotLayer> layers;
    double alpha = 0.05;
    bool mean_guides = true;
    bool bridge_guides = true;
    std::string title;
    std::string key_label = "predicted ITE";
    int width = 720;
    int height = 480;
};

struct PlotGuides {
    double mean_bound = 0.0;    // z_{1-alpha/2}
    double bridge_offset = 0.0; // q with kolmogorov_sf(q) = alpha
};

inline PlotGuides plot_guides(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "cli_io", "alpha must lie in (0,1)");
    return {std_normal_quantile(1.0 - alpha / 2.0), kolmogorov_quantile(alpha)};
}

namespace detail {

inline std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

inline double nice_step(double range) {
    const double raw = range / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double r = raw / mag;
    return (r < 1.5 ? 1.0 : r < 3.0 ? 2.0 : r < 7.0 ? 5.0 : 10.0) * mag;
}

inline std::string xml_escape(const std::string& in) {
    std::string out;
    for (char c : in) {
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

inline const char* path_class(ProcessKind k) {
    switch (k) {
        case ProcessKind::Risk: return "path path-risk";
        case ProcessKind::IteConditional: return "path path-conditional";
        case ProcessKind::IteMarginal: return "path path-marginal";
    }
    return "path";
}

}  // namespace detail

inline std::string render_plot(const PlotSpec& spec) {
    if (spec.layers.empty()) throw Error(ErrorCode::EmptyPath, "cli_io", "nothing to plot");
    for (const auto& l : spec.layers) {
        if (l.path.times.size() < 2 || l.path.locations.size() != l.path.times.size()) {
            throw Error(ErrorCode::EmptyPath, "cli_io", "path '" + l.label + "' has no steps");
        }
    }
    const PlotGuides guides = plot_guides(spec.alpha);
    const ProcessPath& lead = spec.layers.front().path;
    const double s_n = lead.terminal_location();

    double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 0.0;
    for (const auto& l : spec.layers) {
        for (double t : l.path.times) { x_lo = std::min(x_lo, t); x_hi = std::max(x_hi, t); }
        for (double s : l.path.locations) { y_lo = std::min(y_lo, s); y_hi = std::max(y_hi, s); }
    }
    if (spec.mean_guides) { y_lo = std::min(y_lo, -guides.mean_bound); y_hi = std::max(y_hi, guides.mean_bound); }
    if (spec.bridge_guides) {
        y_lo = std::min({y_lo, -guides.bridge_offset, s_n - guides.bridge_offset});
        y_hi = std::max({y_hi, guides.bridge_offset, s_n + guides.bridge_offset});
    }
    if (y_hi - y_lo < 1e-9) { y_lo -= 1.0; y_hi += 1.0; }
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    const double left = 70, right = spec.width - 90.0, top = 60, bottom = spec.height - 60.0;
    auto px = [&](double t) { return left + (t - x_lo) / (x_hi - x_lo) * (right - left); };
    auto py = [&](double s) { return bottom - (s - y_lo) / (y_hi - y_lo) * (bottom - top); };
    auto pt = [&](double t, double s) { return detail::fmt("%.3f", px(t)) + "," + detail::fmt("%.3f", py(s)); };
    auto line = [&](const char* cls, double t0, double s0, double t1, double s1) {
        return "<line class=\"" + std::string(cls) + "\" x1=\"" + detail::fmt("%.3f", px(t0)) + "\" y1=\"" +
               detail::fmt("%.3f", py(s0)) + "\" x2=\"" + detail::fmt("%.3f", px(t1)) + "\" y2=\"" +
               detail::fmt("%.3f", py(s1)) + "\"/>\n";
    };
    auto text = [&](const char* cls, double x, double y, const std::string& body, const char* anchor = "middle") {
        return "<text class=\"" + std::string(cls) + "\" x=\"" + detail::fmt("%.3f", x) + "\" y=\"" +
               detail::fmt("%.3f", y) + "\" text-anchor=\"" + anchor + "\">" + detail::xml_escape(body) + "</text>\n";
    };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(spec.width) +
           "\" height=\"" + std::to_string(spec.height) + "\" viewBox=\"0 0 " + std::to_string(spec.width) + " " +
           std::to_string(spec.height) + "\" data-alpha=\"" + detail::fmt("%.6g", spec.alpha) + "\" data-mean-bound=\"" +
           detail::fmt("%.6f", guides.mean_bound) + "\" data-bridge-offset=\"" + detail::fmt("%.6f", guides.bridge_offset) +
           "\">\n";
    svg += "<style>\n"
           ".frame{fill:none;stroke:#000;stroke-width:1}\n"
           ".tick{stroke:#000;stroke-width:1}\n"
           ".label{font-family:sans-serif;font-size:11px}\n"
           ".title{font-family:sans-serif;font-size:13px}\n"
           ".path{fill:none;stroke-width:1.2}\n"
           ".path-risk,.path-conditional{stroke:#000}\n"
           ".path-marginal{stroke:#1f4fd1}\n"
           ".guide-mean,.mean-bar{stroke:#1f4fd1;stroke-width:1;stroke-dasharray:4 3}\n"
           ".mean-bar{stroke-dasharray:none;stroke-width:2}\n"
           ".bridge-line{stroke:#888;stroke-width:1}\n"
           ".guide-bridge{stroke:#d12b1f;stroke-width:1;stroke-dasharray:4 3}\n"
           ".zero{stroke:#ccc;stroke-width:1}\n"
           "</style>\n";
    svg += "<rect class=\"frame\" x=\"" + detail::fmt("%.3f", left) + "\" y=\"" + detail::fmt("%.3f", top) +
           "\" width=\"" + detail::fmt("%.3f", right - left) + "\" height=\"" + detail::fmt("%.3f", bottom - top) + "\"/>\n";
    if (!spec.title.empty()) svg += text("title", 0.5 * (left + right), 18, spec.title);

    // Bottom axis: time.
    for (int i = 0; i <= 5; ++i) {
        const double t = 0.2 * i;
        svg += line("tick", t, y_lo, t, y_lo + 0.015 * (y_hi - y_lo));
        svg += text("label", px(t), bottom + 16, detail::fmt("%.1f", t));
    }
    svg += text("label", 0.5 * (left + right), bottom + 34, "Time");

    // Left axis: location; right axis: the same heights in C units.
    const double n = static_cast<double>(lead.n());
    const double c_per_s = lead.total_sd / n;
    const double step = detail::nice_step(y_hi - y_lo);
    for (long i = static_cast<long>(std::ceil(y_lo / step)); i * step <= y_hi + 1e-12; ++i) {
        const double v = i == 0 ? 0.0 : i * step;
        svg += text("label", left - 6, py(v) + 4, detail::fmt("%.3g", v), "end");
        svg += text("label", right + 6, py(v) + 4, detail::fmt("%.3g", v * c_per_s), "start");
    }
    svg += text("label", 18, 0.5 * (top + bottom), "Location (S)");
    svg += text("label", spec.width - 14.0, 0.5 * (top + bottom), "Scaled error (C)");

    // Top axis: ordering key at the first vertex reaching each time mark.
    for (double target : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        std::size_t k = 0;
        while (k < lead.times.size() && lead.times[k] < target) ++k;
        if (k >= lead.times.size()) k = lead.times.size() - 1;
        svg += text("label", px(target), top - 8, detail::fmt("%.3g", lead.keys[k]));
    }
    svg += text("label", 0.5 * (left + right), top - 24, spec.key_label);

    svg += line("zero", x_lo, 0.0, x_hi, 0.0);
    if (spec.mean_guides) {
        svg += line("guide-mean", x_lo, guides.mean_bound, x_hi, guides.mean_bound);
        svg += line("guide-mean", x_lo, -guides.mean_bound, x_hi, -guides.mean_bound);
        svg += line("mean-bar", 1.0, 0.0, 1.0, s_n);
    }
    if (spec.bridge_guides) {
        svg += line("bridge-line", 0.0, 0.0, 1.0, s_n);
        svg += line("guide-bridge", 0.0, guides.bridge_offset, 1.0, s_n + guides.bridge_offset);
        svg += line("guide-bridge", 0.0, -guides.bridge_offset, 1.0, s_n - guides.bridge_offset);
    }

    double legend_y = top + 14;
    for (const auto& l : spec.layers) {
        svg += "<polyline class=\"" + std::string(detail::path_class(l.path.kind)) + "\" points=\"";
        for (std::size_t k = 0; k < l.path.times.size(); ++k) {
            if (k > 0) svg += ' ';
            svg += pt(l.path.times[k], l.path.locations[k]);
        }
        svg += "\"/>\n";
        if (!l.label.empty()) {
            svg += text("label", left + 8, legend_y, l.label, "start");
            legend_y += 14;
        }
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace itecal::io
