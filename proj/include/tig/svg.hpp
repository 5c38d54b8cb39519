#pragma once

// SVG 1.1 rendering of scenarios, paths and execution traces. One user unit is
// one meter; the y axis points up.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "tig/dtig.hpp"
#include "tig/geometry.hpp"
#include "tig/metrics.hpp"
#include "tig/world.hpp"

namespace tig {

struct SvgOptions {
    bool show_virtual = false; // dotted virtual ellipses
    double stroke = 1.0;
};

struct SvgLayers {
    std::vector<Point2> path;
    std::vector<Point2> smoothed;     // drawn only when `path` has a corner
    const ExecutionTrace* trace = nullptr;
};

namespace detail {

inline std::string svg_num(double v) { return format_fixed6(v); }

inline void svg_ellipse(std::ostringstream& os, const Ellipse& e, double a, double b, const std::string& style) {
    os << "    <ellipse cx=\"" << svg_num(e.cx) << "\" cy=\"" << svg_num(e.cy) << "\" rx=\"" << svg_num(a) << "\" ry=\""
       << svg_num(b) << "\" transform=\"rotate(" << svg_num(e.theta * 180.0 / kPi) << " " << svg_num(e.cx) << " "
       << svg_num(e.cy) << ")\" " << style << "/>\n";
}

inline void svg_polyline(std::ostringstream& os, const std::vector<Point2>& pts, const std::string& style) {
    os << "    <polyline points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) os << (i ? " " : "") << svg_num(pts[i].x) << "," << svg_num(pts[i].y);
    os << "\" fill=\"none\" " << style << "/>\n";
}

inline void svg_marker(std::ostringstream& os, Point2 p, double half, const std::string& fill) {
    os << "    <rect x=\"" << svg_num(p.x - half) << "\" y=\"" << svg_num(p.y - half) << "\" width=\"" << svg_num(2 * half)
       << "\" height=\"" << svg_num(2 * half) << "\" fill=\"" << fill << "\"/>\n";
}

} // namespace detail

inline std::string render_svg(const Scenario& s, const SvgLayers& layers = {}, const SvgOptions& opt = {}) {
    std::ostringstream os;
    const std::string sw = detail::svg_num(opt.stroke);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << detail::svg_num(s.width)
       << "\" height=\"" << detail::svg_num(s.height) << "\" viewBox=\"0 0 " << detail::svg_num(s.width) << " "
       << detail::svg_num(s.height) << "\">\n"
       << "  <rect x=\"0\" y=\"0\" width=\"" << detail::svg_num(s.width) << "\" height=\"" << detail::svg_num(s.height)
       << "\" fill=\"white\"/>\n"
       << "  <g transform=\"translate(0," << detail::svg_num(s.height) << ") scale(1,-1)\">\n";

    auto draw = [&](const std::vector<Ellipse>& list, const std::string& fill) {
        for (const auto& e : list) {
            detail::svg_ellipse(os, e, e.a, e.b, "fill=\"" + fill + "\" stroke=\"none\"");
            detail::svg_ellipse(os, e, e.inflated_a(), e.inflated_b(),
                                "fill=\"none\" stroke=\"#555555\" stroke-width=\"" + sw + "\" stroke-dasharray=\"4 2\"");
            if (opt.show_virtual)
                detail::svg_ellipse(os, e, e.inflated_a() + s.params.d_vir, e.inflated_b() + s.params.d_vir,
                                    "fill=\"none\" stroke=\"#999999\" stroke-width=\"" + sw + "\" stroke-dasharray=\"1 2\"");
        }
    };
    draw(s.obstacles, "#4a4a4a");
    draw(s.hidden_obstacles, "#b0b0b0");

    if (layers.trace) {
        for (const auto& ev : layers.trace->steps)
            if (ev.kind == TraceKind::Replan)
                os << "    <circle cx=\"" << detail::svg_num(ev.position.x) << "\" cy=\"" << detail::svg_num(ev.position.y)
                   << "\" r=\"" << detail::svg_num(s.params.sensor_range) << "\" fill=\"none\" stroke=\"#3c8dbc\" stroke-width=\""
                   << sw << "\" stroke-opacity=\"0.5\"/>\n";
        if (layers.trace->executed_path.size() >= 2)
            detail::svg_polyline(os, layers.trace->executed_path, "stroke=\"#d62728\" stroke-width=\"" + sw + "\"");
    }
    if (layers.path.size() >= 2)
        detail::svg_polyline(os, layers.path, "stroke=\"#d62728\" stroke-width=\"" + sw + "\"");
    if (layers.path.size() >= 3 && layers.smoothed.size() >= 2)
        detail::svg_polyline(os, layers.smoothed, "stroke=\"#2ca02c\" stroke-width=\"" + sw + "\"");

    const double half = std::max(1.0, 0.005 * std::max(s.width, s.height));
    detail::svg_marker(os, s.start, half, "#1f77b4");
    detail::svg_marker(os, s.target, half, "#ff7f0e");
    os << "  </g>\n</svg>\n";
    return os.str();
}

} // namespace tig
