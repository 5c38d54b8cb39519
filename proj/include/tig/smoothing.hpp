#pragma once

// Quadratic Bezier corner smoothing with a collision fallback.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "tig/geometry.hpp"
#include "tig/stig.hpp"
#include "tig/world.hpp"

namespace tig {

inline constexpr double kMaxSampleSpacing = 0.25; // meters along an arc
inline constexpr int kMaxOffsetHalvings = 6;

struct SmoothedPath {
    std::vector<Point2> polyline;
    PlannedPath source;
    std::vector<double> corner_offsets; // one per interior waypoint; 0 keeps the corner
};

inline Point2 bezier_point(Point2 p0, Point2 p1, Point2 p2, double t) {
    const double u = 1.0 - t;
    return p0 * (u * u) + p1 * (2.0 * u * t) + p2 * (t * t);
}

// Temporary waypoints on either side of `a`, each capped at half its segment
// so neighbouring corners never overlap.
inline std::pair<Point2, Point2> control_points(Point2 prev, Point2 a, Point2 next, double offset) {
    const double l0 = distance(a, prev);
    const double l1 = distance(a, next);
    const double o0 = std::min(offset, 0.5 * l0);
    const double o1 = std::min(offset, 0.5 * l1);
    return {a + (prev - a) * (o0 / l0), a + (next - a) * (o1 / l1)};
}

// Arc samples from A' to A'' inclusive, spaced at most kMaxSampleSpacing.
// The curve speed never exceeds 2 max(|A'A|, |AA''|).
inline std::vector<Point2> sample_arc(Point2 a0, Point2 a, Point2 a1) {
    const double bound = 2.0 * std::max(distance(a0, a), distance(a, a1));
    const int n = std::max(1, static_cast<int>(std::ceil(bound / kMaxSampleSpacing)));
    std::vector<Point2> pts;
    pts.reserve(n + 1);
    for (int i = 0; i <= n; ++i) pts.push_back(bezier_point(a0, a, a1, static_cast<double>(i) / n));
    return pts;
}

namespace detail {

inline bool chords_clear(const std::vector<Point2>& pts, const ObstacleSet& obstacles) {
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (!obstacles.segment_clear(pts[i - 1], pts[i])) return false;
    return true;
}

inline void append_point(std::vector<Point2>& out, Point2 p) {
    if (out.empty() || distance(out.back(), p) > 1e-12) out.push_back(p);
}

} // namespace detail

inline SmoothedPath smooth_path(const PlannedPath& path, const ObstacleSet& obstacles, const PlannerParams& params) {
    SmoothedPath out;
    out.source = path;
    const auto& w = path.waypoints;
    if (w.size() < 3) {
        out.polyline = w;
        return out;
    }

    const double base = params.d_vir + params.r_safe;
    detail::append_point(out.polyline, w.front());
    for (std::size_t i = 1; i + 1 < w.size(); ++i) {
        double offset = base;
        std::vector<Point2> arc;
        for (int tries = 0; tries <= kMaxOffsetHalvings && offset > 0.0; ++tries, offset *= 0.5) {
            auto [a0, a1] = control_points(w[i - 1], w[i], w[i + 1], offset);
            arc = sample_arc(a0, w[i], a1);
            if (detail::chords_clear(arc, obstacles)) break;
            arc.clear();
        }
        if (arc.empty()) {
            out.corner_offsets.push_back(0.0);
            detail::append_point(out.polyline, w[i]);
            continue;
        }
        out.corner_offsets.push_back(std::min({offset, 0.5 * distance(w[i], w[i - 1]), 0.5 * distance(w[i], w[i + 1])}));
        for (const Point2& p : arc) detail::append_point(out.polyline, p);
    }
    detail::append_point(out.polyline, w.back());
    out.polyline.back() = w.back();
    return out;
}

inline SmoothedPath smooth_path(const PlannedPath& path, const std::vector<Ellipse>& obstacles,
                                const PlannerParams& params) {
    return smooth_path(path, ObstacleSet(obstacles), params);
}

} // namespace tig
