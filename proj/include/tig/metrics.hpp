#pragma once

// Path quality measures: length, total turning angle and planning time.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tig/errors.hpp"
#include "tig/geometry.hpp"

namespace tig {

inline double path_length(std::span<const Point2> points) {
    double len = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) len += distance(points[i - 1], points[i]);
    return len;
}

// Absolute heading change at `p`, in [0, pi]. Agrees with the slope-difference
// formula |atan((m1 - m2) / (1 + m1 m2))| whenever the change is below pi/2 and
// neither segment is vertical; unlike it, reversals count as pi.
inline double turning_angle(Point2 p_prev, Point2 p, Point2 p_next) {
    const Point2 d0 = p - p_prev;
    const Point2 d1 = p_next - p;
    if ((d0.x == 0.0 && d0.y == 0.0) || (d1.x == 0.0 && d1.y == 0.0))
        throw DegenerateVertex("turning_angle: zero-length segment");
    return std::atan2(std::abs(cross(d0, d1)), dot(d0, d1));
}

inline double total_turning(std::span<const Point2> points) {
    double sum = 0.0;
    for (std::size_t i = 1; i + 1 < points.size(); ++i) sum += turning_angle(points[i - 1], points[i], points[i + 1]);
    return sum;
}

// Largest single-vertex heading change.
inline double max_turning(std::span<const Point2> points) {
    double m = 0.0;
    for (std::size_t i = 1; i + 1 < points.size(); ++i)
        m = std::max(m, turning_angle(points[i - 1], points[i], points[i + 1]));
    return m;
}

struct MetricsRecord {
    std::optional<double> path_length;   // meters; empty on failure
    std::optional<double> total_turning; // radians; empty on failure
    double plan_time = 0.0;              // seconds
    std::size_t node_count = 0;
    std::string status;
    bool success = false;
};

// `points` is the static path or the executed path of a dynamic run;
// `plan_time` is the caller-measured planning time (summed over replans).
inline MetricsRecord evaluate(std::span<const Point2> points, bool success, std::string status, double plan_time) {
    MetricsRecord r;
    r.status = std::move(status);
    r.success = success;
    r.plan_time = plan_time;
    r.node_count = points.size();
    if (success && points.size() >= 2) {
        r.path_length = path_length(points);
        r.total_turning = total_turning(points);
    }
    return r;
}

struct CsvRow {
    std::string case_id;
    std::string algo;
    std::string map_family;
    std::uint64_t seed = 0;
    MetricsRecord metrics;
};

inline constexpr const char* kCsvHeader =
    "case_id,algo,map_family,seed,status,path_length_m,total_turning_rad,plan_time_s,node_count";

inline std::string format_fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline std::string to_csv(const CsvRow& row) {
    const MetricsRecord& m = row.metrics;
    std::string s = row.case_id + "," + row.algo + "," + row.map_family + "," + std::to_string(row.seed) + "," + m.status + ",";
    s += (m.path_length ? format_fixed6(*m.path_length) : "NA") + ",";
    s += (m.total_turning ? format_fixed6(*m.total_turning) : "NA") + ",";
    s += format_fixed6(m.plan_time) + "," + std::to_string(m.node_count);
    return s;
}

} // namespace tig
