#pragma once

// Planar primitives for rotated, safety-inflated elliptic obstacles.
//
// Every obstacle is the set of points whose ellipse_value() is below one, with
// both semi-axes grown by r_safe. The boundary itself is free space: a segment
// that only touches an ellipse (a tangent) is not a collision.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tig/errors.hpp"

namespace tig {

inline constexpr double kPi = std::numbers::pi;

// A segment penetrates an ellipse when the minimum of ellipse_value - 1 along
// it drops below -kPenetrationTol.
inline constexpr double kPenetrationTol = 1e-9;
// Normalized discriminant below which a line is reported as tangent.
inline constexpr double kTangentDiscTol = 1e-9;
// Distance to the boundary accepted as "on the boundary", in ellipse_value units.
inline constexpr double kBoundaryTol = 1e-6;

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

inline Point2 lerp(Point2 a, Point2 b, double t) { return a + t * (b - a); }

// Maps an angle to [0, pi). An ellipse is symmetric under a half turn.
inline double normalize_half_turn(double theta) {
    double r = std::fmod(theta, kPi);
    if (r < 0.0) r += kPi;
    if (r >= kPi) r = 0.0;
    return r;
}

struct Ellipse {
    double cx = 0.0;
    double cy = 0.0;
    double a = 1.0;      // semi-major axis
    double b = 1.0;      // semi-minor axis
    double theta = 0.0;  // counterclockwise rotation of the major axis
    double r_safe = 0.0; // safety inflation added to both axes

    Ellipse() = default;
    Ellipse(double cx_, double cy_, double a_, double b_, double theta_, double r_safe_ = 0.0)
        : cx(cx_), cy(cy_), a(a_), b(b_), theta(a_ == b_ ? 0.0 : normalize_half_turn(theta_)),
          r_safe(r_safe_) {}

    static Ellipse circle(Point2 c, double r, double r_safe = 0.0) { return {c.x, c.y, r, r, 0.0, r_safe}; }

    Point2 center() const { return {cx, cy}; }
    double inflated_a() const { return a + r_safe; }
    double inflated_b() const { return b + r_safe; }

    // Same ellipse with both axes grown by `d` beyond the inflated boundary.
    Ellipse grown(double d) const { return {cx, cy, a + d, b + d, theta, r_safe}; }

    friend bool operator==(const Ellipse&, const Ellipse&) = default;
};

struct SegmentHit {
    double t = 0.0;
    Point2 point;
    std::size_t obstacle_id = 0;
};

// Precomputed local frame of an inflated ellipse: translate, rotate by -theta,
// scale to the unit circle.
class EllipseFrame {
public:
    explicit EllipseFrame(const Ellipse& e)
        : c_{e.cx, e.cy}, cos_(std::cos(e.theta)), sin_(std::sin(e.theta)),
          sa_(e.inflated_a()), sb_(e.inflated_b()) {
        hx_ = std::sqrt(sa_ * sa_ * cos_ * cos_ + sb_ * sb_ * sin_ * sin_);
        hy_ = std::sqrt(sa_ * sa_ * sin_ * sin_ + sb_ * sb_ * cos_ * cos_);
    }

    // World point -> unit-circle coordinates.
    Point2 to_unit(Point2 p) const {
        const Point2 d = p - c_;
        return {(d.x * cos_ + d.y * sin_) / sa_, (-d.x * sin_ + d.y * cos_) / sb_};
    }
    // World direction -> unit-circle direction (no translation).
    Point2 dir_to_unit(Point2 v) const {
        return {(v.x * cos_ + v.y * sin_) / sa_, (-v.x * sin_ + v.y * cos_) / sb_};
    }
    Point2 from_unit(Point2 u) const {
        const double lx = u.x * sa_;
        const double ly = u.y * sb_;
        return {c_.x + lx * cos_ - ly * sin_, c_.y + lx * sin_ + ly * cos_};
    }

    double value(Point2 p) const {
        const Point2 u = to_unit(p);
        return u.x * u.x + u.y * u.y;
    }

    // Coefficients of f(t) = value(p0 + t (p1 - p0)) - 1 = qa t^2 + qb t + qc.
    std::array<double, 3> segment_quadratic(Point2 p0, Point2 p1) const {
        const Point2 q = to_unit(p0);
        const Point2 w = dir_to_unit(p1 - p0);
        return {dot(w, w), 2.0 * dot(q, w), dot(q, q) - 1.0};
    }

    bool bbox_overlaps(Point2 p0, Point2 p1) const {
        return std::max(p0.x, p1.x) >= c_.x - hx_ && std::min(p0.x, p1.x) <= c_.x + hx_ &&
               std::max(p0.y, p1.y) >= c_.y - hy_ && std::min(p0.y, p1.y) <= c_.y + hy_;
    }

    // Parameter where the segment enters the open interior, if it does.
    std::optional<double> entry(Point2 p0, Point2 p1) const {
        if (!bbox_overlaps(p0, p1)) return std::nullopt;
        const auto [qa, qb, qc] = segment_quadratic(p0, p1);
        if (qa <= 0.0) return qc < -kPenetrationTol ? std::optional<double>(0.0) : std::nullopt;
        const double tmin = std::clamp(-qb / (2.0 * qa), 0.0, 1.0);
        const double fmin = (qa * tmin + qb) * tmin + qc;
        if (fmin >= -kPenetrationTol) return std::nullopt;
        if (qc <= 0.0) return 0.0;
        const double disc = std::max(qb * qb - 4.0 * qa * qc, 0.0);
        // qc > 0 and fmin < 0 imply qb < 0, so this form is cancellation-free.
        const double t = (2.0 * qc) / (-qb + std::sqrt(disc));
        return std::clamp(t, 0.0, 1.0);
    }

    Point2 center() const { return c_; }
    double half_extent_x() const { return hx_; }
    double half_extent_y() const { return hy_; }

private:
    Point2 c_;
    double cos_;
    double sin_;
    double sa_;
    double sb_;
    double hx_ = 0.0;
    double hy_ = 0.0;
};

// Left-hand side of the inflated obstacle equation. Below one inside, one on
// the boundary, above one outside.
inline double ellipse_value(Point2 p, const Ellipse& e) { return EllipseFrame(e).value(p); }

inline bool strictly_inside(Point2 p, const Ellipse& e) { return ellipse_value(p, e) < 1.0; }

// Real intersections of the segment with the inflated boundary, sorted by t.
// A tangent line yields a single hit.
inline std::vector<SegmentHit> segment_ellipse_intersections(Point2 p0, Point2 p1, const Ellipse& e,
                                                             std::size_t obstacle_id = 0) {
    std::vector<SegmentHit> hits;
    const EllipseFrame f(e);
    const auto [qa, qb, qc] = f.segment_quadratic(p0, p1);
    if (qa <= 0.0) return hits;
    const double nb = qb / qa;
    const double nc = qc / qa;
    const double disc = nb * nb - 4.0 * nc;
    auto push = [&](double t) {
        if (t < -1e-9 || t > 1.0 + 1e-9) return;
        t = std::clamp(t, 0.0, 1.0);
        hits.push_back({t, lerp(p0, p1, t), obstacle_id});
    };
    if (std::abs(disc) < kTangentDiscTol) {
        push(-nb / 2.0);
    } else if (disc > 0.0) {
        const double s = std::sqrt(disc);
        push((-nb - s) / 2.0);
        push((-nb + s) / 2.0);
    }
    return hits;
}

// The two points where lines through `p` touch the inflated ellipse. The first
// lies counterclockwise (around the center) from the center->p ray, the second
// clockwise.
inline std::pair<Point2, Point2> tangent_points(Point2 p, const Ellipse& e) {
    const EllipseFrame f(e);
    const Point2 q = f.to_unit(p);
    const double d2 = dot(q, q);
    if (!(d2 > 1.0)) throw PointInsideObstacle("tangent_points: point is not outside the inflated ellipse");
    const double d = std::sqrt(d2);
    const double phi = std::atan2(q.y, q.x);
    const double beta = std::acos(1.0 / d);
    const Point2 u1{std::cos(phi + beta), std::sin(phi + beta)};
    const Point2 u2{std::cos(phi - beta), std::sin(phi - beta)};
    return {f.from_unit(u1), f.from_unit(u2)};
}

// Waypoint on the virtual ellipse (axes grown by d_vir beyond the inflated
// boundary) along the tangent line from p through tangent_pt: the intersection
// farther from p.
inline Point2 virtual_waypoint(Point2 p, const Ellipse& e, Point2 tangent_pt, double d_vir) {
    const Point2 dir = tangent_pt - p;
    const double len = norm(dir);
    if (!(len > 0.0) || !(d_vir > 0.0)) throw NoIntersection("virtual_waypoint: degenerate tangent line");
    const Point2 u = (1.0 / len) * dir;
    const EllipseFrame vf(e.grown(d_vir));
    const Point2 q = vf.to_unit(p);
    const Point2 w = vf.dir_to_unit(u);
    const double qa = dot(w, w);
    const double qb = 2.0 * dot(q, w);
    const double qc = dot(q, q) - 1.0;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) throw NoIntersection("virtual_waypoint: tangent line misses the virtual ellipse");
    const double s = (-qb + std::sqrt(disc)) / (2.0 * qa);
    return p + s * u;
}

// Point on p0->p1 at distance r from `center`, with p0 inside the circle and
// p1 outside.
inline Point2 clamp_to_range(Point2 center, double r, Point2 p0, Point2 p1) {
    const double r0 = distance(center, p0);
    const double r1 = distance(center, p1);
    if (!(r > 0.0) || r0 > r + 1e-9 || !(r1 > r))
        throw InvalidClamp("clamp_to_range: expected start inside and end outside the range circle");
    const Point2 d = p1 - p0;
    const Point2 m = p0 - center;
    const double qa = dot(d, d);
    const double qb = 2.0 * dot(m, d);
    const double qc = dot(m, m) - r * r;
    const double disc = std::max(qb * qb - 4.0 * qa * qc, 0.0);
    const double t = std::clamp((-qb + std::sqrt(disc)) / (2.0 * qa), 0.0, 1.0);
    // Snap radially so the result sits on the circle to rounding.
    const Point2 raw = lerp(p0, p1, t);
    const Point2 rel = raw - center;
    const double rn = norm(rel);
    return rn > 0.0 ? center + (r / rn) * rel : raw;
}

// An immutable obstacle list with cached frames for repeated segment queries.
class ObstacleSet {
public:
    ObstacleSet() = default;
    explicit ObstacleSet(std::vector<Ellipse> obstacles) : obstacles_(std::move(obstacles)) {
        frames_.reserve(obstacles_.size());
        for (const auto& e : obstacles_) frames_.emplace_back(e);
    }

    std::size_t size() const { return obstacles_.size(); }
    bool empty() const { return obstacles_.empty(); }
    const Ellipse& operator[](std::size_t i) const { return obstacles_[i]; }
    const EllipseFrame& frame(std::size_t i) const { return frames_[i]; }
    std::span<const Ellipse> ellipses() const { return obstacles_; }

    bool segment_clear(Point2 p0, Point2 p1) const {
        for (const auto& f : frames_)
            if (f.entry(p0, p1)) return false;
        return true;
    }

    // Number of obstacles whose interior the segment crosses.
    std::size_t count_penetrated(Point2 p0, Point2 p1) const {
        std::size_t n = 0;
        for (const auto& f : frames_)
            if (f.entry(p0, p1)) ++n;
        return n;
    }

    // Obstacle whose interior the segment enters first; ties go to the lower index.
    std::optional<SegmentHit> first_collision(Point2 p0, Point2 p1) const {
        std::optional<SegmentHit> best;
        for (std::size_t i = 0; i < frames_.size(); ++i) {
            const auto t = frames_[i].entry(p0, p1);
            if (t && (!best || *t < best->t)) best = SegmentHit{*t, lerp(p0, p1, *t), i};
        }
        return best;
    }

    double min_value(Point2 p) const {
        double v = std::numeric_limits<double>::infinity();
        for (const auto& f : frames_) v = std::min(v, f.value(p));
        return v;
    }

    bool point_free(Point2 p) const { return min_value(p) >= 1.0; }

    // Indices of obstacles with the point strictly inside.
    std::vector<std::size_t> containing(Point2 p) const {
        std::vector<std::size_t> ids;
        for (std::size_t i = 0; i < frames_.size(); ++i)
            if (frames_[i].value(p) < 1.0) ids.push_back(i);
        return ids;
    }

private:
    std::vector<Ellipse> obstacles_;
    std::vector<EllipseFrame> frames_;
};

// Returns (obstacle index, entry hit) of the obstacle entered first along p0->p1.
// Grazing contacts are not entries.
inline std::optional<std::pair<std::size_t, SegmentHit>> first_collided_obstacle(
    Point2 p0, Point2 p1, std::span<const Ellipse> obstacles) {
    std::optional<std::pair<std::size_t, SegmentHit>> best;
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const auto t = EllipseFrame(obstacles[i]).entry(p0, p1);
        if (!t) continue;
        if (!best || *t < best->second.t) best = {{i, SegmentHit{*t, lerp(p0, p1, *t), i}}};
    }
    return best;
}

} // namespace tig
