#pragma once

// Online planners driven by a circular range sensor.
//
// Motion is node to node; the sensor fires on arrival at every node. No move
// is longer than the sensor range, so every obstacle touching a committed
// segment has been sensed before the segment is flown.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tig/geometry.hpp"
#include "tig/stig.hpp"
#include "tig/world.hpp"

namespace tig {

inline constexpr int kSenseSamples = 1024;
inline constexpr double kSenseTol = 1e-3;
inline constexpr std::size_t kMaxMoves = 10'000;
inline constexpr double kRevisitTol = 1e-3;
inline constexpr int kMaxRevisits = 3;

struct SensorModel {
    double range = 60.0;
};

// Minimum distance from `p` to the inflated boundary, sampled at kSenseSamples
// angles; zero when `p` is inside.
inline double boundary_distance(Point2 p, const Ellipse& e) {
    const EllipseFrame f(e);
    if (f.value(p) <= 1.0) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kSenseSamples; ++k) {
        const double phi = 2.0 * kPi * k / kSenseSamples;
        best = std::min(best, distance(p, f.from_unit({std::cos(phi), std::sin(phi)})));
    }
    return best;
}

// Ids of `obstacles` whose inflated boundary comes within `r` of `pos`.
inline std::vector<std::size_t> sense(std::span<const Ellipse> obstacles, Point2 pos, double r) {
    std::vector<std::size_t> ids;
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const EllipseFrame f(obstacles[i]);
        const Point2 c = f.center();
        // Cheap reject: the bounding box is farther than r.
        const double dx = std::max(0.0, std::abs(pos.x - c.x) - f.half_extent_x());
        const double dy = std::max(0.0, std::abs(pos.y - c.y) - f.half_extent_y());
        if (std::hypot(dx, dy) > r + kSenseTol) continue;
        if (boundary_distance(pos, obstacles[i]) <= r + kSenseTol) ids.push_back(i);
    }
    return ids;
}

// Visible + hidden obstacles of one run. Visibility only grows.
class Visibility {
public:
    Visibility(std::vector<Ellipse> all, std::size_t initially_known) : all_(std::move(all)), known_(all_.size(), false) {
        for (std::size_t i = 0; i < initially_known && i < all_.size(); ++i) known_[i] = true;
    }

    // Marks everything within `r` of `pos` as known; returns the newly known ids.
    std::vector<std::size_t> update(Point2 pos, double r) {
        std::vector<std::size_t> fresh;
        for (std::size_t id : sense(all_, pos, r))
            if (!known_[id]) {
                known_[id] = true;
                fresh.push_back(id);
            }
        return fresh;
    }

    ObstacleSet known_set() const {
        std::vector<Ellipse> k;
        for (std::size_t i = 0; i < all_.size(); ++i)
            if (known_[i]) k.push_back(all_[i]);
        return ObstacleSet(std::move(k));
    }

    std::size_t known_count() const { return static_cast<std::size_t>(std::count(known_.begin(), known_.end(), true)); }
    bool is_known(std::size_t id) const { return known_.at(id); }
    const Ellipse& obstacle(std::size_t id) const { return all_.at(id); }
    const std::vector<Ellipse>& all() const { return all_; }

private:
    std::vector<Ellipse> all_;
    std::vector<bool> known_;
};

enum class TraceKind { Move, Sense, Replan, MaxRangeWaypoint };

inline std::string_view to_string(TraceKind k) {
    switch (k) {
    case TraceKind::Move: return "Move";
    case TraceKind::Sense: return "Sense";
    case TraceKind::Replan: return "Replan";
    case TraceKind::MaxRangeWaypoint: return "MaxRangeWaypoint";
    }
    return "?";
}

struct TraceEvent {
    TraceKind kind = TraceKind::Move;
    Point2 position;
    std::vector<std::size_t> sensed; // Sense: newly visible obstacle ids
    std::vector<Point2> path;        // Replan: new path, starting at `position`

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

enum class RunStatus { Reached, NoInitialPath, ReplanFailed, StepLimit, LoopDetected };

inline std::string_view to_string(RunStatus s) {
    switch (s) {
    case RunStatus::Reached: return "Reached";
    case RunStatus::NoInitialPath: return "NoInitialPath";
    case RunStatus::ReplanFailed: return "ReplanFailed";
    case RunStatus::StepLimit: return "StepLimit";
    case RunStatus::LoopDetected: return "LoopDetected";
    }
    return "?";
}

struct ExecutionTrace {
    std::vector<TraceEvent> steps;
    RunStatus final_status = RunStatus::Reached;
    std::optional<Point2> failure_position;
    std::vector<Point2> executed_path;
    std::vector<double> plan_times; // seconds, one per planning call; not part of equality

    bool reached() const { return final_status == RunStatus::Reached; }
    double total_plan_time() const {
        double t = 0.0;
        for (double x : plan_times) t += x;
        return t;
    }
    std::size_t count(TraceKind k) const {
        return static_cast<std::size_t>(
            std::count_if(steps.begin(), steps.end(), [k](const TraceEvent& e) { return e.kind == k; }));
    }

    friend bool operator==(const ExecutionTrace& a, const ExecutionTrace& b) {
        return a.steps == b.steps && a.final_status == b.final_status && a.failure_position == b.failure_position &&
               a.executed_path == b.executed_path;
    }
};

namespace detail {

// Mutable state shared by both dynamic planners.
class Mission {
public:
    Mission(const Scenario& s, std::size_t initially_known)
        : s_(s), vis_(s.all_obstacles(), initially_known), pos_(s.start) {
        trace_.executed_path.push_back(pos_);
        visited_.push_back(pos_);
    }

    Point2 position() const { return pos_; }
    const Scenario& scenario() const { return s_; }
    Visibility& visibility() { return vis_; }
    ExecutionTrace& trace() { return trace_; }
    double range() const { return s_.params.sensor_range; }
    bool at_target() const { return distance(pos_, s_.target) <= kGoalTol; }

    std::vector<std::size_t> sense_here() {
        auto fresh = vis_.update(pos_, range());
        if (!fresh.empty()) trace_.steps.push_back({TraceKind::Sense, pos_, fresh, {}});
        return fresh;
    }

    // Plans with `fn`, recording its duration.
    template <class F>
    PlannedPath timed_plan(F&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        PlannedPath p;
        try {
            p = fn();
        } catch (const StartOrTargetBlocked&) {
            p.status = PlanStatus::NoPath;
        }
        trace_.plan_times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        return p;
    }

    void record_replan(const std::vector<Point2>& path) { trace_.steps.push_back({TraceKind::Replan, pos_, {}, path}); }

    void fail(RunStatus st) {
        trace_.final_status = st;
        trace_.failure_position = pos_;
    }

    // Moves to `next`; returns false (and records the failure) on step limit or loop.
    bool move_to(Point2 next) {
        if (trace_.executed_path.size() > kMaxMoves) {
            fail(RunStatus::StepLimit);
            return false;
        }
        if (distance(pos_, next) <= kGoalTol) return true;
        int revisits = 0;
        for (Point2 v : visited_)
            if (distance(v, next) <= kRevisitTol) ++revisits;
        if (revisits > kMaxRevisits) {
            fail(RunStatus::LoopDetected);
            return false;
        }
        pos_ = next;
        visited_.push_back(next);
        trace_.executed_path.push_back(next);
        trace_.steps.push_back({TraceKind::Move, next, {}, {}});
        return true;
    }

    // True when any newly sensed obstacle blocks a segment of pos -> remaining.
    bool blocks(const std::vector<std::size_t>& fresh, const std::deque<Point2>& remaining) const {
        if (fresh.empty() || remaining.empty()) return false;
        std::vector<Ellipse> fe;
        for (auto id : fresh) fe.push_back(vis_.obstacle(id));
        const ObstacleSet set(std::move(fe));
        Point2 prev = pos_;
        for (Point2 p : remaining) {
            if (!set.segment_clear(prev, p)) return true;
            prev = p;
        }
        return false;
    }

    PlannedPath plan_full(Point2 from) {
        const ObstacleSet known = vis_.known_set();
        return timed_plan([&] { return plan_static(from, s_.target, known, s_.params, scenario_bounds(s_)); });
    }

    // Flies `path` (starting at the current position) to its end, clamping
    // moves to the sensor range and replanning to the target whenever a newly
    // sensed obstacle blocks what is left. With `to_target` false the run stops
    // at the end of `path` or as soon as it is blocked.
    enum class Leg { Done, Blocked, Failed };
    Leg fly(const std::vector<Point2>& path, bool to_target) {
        std::deque<Point2> remaining(path.begin() + 1, path.end());
        while (true) {
            const auto fresh = sense_here();
            if (blocks(fresh, remaining)) {
                if (!to_target) return Leg::Blocked;
                const PlannedPath np = plan_full(pos_);
                if (!np.ok()) {
                    fail(RunStatus::ReplanFailed);
                    return Leg::Failed;
                }
                record_replan(np.waypoints);
                remaining.assign(np.waypoints.begin() + 1, np.waypoints.end());
            }
            if (to_target && at_target()) return Leg::Done;
            if (remaining.empty()) return Leg::Done;
            Point2 next = remaining.front();
            if (distance(pos_, next) > range()) {
                next = clamp_to_range(pos_, range(), pos_, next);
            } else {
                remaining.pop_front();
            }
            if (!move_to(next)) return Leg::Failed;
        }
    }

private:
    const Scenario& s_;
    Visibility vis_;
    Point2 pos_;
    ExecutionTrace trace_;
    std::vector<Point2> visited_;
};

} // namespace detail

// Partially known map: plan over the visible obstacles, fly, and replan from
// the current position when a pop-up obstacle blocks the rest of the path.
inline ExecutionTrace plan_dynamic_partial(const Scenario& s) {
    throw_if_invalid(s);
    detail::Mission m(s, s.obstacles.size());
    const ObstacleSet known(s.obstacles);
    const PlannedPath initial =
        m.timed_plan([&] { return plan_static(s.start, s.target, known, s.params, scenario_bounds(s)); });
    if (!initial.ok()) {
        m.fail(RunStatus::NoInitialPath);
        return m.trace();
    }
    if (m.fly(initial.waypoints, true) == detail::Mission::Leg::Done) m.trace().final_status = RunStatus::Reached;
    return m.trace();
}

// Point on pos->aim at distance r from pos.
inline Point2 max_range_waypoint(Point2 pos, Point2 aim, double r) {
    if (!(distance(pos, aim) > r)) throw InvalidClamp("max_range_waypoint: aim is within range");
    return clamp_to_range(pos, r, pos, aim);
}

// How the unknown-map planner picks the subpath to fly each round.
enum class UnknownStrategy {
    // Plan to the target over every obstacle sensed so far and fly the prefix
    // of that path that lies inside the sensor range.
    SensedMapPlan,
    // Search only the range disc: candidates beyond it are pulled onto the
    // range circle and the first such node popped ends the search.
    RangeLimitedSearch,
};

// Prefix of `path` inside the circle (center path.front(), radius r), ending
// with the max-range waypoint where it first leaves the circle.
inline std::vector<Point2> in_range_prefix(const std::vector<Point2>& path, double r, bool* clamped = nullptr) {
    std::vector<Point2> out{path.front()};
    const Point2 c = path.front();
    if (clamped) *clamped = false;
    for (std::size_t i = 1; i < path.size(); ++i) {
        if (distance(c, path[i]) <= r) {
            out.push_back(path[i]);
            continue;
        }
        out.push_back(clamp_to_range(c, r, path[i - 1], path[i]));
        if (clamped) *clamped = true;
        break;
    }
    return out;
}

// Unknown map: only start, target and bounds are known. Each round senses,
// plans over the sensed sub-environment and flies the part of the plan that
// lies inside the sensor range, ending on a max-range waypoint when the plan
// leaves the range. Once the target is in range the plan is a plain static
// plan over everything sensed so far.
inline ExecutionTrace plan_dynamic_unknown(const Scenario& s,
                                           UnknownStrategy strategy = UnknownStrategy::SensedMapPlan) {
    throw_if_invalid(s);
    detail::Mission m(s, 0);
    const double r = s.params.sensor_range;

    while (!m.at_target()) {
        m.sense_here();
        const Point2 here = m.position();
        PlannedPath plan;
        if (strategy == UnknownStrategy::RangeLimitedSearch && distance(here, s.target) > r) {
            const ObstacleSet known = m.visibility().known_set();
            plan = m.timed_plan([&] {
                return tangent_search({here, s.target, known, s.params, scenario_bounds(s), RangeLimit{here, r}, std::nullopt});
            });
        } else {
            plan = m.plan_full(here);
        }
        if (!plan.ok()) {
            m.fail(RunStatus::ReplanFailed);
            return m.trace();
        }
        bool clamped = false;
        const std::vector<Point2> sub = in_range_prefix(plan.waypoints, r, &clamped);
        m.record_replan(sub);
        if (clamped || distance(sub.back(), s.target) > kGoalTol)
            m.trace().steps.push_back({TraceKind::MaxRangeWaypoint, sub.back(), {}, {}});
        if (m.fly(sub, false) == detail::Mission::Leg::Failed) return m.trace();
    }
    m.trace().final_status = RunStatus::Reached;
    return m.trace();
}

// ---------------------------------------------------------------------------
// JSON lines

inline nlohmann::json to_json(const TraceEvent& e) {
    nlohmann::json payload = nlohmann::json::object();
    if (e.kind == TraceKind::Sense) payload["visible"] = e.sensed;
    if (e.kind == TraceKind::Replan) {
        nlohmann::json pts = nlohmann::json::array();
        for (Point2 p : e.path) pts.push_back({p.x, p.y});
        payload["path"] = pts;
    }
    return {{"kind", std::string(to_string(e.kind))}, {"x", e.position.x}, {"y", e.position.y}, {"payload", payload}};
}

inline std::string trace_to_jsonl(const ExecutionTrace& t) {
    std::string out;
    for (const auto& e : t.steps) out += to_json(e).dump() + "\n";
    return out;
}

inline TraceKind parse_trace_kind(std::string_view s) {
    if (s == "Move") return TraceKind::Move;
    if (s == "Sense") return TraceKind::Sense;
    if (s == "Replan") return TraceKind::Replan;
    if (s == "MaxRangeWaypoint") return TraceKind::MaxRangeWaypoint;
    throw ParseError("unknown trace event kind '" + std::string(s) + "'");
}

// Events of a JSON-lines trace. The executed path is rebuilt from the start
// point and the Move events.
inline ExecutionTrace trace_from_jsonl(std::string_view text, Point2 start) {
    ExecutionTrace t;
    t.executed_path.push_back(start);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            TraceEvent e;
            e.kind = parse_trace_kind(j.at("kind").get<std::string>());
            e.position = {j.at("x").get<double>(), j.at("y").get<double>()};
            const auto& pl = j.at("payload");
            if (pl.contains("visible")) e.sensed = pl.at("visible").get<std::vector<std::size_t>>();
            if (pl.contains("path"))
                for (const auto& p : pl.at("path")) e.path.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            if (e.kind == TraceKind::Move) t.executed_path.push_back(e.position);
            t.steps.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw ParseError("trace line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return t;
}

} // namespace tig
