#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tig/dtig.hpp"
#include "tig/world.hpp"

using namespace tig;

namespace {

Scenario base(double w, double h, Point2 s, Point2 t, double r_safe = 2.0) {
    Scenario sc;
    sc.width = w;
    sc.height = h;
    sc.start = s;
    sc.target = t;
    PlannerParams p;
    p.r_safe = r_safe;
    sc.set_params(p);
    return sc;
}

void add(Scenario& s, Ellipse e, bool hidden) {
    e.r_safe = s.params.r_safe;
    (hidden ? s.hidden_obstacles : s.obstacles).push_back(e);
}

// Executed path sampled every 0.1 m against every obstacle.
void expect_clear(const ExecutionTrace& t, const Scenario& s) {
    EXPECT_GE(oracle::polyline_clearance(t.executed_path, s.all_obstacles()), 1.0 - 1e-9);
}

void expect_moves_within_range(const ExecutionTrace& t, double r) {
    for (std::size_t i = 1; i < t.executed_path.size(); ++i)
        EXPECT_LE(distance(t.executed_path[i - 1], t.executed_path[i]), r + 1e-6) << "move " << i;
}

// 180 m corridor with a few hidden obstacles straddling the straight line.
Scenario corridor() {
    Scenario s = base(200, 120, {10, 60}, {190, 60});
    add(s, Ellipse::circle({50, 62}, 8), true);
    add(s, Ellipse::circle({95, 55}, 10), true);
    add(s, Ellipse{140, 66, 14, 5, 0.4}, true);
    return s;
}

// Known circle near the start, hidden circle on the last leg of the static
// path more than one sensor range away from the first turn.
Scenario popup() {
    Scenario s = base(220, 200, {10, 100}, {210, 100});
    add(s, Ellipse::circle({70, 100}, 15), false);
    const PlannedPath p = plan_static(s);
    const Point2 a = p.waypoints[p.waypoints.size() - 2], b = p.waypoints.back();
    const double t = (150.0 - a.x) / (b.x - a.x);
    add(s, Ellipse::circle({150, a.y + t * (b.y - a.y)}, 6), true);
    return s;
}

} // namespace

TEST(Sense, RangeExamples) {
    const std::vector<Ellipse> near{Ellipse::circle({5, 0}, 1, 0)};
    const std::vector<Ellipse> far{Ellipse::circle({100, 0}, 1, 0)};
    const std::vector<Ellipse> edge{Ellipse::circle({61, 0}, 1, 0)};
    EXPECT_EQ(sense(near, {0, 0}, 60), std::vector<std::size_t>{0});
    EXPECT_TRUE(sense(far, {0, 0}, 60).empty());
    EXPECT_EQ(sense(edge, {0, 0}, 60), std::vector<std::size_t>{0});
}

TEST(Sense, UsesInflatedBoundary) {
    const std::vector<Ellipse> obs{Ellipse::circle({64, 0}, 1, 3)};
    EXPECT_EQ(sense(obs, {0, 0}, 60).size(), 1u);
    EXPECT_TRUE(sense(obs, {0, 0}, 59).empty());
}

TEST(Visibility, MonotoneAndReportsOnlyNewIds) {
    Visibility v({Ellipse::circle({10, 0}, 1), Ellipse::circle({100, 0}, 1)}, 0);
    EXPECT_EQ(v.update({0, 0}, 60), std::vector<std::size_t>{0});
    EXPECT_TRUE(v.update({0, 0}, 60).empty());
    EXPECT_EQ(v.update({60, 0}, 60), std::vector<std::size_t>{1});
    EXPECT_TRUE(v.update({-500, 0}, 60).empty());
    EXPECT_EQ(v.known_count(), 2u);
}

TEST(MaxRangeWaypoint, Examples) {
    const Point2 a = max_range_waypoint({0, 0}, {150, 0}, 60);
    EXPECT_NEAR(a.x, 60, 1e-9);
    EXPECT_NEAR(a.y, 0, 1e-9);
    const Point2 b = max_range_waypoint({60, 0}, {150, 0}, 60);
    EXPECT_NEAR(b.x, 120, 1e-9);
    const Point2 c = max_range_waypoint({0, 0}, {30, 40}, 25);
    EXPECT_NEAR(c.x, 15, 1e-9);
    EXPECT_NEAR(c.y, 20, 1e-9);
    EXPECT_THROW(max_range_waypoint({0, 0}, {30, 0}, 60), InvalidClamp);
}

TEST(InRangePrefix, ClampsAtFirstExit) {
    bool clamped = false;
    const auto p = in_range_prefix({{0, 0}, {30, 0}, {30, 100}}, 60, &clamped);
    ASSERT_EQ(p.size(), 3u);
    EXPECT_TRUE(clamped);
    EXPECT_NEAR(distance(p.back(), {0, 0}), 60, 1e-9);
    EXPECT_NEAR(p.back().x, 30, 1e-9);
    const auto q = in_range_prefix({{0, 0}, {10, 0}, {20, 0}}, 60, &clamped);
    EXPECT_FALSE(clamped);
    EXPECT_EQ(q.size(), 3u);
}

TEST(Partial, NoHiddenObstaclesFliesStaticPath) {
    Scenario s = base(200, 120, {10, 60}, {190, 60});
    add(s, Ellipse::circle({60, 60}, 10), false);
    add(s, Ellipse{130, 55, 15, 6, 0.8}, false);
    const ExecutionTrace t = plan_dynamic_partial(s);
    ASSERT_TRUE(t.reached());
    EXPECT_EQ(t.count(TraceKind::Replan), 0u);
    // Clamped moves insert intermediate points on the same segments.
    const auto sp = plan_static(s).waypoints;
    EXPECT_NEAR(oracle::polyline_length(t.executed_path), oracle::polyline_length(sp), 1e-6);
    for (Point2 w : sp) {
        bool found = false;
        for (Point2 e : t.executed_path) found = found || distance(w, e) < 1e-9;
        EXPECT_TRUE(found) << w.x << "," << w.y;
    }
}

TEST(Partial, PopUpObstacleTriggersOneReplan) {
    const Scenario s = popup();
    // The hidden obstacle is out of range from the start.
    EXPECT_TRUE(sense(s.hidden_obstacles, s.start, s.params.sensor_range).empty());
    const ExecutionTrace t = plan_dynamic_partial(s);
    ASSERT_TRUE(t.reached());
    EXPECT_EQ(t.count(TraceKind::Replan), 1u);
    expect_clear(t, s);
    expect_moves_within_range(t, s.params.sensor_range);
    EXPECT_NEAR(distance(t.executed_path.back(), s.target), 0.0, 1e-9);
}

TEST(Partial, EnclosedTargetFailsOnReplan) {
    Scenario s = base(200, 200, {10, 100}, {150, 100});
    // Ring of overlapping hidden circles around the target, target itself free.
    for (int k = 0; k < 16; ++k) {
        const double a = 2.0 * kPi * k / 16;
        add(s, Ellipse::circle({150 + 20 * std::cos(a), 100 + 20 * std::sin(a)}, 5), true);
    }
    ASSERT_TRUE(validate(s).empty());
    const ExecutionTrace t = plan_dynamic_partial(s);
    EXPECT_EQ(t.final_status, RunStatus::ReplanFailed);
    ASSERT_TRUE(t.failure_position.has_value());
    EXPECT_EQ(*t.failure_position, t.executed_path.back());
    expect_clear(t, s);
}

TEST(Partial, NoInitialPath) {
    Scenario s = base(100, 100, {10, 50}, {90, 50});
    add(s, Ellipse{50, 50, 60, 5, kPi / 2}, false);
    const ExecutionTrace t = plan_dynamic_partial(s);
    EXPECT_EQ(t.final_status, RunStatus::NoInitialPath);
    EXPECT_EQ(t.executed_path.size(), 1u);
}

TEST(Unknown, EmptyCorridorHopsAtMaxRange) {
    const Scenario s = base(200, 20, {0, 10}, {150, 10});
    const ExecutionTrace t = plan_dynamic_unknown(s);
    ASSERT_TRUE(t.reached());
    const std::vector<Point2> want{{0, 10}, {60, 10}, {120, 10}, {150, 10}};
    ASSERT_EQ(t.executed_path.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_NEAR(t.executed_path[i].x, want[i].x, 1e-9);
        EXPECT_NEAR(t.executed_path[i].y, want[i].y, 1e-9);
    }
    std::vector<Point2> mrw;
    for (const auto& e : t.steps)
        if (e.kind == TraceKind::MaxRangeWaypoint) mrw.push_back(e.position);
    ASSERT_EQ(mrw.size(), 2u);
    EXPECT_NEAR(mrw[0].x, 60, 1e-9);
    EXPECT_NEAR(mrw[1].x, 120, 1e-9);
}

TEST(Unknown, CorridorReachedSafely) {
    const Scenario s = corridor();
    const ExecutionTrace t = plan_dynamic_unknown(s);
    ASSERT_TRUE(t.reached()) << to_string(t.final_status);
    expect_clear(t, s);
    expect_moves_within_range(t, s.params.sensor_range);
    EXPECT_GE(t.count(TraceKind::Replan), 3u);
}

TEST(Unknown, CommittedWaypointsStayInRange) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        Scenario s = generate_map(MapSpec::standard(MapFamily::Short, seed));
        s.hidden_obstacles = s.obstacles;
        s.obstacles.clear();
        const ExecutionTrace t = plan_dynamic_unknown(s);
        for (const auto& e : t.steps) {
            if (e.kind != TraceKind::Replan) continue;
            EXPECT_EQ(e.path.front(), e.position);
            for (Point2 p : e.path) EXPECT_LE(distance(p, e.position), s.params.sensor_range + 1e-6);
        }
        expect_moves_within_range(t, s.params.sensor_range);
        if (t.reached()) expect_clear(t, s);
    }
}

TEST(Unknown, WallFailsWithoutHanging) {
    Scenario s = base(200, 100, {10, 50}, {190, 50});
    add(s, Ellipse{100, 50, 80, 4, kPi / 2}, true);
    const ExecutionTrace t = plan_dynamic_unknown(s);
    EXPECT_FALSE(t.reached());
    EXPECT_TRUE(t.failure_position.has_value());
    expect_clear(t, s);
}

TEST(Unknown, LongRangeMatchesStaticPlan) {
    Scenario s = base(200, 120, {10, 60}, {190, 60});
    add(s, Ellipse::circle({60, 60}, 10), false);
    add(s, Ellipse{130, 55, 15, 6, 0.8}, false);
    s.params.sensor_range = std::hypot(s.width, s.height);
    const PlannedPath sp = plan_static(s);
    const ExecutionTrace t = plan_dynamic_unknown(s);
    ASSERT_TRUE(t.reached());
    ASSERT_EQ(t.executed_path.size(), sp.waypoints.size());
    for (std::size_t i = 0; i < sp.waypoints.size(); ++i) EXPECT_EQ(t.executed_path[i], sp.waypoints[i]);
    EXPECT_EQ(t.count(TraceKind::MaxRangeWaypoint), 0u);
}

TEST(Unknown, Deterministic) {
    const Scenario s = corridor();
    EXPECT_EQ(plan_dynamic_unknown(s), plan_dynamic_unknown(s));
}

TEST(Unknown, SensedSetsNeverRepeat) {
    const Scenario s = corridor();
    const ExecutionTrace t = plan_dynamic_unknown(s);
    std::vector<bool> seen(s.all_obstacles().size(), false);
    for (const auto& e : t.steps) {
        if (e.kind != TraceKind::Sense) continue;
        for (auto id : e.sensed) {
            EXPECT_FALSE(seen.at(id)) << id;
            seen[id] = true;
        }
    }
}

TEST(Unknown, RangeLimitedStrategyTerminates) {
    const Scenario s = corridor();
    const ExecutionTrace t = plan_dynamic_unknown(s, UnknownStrategy::RangeLimitedSearch);
    EXPECT_LE(t.executed_path.size(), kMaxMoves + 2);
    expect_clear(t, s);
    expect_moves_within_range(t, s.params.sensor_range);
}

TEST(TraceJsonl, RoundTrip) {
    const Scenario s = corridor();
    const ExecutionTrace t = plan_dynamic_unknown(s);
    const ExecutionTrace back = trace_from_jsonl(trace_to_jsonl(t), s.start);
    EXPECT_EQ(back.steps, t.steps);
    EXPECT_EQ(back.executed_path, t.executed_path);
}

TEST(TraceJsonl, BadLinesRaiseParseError) {
    EXPECT_THROW(trace_from_jsonl("{\"kind\":\"Teleport\",\"x\":0,\"y\":0,\"payload\":{}}\n", {0, 0}), ParseError);
    EXPECT_THROW(trace_from_jsonl("{\"kind\":\"Move\"}\n", {0, 0}), ParseError);
    EXPECT_THROW(trace_from_jsonl("not json\n", {0, 0}), ParseError);
    EXPECT_EQ(trace_from_jsonl("\n\n", {0, 0}).steps.size(), 0u);
}
