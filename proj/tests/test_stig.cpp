#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tig/baseline.hpp"
#include "tig/metrics.hpp"
#include "tig/stig.hpp"
#include "tig/world.hpp"

using namespace tig;

namespace {

Scenario make(double w, double h, Point2 s, Point2 t, std::vector<Ellipse> obs, double r_safe = 2.0) {
    Scenario sc;
    sc.width = w;
    sc.height = h;
    sc.start = s;
    sc.target = t;
    sc.obstacles = std::move(obs);
    PlannerParams p = PlannerParams::defaults_for(sc.obstacles.size());
    p.r_safe = r_safe;
    sc.set_params(p);
    return sc;
}

void expect_safe(const PlannedPath& p, const std::vector<Ellipse>& obs) {
    ASSERT_TRUE(p.ok());
    EXPECT_GE(oracle::polyline_clearance(p.waypoints, obs), 1.0 - 1e-6);
}

// Tangent lines from S and T to a circle meet at a point covered by a second
// obstacle on each side.
Scenario blocked_apex() {
    return make(120, 80, {0, 40}, {100, 40},
                {Ellipse::circle({50, 40}, 15), Ellipse::circle({50, 58}, 4), Ellipse::circle({50, 22}, 4)});
}

// Point-symmetric pair: the inner tangents from S and T are parallel.
Scenario parallel_tangents() {
    return make(120, 60, {0, 20}, {100, 40}, {Ellipse::circle({30, 20}, 10), Ellipse::circle({70, 40}, 10)});
}

// Target tucked right behind a long oblique ellipse; tangents from S and T
// diverge instead of meeting beyond the obstacle.
Scenario diverging_tangents() { return make(120, 120, {10, 60}, {62, 60}, {Ellipse{50, 60, 40, 4, 1.2}}); }

SearchNode at(Point2 p) {
    SearchNode n;
    n.position = p;
    return n;
}

} // namespace

TEST(Heuristic, Examples) {
    EXPECT_DOUBLE_EQ(heuristic({0, 0}, {3, 4}, {3, 8}, ObstacleSet{}, 10), 9.0);
    const ObstacleSet two({Ellipse::circle({0.9, 1.2}, 0.5), Ellipse::circle({2.1, 2.8}, 0.5)});
    EXPECT_DOUBLE_EQ(heuristic({0, 0}, {3, 4}, {3, 8}, two, 10), 29.0);
    EXPECT_DOUBLE_EQ(heuristic({1, 1}, {1, 1}, {1, 1}, ObstacleSet{}, 10), 0.0);
}

TEST(CollectWaypoints, SingleCircleGivesMirroredCandidates) {
    PlannerParams p;
    p.d_vir = 0.25;
    const ObstacleSet obs({Ellipse::circle({5, 0}, 1.0, 0.5)});
    const SearchNode s = at({0, 0});
    const auto c = collect_waypoints(s, {10, 0}, obs, p, std::nullopt);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_NEAR(c[0].x, c[1].x, 1e-9);
    EXPECT_NEAR(c[0].y, -c[1].y, 1e-9);
    for (Point2 w : c) {
        EXPECT_GT(oracle::value(w, obs[0]), 1.0);
        EXPECT_GE(oracle::min_value_on_segment({0, 0}, w, obs[0], 2000), 1.0 - 1e-6);
    }
}

TEST(CollectWaypoints, ClearLineReturnsTarget) {
    const auto c = collect_waypoints(at({0, 0}), {10, 0}, ObstacleSet{}, PlannerParams{}, std::nullopt);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0], (Point2{10, 0}));
}

TEST(CollectWaypoints, ParallelTangentsStillYieldCandidates) {
    const Scenario s = parallel_tangents();
    const auto c = collect_waypoints(at(s.start), s.target, ObstacleSet(s.obstacles), s.params, std::nullopt);
    EXPECT_FALSE(c.empty());
}

TEST(CollectWaypoints, HeadingBoundFiltersReversal) {
    PlannerParams p;
    p.theta_max = kPi / 4;
    const auto c = collect_waypoints(at({0, 0}), {-10, 0}, ObstacleSet{}, p, Point2{1, 0});
    EXPECT_TRUE(c.empty());
}

TEST(CollectWaypoints, TreatedTangentsAreSkippedOnSecondPass) {
    PlannerParams p;
    const ObstacleSet obs({Ellipse::circle({5, 0}, 1.0, 0.5)});
    SearchState st;
    EXPECT_EQ(collect_waypoints(at({0, 0}), {10, 0}, obs, p, std::nullopt, &st).size(), 2u);
    EXPECT_EQ(st.treated_size(), 2u);
    EXPECT_TRUE(collect_waypoints(at({0, 0}), {10, 0}, obs, p, std::nullopt, &st).empty());
}

TEST(CollectWaypoints, OverflowThrows) {
    PlannerParams p;
    p.max_expansions = 1;
    const ObstacleSet obs({Ellipse::circle({5, 0}, 1.0, 0.5)});
    EXPECT_THROW(collect_waypoints(at({0, 0}), {10, 0}, obs, p, std::nullopt), ExpansionOverflow);
}

TEST(PlanStatic, EmptyMapIsStraightAndExpandsOnce) {
    const Scenario s = make(20, 20, {0, 0}, {10, 0}, {});
    const auto p = plan_static(s);
    ASSERT_TRUE(p.ok());
    ASSERT_EQ(p.waypoints.size(), 2u);
    EXPECT_EQ(p.waypoints[0], (Point2{0, 0}));
    EXPECT_EQ(p.waypoints[1], (Point2{10, 0}));
    EXPECT_DOUBLE_EQ(path_length(p.waypoints), 10.0);
    EXPECT_EQ(p.expansions, 1u);
}

TEST(PlanStatic, SingleCircleDetour) {
    Scenario s = make(20, 20, {0, 10}, {10, 10}, {Ellipse::circle({5, 10}, 1.0)}, 0.5);
    s.params.d_vir = 0.25;
    const auto p = plan_static(s);
    ASSERT_TRUE(p.ok());
    EXPECT_EQ(p.waypoints.size(), 3u);
    const double len = path_length(p.waypoints);
    EXPECT_GT(len, 10.0);
    EXPECT_LE(len, 11.0);
    expect_safe(p, s.obstacles);
    // fine-grid search cannot do much better than the tangent detour
    const auto g = grid_astar(s, GridSpec{0.05});
    ASSERT_TRUE(g.ok());
    EXPECT_LE(len, path_length(g.waypoints) + 0.05);
}

TEST(PlanStatic, BlockedEndpointsThrow) {
    const Scenario s = make(20, 20, {5, 5}, {15, 5}, {Ellipse::circle({10, 5}, 2.0)}, 0.5);
    EXPECT_THROW(plan_static(Point2{10, 5}, s.target, ObstacleSet(s.obstacles), s.params), StartOrTargetBlocked);
    EXPECT_THROW(plan_static(s.start, Point2{10, 6}, ObstacleSet(s.obstacles), s.params), StartOrTargetBlocked);
}

TEST(PlanStatic, InfeasibleIntersectionScenario) {
    const Scenario s = blocked_apex();
    const auto p = plan_static(s);
    expect_safe(p, s.obstacles);
    EXPECT_EQ(p.waypoints.front(), s.start);
    EXPECT_EQ(p.waypoints.back(), s.target);
}

TEST(PlanStatic, ParallelTangentScenario) {
    const Scenario s = parallel_tangents();
    expect_safe(plan_static(s), s.obstacles);
}

TEST(PlanStatic, DivergingTangentScenario) {
    const Scenario s = diverging_tangents();
    expect_safe(plan_static(s), s.obstacles);
}

TEST(PlanStatic, HiddenObstaclesAreIgnored) {
    Scenario s = make(100, 100, {5, 50}, {95, 50}, {});
    s.hidden_obstacles = {Ellipse::circle({50, 50}, 10, 2)};
    const auto p = plan_static(s);
    ASSERT_TRUE(p.ok());
    EXPECT_EQ(p.waypoints.size(), 2u);
}

TEST(PlanStatic, WallAcrossMapFails) {
    std::vector<Ellipse> wall;
    for (int y = 0; y <= 100; y += 8) wall.push_back(Ellipse::circle({50, static_cast<double>(y)}, 6));
    const Scenario s = make(100, 100, {10, 50}, {90, 50}, wall);
    const auto p = plan_static(s);
    EXPECT_FALSE(p.ok());
    EXPECT_TRUE(p.waypoints.empty());
}

TEST(PlanStatic, ExpansionLimitReported) {
    Scenario s = make(120, 80, {0, 40}, {100, 40}, blocked_apex().obstacles);
    s.params.max_expansions = 1;
    EXPECT_EQ(plan_static(s).status, PlanStatus::ExpansionLimit);
}

TEST(PlanStatic, GreedyOrderAlsoSolvesRegressions) {
    for (const Scenario& s : {blocked_apex(), parallel_tangents(), diverging_tangents()})
        expect_safe(plan_static(s, SearchOrder::Greedy), s.obstacles);
}

TEST(PlanStatic, RandomMapsSafeDeterministicAndTraceable) {
    for (MapFamily f : {MapFamily::Short, MapFamily::Sparse}) {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            const Scenario s = generate_map(MapSpec::standard(f, derive_seed(77, seed)));
            const auto p = plan_static(s);
            if (!p.ok()) continue;
            expect_safe(p, s.obstacles);

            const auto again = plan_static(s);
            EXPECT_EQ(again.waypoints, p.waypoints);
            EXPECT_EQ(again.expansions, p.expansions);

            // each interior waypoint is reproducible from its recorded tangent construction
            ASSERT_EQ(p.origins.size(), p.waypoints.size());
            for (std::size_t i = 1; i + 1 < p.waypoints.size(); ++i) {
                ASSERT_TRUE(p.origins[i]);
                const auto& o = *p.origins[i];
                const Point2 w = virtual_waypoint(o.from, s.obstacles[o.obstacle_id], o.tangent, s.params.d_vir);
                EXPECT_NEAR(distance(w, p.waypoints[i]), 0.0, 1e-9);
            }
        }
    }
}

TEST(PlanStatic, RestartFromAnyWaypointSucceeds) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const Scenario s = generate_map(MapSpec::standard(MapFamily::Short, derive_seed(5, seed)));
        const auto p = plan_static(s);
        if (!p.ok()) continue;
        const ObstacleSet obs(s.obstacles);
        for (std::size_t i = 1; i + 1 < p.waypoints.size(); ++i)
            EXPECT_TRUE(plan_static(p.waypoints[i], s.target, obs, s.params, scenario_bounds(s)).ok())
                << "seed " << seed << " waypoint " << i;
    }
}

TEST(SearchState, MergesNearbyCandidatesKeepingLowerRank) {
    SearchState st;
    SearchNode a = at({1, 1});
    a.rank = 5;
    SearchNode b = at({1 + 1e-8, 1});
    b.rank = 3;
    EXPECT_TRUE(st.push(a));
    EXPECT_TRUE(st.push(b));
    EXPECT_EQ(st.current_size(), 1u);
    const auto id = st.pop();
    ASSERT_TRUE(id);
    EXPECT_DOUBLE_EQ(st.node(*id).rank, 3.0);
    EXPECT_FALSE(st.pop());
    SearchNode c = at({1, 1});
    c.rank = 1;
    EXPECT_FALSE(st.push(c)); // already closed
}

TEST(SearchState, FifoAmongEqualRanks) {
    SearchState st;
    for (int i = 0; i < 5; ++i) {
        SearchNode n = at({static_cast<double>(i), 0});
        n.rank = 1.0;
        st.push(n);
    }
    for (int i = 0; i < 5; ++i) EXPECT_EQ(st.node(*st.pop()).position.x, i);
}

TEST(ExtractPath, Chains) {
    SearchState st;
    const auto s = st.add_closed(at({0, 0}));
    SearchNode w = at({1, 1});
    w.parent = s;
    const auto w1 = st.add_closed(w);
    SearchNode t = at({2, 0});
    t.parent = w1;
    const auto tid = st.add_closed(t);
    EXPECT_EQ(extract_path(st, tid), (std::vector<Point2>{{0, 0}, {1, 1}, {2, 0}}));

    SearchNode t2 = at({3, 0});
    t2.parent = s;
    EXPECT_EQ(extract_path(st, st.add_closed(t2)), (std::vector<Point2>{{0, 0}, {3, 0}}));
}

TEST(ExtractPath, BrokenChainThrows) {
    SearchState st;
    SearchNode orphan = at({1, 1});
    orphan.parent = 42;
    EXPECT_THROW(extract_path(st, st.add_closed(orphan)), InternalError);

    SearchState cyc;
    SearchNode a = at({0, 0});
    a.parent = 1;
    SearchNode b = at({1, 0});
    b.parent = 0;
    cyc.add_closed(a);
    cyc.add_closed(b);
    EXPECT_THROW(extract_path(cyc, 1), InternalError);
}
