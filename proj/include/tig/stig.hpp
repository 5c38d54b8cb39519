#pragma once

// Static tangent-intersection planner.
//
// The search keeps a current set of candidate waypoints ordered by the
// heuristic H(w) = D(N, w) + alpha * P + D(w, T). Expanding a node N walks a
// FIFO of temporary targets starting at T: a temporary target with a clear,
// not too sharp line of sight from N becomes a candidate; a blocked one is
// replaced by the two virtual-ellipse waypoints of the first obstacle in the
// way. The loop ends when T itself is popped.

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tig/errors.hpp"
#include "tig/geometry.hpp"
#include "tig/world.hpp"

namespace tig {

inline constexpr double kGoalTol = 1e-6;
inline constexpr double kQuantum = 1e-6;
// The outer loop may pop this many times max_expansions nodes.
inline constexpr std::uint64_t kOuterExpansionFactor = 10;

struct PointKey {
    std::int64_t x = 0;
    std::int64_t y = 0;
    friend bool operator==(PointKey, PointKey) = default;
};

inline PointKey quantize(Point2 p) {
    return {std::llround(p.x / kQuantum), std::llround(p.y / kQuantum)};
}

struct PointKeyHash {
    std::size_t operator()(PointKey k) const noexcept {
        std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ULL;
        h ^= static_cast<std::uint64_t>(k.y) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

// Identity of a virtual waypoint: the obstacle and the tangent point it came from.
struct TreatedKey {
    std::size_t obstacle_id = 0;
    PointKey tangent;
    friend bool operator==(const TreatedKey&, const TreatedKey&) = default;
};

struct TreatedKeyHash {
    std::size_t operator()(const TreatedKey& k) const noexcept {
        return PointKeyHash{}(k.tangent) ^ (k.obstacle_id * 0xC2B2AE3D27D4EB4FULL);
    }
};

// How a waypoint was produced, kept for replay and tests.
struct WaypointOrigin {
    std::size_t obstacle_id = 0;
    Point2 from;        // node the tangent lines were drawn from
    Point2 tangent;     // tangent point on the inflated ellipse
    bool range_clamped = false;
};

struct SearchNode {
    Point2 position;
    std::optional<std::size_t> parent;
    double h_value = 0.0;
    std::uint64_t insertion_order = 0;
    std::optional<WaypointOrigin> origin;
    bool on_range_perimeter = false;
    double g_cost = 0.0; // path length from the start
    double rank = 0.0;   // current-set ordering key (see SearchOrder)
};

// Ordering of the current set. Greedy ranks a candidate by its heuristic alone;
// Accumulated adds the path length already flown to reach its parent.
enum class SearchOrder { Accumulated, Greedy };

enum class PlanStatus { Success, NoPath, ExpansionLimit };

inline std::string_view to_string(PlanStatus s) {
    switch (s) {
    case PlanStatus::Success: return "Success";
    case PlanStatus::NoPath: return "NoPath";
    case PlanStatus::ExpansionLimit: return "ExpansionLimit";
    }
    return "?";
}

struct PlannedPath {
    std::vector<Point2> waypoints;
    std::vector<std::optional<WaypointOrigin>> origins; // parallel to waypoints
    std::uint64_t expansions = 0;
    PlanStatus status = PlanStatus::NoPath;

    bool ok() const { return status == PlanStatus::Success; }
};

// Current, closed and treated sets of one search.
class SearchState {
public:
    const std::vector<SearchNode>& nodes() const { return nodes_; }
    const SearchNode& node(std::size_t id) const { return nodes_.at(id); }
    bool is_closed(std::size_t id) const { return closed_.at(id); }
    bool current_empty() { drop_stale(); return heap_.empty(); }
    std::size_t current_size() const { return open_.size(); }

    // Inserts a candidate, merging with an open node at the same position
    // (keeping the smaller rank). Returns false if it was dropped.
    bool push(SearchNode n) {
        const PointKey k = quantize(n.position);
        if (closed_keys_.contains(k)) return false;
        if (auto it = open_.find(k); it != open_.end()) {
            SearchNode& existing = nodes_[it->second];
            if (n.rank >= existing.rank) return false;
            n.insertion_order = existing.insertion_order;
            existing = n;
            heap_.push({existing.rank, next_order_++, it->second});
            return true;
        }
        n.insertion_order = next_order_++;
        const std::size_t id = nodes_.size();
        nodes_.push_back(n);
        closed_.push_back(false);
        open_.emplace(k, id);
        heap_.push({n.rank, n.insertion_order, id});
        return true;
    }

    // Removes the open node with minimum rank (FIFO among ties) and closes it.
    std::optional<std::size_t> pop() {
        drop_stale();
        if (heap_.empty()) return std::nullopt;
        const std::size_t id = heap_.top().id;
        heap_.pop();
        open_.erase(quantize(nodes_[id].position));
        closed_[id] = true;
        closed_keys_.insert(quantize(nodes_[id].position));
        return id;
    }

    bool treated(const TreatedKey& k) const { return treated_.contains(k); }
    void mark_treated(const TreatedKey& k) { treated_.insert(k); }
    std::size_t treated_size() const { return treated_.size(); }

    // Appends a node without queueing it; used for hand-built chains.
    std::size_t add_closed(SearchNode n) {
        nodes_.push_back(n);
        closed_.push_back(true);
        closed_keys_.insert(quantize(n.position));
        return nodes_.size() - 1;
    }

private:
    struct Entry {
        double h;
        std::uint64_t order;
        std::size_t id;
        bool operator>(const Entry& o) const { return h != o.h ? h > o.h : order > o.order; }
    };

    void drop_stale() {
        while (!heap_.empty()) {
            const Entry& e = heap_.top();
            const SearchNode& n = nodes_[e.id];
            if (!closed_[e.id] && n.rank == e.h) return;
            heap_.pop();
        }
    }

    std::vector<SearchNode> nodes_;
    std::vector<bool> closed_;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
    std::unordered_map<PointKey, std::size_t, PointKeyHash> open_;
    std::unordered_set<PointKey, PointKeyHash> closed_keys_;
    std::unordered_set<TreatedKey, TreatedKeyHash> treated_;
    std::uint64_t next_order_ = 0;
};

// Axis-aligned region candidate waypoints must stay in.
struct Bounds {
    double xmin = -std::numeric_limits<double>::infinity();
    double ymin = -std::numeric_limits<double>::infinity();
    double xmax = std::numeric_limits<double>::infinity();
    double ymax = std::numeric_limits<double>::infinity();
    bool contains(Point2 p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
};

inline Bounds scenario_bounds(const Scenario& s) { return {0.0, 0.0, s.width, s.height}; }

// Circle that candidates are pulled back onto (sensor-limited planning).
struct RangeLimit {
    Point2 center;
    double radius = 0.0;
};

// Absolute heading change between direction `in` and direction `out`, in [0, pi].
inline double heading_change(Point2 in, Point2 out) { return std::atan2(std::abs(cross(in, out)), dot(in, out)); }

// Heuristic: D(n, w) + alpha * P + D(w, t), P = obstacles crossed by n->w.
inline double heuristic(Point2 n, Point2 w, Point2 t, const ObstacleSet& obstacles, double alpha_weight) {
    const double p = static_cast<double>(obstacles.count_penetrated(n, w));
    return distance(n, w) + alpha_weight * p + distance(w, t);
}

inline double heuristic(Point2 n, Point2 w, Point2 t, std::span<const Ellipse> obstacles, double alpha_weight) {
    return heuristic(n, w, t, ObstacleSet({obstacles.begin(), obstacles.end()}), alpha_weight);
}

struct Candidate {
    Point2 position;
    std::optional<WaypointOrigin> origin;
    bool on_range_perimeter = false;
};

struct ExpansionContext {
    const ObstacleSet& obstacles;
    const PlannerParams& params;
    Bounds bounds;
    std::optional<RangeLimit> range;
    SearchState* state = nullptr; // treated set; may be null
};

// Inner exploration loop from node position `n`. Throws ExpansionOverflow
// when more than params.max_expansions temporary targets are processed.
inline std::vector<Candidate> collect_candidates(Point2 n, Point2 t, std::optional<Point2> incoming_dir,
                                                 const ExpansionContext& ctx) {
    struct Temp {
        Point2 p;
        std::optional<WaypointOrigin> origin;
    };
    std::vector<Candidate> out;
    std::deque<Temp> to_explore{{t, std::nullopt}};
    std::unordered_set<PointKey, PointKeyHash> explored;
    std::unordered_set<std::size_t> expanded_obstacles;
    std::uint64_t processed = 0;

    while (!to_explore.empty()) {
        Temp temp = std::move(to_explore.front());
        to_explore.pop_front();
        if (!explored.insert(quantize(temp.p)).second) continue;
        if (++processed > ctx.params.max_expansions)
            throw ExpansionOverflow("collect_waypoints: more than " + std::to_string(ctx.params.max_expansions) +
                                    " temporary targets");
        const Point2 dir = temp.p - n;
        if (norm(dir) <= kGoalTol) continue;

        const auto hit = ctx.obstacles.first_collision(n, temp.p);
        if (!hit) {
            if (incoming_dir && heading_change(*incoming_dir, dir) > ctx.params.theta_max) continue;
            std::optional<TreatedKey> key;
            if (temp.origin) key = TreatedKey{temp.origin->obstacle_id, quantize(temp.origin->tangent)};
            if (key && ctx.state && ctx.state->treated(*key)) continue;
            Candidate c{temp.p, temp.origin, false};
            if (ctx.range && distance(ctx.range->center, temp.p) > ctx.range->radius) {
                c.position = clamp_to_range(ctx.range->center, ctx.range->radius, n, temp.p);
                c.on_range_perimeter = true;
                if (c.origin) c.origin->range_clamped = true;
            }
            if (key && ctx.state) ctx.state->mark_treated(*key);
            out.push_back(c);
            continue;
        }

        const std::size_t k = hit->obstacle_id;
        if (!expanded_obstacles.insert(k).second) continue;
        const Ellipse& e = ctx.obstacles[k];
        std::pair<Point2, Point2> tangents;
        try {
            tangents = tangent_points(n, e);
        } catch (const PointInsideObstacle&) {
            continue; // n sits on this boundary; no tangent lines exist
        }
        for (Point2 tp : {tangents.first, tangents.second}) {
            Point2 w;
            try {
                w = virtual_waypoint(n, e, tp, ctx.params.d_vir);
            } catch (const NoIntersection&) {
                continue;
            }
            if (!is_finite(w) || !ctx.bounds.contains(w)) continue;
            if (explored.contains(quantize(w))) continue;
            to_explore.push_back({w, WaypointOrigin{k, n, tp, false}});
        }
    }
    return out;
}

// Candidate waypoint positions reachable from `n` toward `t`.
inline std::vector<Point2> collect_waypoints(const SearchNode& n, Point2 t, const ObstacleSet& obstacles,
                                             const PlannerParams& params, std::optional<Point2> incoming_dir,
                                             SearchState* state = nullptr, Bounds bounds = {}) {
    const ExpansionContext ctx{obstacles, params, bounds, std::nullopt, state};
    std::vector<Point2> out;
    for (const auto& c : collect_candidates(n.position, t, incoming_dir, ctx)) out.push_back(c.position);
    return out;
}

// Walks parent links from `target_id` and returns the start-first node ids.
inline std::vector<std::size_t> extract_chain(const SearchState& state, std::size_t target_id) {
    const auto& nodes = state.nodes();
    std::vector<std::size_t> chain;
    std::optional<std::size_t> cur = target_id;
    while (cur) {
        if (*cur >= nodes.size()) throw InternalError("extract_path: parent id out of range");
        if (!state.is_closed(*cur)) throw InternalError("extract_path: chain node is not closed");
        if (chain.size() > nodes.size()) throw InternalError("extract_path: parent chain has a cycle");
        chain.push_back(*cur);
        cur = nodes[*cur].parent;
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

inline std::vector<Point2> extract_path(const SearchState& state, std::size_t target_id) {
    std::vector<Point2> out;
    for (std::size_t id : extract_chain(state, target_id)) out.push_back(state.node(id).position);
    return out;
}

struct SearchRequest {
    Point2 start;
    Point2 target;
    const ObstacleSet& obstacles;
    PlannerParams params;
    Bounds bounds;
    std::optional<RangeLimit> range; // when set, perimeter nodes also end the search
    std::optional<Point2> incoming_dir; // heading on arrival at start
    SearchOrder order = SearchOrder::Accumulated;
};

// Best-first search core shared by the static and dynamic planners.
inline PlannedPath tangent_search(const SearchRequest& req) {
    SearchState state;
    PlannedPath result;
    SearchNode root{req.start, std::nullopt, distance(req.start, req.target), 0, std::nullopt, false};
    root.rank = root.h_value;
    state.push(root);
    const ExpansionContext ctx{req.obstacles, req.params, req.bounds, req.range, &state};
    bool overflowed = false;

    while (auto id = state.pop()) {
        const SearchNode node = state.node(*id);
        const bool at_target = distance(node.position, req.target) <= kGoalTol;
        if (at_target || node.on_range_perimeter) {
            for (std::size_t cid : extract_chain(state, *id)) {
                result.waypoints.push_back(state.node(cid).position);
                result.origins.push_back(state.node(cid).origin);
            }
            if (at_target) result.waypoints.back() = req.target;
            result.status = PlanStatus::Success;
            return result;
        }
        if (++result.expansions > req.params.max_expansions * kOuterExpansionFactor) {
            result.status = PlanStatus::ExpansionLimit;
            return result;
        }

        std::optional<Point2> incoming = req.incoming_dir;
        if (node.parent) incoming = node.position - state.node(*node.parent).position;

        std::vector<Candidate> cands;
        try {
            cands = collect_candidates(node.position, req.target, incoming, ctx);
        } catch (const ExpansionOverflow&) {
            overflowed = true;
            continue;
        }
        for (const auto& c : cands) {
            const double h = heuristic(node.position, c.position, req.target, req.obstacles, req.params.alpha_weight);
            SearchNode child{c.position, *id, h, 0, c.origin, c.on_range_perimeter};
            child.g_cost = node.g_cost + distance(node.position, c.position);
            child.rank = req.order == SearchOrder::Accumulated ? node.g_cost + h : h;
            state.push(child);
        }
    }
    result.status = overflowed ? PlanStatus::ExpansionLimit : PlanStatus::NoPath;
    return result;
}

inline void require_endpoints_free(Point2 start, Point2 target, const ObstacleSet& obstacles) {
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        if (ellipse_value(start, obstacles[i]) <= 1.0)
            throw StartOrTargetBlocked("start lies inside obstacle " + std::to_string(i));
        if (ellipse_value(target, obstacles[i]) <= 1.0)
            throw StartOrTargetBlocked("target lies inside obstacle " + std::to_string(i));
    }
}

// Plans from `start` to `target` around `obstacles` with full map knowledge.
inline PlannedPath plan_static(Point2 start, Point2 target, const ObstacleSet& obstacles, const PlannerParams& params,
                               Bounds bounds = {}, SearchOrder order = SearchOrder::Accumulated) {
    require_endpoints_free(start, target, obstacles);
    return tangent_search({start, target, obstacles, params, bounds, std::nullopt, std::nullopt, order});
}

// Plans over the scenario's visible obstacles; hidden ones are ignored.
inline PlannedPath plan_static(const Scenario& s, SearchOrder order = SearchOrder::Accumulated) {
    const ObstacleSet obstacles(s.obstacles);
    return plan_static(s.start, s.target, obstacles, s.params, scenario_bounds(s), order);
}

} // namespace tig
