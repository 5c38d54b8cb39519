#pragma once

// 8-connected grid A* over the inflated obstacles, used as a reference planner.

#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "tig/errors.hpp"
#include "tig/geometry.hpp"
#include "tig/stig.hpp"
#include "tig/world.hpp"

namespace tig {

struct GridSpec {
    double resolution = 1.0; // meters per cell
};

struct Cell {
    int x = 0;
    int y = 0;
    friend bool operator==(Cell, Cell) = default;
};

class OccupancyGrid {
public:
    OccupancyGrid(int nx, int ny, double resolution)
        : nx_(nx), ny_(ny), res_(resolution), blocked_(static_cast<std::size_t>(nx) * ny, 0) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double resolution() const { return res_; }
    bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < nx_ && c.y < ny_; }
    std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * nx_ + c.x; }
    Cell cell_at(std::size_t idx) const { return {static_cast<int>(idx % nx_), static_cast<int>(idx / nx_)}; }
    bool blocked(Cell c) const { return blocked_[index(c)] != 0; }
    void set_blocked(Cell c, bool b = true) { blocked_[index(c)] = b ? 1 : 0; }

    Point2 center(Cell c) const { return {(c.x + 0.5) * res_, (c.y + 0.5) * res_}; }
    Cell cell_of(Point2 p) const {
        return {std::clamp(static_cast<int>(std::floor(p.x / res_)), 0, nx_ - 1),
                std::clamp(static_cast<int>(std::floor(p.y / res_)), 0, ny_ - 1)};
    }

    std::size_t blocked_count() const {
        std::size_t n = 0;
        for (auto b : blocked_) n += b;
        return n;
    }

private:
    int nx_;
    int ny_;
    double res_;
    std::vector<std::uint8_t> blocked_;
};

// A cell is blocked iff its center lies strictly inside an inflated obstacle.
inline OccupancyGrid rasterize(const std::vector<Ellipse>& obstacles, double width, double height,
                               const GridSpec& g = {}) {
    const int nx = std::max(1, static_cast<int>(std::ceil(width / g.resolution - 1e-9)));
    const int ny = std::max(1, static_cast<int>(std::ceil(height / g.resolution - 1e-9)));
    OccupancyGrid grid(nx, ny, g.resolution);
    for (const auto& e : obstacles) {
        const EllipseFrame f(e);
        const Point2 c = f.center();
        const int x0 = std::max(0, static_cast<int>(std::floor((c.x - f.half_extent_x()) / g.resolution)) - 1);
        const int x1 = std::min(nx - 1, static_cast<int>(std::ceil((c.x + f.half_extent_x()) / g.resolution)) + 1);
        const int y0 = std::max(0, static_cast<int>(std::floor((c.y - f.half_extent_y()) / g.resolution)) - 1);
        const int y1 = std::min(ny - 1, static_cast<int>(std::ceil((c.y + f.half_extent_y()) / g.resolution)) + 1);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                if (f.value(grid.center({x, y})) < 1.0) grid.set_blocked({x, y});
    }
    return grid;
}

inline OccupancyGrid rasterize(const Scenario& s, const GridSpec& g = {}) {
    return rasterize(s.obstacles, s.width, s.height, g);
}

// Drops interior cells that continue the previous direction.
inline std::vector<Point2> compress_collinear(const std::vector<Point2>& pts) {
    if (pts.size() < 3) return pts;
    std::vector<Point2> out{pts.front()};
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const Point2 d0 = pts[i] - out.back();
        const Point2 d1 = pts[i + 1] - pts[i];
        if (std::abs(cross(d0, d1)) > 1e-12 * norm(d0) * norm(d1) || dot(d0, d1) < 0.0) out.push_back(pts[i]);
    }
    out.push_back(pts.back());
    return out;
}

// A* on the 8-connected grid with the octile heuristic. Diagonal moves need
// both orthogonal neighbours free. Waypoints are cell centers, collinear runs
// merged.
inline PlannedPath grid_astar(const OccupancyGrid& grid, Point2 start, Point2 target) {
    const Cell sc = grid.cell_of(start);
    const Cell tc = grid.cell_of(target);
    if (grid.blocked(sc)) throw StartOrTargetBlocked("start cell is blocked");
    if (grid.blocked(tc)) throw StartOrTargetBlocked("target cell is blocked");

    const double res = grid.resolution();
    const double diag = std::sqrt(2.0) * res;
    auto octile = [&](Cell c) {
        const double dx = std::abs(c.x - tc.x), dy = std::abs(c.y - tc.y);
        return res * (std::max(dx, dy) - std::min(dx, dy)) + diag * std::min(dx, dy);
    };

    const std::size_t n = static_cast<std::size_t>(grid.nx()) * grid.ny();
    constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
    std::vector<double> g(n, std::numeric_limits<double>::infinity());
    std::vector<std::uint32_t> parent(n, kNone);
    std::vector<std::uint8_t> closed(n, 0);

    struct Entry {
        double f;
        double h;
        std::uint32_t idx;
        bool operator>(const Entry& o) const { return f != o.f ? f > o.f : (h != o.h ? h > o.h : idx > o.idx); }
    };
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    const auto s_idx = static_cast<std::uint32_t>(grid.index(sc));
    const auto t_idx = static_cast<std::uint32_t>(grid.index(tc));
    g[s_idx] = 0.0;
    open.push({octile(sc), octile(sc), s_idx});

    PlannedPath result;
    static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

    while (!open.empty()) {
        const Entry e = open.top();
        open.pop();
        if (closed[e.idx]) continue;
        closed[e.idx] = 1;
        ++result.expansions;
        if (e.idx == t_idx) break;
        const Cell c = grid.cell_at(e.idx);
        for (int k = 0; k < 8; ++k) {
            const Cell nb{c.x + kDx[k], c.y + kDy[k]};
            if (!grid.in_bounds(nb) || grid.blocked(nb)) continue;
            const bool diagonal = k >= 4;
            if (diagonal && (grid.blocked({c.x + kDx[k], c.y}) || grid.blocked({c.x, c.y + kDy[k]}))) continue;
            const auto ni = static_cast<std::uint32_t>(grid.index(nb));
            if (closed[ni]) continue;
            const double ng = g[e.idx] + (diagonal ? diag : res);
            if (ng < g[ni]) {
                g[ni] = ng;
                parent[ni] = e.idx;
                const double h = octile(nb);
                open.push({ng + h, h, ni});
            }
        }
    }

    if (!closed[t_idx]) {
        result.status = PlanStatus::NoPath;
        return result;
    }
    std::vector<Point2> cells;
    for (std::uint32_t i = t_idx; i != kNone; i = parent[i]) cells.push_back(grid.center(grid.cell_at(i)));
    std::reverse(cells.begin(), cells.end());
    result.waypoints = compress_collinear(cells);
    result.origins.assign(result.waypoints.size(), std::nullopt);
    result.status = PlanStatus::Success;
    return result;
}

inline PlannedPath grid_astar(const Scenario& s, const GridSpec& g = {}) {
    return grid_astar(rasterize(s, g), s.start, s.target);
}

} // namespace tig
