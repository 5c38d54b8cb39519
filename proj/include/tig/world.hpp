#pragma once

// Scenario model, seeded random maps and the scenario JSON format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tig/errors.hpp"
#include "tig/geometry.hpp"
#include "tig/random.hpp"

namespace tig {

struct PlannerParams {
    double r_safe = 2.0;
    double d_vir = 1.0;          // virtual-ellipse margin beyond the inflated boundary
    double alpha_weight = 10.0;  // heuristic penalty per crossed obstacle (meters)
    double theta_max = 0.75 * kPi;
    double sensor_range = 60.0;
    std::uint64_t max_expansions = 100;

    static std::uint64_t default_max_expansions(std::size_t obstacle_count) {
        return 10 * std::max<std::uint64_t>(obstacle_count, 10);
    }
    static PlannerParams defaults_for(std::size_t obstacle_count) {
        PlannerParams p;
        p.max_expansions = default_max_expansions(obstacle_count);
        return p;
    }

    friend bool operator==(const PlannerParams&, const PlannerParams&) = default;
};

struct Scenario {
    double width = 0.0;
    double height = 0.0;
    Point2 start;
    Point2 target;
    std::vector<Ellipse> obstacles;
    std::vector<Ellipse> hidden_obstacles;
    PlannerParams params;

    // Installs `p` and propagates its safety radius to every obstacle.
    void set_params(const PlannerParams& p) {
        params = p;
        for (auto& e : obstacles) e.r_safe = p.r_safe;
        for (auto& e : hidden_obstacles) e.r_safe = p.r_safe;
    }

    // Visible obstacles followed by hidden ones; trace ids index this list.
    std::vector<Ellipse> all_obstacles() const {
        std::vector<Ellipse> all = obstacles;
        all.insert(all.end(), hidden_obstacles.begin(), hidden_obstacles.end());
        return all;
    }

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

// ---------------------------------------------------------------------------
// validation

namespace detail {

inline std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(9);
    os << v;
    return os.str();
}

inline void check_obstacle_shape(const Ellipse& e, std::string_view label, std::size_t i,
                                 std::vector<std::string>& out) {
    std::vector<std::string> problems;
    if (!std::isfinite(e.cx) || !std::isfinite(e.cy) || !std::isfinite(e.theta)) problems.emplace_back("non-finite value");
    if (!(e.a > 0.0)) problems.push_back("a=" + fmt_num(e.a) + " must be > 0");
    if (!(e.b > 0.0)) problems.push_back("b=" + fmt_num(e.b) + " must be > 0");
    if (e.a > 0.0 && e.b > 0.0 && e.a < e.b) problems.push_back("a must be >= b");
    if (!(e.r_safe >= 0.0)) problems.emplace_back("r_safe must be >= 0");
    if (problems.empty()) return;
    std::string msg = std::string(label) + " " + std::to_string(i) + ": ";
    for (std::size_t k = 0; k < problems.size(); ++k) msg += (k ? "; " : "") + problems[k];
    out.push_back(std::move(msg));
}

inline bool shape_ok(const Ellipse& e) {
    return std::isfinite(e.cx) && std::isfinite(e.cy) && std::isfinite(e.theta) && e.a > 0.0 && e.b > 0.0 &&
           e.a >= e.b && e.r_safe >= 0.0;
}

} // namespace detail

// Every violated scenario invariant, one message each. Empty means valid.
inline std::vector<std::string> validate(const Scenario& s) {
    std::vector<std::string> v;
    if (!(s.width > 0.0) || !std::isfinite(s.width)) v.push_back("width must be positive and finite");
    if (!(s.height > 0.0) || !std::isfinite(s.height)) v.push_back("height must be positive and finite");

    auto check_endpoint = [&](Point2 p, std::string_view name) {
        if (!is_finite(p)) {
            v.push_back(std::string(name) + " is not finite");
            return false;
        }
        if (p.x < 0.0 || p.y < 0.0 || p.x > s.width || p.y > s.height) {
            v.push_back(std::string(name) + " (" + detail::fmt_num(p.x) + ", " + detail::fmt_num(p.y) +
                        ") is outside the map bounds");
        }
        return true;
    };
    const bool start_ok = check_endpoint(s.start, "start");
    const bool target_ok = check_endpoint(s.target, "target");

    auto check_list = [&](const std::vector<Ellipse>& list, std::string_view label) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            const Ellipse& e = list[i];
            detail::check_obstacle_shape(e, label, i, v);
            if (!detail::shape_ok(e)) continue;
            if (start_ok && ellipse_value(s.start, e) <= 1.0)
                v.push_back("start is inside " + std::string(label) + " " + std::to_string(i));
            if (target_ok && ellipse_value(s.target, e) <= 1.0)
                v.push_back("target is inside " + std::string(label) + " " + std::to_string(i));
        }
    };
    check_list(s.obstacles, "obstacle");
    check_list(s.hidden_obstacles, "hidden obstacle");

    const PlannerParams& p = s.params;
    if (!(p.r_safe >= 0.0) || !std::isfinite(p.r_safe)) v.push_back("params.r_safe must be >= 0");
    if (!(p.d_vir > 0.0) || !std::isfinite(p.d_vir)) v.push_back("params.d_vir must be > 0");
    if (!(p.alpha_weight > 0.0) || !std::isfinite(p.alpha_weight)) v.push_back("params.alpha_weight must be > 0");
    if (!(p.theta_max > 0.0 && p.theta_max <= kPi)) v.push_back("params.theta_max must be in (0, pi]");
    if (!(p.sensor_range > 0.0) || !std::isfinite(p.sensor_range)) v.push_back("params.sensor_range must be > 0");
    if (p.max_expansions == 0) v.push_back("params.max_expansions must be > 0");
    return v;
}

inline void throw_if_invalid(const Scenario& s) {
    const auto v = validate(s);
    if (v.empty()) return;
    std::string msg = "invalid scenario:";
    for (const auto& m : v) msg += "\n  - " + m;
    throw ValidationError(msg);
}

// ---------------------------------------------------------------------------
// random maps

enum class MapFamily { Short, Large, Sparse, Dense };

inline std::string_view to_string(MapFamily f) {
    switch (f) {
    case MapFamily::Short: return "short";
    case MapFamily::Large: return "large";
    case MapFamily::Sparse: return "sparse";
    case MapFamily::Dense: return "dense";
    }
    return "?";
}

inline MapFamily parse_family(std::string_view s) {
    if (s == "short") return MapFamily::Short;
    if (s == "large") return MapFamily::Large;
    if (s == "sparse") return MapFamily::Sparse;
    if (s == "dense") return MapFamily::Dense;
    throw ValidationError("unknown map family '" + std::string(s) + "' (expected short, large, sparse or dense)");
}

struct MapSpec {
    MapFamily family = MapFamily::Sparse;
    double size = 500.0;
    double coverage = 0.10;
    std::uint64_t seed = 0;

    // Canonical size and coverage of each family.
    static MapSpec standard(MapFamily f, std::uint64_t seed) {
        switch (f) {
        case MapFamily::Short: return {f, 500.0, 0.20, seed};
        case MapFamily::Large: return {f, 1000.0, 0.20, seed};
        case MapFamily::Sparse: return {f, 500.0, 0.10, seed};
        case MapFamily::Dense: return {f, 500.0, 0.60, seed};
        }
        return {f, 500.0, 0.10, seed};
    }
};

struct GeneratorLimits {
    double min_a = 10.0, max_a = 60.0;
    double min_b = 5.0;
    double max_coverage = 0.90;
    std::size_t coverage_samples = 50'000;
    std::uint64_t max_rounds = 100'000;
    // Acceptance band around the requested coverage for the internal estimate.
    double undershoot = 0.005, overshoot = 0.01;
};

inline std::vector<std::string> validate(const MapSpec& spec) {
    std::vector<std::string> v;
    if (!(spec.size > 0.0) || !std::isfinite(spec.size)) v.emplace_back("size must be positive");
    if (!(spec.coverage >= 0.0 && spec.coverage < 1.0)) v.emplace_back("coverage must be in [0, 1)");
    switch (spec.family) {
    case MapFamily::Sparse:
        if (std::abs(spec.coverage - 0.10) > 1e-12) v.emplace_back("sparse maps have coverage 0.10");
        break;
    case MapFamily::Dense:
        if (spec.coverage < 0.60) v.emplace_back("dense maps need coverage >= 0.60");
        break;
    case MapFamily::Short:
        if (spec.size != 500.0) v.emplace_back("short maps are 500 m");
        break;
    case MapFamily::Large:
        if (spec.size != 1000.0) v.emplace_back("large maps are 1000 m");
        break;
    }
    return v;
}

// Monte-Carlo estimate of the fraction of [0,w]x[0,h] covered by the union of
// the raw (uninflated) ellipses.
inline double estimate_coverage(const std::vector<Ellipse>& obstacles, double width, double height,
                                std::size_t samples, std::uint64_t seed) {
    std::vector<EllipseFrame> frames;
    frames.reserve(obstacles.size());
    for (Ellipse e : obstacles) {
        e.r_safe = 0.0;
        frames.emplace_back(e);
    }
    SplitMix64 rng(seed);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        const Point2 p{rng.uniform(0.0, width), rng.uniform(0.0, height)};
        for (const auto& f : frames) {
            const Point2 c = f.center();
            if (std::abs(p.x - c.x) > f.half_extent_x() || std::abs(p.y - c.y) > f.half_extent_y()) continue;
            if (f.value(p) < 1.0) {
                ++hit;
                break;
            }
        }
    }
    return samples ? static_cast<double>(hit) / static_cast<double>(samples) : 0.0;
}

namespace detail {

// Fixed Monte-Carlo sample cloud bucketed on a coarse grid, tracking which
// samples the accepted obstacles already cover.
class CoverageTracker {
public:
    CoverageTracker(double size, std::size_t n, SplitMix64 rng) : size_(size), cell_(size / kBuckets) {
        pts_.reserve(n);
        covered_.assign(n, false);
        buckets_.resize(kBuckets * kBuckets);
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 p{rng.uniform(0.0, size), rng.uniform(0.0, size)};
            pts_.push_back(p);
            buckets_[bucket(p.x) * kBuckets + bucket(p.y)].push_back(static_cast<std::uint32_t>(i));
        }
    }

    double fraction() const { return static_cast<double>(count_) / static_cast<double>(pts_.size()); }

    // Samples newly covered by `e` (raw ellipse).
    std::vector<std::uint32_t> newly_covered(const Ellipse& e) const {
        Ellipse raw = e;
        raw.r_safe = 0.0;
        const EllipseFrame f(raw);
        std::vector<std::uint32_t> out;
        const Point2 c = f.center();
        const std::size_t x0 = bucket(c.x - f.half_extent_x()), x1 = bucket(c.x + f.half_extent_x());
        const std::size_t y0 = bucket(c.y - f.half_extent_y()), y1 = bucket(c.y + f.half_extent_y());
        for (std::size_t bx = x0; bx <= x1; ++bx)
            for (std::size_t by = y0; by <= y1; ++by)
                for (std::uint32_t i : buckets_[bx * kBuckets + by])
                    if (!covered_[i] && f.value(pts_[i]) < 1.0) out.push_back(i);
        return out;
    }

    void commit(const std::vector<std::uint32_t>& ids) {
        for (auto i : ids) covered_[i] = true;
        count_ += ids.size();
    }

    std::size_t samples() const { return pts_.size(); }

private:
    static constexpr std::size_t kBuckets = 64;
    std::size_t bucket(double v) const {
        const double k = std::floor(v / cell_);
        return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(kBuckets - 1)));
    }

    double size_;
    double cell_;
    std::vector<Point2> pts_;
    std::vector<bool> covered_;
    std::vector<std::vector<std::uint32_t>> buckets_;
    std::size_t count_ = 0;
};

} // namespace detail

// Deterministic random map for `spec`. Start sits in the lower-left corner
// region, target in the upper-right; every obstacle keeps both outside its
// virtual ellipse.
inline Scenario generate_map(const MapSpec& spec, const PlannerParams& base = {},
                             const GeneratorLimits& lim = {}) {
    if (spec.coverage > lim.max_coverage)
        throw GenerationFailed("GenerationFailed: coverage " + detail::fmt_num(spec.coverage) +
                               " is unreachable (maximum " + detail::fmt_num(lim.max_coverage) + ")");
    if (auto v = validate(spec); !v.empty()) throw ValidationError("invalid map spec: " + v.front());

    SplitMix64 rng(spec.seed);
    SplitMix64 sample_rng = rng.split();
    const double s = spec.size;

    Scenario sc;
    sc.width = s;
    sc.height = s;
    sc.start = {rng.uniform(0.02 * s, 0.12 * s), rng.uniform(0.02 * s, 0.12 * s)};
    sc.target = {rng.uniform(0.88 * s, 0.98 * s), rng.uniform(0.88 * s, 0.98 * s)};

    detail::CoverageTracker tracker(s, lim.coverage_samples, sample_rng);
    const double lo = spec.coverage - lim.undershoot;
    const double hi = spec.coverage + lim.overshoot;
    const double n = static_cast<double>(tracker.samples());

    std::uint64_t rounds = 0;
    while (tracker.fraction() < lo) {
        if (++rounds > lim.max_rounds)
            throw GenerationFailed("GenerationFailed: coverage " + detail::fmt_num(spec.coverage) + " not reached after " +
                                   std::to_string(lim.max_rounds) + " rejection rounds");
        const double a = rng.uniform(lim.min_a, lim.max_a);
        const double b = rng.uniform(lim.min_b, a);
        const double theta = rng.uniform(0.0, kPi);
        const double cx = rng.uniform(0.0, s);
        const double cy = rng.uniform(0.0, s);
        const Ellipse e(cx, cy, a, b, theta, base.r_safe);
        const Ellipse keep_out = e.grown(base.d_vir);
        if (ellipse_value(sc.start, keep_out) <= 1.0 || ellipse_value(sc.target, keep_out) <= 1.0) continue;
        const auto added = tracker.newly_covered(e);
        if ((static_cast<double>(added.size()) + tracker.fraction() * n) / n > hi) continue;
        tracker.commit(added);
        sc.obstacles.push_back(e);
    }

    PlannerParams p = base;
    p.max_expansions = PlannerParams::default_max_expansions(sc.obstacles.size());
    sc.set_params(p);
    return sc;
}

// ---------------------------------------------------------------------------
// JSON persistence

namespace detail {

using nlohmann::json;

inline const json& require(const json& j, const char* field, std::string_view where) {
    if (!j.is_object() || !j.contains(field))
        throw ParseError("missing field \"" + std::string(field) + "\" in " + std::string(where));
    return j.at(field);
}

inline double require_number(const json& j, const char* field, std::string_view where) {
    const json& v = require(j, field, where);
    if (!v.is_number()) throw ParseError("field \"" + std::string(field) + "\" in " + std::string(where) + " must be a number");
    return v.get<double>();
}

inline Point2 parse_point(const json& j, const char* field) {
    const json& v = require(j, field, "scenario");
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ParseError("field \"" + std::string(field) + "\" must be [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
}

inline std::vector<Ellipse> parse_obstacles(const json& j, const char* field, double r_safe, bool optional) {
    std::vector<Ellipse> out;
    if (optional && !j.contains(field)) return out;
    const json& arr = require(j, field, "scenario");
    if (!arr.is_array()) throw ParseError("field \"" + std::string(field) + "\" must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = std::string(field) + "[" + std::to_string(i) + "]";
        const json& o = arr[i];
        out.emplace_back(require_number(o, "cx", where), require_number(o, "cy", where), require_number(o, "a", where),
                         require_number(o, "b", where), require_number(o, "theta", where), r_safe);
    }
    return out;
}

inline json obstacles_to_json(const std::vector<Ellipse>& list) {
    json arr = json::array();
    for (const auto& e : list) arr.push_back({{"cx", e.cx}, {"cy", e.cy}, {"a", e.a}, {"b", e.b}, {"theta", e.theta}});
    return arr;
}

} // namespace detail

inline nlohmann::json scenario_to_json(const Scenario& s) {
    using nlohmann::json;
    const PlannerParams& p = s.params;
    json j;
    j["width"] = s.width;
    j["height"] = s.height;
    j["start"] = {s.start.x, s.start.y};
    j["target"] = {s.target.x, s.target.y};
    j["obstacles"] = detail::obstacles_to_json(s.obstacles);
    j["hidden_obstacles"] = detail::obstacles_to_json(s.hidden_obstacles);
    j["params"] = {{"r_safe", p.r_safe},           {"d_vir", p.d_vir},
                   {"alpha_weight", p.alpha_weight}, {"theta_max", p.theta_max},
                   {"sensor_range", p.sensor_range}, {"max_expansions", p.max_expansions}};
    return j;
}

// Builds a scenario from JSON without validating its invariants.
inline Scenario scenario_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("scenario must be a JSON object");
    Scenario s;
    s.width = detail::require_number(j, "width", "scenario");
    s.height = detail::require_number(j, "height", "scenario");
    s.start = detail::parse_point(j, "start");
    s.target = detail::parse_point(j, "target");

    const auto& pj = detail::require(j, "params", "scenario");
    PlannerParams p;
    p.r_safe = detail::require_number(pj, "r_safe", "params");
    p.d_vir = detail::require_number(pj, "d_vir", "params");
    p.alpha_weight = detail::require_number(pj, "alpha_weight", "params");
    p.theta_max = detail::require_number(pj, "theta_max", "params");
    p.sensor_range = detail::require_number(pj, "sensor_range", "params");
    const auto& me = detail::require(pj, "max_expansions", "params");
    if (!me.is_number_integer() || me.get<std::int64_t>() < 0)
        throw ParseError("field \"max_expansions\" in params must be a non-negative integer");
    p.max_expansions = me.get<std::uint64_t>();

    s.obstacles = detail::parse_obstacles(j, "obstacles", p.r_safe, false);
    s.hidden_obstacles = detail::parse_obstacles(j, "hidden_obstacles", p.r_safe, true);
    s.params = p;
    return s;
}

inline std::string scenario_to_string(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

inline Scenario parse_scenario(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed scenario JSON: ") + e.what());
    }
    Scenario s = scenario_from_json(j);
    throw_if_invalid(s);
    return s;
}

inline void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << scenario_to_string(s);
    if (!out) throw Error("failed writing '" + path + "'");
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

} // namespace tig
