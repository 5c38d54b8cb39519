#pragma once

// Command-line front end: gen, plan, simulate, bench and render.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 planner failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tig/baseline.hpp"
#include "tig/dtig.hpp"
#include "tig/metrics.hpp"
#include "tig/smoothing.hpp"
#include "tig/stig.hpp"
#include "tig/svg.hpp"
#include "tig/world.hpp"

namespace tig {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitPlannerFailure = 2;

// Overrides for PlannerParams; NaN (or 0 expansions) means "keep the file's value".
struct ParamOverrides {
    static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
    double range = kUnset, alpha = kUnset, dvir = kUnset, rsafe = kUnset, theta_max = kUnset;
    std::uint64_t max_expansions = 0;

    void attach(CLI::App* app) {
        app->add_option("--range", range, "sensor range R (m)");
        app->add_option("--alpha", alpha, "heuristic weight per crossed obstacle (m)");
        app->add_option("--dvir", dvir, "virtual ellipse margin (m)");
        app->add_option("--rsafe", rsafe, "safety inflation (m)");
        app->add_option("--theta-max", theta_max, "maximum heading change per waypoint (rad)");
        app->add_option("--max-expansions", max_expansions, "obstacle expansion limit");
    }
    PlannerParams apply(PlannerParams p) const {
        if (!std::isnan(range)) p.sensor_range = range;
        if (!std::isnan(alpha)) p.alpha_weight = alpha;
        if (!std::isnan(dvir)) p.d_vir = dvir;
        if (!std::isnan(rsafe)) p.r_safe = rsafe;
        if (!std::isnan(theta_max)) p.theta_max = theta_max;
        if (max_expansions != 0) p.max_expansions = max_expansions;
        return p;
    }
};

struct RunConfig {
    std::string scenario_path;
    std::string algorithm = "stig";
    std::string order = "accumulated";
    std::string mode = "unknown";
    std::string strategy = "sensed";
    std::string family = "sparse";
    std::string families = "short,large,sparse,dense";
    double size = 0.0;
    double coverage = 0.0;
    double resolution = 1.0;
    double hidden_fraction = 0.3;
    std::uint64_t seed = 1;
    std::uint64_t label_seed = 0; // seed column for plan/simulate rows
    std::size_t count = 50;
    bool dynamic = false;
    bool show_virtual = false;
    std::string out_path, svg_path, csv_path, path_in, trace_in;
    std::string case_id, csv_family = "custom";
    ParamOverrides overrides;
};

namespace detail {

inline std::string csv_status(PlanStatus s) {
    return s == PlanStatus::Success ? "Success" : "Failure(" + std::string(to_string(s)) + ")";
}
inline std::string csv_status(RunStatus s) {
    return s == RunStatus::Reached ? "Success" : "Failure(" + std::string(to_string(s)) + ")";
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw Error("failed writing '" + path + "'");
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

// Appends rows, writing the header first when the file is new or empty.
inline void append_csv(const std::string& path, const std::vector<CsvRow>& rows) {
    std::error_code ec;
    const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
    std::ofstream f(path, std::ios::binary | std::ios::app);
    if (!f) throw Error("cannot open '" + path + "' for appending");
    if (fresh) f << kCsvHeader << "\n";
    for (const auto& r : rows) f << to_csv(r) << "\n";
    if (!f) throw Error("failed writing '" + path + "'");
}

inline nlohmann::json points_json(const std::vector<Point2>& pts) {
    nlohmann::json a = nlohmann::json::array();
    for (Point2 p : pts) a.push_back({p.x, p.y});
    return a;
}

inline std::vector<Point2> points_from_json(const nlohmann::json& a) {
    std::vector<Point2> pts;
    for (const auto& p : a) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return pts;
}

inline Scenario load_with_overrides(const RunConfig& c) {
    Scenario s = load_scenario(c.scenario_path);
    s.set_params(c.overrides.apply(s.params));
    throw_if_invalid(s);
    return s;
}

inline std::string case_name(const RunConfig& c) {
    if (!c.case_id.empty()) return c.case_id;
    return std::filesystem::path(c.scenario_path).stem().string();
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct StaticRun {
    PlannedPath path;
    std::string status;
    double time = 0.0;
};

inline StaticRun run_static(const Scenario& s, const std::string& algo, SearchOrder order, double resolution) {
    StaticRun r;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (algo == "stig") r.path = plan_static(s, order);
        else r.path = grid_astar(s, GridSpec{resolution});
        r.time = seconds_since(t0);
        r.status = csv_status(r.path.status);
    } catch (const StartOrTargetBlocked&) {
        r.time = seconds_since(t0);
        r.path.status = PlanStatus::NoPath;
        r.status = "Failure(StartOrTargetBlocked)";
    }
    return r;
}

inline ExecutionTrace run_dynamic(const Scenario& s, const std::string& mode, UnknownStrategy strategy) {
    if (mode == "partial") return plan_dynamic_partial(s);
    if (mode == "unknown") {
        Scenario u = s;
        u.hidden_obstacles = s.all_obstacles();
        u.obstacles.clear();
        return plan_dynamic_unknown(u, strategy);
    }
    // static: everything known up front, so the run just flies the offline plan
    Scenario k = s;
    k.obstacles = s.all_obstacles();
    k.hidden_obstacles.clear();
    return plan_dynamic_partial(k);
}

inline SearchOrder parse_order(const std::string& s) {
    return s == "greedy" ? SearchOrder::Greedy : SearchOrder::Accumulated;
}
inline UnknownStrategy parse_strategy(const std::string& s) {
    return s == "local" ? UnknownStrategy::RangeLimitedSearch : UnknownStrategy::SensedMapPlan;
}

inline std::vector<MapFamily> parse_families(const std::string& list) {
    std::vector<MapFamily> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse_family(item));
    return out;
}

// Deterministic subset of obstacles moved to the hidden list.
inline Scenario hide_some(Scenario s, double fraction, std::uint64_t seed) {
    SplitMix64 rng(derive_seed(seed, 0x68));
    std::vector<Ellipse> keep;
    for (const auto& e : s.obstacles) (rng.uniform() < fraction ? s.hidden_obstacles : keep).push_back(e);
    s.obstacles = std::move(keep);
    return s;
}

} // namespace detail

inline int cmd_gen(const RunConfig& c, std::ostream& out) {
    MapSpec spec = MapSpec::standard(parse_family(c.family), c.seed);
    if (c.size > 0.0) spec.size = c.size;
    if (c.coverage > 0.0) spec.coverage = c.coverage;
    Scenario s = generate_map(spec);
    s.set_params(c.overrides.apply(s.params));
    throw_if_invalid(s);
    const double cov = estimate_coverage(s.obstacles, s.width, s.height, 200'000, derive_seed(c.seed, 0x63));
    if (!c.out_path.empty()) save_scenario(s, c.out_path);
    else out << scenario_to_string(s);
    out << "coverage " << format_fixed6(cov) << "\n";
    out << "obstacles " << s.obstacles.size() << "\n";
    return kExitOk;
}

inline int cmd_plan(const RunConfig& c, std::ostream& out) {
    const Scenario s = detail::load_with_overrides(c);
    const auto r = detail::run_static(s, c.algorithm, detail::parse_order(c.order), c.resolution);
    const bool ok = r.path.ok();
    const MetricsRecord m = evaluate(r.path.waypoints, ok, r.status, r.time);

    SmoothedPath sm;
    if (ok) sm = smooth_path(r.path, s.obstacles, s.params);

    if (!c.out_path.empty()) {
        nlohmann::json j = {{"algo", c.algorithm},
                            {"status", r.status},
                            {"waypoints", detail::points_json(r.path.waypoints)},
                            {"smoothed", detail::points_json(sm.polyline)},
                            {"expansions", r.path.expansions},
                            {"plan_time_s", r.time}};
        if (m.path_length) j["path_length_m"] = *m.path_length;
        if (m.total_turning) j["total_turning_rad"] = *m.total_turning;
        detail::write_file(c.out_path, j.dump(2) + "\n");
    }
    if (!c.svg_path.empty()) detail::write_file(c.svg_path, render_svg(s, {r.path.waypoints, sm.polyline, nullptr}));
    if (!c.csv_path.empty()) detail::append_csv(c.csv_path, {{detail::case_name(c), c.algorithm, c.csv_family, c.label_seed, m}});

    out << "status " << r.status << "\n";
    if (ok)
        out << "length " << format_fixed6(*m.path_length) << "\nturning " << format_fixed6(*m.total_turning) << "\n";
    out << "plan_time " << format_fixed6(r.time) << "\nnodes " << m.node_count << "\n";
    return ok ? kExitOk : kExitPlannerFailure;
}

inline int cmd_simulate(const RunConfig& c, std::ostream& out) {
    const Scenario s = detail::load_with_overrides(c);
    const ExecutionTrace t = detail::run_dynamic(s, c.mode, detail::parse_strategy(c.strategy));
    const std::string status = detail::csv_status(t.final_status);
    const MetricsRecord m = evaluate(t.executed_path, t.reached(), status, t.total_plan_time());

    if (!c.out_path.empty()) detail::write_file(c.out_path, trace_to_jsonl(t));
    if (!c.svg_path.empty()) detail::write_file(c.svg_path, render_svg(s, {{}, {}, &t}));
    if (!c.csv_path.empty())
        detail::append_csv(c.csv_path, {{detail::case_name(c), "dtig_" + c.mode, c.csv_family, c.label_seed, m}});

    out << "status " << status << "\n";
    if (t.failure_position)
        out << "failed_at " << format_fixed6(t.failure_position->x) << " " << format_fixed6(t.failure_position->y) << "\n";
    if (m.path_length)
        out << "length " << format_fixed6(*m.path_length) << "\nturning " << format_fixed6(*m.total_turning) << "\n";
    out << "replans " << t.count(TraceKind::Replan) << "\nplan_time " << format_fixed6(t.total_plan_time()) << "\n";
    return t.reached() ? kExitOk : kExitPlannerFailure;
}

inline std::vector<CsvRow> bench_rows(const RunConfig& c) {
    std::vector<CsvRow> rows;
    const SearchOrder order = detail::parse_order(c.order);
    const UnknownStrategy strategy = detail::parse_strategy(c.strategy);
    for (MapFamily f : detail::parse_families(c.families)) {
        const std::string fam(to_string(f));
        for (std::size_t i = 0; i < c.count; ++i) {
            const std::uint64_t seed = derive_seed(c.seed, i);
            Scenario s = generate_map(MapSpec::standard(f, seed));
            s.set_params(c.overrides.apply(s.params));
            char id[64];
            std::snprintf(id, sizeof id, "%s-%03zu", fam.c_str(), i);

            for (const char* algo : {"stig", "astar"}) {
                const auto r = detail::run_static(s, algo, order, c.resolution);
                rows.push_back({id, algo, fam, seed, evaluate(r.path.waypoints, r.path.ok(), r.status, r.time)});
            }
            if (!c.dynamic) continue;
            for (const char* mode : {"partial", "unknown"}) {
                const Scenario d = std::string(mode) == "partial" ? detail::hide_some(s, c.hidden_fraction, seed) : s;
                const ExecutionTrace t = detail::run_dynamic(d, mode, strategy);
                rows.push_back({id, std::string("dtig_") + mode, fam, seed,
                                evaluate(t.executed_path, t.reached(), detail::csv_status(t.final_status),
                                         t.total_plan_time())});
            }
        }
    }
    return rows;
}

inline int cmd_bench(const RunConfig& c, std::ostream& out) {
    const auto rows = bench_rows(c);
    std::string text = std::string(kCsvHeader) + "\n";
    for (const auto& r : rows) text += to_csv(r) + "\n";
    if (c.out_path.empty()) out << text;
    else detail::write_file(c.out_path, text);
    return kExitOk;
}

inline int cmd_render(const RunConfig& c, std::ostream&) {
    const Scenario s = detail::load_with_overrides(c);
    SvgLayers layers;
    ExecutionTrace trace;
    if (!c.path_in.empty()) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(detail::read_file(c.path_in));
            layers.path = detail::points_from_json(j.at("waypoints"));
            if (j.contains("smoothed")) layers.smoothed = detail::points_from_json(j.at("smoothed"));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(c.path_in + ": " + e.what());
        }
        if (layers.smoothed.empty() && layers.path.size() >= 3) {
            PlannedPath p;
            p.waypoints = layers.path;
            p.status = PlanStatus::Success;
            layers.smoothed = smooth_path(p, s.obstacles, s.params).polyline;
        }
    }
    if (!c.trace_in.empty()) {
        trace = trace_from_jsonl(detail::read_file(c.trace_in), s.start);
        layers.trace = &trace;
    }
    SvgOptions opt;
    opt.show_virtual = c.show_virtual;
    opt.stroke = std::max(0.5, 0.002 * std::max(s.width, s.height));
    detail::write_file(c.out_path, render_svg(s, layers, opt));
    return kExitOk;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Tangent-based UAV path planner"};
    app.require_subcommand(1);
    RunConfig c;

    const std::vector<std::string> algos{"stig", "astar"}, modes{"static", "partial", "unknown"},
        orders{"accumulated", "greedy"}, strategies{"sensed", "local"},
        family_names{"short", "large", "sparse", "dense"};

    auto* gen = app.add_subcommand("gen", "generate a random scenario");
    gen->add_option("--family", c.family, "short, large, sparse or dense")->check(CLI::IsMember(family_names));
    gen->add_option("--size", c.size, "map side length (m)")->check(CLI::PositiveNumber);
    gen->add_option("--coverage", c.coverage, "target obstacle coverage")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--seed", c.seed, "random seed");
    gen->add_option("--out", c.out_path, "scenario file to write");

    auto* plan = app.add_subcommand("plan", "plan a path on a known map");
    plan->add_option("--scenario", c.scenario_path)->required();
    plan->add_option("--algo", c.algorithm)->check(CLI::IsMember(algos));
    plan->add_option("--order", c.order, "search order for stig")->check(CLI::IsMember(orders));
    plan->add_option("--resolution", c.resolution, "grid cell size for astar (m)")->check(CLI::PositiveNumber);
    plan->add_option("--out", c.out_path, "path JSON to write");
    plan->add_option("--svg", c.svg_path);
    plan->add_option("--csv", c.csv_path, "CSV file to append a metrics row to");
    plan->add_option("--case-id", c.case_id);
    plan->add_option("--family", c.csv_family, "family label for the CSV row");
    plan->add_option("--seed", c.label_seed, "seed label for the CSV row");

    auto* sim = app.add_subcommand("simulate", "fly a mission with sensing and replanning");
    sim->add_option("--scenario", c.scenario_path)->required();
    sim->add_option("--mode", c.mode)->check(CLI::IsMember(modes));
    sim->add_option("--strategy", c.strategy, "unknown-map subpath selection")->check(CLI::IsMember(strategies));
    sim->add_option("--out", c.out_path, "trace JSON lines to write");
    sim->add_option("--svg", c.svg_path);
    sim->add_option("--csv", c.csv_path);
    sim->add_option("--case-id", c.case_id);
    sim->add_option("--family", c.csv_family);
    sim->add_option("--seed", c.label_seed);

    auto* bench = app.add_subcommand("bench", "run the seeded benchmark and print CSV");
    bench->add_option("--families", c.families, "comma-separated family list");
    bench->add_option("--count", c.count, "maps per family");
    bench->add_option("--seed", c.seed);
    bench->add_flag("--dynamic", c.dynamic, "also run the partial and unknown dynamic modes");
    bench->add_option("--hidden-fraction", c.hidden_fraction, "share of obstacles hidden in partial mode")
        ->check(CLI::Range(0.0, 1.0));
    bench->add_option("--order", c.order)->check(CLI::IsMember(orders));
    bench->add_option("--strategy", c.strategy)->check(CLI::IsMember(strategies));
    bench->add_option("--resolution", c.resolution)->check(CLI::PositiveNumber);
    bench->add_option("--out", c.out_path, "CSV file (default standard output)");

    auto* render = app.add_subcommand("render", "draw a scenario with a path or trace as SVG");
    render->add_option("--scenario", c.scenario_path)->required();
    render->add_option("--path", c.path_in, "path JSON from plan");
    render->add_option("--trace", c.trace_in, "trace JSON lines from simulate");
    render->add_option("--out", c.out_path)->required();
    render->add_flag("--virtual", c.show_virtual, "draw virtual ellipses");

    for (auto* sub : {gen, plan, sim, bench, render}) c.overrides.attach(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen(c, out);
        if (plan->parsed()) return cmd_plan(c, out);
        if (sim->parsed()) return cmd_simulate(c, out);
        if (bench->parsed()) return cmd_bench(c, out);
        return cmd_render(c, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

} // namespace tig
