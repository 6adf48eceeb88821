// rwce: simulation and verification toolkit for random walks in changing
// environments. Every operation is deterministic given its config and seed:
// identical inputs produce byte-identical output files for any worker count.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "rwce/environment.hpp"
#include "rwce/maw.hpp"
#include "rwce/montecarlo.hpp"
#include "rwce/potential.hpp"
#include "rwce/walk.hpp"

namespace {

using nlohmann::json;
using namespace rwce;

constexpr int kExitOk = 0;
constexpr int kExitConfigInvalid = 2;
constexpr int kExitRuntimeFailure = 3;
constexpr int kExitBoundViolation = 4;

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json config;
    try {
        in >> config;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return config;
}

Topology topology_from(const json& spec) {
    check_keys(spec, {"kind", "branching", "depth"}, "topology");
    if (!spec.contains("kind") || !spec.at("kind").is_string())
        throw ConfigError("topology: string 'kind' is required");
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "line_n") return Topology::line_n();
    if (kind == "line_z") return Topology::line_z();
    if (kind == "lattice2d") return Topology::lattice2d();
    if (kind == "rooted_tree") {
        if (!spec.contains("branching") || !spec.contains("depth"))
            throw ConfigError("topology: rooted_tree needs 'branching' and 'depth'");
        return Topology::regular_tree(spec.at("branching").get<int>(),
                                      spec.at("depth").get<int>());
    }
    throw ConfigError("topology: unknown kind '" + kind + "'");
}

Vertex start_from(const json& config, const Topology& topology) {
    if (!config.contains("start")) return 0;
    const json& s = config.at("start");
    if (topology.kind() == TopologyKind::Lattice2D) {
        if (!s.is_array() || s.size() != 2)
            throw ConfigError("start: lattice positions are [x, y] pairs");
        return lattice_vertex(s.at(0).get<std::int32_t>(), s.at(1).get<std::int32_t>());
    }
    if (!s.is_number_integer()) throw ConfigError("start: expected an integer vertex");
    const Vertex v = s.get<Vertex>();
    if (!topology.has_vertex(v)) throw ConfigError("start: vertex outside the topology");
    return v;
}

std::uint64_t required_u64(const json& config, const std::string& key, std::uint64_t fallback) {
    if (!config.contains(key)) return fallback;
    return config.at(key).get<std::uint64_t>();
}

std::filesystem::path out_file(const std::string& out_dir, const std::string& name) {
    std::filesystem::create_directories(out_dir);
    return std::filesystem::path(out_dir) / name;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path.string());
    os << contents;
}

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    bool seed_given = false;
    int workers = 0;  // resolved later
};

int resolve_workers(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("RWCE_WORKERS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    return 1;
}

std::uint64_t resolve_seed(const Options& opt, const json& config) {
    if (opt.seed_given) return opt.seed;
    return required_u64(config, "seed", 1);
}

// Run summary printed to stdout only; durations never land in output files.
void print_summary(json summary, std::chrono::steady_clock::time_point started) {
    const auto elapsed = std::chrono::steady_clock::now() - started;
    summary["duration_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
    std::cout << summary.dump(2) << "\n";
}

// ----- operations -----------------------------------------------------------

int cmd_simulate(const Options& opt) {
    const json config = load_config(opt.config_path);
    check_keys(config, {"topology", "environment", "start", "steps", "seed", "thin"},
               "simulate");
    const Topology topology = topology_from(config.at("topology"));
    const Vertex start = start_from(config, topology);
    const auto steps = config.at("steps").get<std::int64_t>();
    if (steps < 0) throw ConfigError("simulate: steps must be nonnegative");
    const auto thin = config.value("thin", std::int64_t{1});
    if (thin < 1) throw ConfigError("simulate: thin must be at least 1");
    const std::uint64_t seed = resolve_seed(opt, config);
    const auto started = std::chrono::steady_clock::now();

    const Trajectory trajectory =
        rwce::run(topology, config.at("environment"), start, steps, seed);
    std::ostringstream csv;
    export_trajectory_csv(csv, trajectory, topology.kind(), thin);
    write_file(out_file(opt.out_dir, "trajectory.csv"), csv.str());

    print_summary({{"operation", "simulate"},
                   {"seed", seed},
                   {"steps_taken", static_cast<std::int64_t>(trajectory.points.size()) - 1},
                   {"returns_to_start", trajectory.returns_to_start},
                   {"max_displacement", trajectory.max_displacement},
                   {"last_return_time", trajectory.last_return_time},
                   {"absorbed", trajectory.stop_reason == StopReason::Absorbed},
                   {"output", "trajectory.csv"}},
                  started);
    return kExitOk;
}

int cmd_classify(const Options& opt) {
    const json config = load_config(opt.config_path);
    check_keys(config, {"topology", "environment", "start", "trials", "horizon", "seed"},
               "classify");
    const Topology topology = topology_from(config.at("topology"));
    const Vertex start = start_from(config, topology);
    const std::uint64_t seed = resolve_seed(opt, config);
    const auto started = std::chrono::steady_clock::now();

    const RecurrenceProfile profile = recurrence_profile(
        topology, config.at("environment"), start, config.at("trials").get<std::int64_t>(),
        config.at("horizon").get<std::int64_t>(), seed, opt.workers);

    const json result = {{"trials", profile.trials},
                         {"horizon", profile.horizon},
                         {"escaped", profile.escaped},
                         {"escaped_fraction", profile.escaped_fraction},
                         {"mean_returns", profile.mean_returns},
                         {"mean_final_displacement", profile.mean_final_displacement},
                         {"label", profile.label},
                         {"rule", profile.rule},
                         {"seed", seed}};
    write_file(out_file(opt.out_dir, "classify.json"), result.dump(2) + "\n");
    json summary = result;
    summary["operation"] = "classify";
    summary["output"] = "classify.json";
    print_summary(summary, started);
    return kExitOk;
}

int cmd_check_bound(const Options& opt) {
    const json config = load_config(opt.config_path);
    check_keys(config, {"scenario", "trials", "seed"}, "check-bound");
    const std::string which = config.value("scenario", std::string("all"));
    const auto trials = config.at("trials").get<std::int64_t>();
    const std::uint64_t seed = resolve_seed(opt, config);
    const auto started = std::chrono::steady_clock::now();

    std::vector<BoundScenario> scenarios;
    if (which == "all")
        scenarios = standard_scenarios();
    else
        scenarios.push_back(standard_scenario(which));

    std::vector<BoundCheckReport> reports;
    bool violation = false;
    for (const auto& scenario : scenarios) {
        reports.push_back(check_theorem_bound(scenario, trials, seed, opt.workers));
        violation = violation || reports.back().verdict == "violation";
    }
    std::ostringstream csv;
    export_bound_reports_csv(csv, reports);
    write_file(out_file(opt.out_dir, "report.csv"), csv.str());

    json rows = json::array();
    for (const auto& r : reports) rows.push_back(bound_report_json(r));
    print_summary({{"operation", "check-bound"},
                   {"seed", seed},
                   {"reports", rows},
                   {"output", "report.csv"}},
                  started);
    return violation ? kExitBoundViolation : kExitOk;
}

int cmd_monitor(const Options& opt) {
    const json config = load_config(opt.config_path);
    check_keys(config,
               {"topology", "environment", "start", "steps", "seed", "potential"},
               "monitor-potential");
    const Topology topology = topology_from(config.at("topology"));
    const Vertex start = start_from(config, topology);
    const std::uint64_t seed = resolve_seed(opt, config);

    const json& pot = config.at("potential");
    check_keys(pot, {"kind", "target", "horizon", "tree_radius", "tree_bound"}, "potential");
    PotentialSpec spec;
    const std::string kind = pot.at("kind").get<std::string>();
    if (kind == "line_to_zero") spec.kind = PotentialKind::LineToZero;
    else if (kind == "line_to_infinity") spec.kind = PotentialKind::LineToInfinity;
    else if (kind == "line_to_target") spec.kind = PotentialKind::LineToTarget;
    else if (kind == "tree_flow_voltage") spec.kind = PotentialKind::TreeFlowVoltage;
    else throw ConfigError("potential: unknown kind '" + kind + "'");
    spec.target = pot.value("target", std::int64_t{0});
    spec.horizon = pot.value("horizon", std::int64_t{0});
    spec.tree_radius = pot.value("tree_radius", 0);
    const std::string bound = pot.value("tree_bound", std::string("upper"));
    if (bound == "upper") spec.tree_bound = PotentialSpec::TreeBound::Upper;
    else if (bound == "lower") spec.tree_bound = PotentialSpec::TreeBound::Lower;
    else throw ConfigError("potential: tree_bound must be 'upper' or 'lower'");

    const auto started = std::chrono::steady_clock::now();
    const MonitorReport report =
        martingale_monitor(topology, config.at("environment"), start,
                           config.at("steps").get<std::int64_t>(), seed, spec);
    std::ostringstream csv;
    export_monitor_csv(csv, report);
    write_file(out_file(opt.out_dir, "monitor.csv"), csv.str());

    json summary = {{"operation", "monitor-potential"},
                    {"seed", seed},
                    {"rows", report.rows.size()},
                    {"max_abs_residual", report.max_abs_residual},
                    {"max_signed_drift", report.max_signed_drift},
                    {"drift_direction", report.drift_direction},
                    {"output", "monitor.csv"}};
    if (report.truncation_tail_bound) summary["truncation_tail_bound"] = *report.truncation_tail_bound;
    if (report.stopped_at) summary["stopped_at"] = *report.stopped_at;
    print_summary(summary, started);
    return kExitOk;
}

int cmd_maw_drift(const Options& opt) {
    const json config = load_config(opt.config_path);
    check_keys(config, {"n_values", "trials", "seed"}, "maw-drift");
    const auto n_values = config.at("n_values").get<std::vector<std::int64_t>>();
    const auto trials = config.at("trials").get<std::int64_t>();
    const std::uint64_t seed = resolve_seed(opt, config);
    const auto started = std::chrono::steady_clock::now();

    const maw::DriftResult result =
        maw::drift_experiment(n_values, trials, seed, opt.workers);
    std::ostringstream csv;
    maw::export_drift_csv(csv, result);
    write_file(out_file(opt.out_dir, "drift.csv"), csv.str());

    print_summary({{"operation", "maw-drift"},
                   {"seed", seed},
                   {"loglog_slope", result.loglog_slope},
                   {"rows", result.rows.size()},
                   {"output", "drift.csv"}},
                  started);
    return kExitOk;
}

int cmd_tanpoints(const Options& opt) {
    const json config = load_config(opt.config_path);
    check_keys(config, {"n", "epsilon", "width_rule", "seeds", "seed"}, "tanpoints");
    const auto n = config.at("n").get<std::int64_t>();
    const double epsilon = config.value("epsilon", 0.1);
    const std::string rule_name = config.value("width_rule", std::string("log_cubed"));
    const auto seeds = config.value("seeds", std::int64_t{1});
    if (n < 2) throw ConfigError("tanpoints: n must be at least 2");
    if (!(epsilon > 0.0) || !(epsilon < 0.5))
        throw ConfigError("tanpoints: epsilon must lie in (0, 0.5)");
    if (seeds < 1) throw ConfigError("tanpoints: seeds must be at least 1");
    maw::WidthRule rule;
    if (rule_name == "log_cubed") rule = maw::log_cubed_width_rule(n);
    else if (rule_name == "unit") rule = maw::unit_width_rule();
    else throw ConfigError("tanpoints: width_rule must be 'log_cubed' or 'unit'");
    const std::uint64_t seed = resolve_seed(opt, config);
    const auto started = std::chrono::steady_clock::now();

    std::vector<maw::TanPointReport> reports;
    for (std::int64_t i = 0; i < seeds; ++i) {
        const std::uint64_t trial_seed = derive_trial_seed(seed, static_cast<std::uint64_t>(i));
        const maw::Path path = maw::simple_random_walk_path(n, trial_seed);
        maw::TanPointReport report = maw::count_separated_tan_points(path, epsilon, rule);
        report.seed = trial_seed;
        reports.push_back(std::move(report));
    }
    std::ostringstream csv;
    maw::export_tan_point_csv(csv, reports);
    write_file(out_file(opt.out_dir, "tanpoint.csv"), csv.str());

    std::int64_t total = 0, total_separated = 0;
    for (const auto& r : reports) {
        total += static_cast<std::int64_t>(r.tan_indices.size());
        total_separated += static_cast<std::int64_t>(r.separated.size());
    }
    print_summary({{"operation", "tanpoints"},
                   {"seed", seed},
                   {"paths", seeds},
                   {"mean_count", static_cast<double>(total) / static_cast<double>(seeds)},
                   {"mean_separated",
                    static_cast<double>(total_separated) / static_cast<double>(seeds)},
                   {"output", "tanpoint.csv"}},
                  started);
    return kExitOk;
}

int cmd_list_catalog(bool as_json) {
    const auto entries = catalog_entries();
    if (as_json) {
        json rows = json::array();
        for (const auto& e : entries)
            rows.push_back({{"name", e.name},
                            {"parameters", e.parameters},
                            {"provenance", e.provenance},
                            {"monotonicity", e.monotonicity},
                            {"bounds", e.bounds},
                            {"adaptive", e.adaptive}});
        std::cout << rows.dump(2) << "\n";
        return kExitOk;
    }
    for (const auto& e : entries) {
        std::cout << e.name << "\n"
                  << "  parameters:   " << e.parameters << "\n"
                  << "  provenance:   " << e.provenance << "\n"
                  << "  monotonicity: " << e.monotonicity << "\n"
                  << "  adaptive:     " << (e.adaptive ? "yes" : "no") << "\n"
                  << "  bounds:       " << e.bounds << "\n";
    }
    return kExitOk;
}

// ----- reproduce suites -------------------------------------------------------
// Fixed-seed bundles whose outputs are byte-identical across reruns and
// worker counts; --trials-scale shrinks them proportionally for quick runs.

std::int64_t scaled(std::int64_t base, double scale) {
    const auto v = static_cast<std::int64_t>(base * scale + 0.5);
    return std::max<std::int64_t>(v, 2);
}

int suite_theorems(const Options& opt, double scale) {
    std::vector<BoundCheckReport> reports;
    for (const auto& scenario : standard_scenarios()) {
        const bool tree = scenario.topology.kind() == TopologyKind::RootedTree;
        const std::int64_t trials = scaled(tree ? 2000 : 5000, scale);
        reports.push_back(check_theorem_bound(scenario, trials, 7120, opt.workers));
    }
    std::ostringstream csv;
    export_bound_reports_csv(csv, reports);
    write_file(out_file(opt.out_dir, "report.csv"), csv.str());
    for (const auto& r : reports)
        if (r.verdict == "violation") return kExitBoundViolation;
    return kExitOk;
}

int suite_maw(const Options& opt, double scale) {
    const std::int64_t n_values[] = {256, 1024, 4096};
    const maw::DriftResult drift =
        maw::drift_experiment(n_values, scaled(400, scale), 3023, opt.workers);
    std::ostringstream drift_csv;
    maw::export_drift_csv(drift_csv, drift);
    write_file(out_file(opt.out_dir, "drift.csv"), drift_csv.str());

    std::vector<maw::TanPointReport> reports;
    const std::int64_t paths = std::clamp<std::int64_t>(scaled(10, scale), 2, 10);
    for (std::int64_t i = 0; i < paths; ++i) {
        const std::uint64_t seed = derive_trial_seed(4019, static_cast<std::uint64_t>(i));
        const maw::Path path = maw::simple_random_walk_path(10000, seed);
        auto report = maw::count_separated_tan_points(path, 0.1, maw::unit_width_rule());
        report.seed = seed;
        reports.push_back(std::move(report));
    }
    std::ostringstream tan_csv;
    maw::export_tan_point_csv(tan_csv, reports);
    write_file(out_file(opt.out_dir, "tanpoint.csv"), tan_csv.str());
    return kExitOk;
}

int suite_examples(const Options& opt, double scale) {
    (void)scale;
    struct Item {
        const char* file;
        json topology;
        json environment;
        Vertex start;
        std::int64_t steps;
    };
    const Item items[] = {
        {"trajectory_wave.csv", {{"kind", "line_n"}},
         {{"name", "wave"}, {"period", 100}, {"high", 100.0}}, 50, 5000},
        {"trajectory_adaptive_bias.csv", {{"kind", "line_z"}},
         {{"name", "adaptive_bias"}}, 0, 5000},
        {"trajectory_maw.csv", {{"kind", "lattice2d"}},
         {{"name", "maw"}}, lattice_vertex(0, 0), 5000},
    };
    for (const auto& item : items) {
        const Topology topology = topology_from(item.topology);
        const Trajectory trajectory =
            rwce::run(topology, item.environment, item.start, item.steps, 97);
        std::ostringstream csv;
        export_trajectory_csv(csv, trajectory, topology.kind());
        write_file(out_file(opt.out_dir, item.file), csv.str());
    }
    PotentialSpec spec;
    spec.kind = PotentialKind::LineToZero;
    const MonitorReport monitor = martingale_monitor(
        Topology::line_n(), {{"name", "reinforced_once"}, {"c", 2.0}}, 20, 2000, 97, spec);
    std::ostringstream csv;
    export_monitor_csv(csv, monitor);
    write_file(out_file(opt.out_dir, "monitor_reinforced_once.csv"), csv.str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random walk in changing environment toolkit"};
    app.require_subcommand(1);

    Options opt;
    std::string suite;
    double trials_scale = 1.0;
    bool catalog_json = false;
    int workers_flag = 0;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", opt.config_path, "JSON config file");
        if (needs_config) c->required();
        sub->add_option("--seed", opt.seed, "master seed (overrides the config)")
            ->each([&](const std::string&) { opt.seed_given = true; });
        sub->add_option("--workers", workers_flag, "worker threads (or RWCE_WORKERS)");
        sub->add_option("--out", opt.out_dir, "output directory");
    };

    auto* simulate = app.add_subcommand("simulate", "run one walk, write trajectory.csv");
    add_common(simulate, true);
    auto* classify = app.add_subcommand("classify", "finite-horizon recurrence profile");
    add_common(classify, true);
    auto* check = app.add_subcommand("check-bound", "compare scenarios against their bounds");
    add_common(check, true);
    auto* monitor = app.add_subcommand("monitor-potential", "martingale monitor, write monitor.csv");
    add_common(monitor, true);
    auto* drift = app.add_subcommand("maw-drift", "coupled displacement gap experiment");
    add_common(drift, true);
    auto* tan = app.add_subcommand("tanpoints", "tan point census on simple walk paths");
    add_common(tan, true);
    auto* catalog = app.add_subcommand("list-catalog", "print the environment catalog");
    catalog->add_flag("--json", catalog_json, "machine-readable output");
    auto* reproduce = app.add_subcommand("reproduce", "run a fixed deterministic suite");
    add_common(reproduce, false);
    reproduce->add_option("--suite", suite, "theorems | maw | examples")->required();
    reproduce->add_option("--trials-scale", trials_scale, "scale factor for trial counts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfigInvalid;
    }

    opt.workers = resolve_workers(workers_flag);

    try {
        if (simulate->parsed()) return cmd_simulate(opt);
        if (classify->parsed()) return cmd_classify(opt);
        if (check->parsed()) return cmd_check_bound(opt);
        if (monitor->parsed()) return cmd_monitor(opt);
        if (drift->parsed()) return cmd_maw_drift(opt);
        if (tan->parsed()) return cmd_tanpoints(opt);
        if (catalog->parsed()) return cmd_list_catalog(catalog_json);
        if (reproduce->parsed()) {
            if (!(trials_scale > 0.0)) throw ConfigError("--trials-scale must be positive");
            if (suite == "theorems") return suite_theorems(opt, trials_scale);
            if (suite == "maw") return suite_maw(opt, trials_scale);
            if (suite == "examples") return suite_examples(opt, trials_scale);
            throw ConfigError("unknown suite: " + suite);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigInvalid;
    } catch (const BoundViolation& e) {
        std::cerr << "bound violation: " << e.what() << "\n";
        return kExitBoundViolation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntimeFailure;
    }
    return kExitConfigInvalid;
}
