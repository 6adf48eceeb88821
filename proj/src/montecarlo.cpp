#include "rwce/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <unordered_set>

#include "rwce/environment.hpp"
#include "rwce/potential.hpp"
#include "rwce/rng.hpp"

namespace rwce {

namespace {

constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile

// log P(X <= k) for X ~ Binomial(n, p); cheap for small k.
double log_binomial_cdf(std::int64_t k, std::int64_t n, double p) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return k >= n ? 0.0 : -std::numeric_limits<double>::infinity();
    const double lp = std::log(p), lq = std::log1p(-p);
    double log_term = static_cast<double>(n) * lq;  // i = 0
    double log_sum = log_term;
    for (std::int64_t i = 1; i <= k; ++i) {
        log_term += std::log(static_cast<double>(n - i + 1) / static_cast<double>(i)) + lp - lq;
        log_sum = std::max(log_sum, log_term) +
                  std::log1p(std::exp(std::min(log_sum, log_term) - std::max(log_sum, log_term)));
    }
    return std::min(log_sum, 0.0);
}

// Smallest p with P(X <= k - 1 | p) <= alpha (upper CP limit is the mirror).
double solve_binomial_tail(std::int64_t k, std::int64_t n, double alpha, bool upper) {
    double lo = 0.0, hi = 1.0;
    const double log_alpha = std::log(alpha);
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double log_tail =
            upper ? log_binomial_cdf(k, n, mid)                       // P(X <= k)
                  : std::log1p(-std::exp(log_binomial_cdf(k - 1, n, mid)));  // P(X >= k)
        // The tail shrinks toward the limit from inside; keep the side where
        // it still exceeds alpha.
        if (log_tail > log_alpha)
            (upper ? lo : hi) = mid;
        else
            (upper ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

EstimateWithCI make_estimate(std::int64_t hits, std::int64_t trials, std::int64_t capped,
                             std::uint64_t master_seed) {
    EstimateWithCI e;
    e.hits = hits;
    e.trials = trials;
    e.capped = capped;
    e.master_seed = master_seed;
    if (trials <= 0) throw ConfigError("estimate: trials must be positive");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(hits) / n;
    e.estimate = p;
    e.std_error = std::sqrt(std::max(p * (1.0 - p), 0.0) / n);
    if (hits >= 10 && trials - hits >= 10) {
        e.ci_low = std::max(0.0, p - kZ99 * e.std_error);
        e.ci_high = std::min(1.0, p + kZ99 * e.std_error);
    } else {
        // Exact binomial tails; the per-step CDF cost is O(min(hits, misses)).
        e.exact_binomial = true;
        const bool flip = hits > trials - hits;
        const std::int64_t k = flip ? trials - hits : hits;
        double lo = k == 0 ? 0.0 : solve_binomial_tail(k, trials, 0.005, /*upper=*/false);
        double hi = k == trials ? 1.0 : solve_binomial_tail(k, trials, 0.005, /*upper=*/true);
        if (flip) {
            const double tmp = lo;
            lo = 1.0 - hi;
            hi = 1.0 - tmp;
        }
        e.ci_low = lo;
        e.ci_high = hi;
    }
    return e;
}

namespace {

enum class TrialOutcome : std::uint8_t { Hit, Miss, Capped };

TrialOutcome run_trial(const Topology& topology, const nlohmann::json& env_spec,
                       const HitQuery& query, const std::unordered_set<Vertex>& target_set,
                       const std::unordered_set<Vertex>& stop_set, std::uint64_t seed) {
    WalkState walk(topology, make_environment(env_spec, topology.kind()), query.start, seed);
    for (std::int64_t s = 0; s < query.step_cap; ++s) {
        if (target_set.count(walk.position())) return TrialOutcome::Hit;
        if (stop_set.count(walk.position())) return TrialOutcome::Miss;
        try {
            walk.step();
        } catch (const AllIncidentZero&) {
            return TrialOutcome::Miss;  // absorbed walkers never reach the target
        }
    }
    if (target_set.count(walk.position())) return TrialOutcome::Hit;
    if (stop_set.count(walk.position())) return TrialOutcome::Miss;
    return TrialOutcome::Capped;
}

}  // namespace

EstimateWithCI estimate_hit_probability(const Topology& topology, const nlohmann::json& env_spec,
                                        const HitQuery& query) {
    if (query.trials <= 0) throw ConfigError("estimate: trials must be positive");
    if (query.step_cap <= 0) throw ConfigError("estimate: step_cap must be positive");
    if (query.targets.empty()) throw ConfigError("estimate: at least one target is required");

    const std::unordered_set<Vertex> target_set(query.targets.begin(), query.targets.end());
    const std::unordered_set<Vertex> stop_set(query.stops.begin(), query.stops.end());
    if (stop_set.count(query.start) && !target_set.count(query.start))
        return make_estimate(0, query.trials, 0, query.master_seed);
    if (target_set.count(query.start))
        return make_estimate(query.trials, query.trials, 0, query.master_seed);

    // Validate the environment once up front so a bad spec fails fast.
    make_environment(env_spec, topology.kind());

    const auto outcomes = parallel_trials<TrialOutcome>(
        query.trials, query.workers, [&](std::int64_t i) {
            return run_trial(topology, env_spec, query, target_set, stop_set,
                             derive_trial_seed(query.master_seed, static_cast<std::uint64_t>(i)));
        });

    std::int64_t hits = 0, capped = 0;
    for (TrialOutcome o : outcomes) {
        if (o == TrialOutcome::Hit) ++hits;
        else if (o == TrialOutcome::Capped) ++capped;
    }
    if (capped == query.trials)
        throw AllTrialsCapped("no trial resolved within the step cap");
    return make_estimate(hits, query.trials, capped, query.master_seed);
}

// ----- theorem bound scenarios ---------------------------------------------

const char* to_string(TheoremId id) {
    switch (id) {
        case TheoremId::IncRecN: return "inc_rec_N";
        case TheoremId::IncTraN: return "inc_tra_N";
        case TheoremId::DecTraN: return "dec_tra_N";
        case TheoremId::DecRecN: return "dec_rec_N";
        case TheoremId::IncRecT: return "inc_rec_T";
        case TheoremId::DecTraT: return "dec_tra_T";
    }
    return "?";
}

namespace {

std::vector<Vertex> leaves_of(const Topology& tree, int depth) {
    std::vector<Vertex> out;
    for (Vertex v = 0; v < tree.tree_vertex_count(); ++v)
        if (tree.tree_depth(v) == depth) out.push_back(v);
    return out;
}

void require_hypothesis(bool ok, const std::string& what) {
    if (!ok) throw HypothesisMismatch("scenario hypothesis failed: " + what);
}

// Bounds read straight off the environment's declared envelope.
TreeWeightFn declared_bound(const Environment& env, bool upper) {
    return [&env, upper](const Edge& e) {
        const auto b = upper ? env.upper_bound(e) : env.lower_bound(e);
        if (!b) throw HypothesisMismatch("scenario environment lacks declared bounds");
        return *b;
    };
}

BoundScenario make_inc_rec_n() {
    // Weights grow from C_0(j) = 1/2 toward C_inf(j) = 1; a walker started at
    // 5 reaches 100 before 0 with probability at most F_0(5) / A where
    // F_0(v) = R_0(0, v) and A = R_inf(0, 100).
    BoundScenario s{TheoremId::IncRecN, "inc_rec_N", Topology::line_n(),
                    {{"name", "right_boost"}, {"base", 1.0}, {"scale", 0.5}, {"factor", 2.0}},
                    5, {100}, {0}, BoundDirection::UpperBoundsEstimate, 100000, 0.0, {}};
    const auto env = make_environment(s.env_spec, TopologyKind::LineN);
    const auto lo = declared_bound(*env, false);
    const auto hi = declared_bound(*env, true);
    const double f0 = line_resistance([&](Vertex j) { return lo(line_edge(j)); }, 0, s.start);
    const double a = line_resistance([&](Vertex j) { return hi(line_edge(j)); }, 0, 100);
    s.bound = f0 / a;
    s.inputs = {{"F0_start", f0}, {"A", a}, {"escape_radius", 100}};
    return s;
}

BoundScenario make_inc_tra_n() {
    // Weights C_0(j) = 2^j doubling once on arrival; started at 10 the walker
    // hits 0 before 60 with probability at most F_0(10) / F_inf(0), the
    // resistance-to-infinity potentials truncated far past the arena.
    BoundScenario s{TheoremId::IncTraN, "inc_tra_N", Topology::line_n(),
                    {{"name", "right_boost"}, {"base", 2.0}, {"scale", 1.0}, {"factor", 2.0}},
                    10, {0}, {60}, BoundDirection::UpperBoundsEstimate, 100000, 0.0, {}};
    const auto env = make_environment(s.env_spec, TopologyKind::LineN);
    const auto lo = declared_bound(*env, false);  // initial weights
    const auto hi = declared_bound(*env, true);   // fully boosted weights
    const std::int64_t horizon = 120;
    // Supermartingale fold: the walker pays F_0(start) up front and any hit
    // of 0 collects at least the fully-boosted resistance to infinity.
    const double f0_start =
        line_resistance([&](Vertex j) { return lo(line_edge(j)); }, s.start, horizon);
    const double f_min_zero =
        line_resistance([&](Vertex j) { return hi(line_edge(j)); }, 0, horizon);
    s.bound = f0_start / f_min_zero;
    s.inputs = {{"F0_start", f0_start}, {"F_min_zero", f_min_zero},
                {"truncation_horizon", horizon}};
    return s;
}

BoundScenario make_dec_tra_n() {
    // Weights C_0(j) = 2^j halving once on arrival: the resistance to 0 only
    // grows, so R_t(0, X_t) is a bounded submartingale up to the exit time
    // and P(hit 60 before 0) >= R_0(0, 5) / R_decayed(0, inf).
    BoundScenario s{TheoremId::DecTraN, "dec_tra_N", Topology::line_n(),
                    {{"name", "right_boost"}, {"base", 2.0}, {"scale", 1.0}, {"factor", 0.5}},
                    5, {60}, {0}, BoundDirection::LowerBoundsEstimate, 100000, 0.0, {}};
    const auto env = make_environment(s.env_spec, TopologyKind::LineN);
    const auto lo = declared_bound(*env, false);  // halved weights: the worst case
    const auto hi = declared_bound(*env, true);   // initial weights
    const std::int64_t horizon = 120;
    const double r0_start =
        line_resistance([&](Vertex j) { return hi(line_edge(j)); }, 0, s.start);
    const double r_total =
        line_resistance([&](Vertex j) { return lo(line_edge(j)); }, 0, horizon);
    s.bound = r0_start / r_total;
    s.inputs = {{"R0_start", r0_start}, {"R_total", r_total}, {"truncation_horizon", horizon}};
    return s;
}

BoundScenario make_dec_rec_n() {
    // Unit weights halving once on arrival, on the segment [0, 10]: the
    // resistance to 10 only grows, so R_t(X_t, 10) is a bounded submartingale
    // and P(hit 0 before 10) >= R_0(start, 10) / R_decayed(0, 10) = c/2 for a
    // uniform decay factor c and a centered start.
    BoundScenario s{TheoremId::DecRecN, "dec_rec_N", Topology::line_n(),
                    {{"name", "right_boost"}, {"base", 1.0}, {"scale", 1.0}, {"factor", 0.5}},
                    5, {0}, {10}, BoundDirection::LowerBoundsEstimate, 100000, 0.0, {}};
    const Vertex segment_end = 10;
    const auto env = make_environment(s.env_spec, TopologyKind::LineN);
    const auto lo = declared_bound(*env, false);  // fully decayed weights
    const auto hi = declared_bound(*env, true);   // initial weights
    const double r_right_initial =
        line_resistance([&](Vertex j) { return hi(line_edge(j)); }, s.start, segment_end);
    const double r_full_decayed =
        line_resistance([&](Vertex j) { return lo(line_edge(j)); }, 0, segment_end);
    s.bound = r_right_initial / r_full_decayed;
    require_hypothesis(s.bound > 0.0 && s.bound < 1.0, "dec_rec_N bound in (0,1)");
    s.inputs = {{"segment_end", segment_end}, {"R_right_initial", r_right_initial},
                {"R_full_decayed", r_full_decayed}};
    return s;
}

BoundScenario make_inc_rec_t() {
    // Binary tree of depth 16 with C_0(e) = 2^{-depth(e)} / 2 doubling once
    // per incident visit; started one level down, the walker reaches depth 16
    // before the root with probability at most F_0(start) / A, the flow
    // voltages of the fully-boosted weights.
    const int depth = 16;
    BoundScenario s{TheoremId::IncRecT, "inc_rec_T", Topology::regular_tree(2, depth),
                    {{"name", "incident_boost"}, {"base", 0.5}, {"scale", 0.5},
                     {"factor", 2.0}, {"branching", 2}},
                    1, {}, {0}, BoundDirection::UpperBoundsEstimate, 200000, 0.0, {}};
    s.targets = leaves_of(s.topology, depth);
    const auto env = make_environment(s.env_spec, TopologyKind::RootedTree);
    const auto hi = declared_bound(*env, true);
    const auto lo = declared_bound(*env, false);
    const FlowMap flow = tree_unit_current_flow(s.topology, hi, depth);
    const double a = tree_effective_resistance(s.topology, hi, depth);
    const auto f0 = potential_from_flow(s.topology, lo, flow);
    s.bound = f0.at(s.start) / a;
    s.inputs = {{"F0_start", f0.at(s.start)}, {"A", a}, {"tree_depth", depth}};
    return s;
}

BoundScenario make_dec_tra_t() {
    // Binary tree of depth 16 with unit weights halving once per incident
    // visit: the flow voltages of the fully-decayed weights only grow, so
    // F_t(X_t) is a bounded submartingale and the walker reaches depth 16
    // before the root with probability at least F_0(start) / R.
    const int depth = 16;
    BoundScenario s{TheoremId::DecTraT, "dec_tra_T", Topology::regular_tree(2, depth),
                    {{"name", "incident_boost"}, {"base", 1.0}, {"scale", 1.0},
                     {"factor", 0.5}, {"branching", 2}},
                    1, {}, {0}, BoundDirection::LowerBoundsEstimate, 200000, 0.0, {}};
    s.targets = leaves_of(s.topology, depth);
    const auto env = make_environment(s.env_spec, TopologyKind::RootedTree);
    const auto hi = declared_bound(*env, true);
    const auto lo = declared_bound(*env, false);
    const FlowMap flow = tree_unit_current_flow(s.topology, lo, depth);
    const double r = tree_effective_resistance(s.topology, lo, depth);
    const auto f0 = potential_from_flow(s.topology, hi, flow);
    s.bound = f0.at(s.start) / r;
    require_hypothesis(s.bound > 0.0 && s.bound < 1.0, "dec_tra_T escape bound in (0,1)");
    s.inputs = {{"F0_start", f0.at(s.start)}, {"R_decayed", r}, {"tree_depth", depth}};
    return s;
}

}  // namespace

std::vector<BoundScenario> standard_scenarios() {
    std::vector<BoundScenario> out;
    out.push_back(make_inc_rec_n());
    out.push_back(make_inc_tra_n());
    out.push_back(make_dec_tra_n());
    out.push_back(make_dec_rec_n());
    out.push_back(make_inc_rec_t());
    out.push_back(make_dec_tra_t());
    return out;
}

BoundScenario standard_scenario(const std::string& name) {
    for (auto& s : standard_scenarios())
        if (s.name == name) return s;
    throw ConfigError("unknown scenario: " + name);
}

BoundCheckReport check_theorem_bound(const BoundScenario& scenario, std::int64_t trials,
                                     std::uint64_t master_seed, int workers) {
    HitQuery query;
    query.start = scenario.start;
    query.targets = scenario.targets;
    query.stops = scenario.stops;
    query.trials = trials;
    query.step_cap = scenario.step_cap;
    query.master_seed = master_seed;
    query.workers = workers;

    const EstimateWithCI raw =
        estimate_hit_probability(scenario.topology, scenario.env_spec, query);

    const bool upper = scenario.direction == BoundDirection::UpperBoundsEstimate;
    const auto fold = [&](bool pessimistic) {
        const std::int64_t extra = (pessimistic == upper) ? raw.capped : 0;
        return static_cast<double>(raw.hits + extra) / static_cast<double>(raw.trials);
    };
    const double p_pess = fold(true);
    const double p_opt = fold(false);
    const double se =
        std::sqrt(std::max(p_pess * (1.0 - p_pess), 0.0) / static_cast<double>(raw.trials));
    const auto violates = [&](double p, double s) {
        return upper ? (p - 3.0 * s > scenario.bound) : (p + 3.0 * s < scenario.bound);
    };
    const double se_opt =
        std::sqrt(std::max(p_opt * (1.0 - p_opt), 0.0) / static_cast<double>(raw.trials));

    BoundCheckReport report;
    report.scenario = scenario.name;
    report.theorem = to_string(scenario.theorem);
    report.bound = scenario.bound;
    report.estimate = p_pess;
    report.std_error = se;
    report.trials = raw.trials;
    report.capped = raw.capped;
    report.inputs = scenario.inputs;
    report.inputs["master_seed"] = master_seed;
    if (!violates(p_pess, se))
        report.verdict = "consistent";
    else
        report.verdict = violates(p_opt, se_opt) ? "violation" : "inconclusive";
    return report;
}

void export_bound_reports_csv(std::ostream& os, const std::vector<BoundCheckReport>& reports) {
    os << "scenario,theorem,bound,estimate,stderr,trials,capped,verdict\n";
    char buf[256];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g,%.17g,%lld,%lld,%s\n",
                      r.scenario.c_str(), r.theorem.c_str(), r.bound, r.estimate, r.std_error,
                      static_cast<long long>(r.trials), static_cast<long long>(r.capped),
                      r.verdict.c_str());
        os << buf;
    }
}

nlohmann::json bound_report_json(const BoundCheckReport& r) {
    return {{"scenario", r.scenario}, {"theorem", r.theorem},   {"bound", r.bound},
            {"estimate", r.estimate}, {"stderr", r.std_error},  {"trials", r.trials},
            {"capped", r.capped},     {"verdict", r.verdict},   {"inputs", r.inputs}};
}

// ----- recurrence/transience profile -----------------------------------------

RecurrenceProfile recurrence_profile(const Topology& topology, const nlohmann::json& env_spec,
                                     Vertex start, std::int64_t trials, std::int64_t horizon,
                                     std::uint64_t master_seed, int workers) {
    if (trials <= 0) throw ConfigError("profile: trials must be positive");
    if (horizon <= 0) throw ConfigError("profile: horizon must be positive");
    make_environment(env_spec, topology.kind());

    const auto stats = parallel_trials<RunStats>(trials, workers, [&](std::int64_t i) {
        return run_streaming(topology, env_spec, start, horizon,
                             derive_trial_seed(master_seed, static_cast<std::uint64_t>(i)));
    });

    RecurrenceProfile profile;
    profile.trials = trials;
    profile.horizon = horizon;
    const double escape_distance = 3.0 * std::sqrt(static_cast<double>(horizon));
    for (const RunStats& s : stats) {
        const bool escaped = s.last_return_time < horizon / 10 &&
                             static_cast<double>(s.final_displacement) > escape_distance;
        profile.escaped += escaped ? 1 : 0;
        profile.mean_returns += static_cast<double>(s.returns_to_start);
        profile.mean_final_displacement += static_cast<double>(s.final_displacement);
    }
    profile.mean_returns /= static_cast<double>(trials);
    profile.mean_final_displacement /= static_cast<double>(trials);
    profile.escaped_fraction =
        static_cast<double>(profile.escaped) / static_cast<double>(trials);
    profile.rule =
        "escaped := last return before horizon/10 and final displacement > 3*sqrt(horizon); "
        "label: <=5% escaped -> recurrent-like, >=95% -> transient-like, else mixed-like "
        "(finite-horizon heuristic, not a proof)";
    if (trials < 20)
        profile.label = "inconclusive";
    else if (profile.escaped_fraction <= 0.05)
        profile.label = "recurrent-like";
    else if (profile.escaped_fraction >= 0.95)
        profile.label = "transient-like";
    else
        profile.label = "mixed-like";
    return profile;
}

}  // namespace rwce
