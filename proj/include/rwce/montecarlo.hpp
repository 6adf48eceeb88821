#ifndef RWCE_MONTECARLO_HPP
#define RWCE_MONTECARLO_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "rwce/walk.hpp"

namespace rwce {

// ----- estimates ----------------------------------------------------------

struct EstimateWithCI {
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t trials = 0;
    std::int64_t hits = 0;
    std::int64_t capped = 0;     // trials that ran out of steps undecided
    double ci_low = 0.0;         // 99% confidence interval
    double ci_high = 0.0;
    bool exact_binomial = false; // exact tail interval used (extreme counts)
    std::uint64_t master_seed = 0;
};

// Binomial point estimate with a 99% interval: normal approximation when
// both counts are at least 10, exact (Clopper-Pearson) tails otherwise.
EstimateWithCI make_estimate(std::int64_t hits, std::int64_t trials, std::int64_t capped,
                             std::uint64_t master_seed);

struct HitQuery {
    Vertex start = 0;
    std::vector<Vertex> targets;  // hit any of these -> success
    std::vector<Vertex> stops;    // hit any of these first -> failure
    std::int64_t trials = 0;
    std::int64_t step_cap = 0;    // undecided past this many steps -> capped
    std::uint64_t master_seed = 0;
    int workers = 1;
};

// Monte Carlo estimate of P(hit targets before stops). Trial i uses the
// derived seed derive_trial_seed(master_seed, i), so results are identical
// for every worker count. Throws AllTrialsCapped when nothing resolves.
EstimateWithCI estimate_hit_probability(const Topology& topology, const nlohmann::json& env_spec,
                                        const HitQuery& query);

// Runs fn(i) for i in [0, trials) across `workers` threads with a static
// block partition; results land at their trial index.
template <typename T, typename Fn>
std::vector<T> parallel_trials(std::int64_t trials, int workers, Fn fn) {
    std::vector<T> results(static_cast<std::size_t>(trials));
    if (workers <= 1 || trials <= 1) {
        for (std::int64_t i = 0; i < trials; ++i) results[static_cast<std::size_t>(i)] = fn(i);
        return results;
    }
    const int n_threads = static_cast<int>(std::min<std::int64_t>(workers, trials));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w) {
        pool.emplace_back([&, w] {
            for (std::int64_t i = w; i < trials; i += n_threads)
                results[static_cast<std::size_t>(i)] = fn(i);
        });
    }
    for (auto& t : pool) t.join();
    return results;
}

// ----- theorem bound scenarios ---------------------------------------------

enum class TheoremId { IncRecN, IncTraN, DecTraN, DecRecN, IncRecT, DecTraT };
const char* to_string(TheoremId id);

enum class BoundDirection {
    UpperBoundsEstimate,  // bound >= true probability
    LowerBoundsEstimate,  // bound <= true probability
};

struct BoundScenario {
    TheoremId theorem;
    std::string name;             // same as to_string(theorem)
    Topology topology;
    nlohmann::json env_spec;
    Vertex start = 0;
    std::vector<Vertex> targets;
    std::vector<Vertex> stops;
    BoundDirection direction = BoundDirection::UpperBoundsEstimate;
    std::int64_t step_cap = 0;
    double bound = 0.0;           // computed from the potential machinery
    nlohmann::json inputs;        // echo of everything that produced `bound`
};

// The six pinned scenarios, one per guarantee, with analytically computed
// bounds. Construction validates each scenario's hypotheses and throws
// HypothesisMismatch when a pinned parameter stops satisfying them.
std::vector<BoundScenario> standard_scenarios();
BoundScenario standard_scenario(const std::string& name);

struct BoundCheckReport {
    std::string scenario;
    std::string theorem;
    double bound = 0.0;
    double estimate = 0.0;      // pessimistic fold of capped trials
    double std_error = 0.0;
    std::int64_t trials = 0;
    std::int64_t capped = 0;
    std::string verdict;        // consistent | violation | inconclusive
    nlohmann::json inputs;
};

// Estimates the scenario's probability and compares against the bound.
// Capped trials fold pessimistically (as hits under an upper bound, as
// misses under a lower bound); "violation" requires the estimate to clear
// the bound by 3 standard errors under both the pessimistic and the
// optimistic fold, disagreement between folds yields "inconclusive".
BoundCheckReport check_theorem_bound(const BoundScenario& scenario, std::int64_t trials,
                                     std::uint64_t master_seed, int workers);

// Report CSV, header
// "scenario,theorem,bound,estimate,stderr,trials,capped,verdict".
void export_bound_reports_csv(std::ostream& os, const std::vector<BoundCheckReport>& reports);
nlohmann::json bound_report_json(const BoundCheckReport& report);

// ----- recurrence/transience profile -----------------------------------------

struct RecurrenceProfile {
    std::int64_t trials = 0;
    std::int64_t horizon = 0;
    std::int64_t escaped = 0;
    double escaped_fraction = 0.0;
    double mean_returns = 0.0;
    double mean_final_displacement = 0.0;
    std::string label;  // recurrent-like | transient-like | mixed-like | inconclusive
    std::string rule;   // the decision rule, printed verbatim in reports
};

// Finite-horizon heuristic profile: a trial counts as escaped when its last
// return to the start happened in the first tenth of the run and it ended
// more than 3*sqrt(horizon) away. Labels are advisory, never a theorem.
RecurrenceProfile recurrence_profile(const Topology& topology, const nlohmann::json& env_spec,
                                     Vertex start, std::int64_t trials, std::int64_t horizon,
                                     std::uint64_t master_seed, int workers);

}  // namespace rwce

#endif
