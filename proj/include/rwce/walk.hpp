#ifndef RWCE_WALK_HPP
#define RWCE_WALK_HPP

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rwce/environment.hpp"
#include "rwce/rng.hpp"
#include "rwce/topology.hpp"

namespace rwce {

// Exact step distribution at the current state, neighbors listed in the
// topology's canonical order. Probabilities are proportional to the incident
// edge weights and sum to 1 within 1e-15.
struct TransitionDistribution {
    std::vector<Vertex> neighbors;
    std::vector<double> probability;
};

// Walk engine state: exclusively owned by one logical thread. The single
// sequencing rule is update-then-step: on every arrival (including the
// initial placement) the environment emits its conductance updates before
// the next draw, so the walker always samples from the post-update weights.
class WalkState {
public:
    WalkState(Topology topology, std::unique_ptr<Environment> env, Vertex start,
              std::uint64_t seed);

    Time time() const { return time_; }
    Vertex position() const { return position_; }
    Vertex start() const { return start_; }
    const Topology& topology() const { return topology_; }
    const Environment& environment() const { return *env_; }

    double edge_weight(const Edge& e) const;
    bool visited(Vertex v) const { return visit_counts_.count(v) > 0; }
    std::int64_t visit_count(Vertex v) const {
        auto it = visit_counts_.find(v);
        return it == visit_counts_.end() ? 0 : it->second;
    }

    // Throws AllIncidentZero when every incident weight is 0 (absorbed).
    TransitionDistribution transition_distribution() const;

    // One engine step: sample from the current distribution via inverse CDF,
    // advance time, record the visit, apply and validate the environment's
    // updates. Throws AllIncidentZero / MonotonicityViolation / BoundViolation.
    void step();

private:
    void apply_environment_updates();
    StateView make_view() const;

    Topology topology_;
    std::unique_ptr<Environment> env_;
    Time time_ = 0;
    Vertex start_;
    Vertex position_;
    Vertex previous_ = 0;
    bool has_previous_ = false;
    std::unordered_map<Edge, double, EdgeHash> overrides_;
    std::unordered_map<Vertex, std::int64_t> visit_counts_;
    Rng rng_;
    mutable std::vector<Vertex> neighbor_buf_;
    mutable std::vector<EdgeUpdate> update_buf_;
};

enum class StopReason { Completed, Absorbed };

struct Trajectory {
    std::vector<std::pair<Time, Vertex>> points;
    Vertex start = 0;
    std::int64_t returns_to_start = 0;
    std::int64_t max_displacement = 0;
    Time last_return_time = 0;
    StopReason stop_reason = StopReason::Completed;
    // First-hit times for the target sets registered with run(), in order.
    std::vector<std::optional<Time>> first_hits;
};

// Deterministic given all inputs; stops early (with recorded reason) if the
// walker is absorbed.
Trajectory run(const Topology& topology, const nlohmann::json& env_spec, Vertex start,
               std::int64_t steps, std::uint64_t seed,
               std::span<const std::unordered_set<Vertex>> target_sets = {});

// Streaming variant keeping only the summary counters (no point storage).
struct RunStats {
    Vertex final_position = 0;
    std::int64_t steps_taken = 0;
    std::int64_t returns_to_start = 0;
    std::int64_t max_displacement = 0;
    std::int64_t final_displacement = 0;
    Time last_return_time = 0;
    StopReason stop_reason = StopReason::Completed;
};
RunStats run_streaming(const Topology& topology, const nlohmann::json& env_spec, Vertex start,
                       std::int64_t steps, std::uint64_t seed);

// Probability of hitting v before 0 on the segment [0, v] of LineN with
// fixed weights (weights[j] is the conductance of edge (j, j+1)): the exact
// solution of the discrete harmonic boundary-value problem,
// (sum_{j<start} 1/C(j)) / (sum_{j<v} 1/C(j)), in compensated summation.
double exact_hit_probability(std::span<const double> weights, Vertex start);

// CSV export, header "t,x" (lines/trees) or "t,x,y" (lattice); optional
// thinning factor keeps every k-th row (the first and last always written).
void export_trajectory_csv(std::ostream& os, const Trajectory& trajectory,
                           TopologyKind kind, std::int64_t thin = 1);

}  // namespace rwce

#endif
