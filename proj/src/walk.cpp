#include "rwce/walk.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

namespace rwce {

WalkState::WalkState(Topology topology, std::unique_ptr<Environment> env, Vertex start,
                     std::uint64_t seed)
    : topology_(std::move(topology)),
      env_(std::move(env)),
      start_(start),
      position_(start),
      rng_(seed) {
    if (!topology_.has_vertex(start)) throw ConfigError("start vertex is not in the topology");
    visit_counts_[position_] = 1;
    apply_environment_updates();
}

double WalkState::edge_weight(const Edge& e) const {
    auto it = overrides_.find(e);
    if (it != overrides_.end()) return it->second;
    return env_->default_weight(e, time_);
}

StateView WalkState::make_view() const {
    StateView view;
    view.time = time_;
    view.position = position_;
    view.previous = previous_;
    view.has_previous = has_previous_;
    view.weight = [this](const Edge& e) { return edge_weight(e); };
    view.visited = [this](Vertex v) { return visited(v); };
    return view;
}

void WalkState::apply_environment_updates() {
    update_buf_.clear();
    env_->on_arrival(make_view(), update_buf_);
    const Monotonicity mono = env_->info().monotonicity;
    for (const EdgeUpdate& u : update_buf_) {
        if (!(u.weight >= 0.0) || !std::isfinite(u.weight))
            throw BoundViolation("environment emitted a negative or non-finite weight");
        const double old_weight = edge_weight(u.edge);
        if (mono == Monotonicity::Increasing && u.weight < old_weight)
            throw MonotonicityViolation("increasing environment emitted a decrease");
        if (mono == Monotonicity::Decreasing && u.weight > old_weight)
            throw MonotonicityViolation("decreasing environment emitted an increase");
        if (auto lo = env_->lower_bound(u.edge); lo && u.weight < *lo - 1e-15 * std::abs(*lo))
            throw BoundViolation("environment update below declared lower bound");
        if (auto hi = env_->upper_bound(u.edge); hi && u.weight > *hi + 1e-15 * std::abs(*hi))
            throw BoundViolation("environment update above declared upper bound");
        overrides_[u.edge] = u.weight;
    }
}

TransitionDistribution WalkState::transition_distribution() const {
    topology_.neighbors(position_, neighbor_buf_);
    TransitionDistribution dist;
    dist.neighbors = neighbor_buf_;
    dist.probability.resize(dist.neighbors.size());
    double total = 0.0;
    for (size_t i = 0; i < dist.neighbors.size(); ++i) {
        const double w = edge_weight(Edge(position_, dist.neighbors[i]));
        dist.probability[i] = w;
        total += w;
    }
    if (!(total > 0.0)) throw AllIncidentZero();
    for (double& p : dist.probability) p /= total;
    return dist;
}

void WalkState::step() {
    const TransitionDistribution dist = transition_distribution();
    const double u = rng_.uniform();
    size_t pick = dist.neighbors.size() - 1;
    double acc = 0.0;
    for (size_t i = 0; i < dist.probability.size(); ++i) {
        acc += dist.probability[i];
        if (u < acc) { pick = i; break; }
    }
    previous_ = position_;
    has_previous_ = true;
    position_ = dist.neighbors[pick];
    ++time_;
    ++visit_counts_[position_];
    apply_environment_updates();
}

namespace {

template <typename OnPoint>
StopReason drive(WalkState& state, std::int64_t steps, OnPoint&& on_point) {
    on_point(state.time(), state.position());
    for (std::int64_t i = 0; i < steps; ++i) {
        try {
            state.step();
        } catch (const AllIncidentZero&) {
            return StopReason::Absorbed;
        }
        on_point(state.time(), state.position());
    }
    return StopReason::Completed;
}

}  // namespace

Trajectory run(const Topology& topology, const nlohmann::json& env_spec, Vertex start,
               std::int64_t steps, std::uint64_t seed,
               std::span<const std::unordered_set<Vertex>> target_sets) {
    if (steps < 0) throw ConfigError("steps must be >= 0");
    WalkState state(topology, make_environment(env_spec, topology.kind()), start, seed);
    Trajectory traj;
    traj.start = start;
    traj.points.reserve(static_cast<size_t>(steps) + 1);
    traj.first_hits.assign(target_sets.size(), std::nullopt);
    traj.stop_reason = drive(state, steps, [&](Time t, Vertex v) {
        traj.points.emplace_back(t, v);
        if (t > 0 && v == start) {
            ++traj.returns_to_start;
            traj.last_return_time = t;
        }
        traj.max_displacement = std::max(traj.max_displacement, topology.distance(start, v));
        for (size_t s = 0; s < target_sets.size(); ++s)
            if (!traj.first_hits[s] && target_sets[s].count(v)) traj.first_hits[s] = t;
    });
    return traj;
}

RunStats run_streaming(const Topology& topology, const nlohmann::json& env_spec, Vertex start,
                       std::int64_t steps, std::uint64_t seed) {
    if (steps < 0) throw ConfigError("steps must be >= 0");
    WalkState state(topology, make_environment(env_spec, topology.kind()), start, seed);
    RunStats stats;
    stats.stop_reason = drive(state, steps, [&](Time t, Vertex v) {
        if (t > 0 && v == start) {
            ++stats.returns_to_start;
            stats.last_return_time = t;
        }
        stats.max_displacement = std::max(stats.max_displacement, topology.distance(start, v));
        stats.final_position = v;
        stats.steps_taken = t;
    });
    stats.final_displacement = topology.distance(start, stats.final_position);
    return stats;
}

double exact_hit_probability(std::span<const double> weights, Vertex start) {
    const auto v = static_cast<Vertex>(weights.size());
    if (v <= 1) throw DegenerateSegment("segment [0, v] needs v > 1");
    if (start < 0 || start > v) throw ConfigError("start must lie in [0, v]");
    if (start == 0) return 0.0;
    if (start == v) return 1.0;
    CompensatedSum to_start, to_v;
    for (Vertex j = 0; j < v; ++j) {
        if (!(weights[static_cast<size_t>(j)] > 0.0))
            throw ZeroWeightEdge("segment weights must be positive");
        const double r = 1.0 / weights[static_cast<size_t>(j)];
        if (j < start) to_start.add(r);
        to_v.add(r);
    }
    return to_start.value() / to_v.value();
}

void export_trajectory_csv(std::ostream& os, const Trajectory& trajectory, TopologyKind kind,
                           std::int64_t thin) {
    if (thin < 1) thin = 1;
    const bool lattice = kind == TopologyKind::Lattice2D;
    os << (lattice ? "t,x,y\n" : "t,x\n");
    char buf[96];
    const size_t n = trajectory.points.size();
    for (size_t i = 0; i < n; ++i) {
        if (i % static_cast<size_t>(thin) != 0 && i + 1 != n) continue;
        const auto& [t, v] = trajectory.points[i];
        if (lattice)
            std::snprintf(buf, sizeof buf, "%lld,%d,%d\n", static_cast<long long>(t),
                          lattice_x(v), lattice_y(v));
        else
            std::snprintf(buf, sizeof buf, "%lld,%lld\n", static_cast<long long>(t),
                          static_cast<long long>(v));
        os << buf;
    }
}

}  // namespace rwce
