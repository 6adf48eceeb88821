#include "rwce/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "rwce/environment.hpp"

namespace rwce {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_row(Time t, double residual, double drift, double f) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g\n", static_cast<long long>(t),
                  residual, drift, f);
    return buf;
}

}  // namespace

double line_resistance(const LineWeightFn& weights, Vertex a, Vertex b) {
    if (a > b) std::swap(a, b);
    CompensatedSum sum;
    for (Vertex j = a; j < b; ++j) {
        const double c = weights(j);
        if (!(c > 0.0) || !std::isfinite(c))
            throw ZeroWeightEdge("zero or invalid weight on edge " + std::to_string(j));
        sum.add(1.0 / c);
    }
    return sum.value();
}

namespace {

// R(v) = resistance from v to the radius-n boundary through its subtree;
// 0 on the boundary, infinite at internal dead ends.
double subtree_resistance(const Topology& tree, const TreeWeightFn& weights, Vertex v,
                          int depth, int radius) {
    if (depth == radius) return 0.0;
    CompensatedSum conductance;
    for (Vertex child : tree.tree_children(v)) {
        const double c = weights(Edge(v, child));
        if (!(c > 0.0)) continue;
        const double r = 1.0 / c + subtree_resistance(tree, weights, child, depth + 1, radius);
        if (std::isfinite(r)) conductance.add(1.0 / r);
    }
    const double total = conductance.value();
    return total > 0.0 ? 1.0 / total : kInf;
}

void distribute_flow(const Topology& tree, const TreeWeightFn& weights, Vertex v, int depth,
                     int radius, double inflow, FlowMap& flow) {
    if (depth == radius || inflow == 0.0) return;
    std::vector<double> branch;
    const auto& children = tree.tree_children(v);
    branch.reserve(children.size());
    CompensatedSum total;
    for (Vertex child : children) {
        const double c = weights(Edge(v, child));
        double g = 0.0;
        if (c > 0.0) {
            const double r = 1.0 / c + subtree_resistance(tree, weights, child, depth + 1, radius);
            if (std::isfinite(r)) g = 1.0 / r;
        }
        branch.push_back(g);
        total.add(g);
    }
    const double denom = total.value();
    if (!(denom > 0.0)) return;  // dead end: current cannot continue
    for (std::size_t i = 0; i < children.size(); ++i) {
        const double out = inflow * (branch[i] / denom);
        if (out == 0.0) continue;
        flow.flow_into[children[i]] = out;
        distribute_flow(tree, weights, children[i], depth + 1, radius, out, flow);
    }
}

}  // namespace

double tree_effective_resistance(const Topology& tree, const TreeWeightFn& weights, int radius) {
    if (radius <= 0) throw EmptyBall("ball radius must be positive");
    return subtree_resistance(tree, weights, 0, 0, radius);
}

FlowMap tree_unit_current_flow(const Topology& tree, const TreeWeightFn& weights, int radius) {
    if (radius <= 0) throw EmptyBall("ball radius must be positive");
    FlowMap flow;
    flow.radius = radius;
    flow.total_out_of_root = 1.0;
    distribute_flow(tree, weights, 0, 0, radius, 1.0, flow);
    return flow;
}

std::unordered_map<Vertex, double> potential_from_flow(const Topology& tree,
                                                       const TreeWeightFn& weights,
                                                       const FlowMap& flow) {
    std::unordered_map<Vertex, double> potential;
    potential.reserve(flow.flow_into.size() + 1);
    potential[0] = 0.0;
    // BFS numbering makes parent < child, so ascending vertex order works.
    std::vector<Vertex> order;
    order.reserve(flow.flow_into.size());
    for (const auto& [v, i] : flow.flow_into) order.push_back(v);
    std::sort(order.begin(), order.end());
    for (Vertex v : order) {
        const Vertex p = tree.tree_parent(v);
        const double c = weights(Edge(p, v));
        if (!(c > 0.0) || !std::isfinite(c))
            throw ZeroWeightEdge("zero or invalid weight above vertex " + std::to_string(v));
        potential[v] = potential.at(p) + flow.flow_into.at(v) / c;
    }
    return potential;
}

double harmonicity_residual(const std::function<double(Vertex)>& potential,
                            const std::function<double(const Edge&)>& weights,
                            const Topology& topology, Vertex v) {
    std::vector<Vertex> neighbors;
    topology.neighbors(v, neighbors);
    const double fv = potential(v);
    CompensatedSum sum;
    for (Vertex u : neighbors) sum.add(weights(Edge(v, u)) * (potential(u) - fv));
    return sum.value();
}

// ----- martingale monitor ------------------------------------------------

namespace {

// Shared drift bookkeeping: adjusted so that a correct potential sequence
// keeps the value <= 0 up to rounding.
struct DriftSense {
    int direction;  // +1: F must not increase; -1: F must not decrease; 0: constant
    double adjust(double delta) const {
        if (direction > 0) return delta;
        if (direction < 0) return -delta;
        return std::abs(delta);
    }
};

DriftSense drift_sense(const Environment& env) {
    switch (env.info().monotonicity) {
        case Monotonicity::Increasing: return {+1};
        case Monotonicity::Decreasing: return {-1};
        case Monotonicity::None: return {0};
    }
    return {0};
}

class LinePotential {
public:
    LinePotential(const PotentialSpec& spec, Vertex start, std::int64_t steps)
        : spec_(spec) {
        switch (spec.kind) {
            case PotentialKind::LineToZero:
                window_ = start + 2;
                break;
            case PotentialKind::LineToTarget:
                if (spec.target <= 0) throw ConfigError("monitor: target must be positive");
                window_ = spec.target;
                break;
            case PotentialKind::LineToInfinity:
                window_ = spec.horizon > 0 ? spec.horizon : start + steps + 1;
                break;
            default:
                throw ConfigError("monitor: line potential kind on a tree spec");
        }
    }

    void grow_to(Vertex position) {
        if (spec_.kind == PotentialKind::LineToZero)
            window_ = std::max<std::int64_t>(window_, position + 2);
    }

    std::int64_t window() const { return window_; }

    // prefix[v] = sum_{j<v} 1/C_t(j) over the tracked window, long double.
    void refresh(const WalkState& walk) {
        prefix_.assign(static_cast<std::size_t>(window_) + 1, 0.0L);
        for (std::int64_t j = 0; j < window_; ++j) {
            const double c = walk.edge_weight(line_edge(j));
            if (!(c > 0.0))
                throw ZeroWeightEdge("zero or invalid weight on edge " + std::to_string(j));
            // Overflowed conductances contribute the limit resistance 0.
            const long double r = std::isinf(c) ? 0.0L : 1.0L / static_cast<long double>(c);
            prefix_[static_cast<std::size_t>(j) + 1] = prefix_[static_cast<std::size_t>(j)] + r;
        }
    }

    long double value(Vertex v) const {
        const auto idx = static_cast<std::size_t>(v);
        switch (spec_.kind) {
            case PotentialKind::LineToZero: return prefix_[idx];
            case PotentialKind::LineToTarget: return prefix_.back() - prefix_[idx];
            default: return prefix_.back() - prefix_[idx];  // LineToInfinity
        }
    }

    bool stopped(Vertex v) const {
        if (v == 0) return true;
        return spec_.kind == PotentialKind::LineToTarget && v == spec_.target;
    }

    std::vector<long double> snapshot(std::int64_t upto) const {
        std::vector<long double> values(static_cast<std::size_t>(upto) + 1);
        for (std::int64_t v = 0; v <= upto; ++v) values[static_cast<std::size_t>(v)] = value(v);
        return values;
    }

private:
    PotentialSpec spec_;
    std::int64_t window_ = 0;
    std::vector<long double> prefix_;
};

class TreePotential {
public:
    TreePotential(const Topology& tree, const Environment& env, const PotentialSpec& spec)
        : tree_(tree), radius_(spec.tree_radius) {
        if (radius_ <= 0) throw ConfigError("monitor: tree_radius must be positive");
        const bool use_upper = spec.tree_bound == PotentialSpec::TreeBound::Upper;
        TreeWeightFn bound_weights = [&env, use_upper](const Edge& e) {
            const auto b = use_upper ? env.upper_bound(e) : env.lower_bound(e);
            if (!b) throw HypothesisMismatch("flow potential needs declared edge bounds");
            return *b;
        };
        flow_ = tree_unit_current_flow(tree, bound_weights, radius_);
        // Ball vertices in BFS order (parent precedes child).
        ball_.push_back(0);
        for (const auto& [v, i] : flow_.flow_into) ball_.push_back(v);
        std::sort(ball_.begin() + 1, ball_.end());
    }

    void refresh(const WalkState& walk) {
        values_.clear();
        values_.reserve(ball_.size());
        values_[0] = 0.0L;
        for (std::size_t i = 1; i < ball_.size(); ++i) {
            const Vertex v = ball_[i];
            const Vertex p = tree_.tree_parent(v);
            const double c = walk.edge_weight(Edge(p, v));
            if (!(c > 0.0) || !std::isfinite(c))
            throw ZeroWeightEdge("zero or invalid weight above vertex " + std::to_string(v));
            values_[v] = values_.at(p)
                + static_cast<long double>(flow_.flow_into.at(v)) / static_cast<long double>(c);
        }
    }

    long double value(Vertex v) const {
        const auto it = values_.find(v);
        if (it == values_.end())
            throw HypothesisMismatch("walker left the positive-flow ball before stopping");
        return it->second;
    }

    bool stopped(Vertex v) const {
        return v == 0 || tree_.tree_depth(v) == radius_;
    }

    const std::vector<Vertex>& ball() const { return ball_; }

    std::unordered_map<Vertex, long double> snapshot() const { return values_; }

private:
    const Topology& tree_;
    int radius_;
    FlowMap flow_;
    std::vector<Vertex> ball_;
    std::unordered_map<Vertex, long double> values_;
};

// Probes the declared lower bounds past the truncation point; when they form
// a growing geometric sequence the discarded resistance tail is summable and
// its closed form is reported.
std::optional<double> geometric_tail_bound(const Environment& env, std::int64_t horizon) {
    double probe[4];
    for (int k = 0; k < 4; ++k) {
        const auto b = env.lower_bound(line_edge(horizon + k));
        if (!b || !(*b > 0.0) || !std::isfinite(*b)) return std::nullopt;
        probe[k] = *b;
    }
    const double ratio = probe[1] / probe[0];
    for (int k = 1; k < 3; ++k)
        if (std::abs(probe[k + 1] / probe[k] - ratio) > 1e-9 * ratio) return std::nullopt;
    if (!(ratio > 1.0)) return std::nullopt;
    return (1.0 / probe[0]) * ratio / (ratio - 1.0);
}

}  // namespace

MonitorReport martingale_monitor(const Topology& topology, const nlohmann::json& env_spec,
                                 Vertex start, std::int64_t steps, std::uint64_t seed,
                                 const PotentialSpec& potential, const Trajectory* expected) {
    const bool on_tree = potential.kind == PotentialKind::TreeFlowVoltage;
    if (on_tree && topology.kind() != TopologyKind::RootedTree)
        throw ConfigError("monitor: flow potential requires a rooted tree");
    if (!on_tree && topology.kind() != TopologyKind::LineN)
        throw ConfigError("monitor: line potentials require the half-line");

    WalkState walk(topology, make_environment(env_spec, topology.kind()), start, seed);
    const DriftSense sense = drift_sense(walk.environment());

    MonitorReport report;
    report.drift_direction = sense.direction;

    std::optional<LinePotential> line;
    std::optional<TreePotential> tree;
    if (on_tree)
        tree.emplace(topology, walk.environment(), potential);
    else
        line.emplace(potential, start, steps);

    if (!on_tree && potential.kind == PotentialKind::LineToInfinity)
        report.truncation_tail_bound = geometric_tail_bound(walk.environment(), line->window());

    auto check_replay = [&](Time t, Vertex pos) {
        if (!expected) return;
        const auto idx = static_cast<std::size_t>(t);
        if (idx >= expected->points.size() || expected->points[idx].second != pos)
            throw ReplayMismatch("replayed position diverges at t=" + std::to_string(t));
    };

    check_replay(0, walk.position());
    report.rows.reserve(static_cast<std::size_t>(steps));

    for (std::int64_t t = 0; t < steps; ++t) {
        const Vertex pos = walk.position();
        const bool is_stopped = on_tree ? tree->stopped(pos) : line->stopped(pos);
        if (is_stopped) {
            report.stopped_at = t;
            break;
        }

        if (line) {
            line->grow_to(pos);
            line->refresh(walk);
        } else {
            tree->refresh(walk);
        }

        // (i) harmonic step identity at the walker.
        const TransitionDistribution dist = walk.transition_distribution();
        const long double fv = on_tree ? tree->value(pos) : line->value(pos);
        long double residual = 0.0L;
        for (std::size_t i = 0; i < dist.neighbors.size(); ++i) {
            const long double fu =
                on_tree ? tree->value(dist.neighbors[i]) : line->value(dist.neighbors[i]);
            residual += static_cast<long double>(dist.probability[i]) * (fu - fv);
        }

        // (ii) pointwise monotone drift across the update at t+1.
        const std::int64_t old_window = line ? line->window() : 0;
        std::vector<long double> before_line;
        std::unordered_map<Vertex, long double> before_tree;
        if (line) before_line = line->snapshot(old_window);
        else before_tree = tree->snapshot();

        walk.step();
        check_replay(walk.time(), walk.position());

        if (line) {
            line->grow_to(walk.position());
            line->refresh(walk);
        } else {
            tree->refresh(walk);
        }

        double drift = -kInf;
        if (line) {
            for (std::int64_t v = 0; v <= old_window; ++v) {
                const long double delta =
                    line->value(v) - before_line[static_cast<std::size_t>(v)];
                drift = std::max(drift, sense.adjust(static_cast<double>(delta)));
            }
        } else {
            for (Vertex v : tree->ball()) {
                const long double delta = tree->value(v) - before_tree.at(v);
                drift = std::max(drift, sense.adjust(static_cast<double>(delta)));
            }
        }

        const double res = static_cast<double>(residual);
        report.rows.push_back({t, res, drift, static_cast<double>(fv)});
        report.max_abs_residual = std::max(report.max_abs_residual, std::abs(res));
        report.max_signed_drift = std::max(report.max_signed_drift, drift);
    }

    if (!report.stopped_at) {
        const Vertex pos = walk.position();
        if ((on_tree && tree->stopped(pos)) || (!on_tree && line->stopped(pos)))
            report.stopped_at = walk.time();
    }
    return report;
}

void export_monitor_csv(std::ostream& os, const MonitorReport& report) {
    os << "t,harmonic_residual,monotone_drift,F_at_walker\n";
    for (const MonitorRow& row : report.rows)
        os << format_row(row.t, row.harmonic_residual, row.monotone_drift,
                         row.potential_at_walker);
}

}  // namespace rwce
