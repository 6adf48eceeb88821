#ifndef RWCE_POTENTIAL_HPP
#define RWCE_POTENTIAL_HPP

#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rwce/topology.hpp"
#include "rwce/walk.hpp"

namespace rwce {

using LineWeightFn = std::function<double(Vertex)>;      // conductance of edge (j, j+1)
using TreeWeightFn = std::function<double(const Edge&)>;

// Resistance between a and b on the line: sum_{j=a}^{b-1} 1/C(j),
// compensated summation. Throws ZeroWeightEdge if any weight in range is <= 0.
double line_resistance(const LineWeightFn& weights, Vertex a, Vertex b);

// Unit current flow on the radius-n ball of a rooted tree, oriented away
// from the root. flow_into[v] is the current on the edge (parent(v), v).
struct FlowMap {
    std::unordered_map<Vertex, double> flow_into;
    int radius = 0;
    double total_out_of_root = 0.0;
};

// Effective resistance between the root and the boundary of the radius-n
// ball, by leafward series-parallel recursion. Throws EmptyBall for n == 0.
double tree_effective_resistance(const Topology& tree, const TreeWeightFn& weights, int radius);

// The unit current flow induced by grounding the radius-n boundary: current
// entering v splits among children proportionally to 1/(1/C(e) + R(child)).
FlowMap tree_unit_current_flow(const Topology& tree, const TreeWeightFn& weights, int radius);

// Flow-induced voltages: F(v) = sum over root-path edges of i(e)/C_t(e),
// F(root) = 0. The flow stays fixed while C_t evolves.
std::unordered_map<Vertex, double> potential_from_flow(const Topology& tree,
                                                       const TreeWeightFn& weights,
                                                       const FlowMap& flow);

// Sum over neighbors u of C(v,u) * (F(u) - F(v)); zero certifies harmonicity
// at the interior vertex v.
double harmonicity_residual(const std::function<double(Vertex)>& potential,
                            const std::function<double(const Edge&)>& weights,
                            const Topology& topology, Vertex v);

// ----- martingale monitor ------------------------------------------------

enum class PotentialKind {
    LineToZero,      // F_t(v) = resistance between 0 and v
    LineToInfinity,  // F_t(v) = resistance between v and infinity, truncated
    LineToTarget,    // F_t(v) = resistance between v and a finite target n
    TreeFlowVoltage, // F_t(v) = voltage induced by a fixed unit current flow
};

struct PotentialSpec {
    PotentialKind kind = PotentialKind::LineToZero;
    Vertex target = 0;           // LineToTarget endpoint
    std::int64_t horizon = 0;    // LineToInfinity truncation; 0 = auto
    int tree_radius = 0;         // TreeFlowVoltage ball radius
    // Which declared environment bound supplies the flow-defining weights.
    enum class TreeBound { Upper, Lower } tree_bound = TreeBound::Upper;
};

struct MonitorRow {
    Time t;
    double harmonic_residual;  // sum_u P_t(u) F_t(u) - F_t(X_t)
    double monotone_drift;     // sign-adjusted max_v (F_{t+1}(v) - F_t(v))
    double potential_at_walker;
};

struct MonitorReport {
    std::vector<MonitorRow> rows;
    double max_abs_residual = 0.0;
    double max_signed_drift = 0.0;   // max over steps of the adjusted drift
    int drift_direction = 0;         // +1 supermartingale, -1 submartingale, 0 constant
    std::optional<double> truncation_tail_bound;
    std::optional<Time> stopped_at;  // first hit of the stopped set, if reached
};

// Replays the seeded walk and reports, per step, the harmonic-step identity
// residual and the pointwise monotone drift of the potential sequence. If
// `expected` is given, positions are checked against it (ReplayMismatch).
MonitorReport martingale_monitor(const Topology& topology, const nlohmann::json& env_spec,
                                 Vertex start, std::int64_t steps, std::uint64_t seed,
                                 const PotentialSpec& potential,
                                 const Trajectory* expected = nullptr);

// Monitor CSV, header "t,harmonic_residual,monotone_drift,F_at_walker".
void export_monitor_csv(std::ostream& os, const MonitorReport& report);

}  // namespace rwce

#endif
