#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "rwce/potential.hpp"
#include "rwce/rng.hpp"

using namespace rwce;

namespace {

const TreeWeightFn kUnitWeights = [](const Edge&) { return 1.0; };

// Voltages on the radius-n ball from the environment-free definition used
// throughout: pass the unit flow through potential_from_flow.
std::unordered_map<Vertex, double> unit_tree_voltages(const Topology& tree,
                                                      const TreeWeightFn& w, int radius) {
    return potential_from_flow(tree, w, tree_unit_current_flow(tree, w, radius));
}

}  // namespace

TEST_CASE("line_resistance closed forms") {
    CHECK(line_resistance([](Vertex) { return 1.0; }, 0, 5) == 5.0);
    // C(j) = 2^j: R(0, 40) = sum 2^{-j} = 2 - 2^{-39}.
    const double r = line_resistance(
        [](Vertex j) { return std::ldexp(1.0, static_cast<int>(j)); }, 0, 40);
    CHECK(r == doctest::Approx(2.0 - std::ldexp(1.0, -39)).epsilon(1e-15));
    CHECK(line_resistance([](Vertex) { return 1.0; }, 3, 3) == 0.0);
    CHECK_THROWS_AS(line_resistance([](Vertex) { return 0.0; }, 0, 2), ZeroWeightEdge);
}

TEST_CASE("effective resistance of unit binary trees") {
    CHECK(tree_effective_resistance(Topology::regular_tree(2, 1), kUnitWeights, 1) == 0.5);
    CHECK(tree_effective_resistance(Topology::regular_tree(2, 2), kUnitWeights, 2) ==
          doctest::Approx(0.75).epsilon(1e-15));
    const double r12 = tree_effective_resistance(Topology::regular_tree(2, 12), kUnitWeights, 12);
    CHECK(std::abs(r12 - (1.0 - std::ldexp(1.0, -12))) <= 1e-12);
    CHECK_THROWS_AS(tree_effective_resistance(Topology::regular_tree(2, 3), kUnitWeights, 0),
                    EmptyBall);
}

TEST_CASE("unit current flow splits evenly on the regular binary tree") {
    const Topology tree = Topology::regular_tree(2, 6);
    const FlowMap flow = tree_unit_current_flow(tree, kUnitWeights, 6);
    CHECK(flow.total_out_of_root == doctest::Approx(1.0).epsilon(1e-15));
    for (const auto& [v, f] : flow.flow_into)
        CHECK(f == doctest::Approx(std::ldexp(1.0, -tree.tree_depth(v))).epsilon(1e-13));
}

TEST_CASE("flow split on an asymmetric tree matches the hand computation") {
    // Root 0 -> {1, 2}; 1 -> {3, 4}; 2 is a leaf. Radius-2 ball, unit weights.
    // Branch through 1: R = 1 + 1/2 = 3/2; branch through 2 is a dead end at
    // depth 1 < radius... so make 2 -> {5}: R = 1 + 1 = 2.
    // Currents split as (1/R1) : (1/R2) = (2/3) : (1/2) = 4 : 3.
    const Topology tree = Topology::rooted_tree({{1, 2}, {3, 4}, {5}, {}, {}, {}});
    const FlowMap flow = tree_unit_current_flow(tree, kUnitWeights, 2);
    CHECK(flow.flow_into.at(1) == doctest::Approx(4.0 / 7.0).epsilon(1e-14));
    CHECK(flow.flow_into.at(2) == doctest::Approx(3.0 / 7.0).epsilon(1e-14));
    CHECK(flow.flow_into.at(3) == doctest::Approx(2.0 / 7.0).epsilon(1e-14));
    // R_eff = 1 / (2/3 + 1/2) = 6/7.
    CHECK(tree_effective_resistance(tree, kUnitWeights, 2) ==
          doctest::Approx(6.0 / 7.0).epsilon(1e-14));
}

TEST_CASE("flow voltages are harmonic inside the ball and R_eff on the boundary") {
    Rng rng(91);
    for (int rep = 0; rep < 10; ++rep) {
        const Topology tree = Topology::regular_tree(rep % 2 == 0 ? 2 : 3, 5);
        std::unordered_map<Edge, double, EdgeHash> table;
        const TreeWeightFn w = [&](const Edge& e) {
            auto it = table.find(e);
            if (it != table.end()) return it->second;
            return table.emplace(e, 0.2 + 2.0 * rng.uniform()).first->second;
        };
        const int radius = 5;
        const double reff = tree_effective_resistance(tree, w, radius);
        const auto voltage = unit_tree_voltages(tree, w, radius);
        const auto pot = [&](Vertex v) { return voltage.at(v); };
        for (const auto& [v, f] : voltage) {
            if (tree.tree_depth(v) == radius) {
                CHECK(f == doctest::Approx(reff).epsilon(1e-11));
            } else if (v == 0) {
                // The root is the unit current source: residual exactly +1.
                CHECK(std::abs(harmonicity_residual(pot, w, tree, v) - 1.0) <= 1e-12);
            } else {
                CHECK(std::abs(harmonicity_residual(pot, w, tree, v)) <= 1e-12);
            }
        }
        // Perturbing one interior voltage must break harmonicity there.
        auto perturbed = voltage;
        perturbed[1] += 0.1;
        const auto pert = [&](Vertex v) { return perturbed.at(v); };
        CHECK(std::abs(harmonicity_residual(pert, w, tree, 1)) > 1e-3);
    }
}

TEST_CASE("Rayleigh monotonicity: raising a conductance cannot raise R_eff") {
    const Topology tree = Topology::regular_tree(3, 4);
    const double base = tree_effective_resistance(tree, kUnitWeights, 4);
    const TreeWeightFn boosted = [](const Edge& e) { return e.v == 1 ? 5.0 : 1.0; };
    CHECK(tree_effective_resistance(tree, boosted, 4) <= base + 1e-15);
}

TEST_CASE("monitor under a constant environment is identically zero") {
    PotentialSpec spec;
    spec.kind = PotentialKind::LineToTarget;
    spec.target = 10;
    const auto report = martingale_monitor(Topology::line_n(), {{"name", "constant"}}, 5, 1000, 21,
                                           spec);
    CHECK(report.max_abs_residual == 0.0);
    CHECK(report.max_signed_drift == 0.0);
    CHECK(report.drift_direction == 0);
}

TEST_CASE("monitor classifies the drift direction of monotone environments") {
    SUBCASE("reinforced_once, c > 1: supermartingale for the to-zero potential") {
        PotentialSpec spec;
        spec.kind = PotentialKind::LineToZero;
        const auto report = martingale_monitor(
            Topology::line_n(), {{"name", "reinforced_once"}, {"c", 3.0}}, 5, 1000, 33, spec);
        CHECK(report.max_abs_residual <= 1e-12);
        CHECK(report.drift_direction == 1);
        CHECK(report.max_signed_drift <= 1e-12);
    }
    SUBCASE("decay_front: submartingale for the to-target potential") {
        PotentialSpec spec;
        spec.kind = PotentialKind::LineToTarget;
        spec.target = 40;
        const auto report = martingale_monitor(Topology::line_n(), {{"name", "decay_front"}}, 5,
                                               1000, 34, spec);
        CHECK(report.max_abs_residual <= 1e-12);
        CHECK(report.drift_direction == -1);
        CHECK(report.max_signed_drift <= 1e-12);
    }
}

TEST_CASE("monitor stops at the stopping set and reports the hit time") {
    PotentialSpec spec;
    spec.kind = PotentialKind::LineToTarget;
    spec.target = 3;
    const auto report = martingale_monitor(Topology::line_n(), {{"name", "constant"}}, 1, 100000,
                                           2, spec);
    REQUIRE(report.stopped_at.has_value());
    CHECK(*report.stopped_at >= 1);
    CHECK(report.rows.size() == static_cast<std::size_t>(*report.stopped_at));
}

TEST_CASE("monitor replay check catches a mismatched trajectory") {
    const Trajectory base = run(Topology::line_n(), {{"name", "constant"}}, 5, 50, 77);
    PotentialSpec spec;
    spec.kind = PotentialKind::LineToTarget;
    spec.target = 10000;
    CHECK_NOTHROW(martingale_monitor(Topology::line_n(), {{"name", "constant"}}, 5, 50, 77, spec,
                                     &base));
    Trajectory wrong = base;
    wrong.points[10].second += 2;
    CHECK_THROWS_AS(martingale_monitor(Topology::line_n(), {{"name", "constant"}}, 5, 50, 77, spec,
                                       &wrong),
                    ReplayMismatch);
}

TEST_CASE("line-to-infinity monitor reports a truncation tail bound") {
    PotentialSpec spec;
    spec.kind = PotentialKind::LineToInfinity;
    const auto report = martingale_monitor(
        Topology::line_n(),
        {{"name", "right_boost"}, {"base", 2.0}, {"scale", 1.0}, {"factor", 2.0}}, 1, 500, 8,
        spec);
    CHECK(report.max_abs_residual <= 1e-12);
    REQUIRE(report.truncation_tail_bound.has_value());
    CHECK(*report.truncation_tail_bound < 1e-50);
}

TEST_CASE("tree flow monitor holds on an incident_boost ball") {
    PotentialSpec spec;
    spec.kind = PotentialKind::TreeFlowVoltage;
    spec.tree_radius = 8;
    spec.tree_bound = PotentialSpec::TreeBound::Upper;
    const auto report = martingale_monitor(
        Topology::regular_tree(2, 8),
        {{"name", "incident_boost"}, {"base", 1.0}, {"scale", 1.0}, {"factor", 2.0}, {"branching", 2}},
        0, 300, 12, spec);
    CHECK(report.max_abs_residual <= 1e-12);
    CHECK(report.drift_direction == 1);
    CHECK(report.max_signed_drift <= 1e-12);
}

TEST_CASE("monitor csv header and row count") {
    PotentialSpec spec;
    spec.kind = PotentialKind::LineToTarget;
    spec.target = 10000;
    const auto report = martingale_monitor(Topology::line_n(), {{"name", "constant"}}, 5, 20, 4,
                                           spec);
    std::ostringstream os;
    export_monitor_csv(os, report);
    const std::string text = os.str();
    CHECK(text.rfind("t,harmonic_residual,monotone_drift,F_at_walker\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') ==
          static_cast<std::int64_t>(report.rows.size()) + 1);
}
