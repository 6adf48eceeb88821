#ifndef RWCE_MAW_HPP
#define RWCE_MAW_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rwce/montecarlo.hpp"
#include "rwce/rng.hpp"

namespace rwce::maw {

struct LatticePoint {
    std::int32_t x = 0;
    std::int32_t y = 0;
    bool operator==(const LatticePoint&) const = default;
};

// Canonical direction order; shared by every kernel here.
enum Direction { Left = 0, Up = 1, Right = 2, Down = 3 };
LatticePoint moved(LatticePoint p, int direction);

// Exact joint step table for the coupled pair at a fresh (non-NV) vertex,
// indexed [srw_direction][maw_direction], as fractions over 28. The simple
// walk's marginal is uniform; the boosted walk's is (1/7, 2/7, 2/7, 2/7).
std::array<std::array<int, 4>, 4> coupling_table_numerators();
constexpr int kCouplingDenominator = 28;

struct CoupledDelta {
    std::int64_t d1 = 0;  // accumulated first-coordinate gap
    std::int64_t d2 = 0;  // accumulated second-coordinate gap
    bool operator==(const CoupledDelta&) const = default;
};

// Coupled pair state: a boosted walker on its own evolving lattice plus a
// simple walker fed from the same randomness. NV vertices (left neighbor
// already visited by the boosted walker) force identical moves.
struct CoupledState {
    LatticePoint boosted;
    LatticePoint simple;
    std::unordered_set<Vertex> visited;  // packed vertices seen by the boosted walker
    CoupledDelta delta;
    Time time = 0;
    Rng rng;

    explicit CoupledState(std::uint64_t seed);
};

bool at_nv_vertex(const CoupledState& state);
void coupled_step(CoupledState& state);

struct CoupledTrajectory {
    std::int64_t steps = 0;
    std::vector<LatticePoint> boosted;  // positions 0..steps when recorded
    std::vector<LatticePoint> simple;
    std::vector<std::pair<Time, CoupledDelta>> delta_changes;  // includes t = 0
    CoupledDelta final_delta;
    LatticePoint final_boosted;
    LatticePoint final_simple;
    std::int64_t fresh_steps = 0;  // steps taken at non-NV vertices
};

CoupledTrajectory run_coupled(std::int64_t steps, std::uint64_t seed,
                              bool record_positions = true);

// ----- tan points ----------------------------------------------------------

// Funnel membership: x >= -1 and |y| <= coefficient * sqrt(x + 2).
struct WidthRule {
    double coefficient = 1.0;
    std::string label() const;
};
WidthRule log_cubed_width_rule(std::int64_t n);  // coefficient = ln(n)^3
WidthRule unit_width_rule();                     // coefficient = 1

bool funnel_contains(std::int64_t x, std::int64_t y, const WidthRule& rule);

using Path = std::vector<LatticePoint>;  // R(0), ..., R(n)

Path simple_random_walk_path(std::int64_t steps, std::uint64_t seed);

// m is a tan point of the length-n path when, with s = ceil(n^epsilon):
//   (1) R(j) != R(m) + (-1, 0) for every j in [m - s, m], and
//   (2) R(j) - R(m) lies outside the funnel for every j in [0, m - s].
// Only meaningful for m in [n^{2 epsilon}, n]; out-of-window indices are
// rejected and reported via `flagged_reason`.
bool is_tan_point(const Path& path, std::int64_t m, double epsilon, const WidthRule& rule,
                  std::string* flagged_reason = nullptr);

struct TanPointReport {
    std::int64_t n = 0;
    double epsilon = 0.0;
    std::string width_rule;
    std::uint64_t seed = 0;
    std::vector<std::int64_t> tan_indices;
    std::vector<std::int64_t> separated;  // greedy subset, pairwise gaps > n^epsilon
};

TanPointReport count_separated_tan_points(const Path& path, double epsilon,
                                          const WidthRule& rule);

// CSV, header "n,epsilon,width_rule,count,separated_count,seed".
void export_tan_point_csv(std::ostream& os, std::span<const TanPointReport> reports);

// P(a simple walk avoids (-1, 0) for its first ceil(n^epsilon) steps).
EstimateWithCI left_avoidance_probability(std::int64_t n, double epsilon, std::int64_t trials,
                                          std::uint64_t master_seed);

// ----- displacement gap statistics ------------------------------------------

// max over 0 <= k < l <= steps of |D2(k,l)| / sqrt(D1(k,l) + 1) where
// D(k,l) = Delta(l) - Delta(k); evaluated over the compressed change points.
struct DBoundResult {
    double statistic = 0.0;
    Time k = 0, l = 0;
    CoupledDelta window;  // D(k, l) at the maximizing pair
};
DBoundResult d_bound_statistic(const CoupledTrajectory& trajectory);

struct DriftRow {
    std::int64_t n = 0;
    std::int64_t trials = 0;
    double mean_drift = 0.0;    // mean of Delta_1(n)
    double stderr_drift = 0.0;
    double mean_e1 = 0.0;       // mean first coordinate of the boosted walker
    double mean_d2 = 0.0;       // mean of Delta_2(n)
};

struct DriftResult {
    std::vector<DriftRow> rows;
    // Fitted exponent of the power law mean_drift ~ n^s (zero-intercept
    // least squares of log mean_drift against log n).
    double loglog_slope = 0.0;
};

DriftResult drift_experiment(std::span<const std::int64_t> n_values, std::int64_t trials,
                             std::uint64_t master_seed, int workers);

// CSV, header "n,trials,mean_drift,stderr_drift,mean_E1,mean_D2".
void export_drift_csv(std::ostream& os, const DriftResult& result);

}  // namespace rwce::maw

#endif
