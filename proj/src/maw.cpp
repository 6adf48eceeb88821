#include "rwce/maw.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>

namespace rwce::maw {

namespace {

constexpr std::int32_t kDx[4] = {-1, 0, 1, 0};
constexpr std::int32_t kDy[4] = {0, 1, 0, -1};

Vertex pack(LatticePoint p) { return lattice_vertex(p.x, p.y); }

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

LatticePoint moved(LatticePoint p, int direction) {
    return {p.x + kDx[direction], p.y + kDy[direction]};
}

std::array<std::array<int, 4>, 4> coupling_table_numerators() {
    // [srw][maw] over 28: the simple walk already has mass 1/4 on each
    // up/right/down move, which the boosted walk copies wholesale; its
    // surplus over the 1/7 shared left move is spread from the simple
    // walk's left quarter.
    std::array<std::array<int, 4>, 4> t{};
    t[Left] = {4, 1, 1, 1};
    t[Up][Up] = 7;
    t[Right][Right] = 7;
    t[Down][Down] = 7;
    return t;
}

CoupledState::CoupledState(std::uint64_t seed) : rng(seed) {
    visited.insert(pack(boosted));
}

bool at_nv_vertex(const CoupledState& state) {
    return state.visited.count(pack(moved(state.boosted, Left))) > 0;
}

void coupled_step(CoupledState& state) {
    if (at_nv_vertex(state)) {
        // All four incident weights equal 2 here, so the pair moves together.
        const int d = static_cast<int>(state.rng.below(4));
        state.boosted = moved(state.boosted, d);
        state.simple = moved(state.simple, d);
    } else {
        static const auto table = coupling_table_numerators();
        std::int64_t roll = static_cast<std::int64_t>(state.rng.below(kCouplingDenominator));
        int srw = 0, maw = 0;
        [&] {
            for (srw = 0; srw < 4; ++srw)
                for (maw = 0; maw < 4; ++maw) {
                    roll -= table[static_cast<std::size_t>(srw)][static_cast<std::size_t>(maw)];
                    if (roll < 0) return;
                }
        }();
        state.boosted = moved(state.boosted, maw);
        state.simple = moved(state.simple, srw);
        state.delta.d1 = static_cast<std::int64_t>(state.boosted.x) - state.simple.x;
        state.delta.d2 = static_cast<std::int64_t>(state.boosted.y) - state.simple.y;
    }
    state.visited.insert(pack(state.boosted));
    ++state.time;
}

CoupledTrajectory run_coupled(std::int64_t steps, std::uint64_t seed, bool record_positions) {
    CoupledState state(seed);
    CoupledTrajectory out;
    out.steps = steps;
    out.delta_changes.push_back({0, {0, 0}});
    if (record_positions) {
        out.boosted.reserve(static_cast<std::size_t>(steps) + 1);
        out.simple.reserve(static_cast<std::size_t>(steps) + 1);
        out.boosted.push_back(state.boosted);
        out.simple.push_back(state.simple);
    }
    for (std::int64_t t = 0; t < steps; ++t) {
        const CoupledDelta before = state.delta;
        const bool fresh = !at_nv_vertex(state);
        coupled_step(state);
        if (fresh) ++out.fresh_steps;
        if (!(state.delta == before)) {
            // The gap only moves at fresh vertices, the first coordinate
            // never shrinks, and one step moves it by at most 2.
            const std::int64_t inc1 = state.delta.d1 - before.d1;
            if (!fresh || inc1 < 0 || inc1 > 2 || std::llabs(state.delta.d2 - before.d2) > 1)
                throw Error("coupled walk invariant violated at t=" + std::to_string(t + 1));
            out.delta_changes.push_back({t + 1, state.delta});
        }
        if (record_positions) {
            out.boosted.push_back(state.boosted);
            out.simple.push_back(state.simple);
        }
    }
    out.final_delta = state.delta;
    out.final_boosted = state.boosted;
    out.final_simple = state.simple;
    return out;
}

// ----- tan points ----------------------------------------------------------

std::string WidthRule::label() const {
    if (coefficient == 1.0) return "unit";
    return "coeff=" + format_double(coefficient);
}

WidthRule log_cubed_width_rule(std::int64_t n) {
    if (n < 2) throw ConfigError("width rule: n must be at least 2");
    const double l = std::log(static_cast<double>(n));
    return {l * l * l};
}

WidthRule unit_width_rule() { return {1.0}; }

bool funnel_contains(std::int64_t x, std::int64_t y, const WidthRule& rule) {
    if (x < -1) return false;
    if (rule.coefficient == 1.0) {
        // Exact in integers: |y| <= sqrt(x + 2)  <=>  y^2 <= x + 2.
        return y * y <= x + 2;
    }
    const double w = rule.coefficient * std::sqrt(static_cast<double>(x) + 2.0);
    return std::abs(static_cast<double>(y)) <= w;
}

Path simple_random_walk_path(std::int64_t steps, std::uint64_t seed) {
    Rng rng(seed);
    Path path;
    path.reserve(static_cast<std::size_t>(steps) + 1);
    LatticePoint p;
    path.push_back(p);
    for (std::int64_t t = 0; t < steps; ++t) {
        p = moved(p, static_cast<int>(rng.below(4)));
        path.push_back(p);
    }
    return path;
}

bool is_tan_point(const Path& path, std::int64_t m, double epsilon, const WidthRule& rule,
                  std::string* flagged_reason) {
    const auto n = static_cast<std::int64_t>(path.size()) - 1;
    if (n < 1) throw ConfigError("tan points: empty path");
    const auto s = static_cast<std::int64_t>(std::ceil(std::pow(static_cast<double>(n), epsilon)));
    if (m > n || static_cast<double>(m) < std::pow(static_cast<double>(n), 2.0 * epsilon) ||
        m - s < 0) {
        if (flagged_reason) *flagged_reason = "index outside the [n^(2*epsilon), n] window";
        return false;
    }
    const LatticePoint rm = path[static_cast<std::size_t>(m)];
    const LatticePoint forbidden{rm.x - 1, rm.y};
    for (std::int64_t j = m - s; j <= m; ++j)
        if (path[static_cast<std::size_t>(j)] == forbidden) return false;
    // Scan backward: the early path usually re-enters the funnel close to
    // m - s, which keeps the typical rejection cost tiny.
    for (std::int64_t j = m - s; j >= 0; --j) {
        const LatticePoint rj = path[static_cast<std::size_t>(j)];
        if (funnel_contains(static_cast<std::int64_t>(rj.x) - rm.x,
                            static_cast<std::int64_t>(rj.y) - rm.y, rule))
            return false;
    }
    return true;
}

TanPointReport count_separated_tan_points(const Path& path, double epsilon,
                                          const WidthRule& rule) {
    const auto n = static_cast<std::int64_t>(path.size()) - 1;
    TanPointReport report;
    report.n = n;
    report.epsilon = epsilon;
    report.width_rule = rule.label();
    const double window_start = std::pow(static_cast<double>(n), 2.0 * epsilon);
    const double gap = std::pow(static_cast<double>(n), epsilon);
    std::int64_t last_kept = 0;
    bool have_kept = false;
    for (std::int64_t m = static_cast<std::int64_t>(std::ceil(window_start)); m <= n; ++m) {
        if (!is_tan_point(path, m, epsilon, rule)) continue;
        report.tan_indices.push_back(m);
        if (!have_kept || static_cast<double>(m - last_kept) > gap) {
            have_kept = true;
            report.separated.push_back(m);
            last_kept = m;
        }
    }
    return report;
}

void export_tan_point_csv(std::ostream& os, std::span<const TanPointReport> reports) {
    os << "n,epsilon,width_rule,count,separated_count,seed\n";
    char buf[200];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof(buf), "%lld,%.17g,%s,%zu,%zu,%llu\n",
                      static_cast<long long>(r.n), r.epsilon, r.width_rule.c_str(),
                      r.tan_indices.size(), r.separated.size(),
                      static_cast<unsigned long long>(r.seed));
        os << buf;
    }
}

EstimateWithCI left_avoidance_probability(std::int64_t n, double epsilon, std::int64_t trials,
                                          std::uint64_t master_seed) {
    if (trials <= 0) throw ConfigError("left avoidance: trials must be positive");
    const auto s = static_cast<std::int64_t>(std::ceil(std::pow(static_cast<double>(n), epsilon)));
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < trials; ++i) {
        Rng rng(derive_trial_seed(master_seed, static_cast<std::uint64_t>(i)));
        LatticePoint p;
        bool avoided = true;
        for (std::int64_t t = 0; t < s; ++t) {
            p = moved(p, static_cast<int>(rng.below(4)));
            if (p.x == -1 && p.y == 0) {
                avoided = false;
                break;
            }
        }
        hits += avoided ? 1 : 0;
    }
    return make_estimate(hits, trials, 0, master_seed);
}

// ----- displacement gap statistics ------------------------------------------

DBoundResult d_bound_statistic(const CoupledTrajectory& trajectory) {
    // The gap is constant between change points, so scanning the compressed
    // list visits every distinct pair of values: O(changes^2).
    std::vector<std::pair<Time, CoupledDelta>> points = trajectory.delta_changes;
    if (points.empty() || points.back().second != trajectory.final_delta)
        points.push_back({trajectory.steps, trajectory.final_delta});

    DBoundResult best;
    for (std::size_t a = 0; a + 1 < points.size(); ++a) {
        for (std::size_t b = a + 1; b < points.size(); ++b) {
            const std::int64_t d1 = points[b].second.d1 - points[a].second.d1;
            const std::int64_t d2 = points[b].second.d2 - points[a].second.d2;
            const double stat =
                std::abs(static_cast<double>(d2)) / std::sqrt(static_cast<double>(d1) + 1.0);
            if (stat > best.statistic) {
                best.statistic = stat;
                best.k = points[a].first;
                best.l = points[b].first;
                best.window = {d1, d2};
            }
        }
    }
    return best;
}

DriftResult drift_experiment(std::span<const std::int64_t> n_values, std::int64_t trials,
                             std::uint64_t master_seed, int workers) {
    if (trials <= 1) throw ConfigError("drift experiment: needs at least 2 trials");
    DriftResult result;
    struct TrialSummary {
        std::int64_t d1 = 0, d2 = 0;
        std::int32_t e1 = 0;
    };
    for (std::size_t ni = 0; ni < n_values.size(); ++ni) {
        const std::int64_t n = n_values[ni];
        if (n <= 0) throw ConfigError("drift experiment: n must be positive");
        const std::uint64_t row_seed = derive_trial_seed(master_seed, ni);
        const auto trials_out = parallel_trials<TrialSummary>(trials, workers, [&](std::int64_t i) {
            const auto t = run_coupled(n, derive_trial_seed(row_seed, static_cast<std::uint64_t>(i)),
                                       /*record_positions=*/false);
            return TrialSummary{t.final_delta.d1, t.final_delta.d2, t.final_boosted.x};
        });
        DriftRow row;
        row.n = n;
        row.trials = trials;
        double sum1 = 0.0, sum_sq = 0.0, sum_e1 = 0.0, sum2 = 0.0;
        for (const auto& t : trials_out) {
            sum1 += static_cast<double>(t.d1);
            sum_sq += static_cast<double>(t.d1) * static_cast<double>(t.d1);
            sum_e1 += static_cast<double>(t.e1);
            sum2 += static_cast<double>(t.d2);
        }
        const double nt = static_cast<double>(trials);
        row.mean_drift = sum1 / nt;
        const double var = std::max(0.0, (sum_sq - nt * row.mean_drift * row.mean_drift) / (nt - 1.0));
        row.stderr_drift = std::sqrt(var / nt);
        row.mean_e1 = sum_e1 / nt;
        row.mean_d2 = sum2 / nt;
        result.rows.push_back(row);
    }

    // Exponent of the one-parameter power law mean_drift ~ n^s: least
    // squares of log(mean drift) against log(n) with no intercept, matching
    // the prefactor-free form of the growth statement being probed.
    double sxx = 0.0, sxy = 0.0;
    for (const auto& row : result.rows) {
        if (!(row.mean_drift > 0.0)) continue;
        const double x = std::log(static_cast<double>(row.n));
        const double y = std::log(row.mean_drift);
        sxx += x * x;
        sxy += x * y;
    }
    if (sxx > 0.0) result.loglog_slope = sxy / sxx;
    return result;
}

void export_drift_csv(std::ostream& os, const DriftResult& result) {
    os << "n,trials,mean_drift,stderr_drift,mean_E1,mean_D2\n";
    char buf[240];
    for (const auto& row : result.rows) {
        std::snprintf(buf, sizeof(buf), "%lld,%lld,%.17g,%.17g,%.17g,%.17g\n",
                      static_cast<long long>(row.n), static_cast<long long>(row.trials),
                      row.mean_drift, row.stderr_drift, row.mean_e1, row.mean_d2);
        os << buf;
    }
}

}  // namespace rwce::maw
