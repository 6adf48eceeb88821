#ifndef RWCE_TEST_HELPERS_HPP
#define RWCE_TEST_HELPERS_HPP

#include <memory>
#include <unordered_map>
#include <vector>

#include "rwce/environment.hpp"
#include "rwce/walk.hpp"

namespace rwce_test {

// Fixed-weight environment driven by an explicit edge table; anything not in
// the table gets `fallback`.
struct TableEnv final : rwce::Environment {
    std::unordered_map<rwce::Edge, double, rwce::EdgeHash> weights;
    double fallback = 1.0;

    const rwce::EnvInfo& info() const override {
        static const rwce::EnvInfo info{"table", "test fixture", rwce::Monotonicity::None,
                                        false, true, ""};
        return info;
    }
    double default_weight(const rwce::Edge& e, rwce::Time) const override {
        const auto it = weights.find(e);
        return it == weights.end() ? fallback : it->second;
    }
    std::unique_ptr<rwce::Environment> clone() const override {
        return std::make_unique<TableEnv>(*this);
    }
};

// Exact gambler's-ruin solve on the segment [0, v] (absorbing at both ends,
// h(0) = 0, h(v) = 1) by Gaussian elimination on the tridiagonal harmonic
// system; independent of the resistance-sum formula.
inline double hit_probability_linear_solve(const std::vector<double>& weights,
                                           rwce::Vertex start) {
    const auto v = static_cast<std::int64_t>(weights.size());
    // Unknowns h(1..v-1).
    const std::int64_t n = v - 1;
    std::vector<double> diag(static_cast<std::size_t>(n)), upper(static_cast<std::size_t>(n)),
        lower(static_cast<std::size_t>(n)), rhs(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t i = 1; i <= n; ++i) {
        const double wl = weights[static_cast<std::size_t>(i - 1)];
        const double wr = weights[static_cast<std::size_t>(i)];
        diag[static_cast<std::size_t>(i - 1)] = wl + wr;
        lower[static_cast<std::size_t>(i - 1)] = -wl;
        upper[static_cast<std::size_t>(i - 1)] = -wr;
    }
    rhs[static_cast<std::size_t>(n - 1)] = weights[static_cast<std::size_t>(v - 1)];
    // Thomas algorithm.
    for (std::int64_t i = 1; i < n; ++i) {
        const double m = lower[static_cast<std::size_t>(i)] / diag[static_cast<std::size_t>(i - 1)];
        diag[static_cast<std::size_t>(i)] -= m * upper[static_cast<std::size_t>(i - 1)];
        rhs[static_cast<std::size_t>(i)] -= m * rhs[static_cast<std::size_t>(i - 1)];
    }
    std::vector<double> h(static_cast<std::size_t>(n));
    h[static_cast<std::size_t>(n - 1)] =
        rhs[static_cast<std::size_t>(n - 1)] / diag[static_cast<std::size_t>(n - 1)];
    for (std::int64_t i = n - 2; i >= 0; --i)
        h[static_cast<std::size_t>(i)] =
            (rhs[static_cast<std::size_t>(i)] -
             upper[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i + 1)]) /
            diag[static_cast<std::size_t>(i)];
    if (start == 0) return 0.0;
    if (start == v) return 1.0;
    return h[static_cast<std::size_t>(start - 1)];
}

}  // namespace rwce_test

#endif
