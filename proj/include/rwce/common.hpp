#ifndef RWCE_COMMON_HPP
#define RWCE_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace rwce {

using Vertex = std::int64_t;
using Time = std::int64_t;

// ----- errors ---------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

// Every incident edge has weight zero; the walker is absorbed.
struct AllIncidentZero : Error {
    AllIncidentZero() : Error("all incident edge weights are zero") {}
};

struct MonotonicityViolation : Error {
    using Error::Error;
};

struct BoundViolation : Error {
    using Error::Error;
};

struct ZeroWeightEdge : Error {
    using Error::Error;
};

struct DegenerateSegment : Error {
    using Error::Error;
};

struct EmptyBall : Error {
    using Error::Error;
};

struct HypothesisMismatch : Error {
    using Error::Error;
};

struct AllTrialsCapped : Error {
    using Error::Error;
};

struct ReplayMismatch : Error {
    using Error::Error;
};

// ----- monotonicity class ---------------------------------------------

enum class Monotonicity { Increasing, Decreasing, None };

inline const char* to_string(Monotonicity m) {
    switch (m) {
        case Monotonicity::Increasing: return "increasing";
        case Monotonicity::Decreasing: return "decreasing";
        default: return "none";
    }
}

// ----- edges ----------------------------------------------------------

// Unordered pair of adjacent vertices, stored canonically (u <= v).
struct Edge {
    Vertex u, v;
    Edge(Vertex a, Vertex b) : u(a < b ? a : b), v(a < b ? b : a) {}
    bool operator==(const Edge&) const = default;
};

inline std::uint64_t mix_bits(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

struct EdgeHash {
    std::size_t operator()(const Edge& e) const {
        return static_cast<std::size_t>(
            mix_bits(static_cast<std::uint64_t>(e.u) * 0xD1B54A32D192ED03ull ^
                     static_cast<std::uint64_t>(e.v)));
    }
};

// Line edge (j, j+1).
inline Edge line_edge(Vertex j) { return Edge(j, j + 1); }

// ----- 2D lattice vertex packing --------------------------------------

inline Vertex lattice_vertex(std::int32_t x, std::int32_t y) {
    return static_cast<Vertex>(
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
        static_cast<std::uint64_t>(static_cast<std::uint32_t>(y)));
}

inline std::int32_t lattice_x(Vertex v) {
    return static_cast<std::int32_t>(static_cast<std::uint64_t>(v) >> 32);
}

inline std::int32_t lattice_y(Vertex v) {
    return static_cast<std::int32_t>(static_cast<std::uint64_t>(v) & 0xFFFFFFFFull);
}

// ----- compensated summation ------------------------------------------

// Neumaier variant of Kahan summation.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace rwce

#endif
