#ifndef RWCE_ENVIRONMENT_HPP
#define RWCE_ENVIRONMENT_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rwce/common.hpp"
#include "rwce/topology.hpp"

namespace rwce {

struct EdgeUpdate {
    Edge edge;
    double weight;
};

// Read-only view of the walk handed to adaptive environments: position,
// visit flags and current weights, never anything ahead of time t.
struct StateView {
    Time time = 0;
    Vertex position = 0;
    Vertex previous = 0;   // X_{t-1}; meaningless when has_previous is false
    bool has_previous = false;
    std::function<double(const Edge&)> weight;
    std::function<bool(Vertex)> visited;
};

struct EnvInfo {
    std::string name;
    std::string provenance;      // e.g. "Example 3.5"
    Monotonicity monotonicity = Monotonicity::None;
    bool adaptive = false;
    bool proper = true;
    std::string bounds;          // human-readable declared bounds
};

// The update rule producing C_t. Time-only (nonadaptive) rules may be
// expressed as a closed-form default weight; adaptive rules emit sparse
// updates on arrival. weight(e, t) = override(e) if set, else default(e, t).
class Environment {
public:
    virtual ~Environment() = default;

    virtual const EnvInfo& info() const = 0;

    // Closed-form C_t for edges with no sparse override.
    virtual double default_weight(const Edge& e, Time t) const {
        (void)e; (void)t;
        return 1.0;
    }

    // Called exactly once per step, after arrival, before sampling.
    virtual void on_arrival(const StateView& view, std::vector<EdgeUpdate>& out) {
        (void)view; (void)out;
    }

    // Declared per-edge bounds; enforced by the engine on every update.
    virtual std::optional<double> lower_bound(const Edge& e) const { (void)e; return std::nullopt; }
    virtual std::optional<double> upper_bound(const Edge& e) const { (void)e; return std::nullopt; }

    virtual std::unique_ptr<Environment> clone() const = 0;
};

// Builds a configured environment from a JSON spec {"name": ..., params}.
// Throws ConfigError for unknown names, invalid or unknown parameters, and
// parameter/topology combinations outside the entry's declared class.
std::unique_ptr<Environment> make_environment(const nlohmann::json& spec, TopologyKind topology);

// The catalog entries exposed by list_catalog, in a fixed order.
struct CatalogEntry {
    std::string name;
    std::string parameters;  // parameter summary
    std::string provenance;
    std::string monotonicity;
    std::string bounds;
    bool adaptive;
};
std::vector<CatalogEntry> catalog_entries();

// Exact probability that a walker started at 0 on LineN under decay_front
// takes its first `horizon` steps all to the right (finite product of the
// per-step right-step probabilities along the all-right path).
double always_right_probability(std::int64_t horizon);

}  // namespace rwce

#endif
