#include "rwce/environment.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace rwce {

using nlohmann::json;

namespace {

void require_keys(const json& spec, std::initializer_list<const char*> allowed) {
    for (auto it = spec.begin(); it != spec.end(); ++it) {
        if (it.key() == "name") continue;
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok) throw ConfigError("unknown parameter '" + it.key() + "' for environment '" +
                                   spec.at("name").get<std::string>() + "'");
    }
}

double get_param(const json& spec, const char* key, double fallback) {
    if (!spec.contains(key)) return fallback;
    if (!spec.at(key).is_number()) throw ConfigError(std::string("parameter '") + key + "' must be a number");
    return spec.at(key).get<double>();
}

std::int64_t get_int_param(const json& spec, const char* key, std::int64_t fallback) {
    if (!spec.contains(key)) return fallback;
    if (!spec.at(key).is_number_integer()) throw ConfigError(std::string("parameter '") + key + "' must be an integer");
    return spec.at(key).get<std::int64_t>();
}

void require_line(TopologyKind k, const char* name, bool allow_z = true) {
    if (k == TopologyKind::LineN) return;
    if (allow_z && k == TopologyKind::LineZ) return;
    throw ConfigError(std::string(name) + " requires a line topology");
}

// ----- constant(c) ------------------------------------------------------

class ConstantEnv final : public Environment {
public:
    explicit ConstantEnv(double c) : c_(c) {
        info_ = {"constant", "baseline", Monotonicity::None, false, true,
                 "[" + std::to_string(c) + ", " + std::to_string(c) + "]"};
    }
    const EnvInfo& info() const override { return info_; }
    double default_weight(const Edge&, Time) const override { return c_; }
    std::optional<double> lower_bound(const Edge&) const override { return c_; }
    std::optional<double> upper_bound(const Edge&) const override { return c_; }
    std::unique_ptr<Environment> clone() const override { return std::make_unique<ConstantEnv>(c_); }

private:
    double c_;
    EnvInfo info_;
};

// ----- wave(period, high) ------------------------------------------------
// C_t(j, j+1) = high when t == j (mod period), else 1.

class WaveEnv final : public Environment {
public:
    WaveEnv(std::int64_t period, double high) : period_(period), high_(high) {
        info_ = {"wave", "Example 3.5", Monotonicity::None, false, true,
                 "[1, " + std::to_string(high) + "]"};
    }
    const EnvInfo& info() const override { return info_; }
    double default_weight(const Edge& e, Time t) const override {
        const std::int64_t r = (t - e.u) % period_;
        return r == 0 ? high_ : 1.0;
    }
    std::optional<double> lower_bound(const Edge&) const override { return std::min(1.0, high_); }
    std::optional<double> upper_bound(const Edge&) const override { return std::max(1.0, high_); }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<WaveEnv>(period_, high_);
    }

private:
    std::int64_t period_;
    double high_;
    EnvInfo info_;
};

// ----- counter_wave(period, high, base) -----------------------------------
// C_t(j, j+1) = high * base^j when t == -j (mod period), else base^j.

class CounterWaveEnv final : public Environment {
public:
    CounterWaveEnv(std::int64_t period, double high, double base)
        : period_(period), high_(high), base_(base) {
        info_ = {"counter_wave", "Section 3, final example", Monotonicity::None, false, true,
                 "[base^j, " + std::to_string(high) + "*base^j] per edge j"};
    }
    const EnvInfo& info() const override { return info_; }
    double default_weight(const Edge& e, Time t) const override {
        const double w = std::pow(base_, static_cast<double>(e.u));
        const std::int64_t r = (t + e.u) % period_;
        return r == 0 ? high_ * w : w;
    }
    std::optional<double> lower_bound(const Edge& e) const override {
        return std::pow(base_, static_cast<double>(e.u)) * std::min(1.0, high_);
    }
    std::optional<double> upper_bound(const Edge& e) const override {
        return std::pow(base_, static_cast<double>(e.u)) * std::max(1.0, high_);
    }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<CounterWaveEnv>(period_, high_, base_);
    }

private:
    std::int64_t period_;
    double high_, base_;
    EnvInfo info_;
};

// ----- adaptive_bias -------------------------------------------------------
// C_t(X_t, X_t + 1) = 2, every other edge 1.

class AdaptiveBiasEnv final : public Environment {
public:
    AdaptiveBiasEnv() {
        info_ = {"adaptive_bias", "Example 3.4", Monotonicity::None, true, true, "[1, 2]"};
    }
    const EnvInfo& info() const override { return info_; }
    void on_arrival(const StateView& view, std::vector<EdgeUpdate>& out) override {
        const Edge next = line_edge(view.position);
        if (last_bias_ && !(*last_bias_ == next)) out.push_back({*last_bias_, 1.0});
        out.push_back({next, 2.0});
        last_bias_ = next;
    }
    std::optional<double> lower_bound(const Edge&) const override { return 1.0; }
    std::optional<double> upper_bound(const Edge&) const override { return 2.0; }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<AdaptiveBiasEnv>();
    }

private:
    std::optional<Edge> last_bias_;
    EnvInfo info_;
};

// ----- decay_front ---------------------------------------------------------
// C_t(j) = 2^{-j} for j < t, else 1. Emitted as one sparse update per step
// (edge t-1 decays at time t); the updates are a function of time alone.

class DecayFrontEnv final : public Environment {
public:
    DecayFrontEnv() {
        info_ = {"decay_front", "Example 4.5", Monotonicity::Decreasing, false, true,
                 "[2^-j, 1] per edge j"};
    }
    const EnvInfo& info() const override { return info_; }
    void on_arrival(const StateView& view, std::vector<EdgeUpdate>& out) override {
        if (view.time >= 1) {
            const std::int64_t j = view.time - 1;
            out.push_back({line_edge(j), std::ldexp(1.0, static_cast<int>(-std::min<std::int64_t>(j, 1074)))});
        }
    }
    std::optional<double> lower_bound(const Edge& e) const override {
        return std::ldexp(1.0, static_cast<int>(-std::min<Vertex>(e.u, 1074)));
    }
    std::optional<double> upper_bound(const Edge&) const override { return 1.0; }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<DecayFrontEnv>();
    }

private:
    EnvInfo info_;
};

// ----- multi_wave(t0) -------------------------------------------------------
// C_t(j) = prod over started waves n of D^n_{t-t_n}(j), with
// D^n_s(j) = 2^{-j} for n <= j < s, else 1, and schedule t_n = t0 * 4^n.
// Wave n reaches edge j exactly at time t_n + j + 1, so each step emits at
// most one sparse update per started wave.

class MultiWaveEnv final : public Environment {
public:
    explicit MultiWaveEnv(std::int64_t t0) : t0_(t0) {
        info_ = {"multi_wave", "Example 4.6", Monotonicity::Decreasing, false, true,
                 "[2^(-j(j+1)), 1] per edge j; schedule t_n = t0*4^n"};
    }
    const EnvInfo& info() const override { return info_; }
    void on_arrival(const StateView& view, std::vector<EdgeUpdate>& out) override {
        std::int64_t tn = t0_;
        for (std::int64_t n = 0; tn < view.time; ++n) {
            const std::int64_t j = view.time - tn - 1;
            if (j >= n) {
                const Edge e = line_edge(j);
                const double factor = std::ldexp(1.0, static_cast<int>(-std::min<std::int64_t>(j, 1074)));
                out.push_back({e, view.weight(e) * factor});
            }
            if (tn > (std::int64_t(1) << 61)) break;
            tn *= 4;
        }
    }
    std::optional<double> upper_bound(const Edge&) const override { return 1.0; }
    std::optional<double> lower_bound(const Edge&) const override { return 0.0; }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<MultiWaveEnv>(t0_);
    }

private:
    std::int64_t t0_;
    EnvInfo info_;
};

// ----- reinforced_once(c) ---------------------------------------------------
// First traversal of an edge replaces its weight 1 with c.

class ReinforcedOnceEnv final : public Environment {
public:
    explicit ReinforcedOnceEnv(double c) : c_(c) {
        info_ = {"reinforced_once", "Section 2, Example 1",
                 c > 1 ? Monotonicity::Increasing
                       : (c < 1 ? Monotonicity::Decreasing : Monotonicity::None),
                 true, true,
                 "[" + std::to_string(std::min(1.0, c)) + ", " + std::to_string(std::max(1.0, c)) + "]"};
    }
    const EnvInfo& info() const override { return info_; }
    void on_arrival(const StateView& view, std::vector<EdgeUpdate>& out) override {
        if (!view.has_previous) return;
        const Edge e(view.previous, view.position);
        if (reinforced_.insert(e).second) out.push_back({e, c_});
    }
    std::optional<double> lower_bound(const Edge&) const override { return std::min(1.0, c_); }
    std::optional<double> upper_bound(const Edge&) const override { return std::max(1.0, c_); }
    std::unique_ptr<Environment> clone() const override {
        auto env = std::make_unique<ReinforcedOnceEnv>(c_);
        env->reinforced_ = reinforced_;
        return env;
    }

private:
    double c_;
    std::unordered_set<Edge, EdgeHash> reinforced_;
    EnvInfo info_;
};

// ----- bridge_burning -------------------------------------------------------
// Every traversed edge drops to weight 0 (improper).

class BridgeBurningEnv final : public Environment {
public:
    BridgeBurningEnv() {
        info_ = {"bridge_burning", "Section 2, Example 2", Monotonicity::Decreasing, true, false,
                 "[0, 1]"};
    }
    const EnvInfo& info() const override { return info_; }
    void on_arrival(const StateView& view, std::vector<EdgeUpdate>& out) override {
        if (view.has_previous) out.push_back({Edge(view.previous, view.position), 0.0});
    }
    std::optional<double> lower_bound(const Edge&) const override { return 0.0; }
    std::optional<double> upper_bound(const Edge&) const override { return 1.0; }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<BridgeBurningEnv>();
    }

private:
    EnvInfo info_;
};

// ----- true_saw(c) ----------------------------------------------------------
// Weight of edge e is exp(-c * k(e)) with k(e) the traversal count.

class TrueSawEnv final : public Environment {
public:
    explicit TrueSawEnv(double c) : c_(c) {
        info_ = {"true_saw", "Section 2, Example 4", Monotonicity::Decreasing, true, true,
                 "(0, 1]"};
    }
    const EnvInfo& info() const override { return info_; }
    void on_arrival(const StateView& view, std::vector<EdgeUpdate>& out) override {
        if (!view.has_previous) return;
        const Edge e(view.previous, view.position);
        const int k = ++traversals_[e];
        out.push_back({e, std::exp(-c_ * k)});
    }
    std::optional<double> upper_bound(const Edge&) const override { return 1.0; }
    std::unique_ptr<Environment> clone() const override {
        auto env = std::make_unique<TrueSawEnv>(c_);
        env->traversals_ = traversals_;
        return env;
    }

private:
    double c_;
    std::unordered_map<Edge, int, EdgeHash> traversals_;
    EnvInfo info_;
};

// ----- maw ------------------------------------------------------------------
// On arrival at v, the up, down and right edges of v are set to 2
// (idempotent). At a vertex whose left neighbor is unvisited this yields
// incident weights (left 1, up 2, right 2, down 2), i.e. step probabilities
// (1/7, 2/7, 2/7, 2/7); at other visited territory all four are 2.
// The right_only variant boosts only the right edge.

class MawEnv final : public Environment {
public:
    explicit MawEnv(bool right_only) : right_only_(right_only) {
        info_ = {"maw", "Section 6", Monotonicity::Increasing, true, true, "[1, 2]"};
        if (right_only) info_.name = "maw(right_only)";
    }
    const EnvInfo& info() const override { return info_; }
    void on_arrival(const StateView& view, std::vector<EdgeUpdate>& out) override {
        const std::int32_t x = lattice_x(view.position), y = lattice_y(view.position);
        boost(view, lattice_vertex(x + 1, y), out);          // right
        if (!right_only_) {
            boost(view, lattice_vertex(x, y + 1), out);      // up
            boost(view, lattice_vertex(x, y - 1), out);      // down
        }
    }
    std::optional<double> lower_bound(const Edge&) const override { return 1.0; }
    std::optional<double> upper_bound(const Edge&) const override { return 2.0; }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<MawEnv>(right_only_);
    }

private:
    void boost(const StateView& view, Vertex other, std::vector<EdgeUpdate>& out) {
        const Edge e(view.position, other);
        if (view.weight(e) < 2.0) out.push_back({e, 2.0});
    }
    bool right_only_;
    EnvInfo info_;
};

// ----- right_boost(base, scale, factor) --------------------------------------
// Scenario environment for the line theorems: C_0(j) = scale * base^j, and on
// arrival at v the right edge (v, v+1) is set to factor * scale * base^v.
// Monotone increasing for factor > 1, decreasing for factor < 1, and bounded
// edgewise between C_0 and factor * C_0.

class RightBoostEnv final : public Environment {
public:
    RightBoostEnv(double base, double scale, double factor)
        : base_(base), scale_(scale), factor_(factor) {
        info_ = {"right_boost", "theorem scenario",
                 factor > 1 ? Monotonicity::Increasing
                            : (factor < 1 ? Monotonicity::Decreasing : Monotonicity::None),
                 true, true, "[min, max] of {scale*base^j, factor*scale*base^j}"};
    }
    const EnvInfo& info() const override { return info_; }
    double default_weight(const Edge& e, Time) const override { return initial(e); }
    void on_arrival(const StateView& view, std::vector<EdgeUpdate>& out) override {
        const Edge e = line_edge(view.position);
        const double target = factor_ * initial(e);
        const double current = view.weight(e);
        if ((factor_ > 1 && current < target) || (factor_ < 1 && current > target))
            out.push_back({e, target});
    }
    std::optional<double> lower_bound(const Edge& e) const override {
        return std::min(initial(e), factor_ * initial(e));
    }
    std::optional<double> upper_bound(const Edge& e) const override {
        return std::max(initial(e), factor_ * initial(e));
    }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<RightBoostEnv>(base_, scale_, factor_);
    }

private:
    double initial(const Edge& e) const {
        return scale_ * std::pow(base_, static_cast<double>(e.u));
    }
    double base_, scale_, factor_;
    EnvInfo info_;
};

// ----- incident_boost(base, scale, factor, branching) ------------------------
// Scenario environment for the tree theorems on a complete `branching`-ary
// tree in BFS numbering: C_0(e) = scale * base^depth(e), and on arrival every
// incident edge is set to factor times its initial weight.

class IncidentBoostEnv final : public Environment {
public:
    IncidentBoostEnv(double base, double scale, double factor, int branching)
        : base_(base), scale_(scale), factor_(factor), branching_(branching) {
        info_ = {"incident_boost", "theorem scenario",
                 factor > 1 ? Monotonicity::Increasing
                            : (factor < 1 ? Monotonicity::Decreasing : Monotonicity::None),
                 true, true, "[min, max] of {scale*base^depth, factor*scale*base^depth}"};
    }
    const EnvInfo& info() const override { return info_; }
    double default_weight(const Edge& e, Time) const override { return initial(e); }
    void on_arrival(const StateView& view, std::vector<EdgeUpdate>& out) override {
        const Vertex v = view.position;
        if (v != 0) maybe_boost(view, Edge(parent_of(v), v), out);
        const Vertex first_child = v * branching_ + 1;
        for (int b = 0; b < branching_; ++b)
            maybe_boost(view, Edge(v, first_child + b), out);
    }
    std::optional<double> lower_bound(const Edge& e) const override {
        return std::min(initial(e), factor_ * initial(e));
    }
    std::optional<double> upper_bound(const Edge& e) const override {
        return std::max(initial(e), factor_ * initial(e));
    }
    std::unique_ptr<Environment> clone() const override {
        return std::make_unique<IncidentBoostEnv>(base_, scale_, factor_, branching_);
    }

private:
    Vertex parent_of(Vertex v) const { return (v - 1) / branching_; }
    int depth_of(Vertex v) const {
        int d = 0;
        while (v != 0) { v = parent_of(v); ++d; }
        return d;
    }
    double initial(const Edge& e) const {
        const int depth = std::max(depth_of(e.u), depth_of(e.v));
        return scale_ * std::pow(base_, depth);
    }
    void maybe_boost(const StateView& view, const Edge& e, std::vector<EdgeUpdate>& out) {
        const double target = factor_ * initial(e);
        const double current = view.weight(e);
        if ((factor_ > 1 && current < target) || (factor_ < 1 && current > target))
            out.push_back({e, target});
    }
    double base_, scale_, factor_;
    int branching_;
    EnvInfo info_;
};

}  // namespace

std::unique_ptr<Environment> make_environment(const json& spec, TopologyKind topology) {
    if (!spec.is_object() || !spec.contains("name") || !spec.at("name").is_string())
        throw ConfigError("environment spec must be an object with a string 'name'");
    const std::string name = spec.at("name").get<std::string>();

    if (name == "constant") {
        require_keys(spec, {"c"});
        const double c = get_param(spec, "c", 1.0);
        if (!(c > 0) || !std::isfinite(c)) throw ConfigError("constant: c must be positive and finite");
        return std::make_unique<ConstantEnv>(c);
    }
    if (name == "wave") {
        require_keys(spec, {"period", "high"});
        require_line(topology, "wave");
        const std::int64_t p = get_int_param(spec, "period", 100);
        const double h = get_param(spec, "high", 100.0);
        if (p <= 0) throw ConfigError("wave: period must be positive");
        if (!(h > 0) || !std::isfinite(h)) throw ConfigError("wave: high must be positive and finite");
        return std::make_unique<WaveEnv>(p, h);
    }
    if (name == "counter_wave") {
        require_keys(spec, {"period", "high", "base"});
        require_line(topology, "counter_wave", /*allow_z=*/false);
        const std::int64_t p = get_int_param(spec, "period", 100);
        const double h = get_param(spec, "high", 1000.0);
        const double b = get_param(spec, "base", 2.0);
        if (p <= 0) throw ConfigError("counter_wave: period must be positive");
        if (!(h > 0) || !(b > 0)) throw ConfigError("counter_wave: high and base must be positive");
        return std::make_unique<CounterWaveEnv>(p, h, b);
    }
    if (name == "adaptive_bias") {
        require_keys(spec, {});
        require_line(topology, "adaptive_bias");
        return std::make_unique<AdaptiveBiasEnv>();
    }
    if (name == "decay_front") {
        require_keys(spec, {});
        if (topology != TopologyKind::LineN) throw ConfigError("decay_front requires LineN");
        return std::make_unique<DecayFrontEnv>();
    }
    if (name == "multi_wave") {
        require_keys(spec, {"t0"});
        if (topology != TopologyKind::LineN) throw ConfigError("multi_wave requires LineN");
        const std::int64_t t0 = get_int_param(spec, "t0", 64);
        if (t0 <= 0) throw ConfigError("multi_wave: t0 must be positive");
        return std::make_unique<MultiWaveEnv>(t0);
    }
    if (name == "reinforced_once") {
        require_keys(spec, {"c"});
        const double c = get_param(spec, "c", 2.0);
        if (!(c > 0) || !std::isfinite(c)) throw ConfigError("reinforced_once: c must be positive and finite");
        return std::make_unique<ReinforcedOnceEnv>(c);
    }
    if (name == "bridge_burning") {
        require_keys(spec, {});
        return std::make_unique<BridgeBurningEnv>();
    }
    if (name == "true_saw") {
        require_keys(spec, {"c"});
        const double c = get_param(spec, "c", 1.0);
        if (!(c > 0) || !std::isfinite(c)) throw ConfigError("true_saw: c must be positive and finite");
        return std::make_unique<TrueSawEnv>(c);
    }
    if (name == "maw") {
        require_keys(spec, {"variant"});
        if (topology != TopologyKind::Lattice2D)
            throw ConfigError("maw requires Lattice2D");
        std::string variant = "standard";
        if (spec.contains("variant")) variant = spec.at("variant").get<std::string>();
        if (variant != "standard" && variant != "right_only")
            throw ConfigError("maw: variant must be 'standard' or 'right_only'");
        return std::make_unique<MawEnv>(variant == "right_only");
    }
    if (name == "right_boost") {
        require_keys(spec, {"base", "scale", "factor"});
        if (topology != TopologyKind::LineN) throw ConfigError("right_boost requires LineN");
        const double base = get_param(spec, "base", 1.0);
        const double scale = get_param(spec, "scale", 1.0);
        const double factor = get_param(spec, "factor", 2.0);
        if (!(base > 0) || !(scale > 0) || !(factor > 0))
            throw ConfigError("right_boost: base, scale and factor must be positive");
        return std::make_unique<RightBoostEnv>(base, scale, factor);
    }
    if (name == "incident_boost") {
        require_keys(spec, {"base", "scale", "factor", "branching"});
        if (topology != TopologyKind::RootedTree) throw ConfigError("incident_boost requires a rooted tree");
        const double base = get_param(spec, "base", 0.5);
        const double scale = get_param(spec, "scale", 1.0);
        const double factor = get_param(spec, "factor", 2.0);
        const std::int64_t branching = get_int_param(spec, "branching", 2);
        if (!(base > 0) || !(scale > 0) || !(factor > 0) || branching < 1)
            throw ConfigError("incident_boost: invalid parameters");
        return std::make_unique<IncidentBoostEnv>(base, scale, factor, static_cast<int>(branching));
    }
    throw ConfigError("unknown environment '" + name + "'");
}

std::vector<CatalogEntry> catalog_entries() {
    return {
        {"constant", "c", "baseline", "none", "[c, c]", false},
        {"wave", "period, high", "Example 3.5", "none", "[1, high]", false},
        {"counter_wave", "period, high, base", "Section 3, final example", "none",
         "[base^j, high*base^j]", false},
        {"adaptive_bias", "", "Example 3.4", "none", "[1, 2]", true},
        {"decay_front", "", "Example 4.5", "decreasing", "[2^-j, 1]", false},
        {"multi_wave", "t0", "Example 4.6", "decreasing", "[2^(-j(j+1)), 1]", false},
        {"reinforced_once", "c", "Section 2, Example 1", "increasing for c>1", "[min(1,c), max(1,c)]", true},
        {"bridge_burning", "", "Section 2, Example 2", "decreasing", "[0, 1] (improper)", true},
        {"true_saw", "c", "Section 2, Example 4", "decreasing", "(0, 1]", true},
        {"maw", "variant", "Section 6", "increasing", "[1, 2]", true},
    };
}

double always_right_probability(std::int64_t horizon) {
    if (horizon < 1) throw ConfigError("always_right_probability: horizon must be >= 1");
    // Step at time 0 leaves vertex 0, which has only a right edge. At time
    // t >= 1 the walker sits at vertex t; the left edge (t-1, t) has decayed
    // to 2^{-(t-1)} while the right edge still has weight 1.
    double p = 1.0;
    for (std::int64_t t = 1; t < horizon; ++t)
        p /= 1.0 + std::ldexp(1.0, static_cast<int>(-std::min<std::int64_t>(t - 1, 1074)));
    return p;
}

}  // namespace rwce
