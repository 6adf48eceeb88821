#ifndef RWCE_RNG_HPP
#define RWCE_RNG_HPP

#include <cstdint>

#include "rwce/common.hpp"

namespace rwce {

// Deterministic xoshiro256++ generator. State is expanded from a 64-bit
// seed with the splitmix64 finalizer, so any seed (including 0) is valid.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9E3779B97F4A7C15ull;
            word = mix_bits(x);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n) by rejection-free scaled draw; n small here.
    std::uint32_t below(std::uint32_t n) {
        return static_cast<std::uint32_t>((next() >> 32) * std::uint64_t(n) >> 32);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

// Per-trial stream derivation: both arguments pass through the splitmix64
// finalizer before combining, never sequential reseeding. For a fixed
// master seed the map index -> seed is a bijection on 64-bit integers.
inline std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
    return mix_bits(mix_bits(master_seed) + mix_bits(trial_index ^ 0xA3C59AC2F1039ECDull));
}

}  // namespace rwce

#endif
