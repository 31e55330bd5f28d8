#pragma once

#include <cmath>
#include <cstdint>

namespace wgain {

// splitmix64 step, used both as a stand-alone mixer and to seed Rng state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic stream derivation: derive_seed(base, salt) is the salt-th
// lane of the base seed.  Replication r of a Monte Carlo run uses
// derive_seed(master, r), so replications parallelize without coordination.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t s = base ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
    return splitmix64(s);
}

// xoshiro256++ with hand-rolled distributions.  The standard library
// distributions are implementation-defined, so everything downstream of a
// seed would stop being reproducible across toolchains if we used them.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    static Rng stream(std::uint64_t master, std::uint64_t stream_id) {
        return Rng(derive_seed(master, stream_id));
    }

    std::uint64_t next_u64() {
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

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, bound) via rejection (Lemire).
    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound == 0) return 0;
        const std::uint64_t threshold = (0 - bound) % bound;
        while (true) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    bool bernoulli(double p) { return uniform01() < p; }

    double exponential(double rate) {
        // 1 - uniform01() lies in (0, 1], so the log never sees zero.
        return -std::log(1.0 - uniform01()) / rate;
    }

    // Box-Muller with a cached spare so consumption order is well defined.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace wgain
