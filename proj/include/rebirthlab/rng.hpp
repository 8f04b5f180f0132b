#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace rebirthlab {

// splitmix64, used both as a seed expander and as the stream-derivation mix.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derive a child seed from (seed, words...). Used to give every check,
// replica and field component its own independent stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s ^= a + 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
    s ^= b + 0xc2b2ae3d27d4eb4fULL;
    h ^= splitmix64(s);
    s ^= c + 0x165667b19e3779f9ULL;
    h ^= splitmix64(s);
    return h;
}

inline std::uint64_t hash_label(std::string_view label) {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : label) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// xoshiro256** with explicit, portable distributions. Statistics produced by
// the lab must be bit-reproducible from the seed, so nothing here goes
// through <random> distributions (their output is implementation defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64(sm);
        spare_valid_ = false;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform on (0,1); never returns 0 or 1
    double uniform() {
        const std::uint64_t u = next_u64() >> 11;  // 53 bits
        return (static_cast<double>(u) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal, Marsaglia polar
    double normal() {
        if (spare_valid_) {
            spare_valid_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        spare_valid_ = true;
        return u * f;
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    // Symmetric alpha-stable with characteristic function exp(-|sigma*t|^alpha),
    // Chambers-Mallows-Stuck. alpha=2 reduces to N(0, 2 sigma^2) and is
    // special-cased for speed.
    double stable_symmetric(double alpha, double sigma) {
        if (alpha == 2.0) return sigma * std::numbers::sqrt2 * normal();
        const double v = std::numbers::pi * (uniform() - 0.5);
        const double w = exponential(1.0);
        const double t = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha);
        const double s = std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
        return sigma * t * s;
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool spare_valid_;
};

}  // namespace rebirthlab
