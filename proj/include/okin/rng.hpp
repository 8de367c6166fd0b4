#pragma once

// Deterministic random number generation for every stochastic engine in the
// toolkit.  All distributions are implemented here on top of one documented
// generator so that a (seed, stream) pair reproduces a run bit-for-bit on any
// platform.  The standard <random> distributions are deliberately not used:
// the C++ standard pins their statistical properties but not their consumed
// bit streams, so results would differ between standard libraries.
//
// Generator: xoshiro256++ (Blackman & Vigna, 2019), seeded through splitmix64
// as its authors recommend.  Period 2^256 - 1, passes BigCrush.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "okin/errors.hpp"

namespace okin {

namespace detail {

// splitmix64: used to expand a 64-bit seed into generator state and to hash
// (seed, stream) pairs into independent sub-seeds.
inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace detail

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = detail::splitmix64(x);
    }

    // Independent sub-seed for a named stream (replicate index, compartment
    // index, ...).  Mixing both words through splitmix64 keeps sub-seeds
    // decorrelated even for adjacent stream ids.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t x = seed ^ (0x6a09e667f3bcc909ull + stream);
        std::uint64_t h = detail::splitmix64(x);
        x ^= h + stream;
        return detail::splitmix64(x);
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

    // Uniform on [0, 1): 53 random bits scaled by 2^-53.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a logarithm argument.
    double uniform_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    // Uniform integer on {0, ..., n-1} by rejection (no modulo bias).
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) throw DomainError("uniform_index: n must be positive");
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

    // Exponential with the given rate; mean 1/rate.
    double exponential(double rate) {
        if (!(rate > 0.0)) throw DomainError("exponential: rate must be positive");
        return -std::log(uniform_pos()) / rate;
    }

    // Standard normal via Box-Muller (fresh pair of uniforms per call, no
    // cached spare, so the consumed stream is easy to reason about).
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Gamma(shape, rate) by Marsaglia & Tsang (2000) squeeze rejection;
    // shapes below one use the standard boost G(a) = G(a+1) * U^(1/a).
    double gamma(double shape, double rate) {
        if (!(shape > 0.0) || !(rate > 0.0))
            throw DomainError("gamma: shape and rate must be positive");
        double boost = 1.0;
        double a = shape;
        if (a < 1.0) {
            boost = std::pow(uniform_pos(), 1.0 / a);
            a += 1.0;
        }
        const double d = a - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v / rate;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return boost * d * v / rate;
        }
    }

    // Beta(a, b) as a gamma ratio.
    double beta(double a, double b) {
        const double x = gamma(a, 1.0);
        const double y = gamma(b, 1.0);
        return x / (x + y);
    }

    // Dirichlet with the given concentration parameters: normalised gammas.
    std::vector<double> dirichlet(std::span<const double> alpha) {
        if (alpha.empty()) throw DomainError("dirichlet: needs at least one parameter");
        std::vector<double> w(alpha.size());
        double total = 0.0;
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            w[i] = gamma(alpha[i], 1.0);
            total += w[i];
        }
        for (auto& wi : w) wi /= total;
        return w;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4]{};
};

}  // namespace okin
