#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace cimdet {

// SplitMix64 step. Used both as a seeding chain and (via mix64) as the hash
// that derives child stream ids, so stream derivation never touches the
// sampling state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (0x9e3779b97f4a7c15ull + (b << 6) + (b >> 2));
    std::uint64_t r = splitmix64(s);
    s ^= b;
    return r ^ splitmix64(s);
}

// Immutable descriptor of a reproducible random stream. The same
// (master_seed, stream_id) pair yields the same sample sequence on every
// run and under any thread layout; child() derives disjoint sub-streams.
struct RngStream {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    RngStream child(std::uint64_t k) const { return {master_seed, mix64(stream_id, k)}; }
};

// xoshiro256++ generator seeded from an RngStream.
class Rng {
public:
    explicit Rng(RngStream stream) {
        std::uint64_t s = mix64(stream.master_seed, stream.stream_id);
        for (auto& w : state_) w = splitmix64(s);
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

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, n). n must be >= 1.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Box-Muller; the second variate of each pair is cached.
    double standard_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) {
        if (stddev == 0.0) return mean;
        return mean + stddev * standard_normal();
    }

    double folded_normal(double stddev) { return std::fabs(normal(0.0, stddev)); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
    double cached_ = 0.0;
    bool have_cached_ = false;
};

inline std::vector<double> sample_normal(RngStream stream, std::size_t n, double mean, double stddev) {
    Rng rng(stream);
    std::vector<double> out(n);
    for (auto& v : out) v = rng.normal(mean, stddev);
    return out;
}

inline std::vector<double> sample_folded_normal(RngStream stream, std::size_t n, double stddev) {
    Rng rng(stream);
    std::vector<double> out(n);
    for (auto& v : out) v = rng.folded_normal(stddev);
    return out;
}

}  // namespace cimdet
