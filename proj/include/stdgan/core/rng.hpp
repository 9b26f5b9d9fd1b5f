#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace stdgan {

// Deterministic PRNG with fully specified algorithms. std::mt19937 plus the
// standard distributions would leave sampling implementation-defined, which
// breaks the replay guarantees; everything here is pinned bit-for-bit.
//
// Core generator: xoshiro256** seeded via splitmix64.
class Rng {
public:
    explicit Rng(uint64_t seed) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t x = seed;
        for (auto& si : s_) si = splitmix64(x);
        have_gauss_ = false;
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform integer in [0, bound), bound > 0. Rejection-free Lemire reduction
    // is biased for huge bounds; bounds here are small (dataset sizes), so the
    // multiply-shift reduction is fine and fully portable.
    uint32_t uniform_u32(uint32_t bound) {
        return static_cast<uint32_t>((static_cast<uint64_t>(next_u64() >> 32) * bound) >> 32);
    }

    // Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool coin() { return (next_u64() >> 63) != 0; }

    // Box-Muller; caches the second deviate.
    double normal(double mean = 0.0, double stddev = 1.0) {
        if (have_gauss_) {
            have_gauss_ = false;
            return mean + stddev * gauss_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 1e-300);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        gauss_ = r * std::sin(theta);
        have_gauss_ = true;
        return mean + stddev * r * std::cos(theta);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = uniform_u32(static_cast<uint32_t>(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Derive an independent stream for a named purpose, so adding a consumer
    // never shifts the draws of another.
    Rng fork(std::string_view tag) const {
        uint64_t h = 0x9e3779b97f4a7c15ull;
        for (size_t i = 0; i < 4; ++i) h ^= s_[i] + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        for (char c : tag) h = (h ^ static_cast<uint64_t>(static_cast<unsigned char>(c))) * 0x100000001b3ull;
        return Rng(h);
    }

    static uint64_t splitmix64(uint64_t& x) {
        uint64_t z = (x += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4] = {};
    double gauss_ = 0.0;
    bool have_gauss_ = false;
};

} // namespace stdgan
