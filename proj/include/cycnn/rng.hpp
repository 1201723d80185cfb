#pragma once

#include <cstdint>
#include <random>

namespace cycnn {

// All randomness flows from one seed. Distributions are hand-rolled on top of
// mt19937_64 so streams are identical across standard library versions.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    // Derives an independent stream for (seed, index) pairs, e.g. per-image
    // augmentation draws.
    static Rng derive(uint64_t seed, uint64_t index) {
        std::seed_seq seq{seed, index};
        std::mt19937_64 tmp(0);
        tmp.seed(seq);
        Rng r(0);
        r.eng_ = tmp;
        return r;
    }

    uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1).
    double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    int64_t uniform_int(int64_t n) { return static_cast<int64_t>(uniform() * static_cast<double>(n)); }

    // Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace cycnn
