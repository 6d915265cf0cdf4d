#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace qcut {

// Deterministic random stream. stream(seed, shard) hands out statistically
// independent generators; the same (seed, shard) pair always reproduces the
// same sequence on a given standard library.
class SeededRng {
public:
    using engine_type = std::mt19937_64;
    using result_type = engine_type::result_type;

    explicit SeededRng(std::uint64_t seed, std::uint64_t shard = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(shard),
                          static_cast<std::uint32_t>(shard >> 32),
                          0x9e3779b9u};
        engine_.seed(seq);
    }

    static SeededRng stream(std::uint64_t seed, std::uint64_t shard) {
        return SeededRng(seed, shard);
    }

    static constexpr result_type min() { return engine_type::min(); }
    static constexpr result_type max() { return engine_type::max(); }
    result_type operator()() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1].
    double uniform_open_zero() { return 1.0 - uniform(); }

    double phase() { return 2.0 * std::numbers::pi * uniform(); }

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // Lemire-style rejection keeps the draw unbiased.
        const std::uint64_t limit = max() - (max() % n + 1) % n;
        std::uint64_t x = engine_();
        while (x > limit) x = engine_();
        return x % n;
    }

    // Standard normal via Box-Muller; no cached second variate so the
    // stream position depends only on the number of calls.
    double normal() {
        const double u1 = uniform_open_zero();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    engine_type engine_;
};

}  // namespace qcut
