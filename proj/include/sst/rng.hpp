#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sst {

// Deterministic generator for synthetic data and tests. mt19937_64 output is
// pinned by the standard; normal deviates use hand-rolled Box-Muller because
// std::normal_distribution is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {
        // 53-bit mantissa in [0, 1)
        return static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t next_u64() { return gen_(); }

    std::uint32_t uniform_int(std::uint32_t n) {
        // rejection sampling, unbiased
        const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
        std::uint64_t v = gen_();
        while (v >= limit) v = gen_();
        return static_cast<std::uint32_t>(v % n);
    }

    double normal(double mean = 0.0, double sigma = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + sigma * spare_;
        }
        double u1 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return mean + sigma * r * std::cos(theta);
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace sst
