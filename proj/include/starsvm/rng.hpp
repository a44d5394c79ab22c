#pragma once
// Deterministic random helpers. std::shuffle and std::uniform_*_distribution
// are implementation-defined, so splits, subsampling and the catalogue
// generator roll their own draws from a fixed mt19937_64 stream.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace starsvm {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double next_unit() { return std::ldexp(static_cast<double>(gen_() >> 11), -53); }

    // uniform in [lo, hi)
    double next_range(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // uniform in {0, ..., n-1}; modulo bias is irrelevant at the sizes used here
    std::size_t next_below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

    // standard normal via Box-Muller
    double next_normal() {
        double u1 = next_unit();
        if (u1 < 1e-300) u1 = 1e-300;
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    double next_normal(double mean, double stddev) { return mean + stddev * next_normal(); }

    // Fisher-Yates with our own draws
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const std::size_t j = next_below(i);
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace starsvm
