#pragma once
// ZZ feature-map encoding. Each repetition applies a Hadamard layer, then
// per-feature phases P(2*x_i), then pairwise ZZ phases with angle
// 2*(pi - x_i)*(pi - x_j) over the configured entanglement pairs.

#include <cstddef>
#include <numbers>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "starsvm/statevector.hpp"

namespace starsvm {

struct FeatureMapConfig {
    std::size_t n_features = 0;
    std::size_t repetitions = 2;
    // (i, j) pairs with i < j, applied in order
    std::vector<std::pair<std::size_t, std::size_t>> entanglement;
    // admissible interval for encoded feature values
    double scale_lo = 0.0;
    double scale_hi = std::numbers::pi;

    // All pairs (i, j), i < j, in lexicographic order.
    static FeatureMapConfig full(std::size_t n_features, std::size_t repetitions = 2) {
        FeatureMapConfig cfg;
        cfg.n_features = n_features;
        cfg.repetitions = repetitions;
        for (std::size_t i = 0; i < n_features; ++i)
            for (std::size_t j = i + 1; j < n_features; ++j) cfg.entanglement.emplace_back(i, j);
        return cfg;
    }

    void validate() const {
        if (n_features < 1 || n_features > kMaxQubits)
            throw ValidationError("feature map needs 1.." + std::to_string(kMaxQubits) +
                                  " features, got " + std::to_string(n_features));
        if (repetitions < 1) throw ValidationError("feature map needs at least one repetition");
        if (!(scale_lo < scale_hi)) throw ValidationError("feature scaling interval is empty");
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (const auto& [i, j] : entanglement) {
            if (i >= j) throw ValidationError("entanglement pairs must satisfy i < j");
            if (j >= n_features) throw ValidationError("entanglement pair index out of range");
            if (!seen.insert({i, j}).second) throw ValidationError("duplicate entanglement pair");
        }
    }
};

// U_phi(x) |0...0>. Pure function of (x, config); identical inputs produce
// bitwise identical states.
inline StateVector encode_feature_map(std::span<const double> x, const FeatureMapConfig& config) {
    config.validate();
    if (x.size() != config.n_features)
        throw std::invalid_argument("feature vector length " + std::to_string(x.size()) +
                                    " does not match feature map width " +
                                    std::to_string(config.n_features));
    for (const double v : x)
        if (!(v >= config.scale_lo && v <= config.scale_hi))
            throw std::domain_error("feature value " + std::to_string(v) +
                                    " outside encoding interval [" +
                                    std::to_string(config.scale_lo) + ", " +
                                    std::to_string(config.scale_hi) + "]");

    constexpr double pi = std::numbers::pi;
    StateVector state(config.n_features);
    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
        for (std::size_t q = 0; q < config.n_features; ++q) state.apply_hadamard(q);
        for (std::size_t q = 0; q < config.n_features; ++q) state.apply_phase(q, 2.0 * x[q]);
        for (const auto& [i, j] : config.entanglement)
            state.apply_zz_phase(i, j, 2.0 * (pi - x[i]) * (pi - x[j]));
    }
    return state;
}

}  // namespace starsvm
