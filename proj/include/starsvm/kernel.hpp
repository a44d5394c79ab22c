#pragma once
// Kernel functions and parallel Gram-matrix assembly. The quantum kernel is
// the squared fidelity |<phi(x)|phi(y)>|^2 of feature-map encodings; the
// classical reference is the Gaussian RBF kernel exp(-||x-y||^2 / (2 s^2)).
//
// Gram matrices are computed over the upper triangle only, in contiguous
// row blocks per worker, then mirrored. Every entry is produced by exactly
// one worker with a fixed summation order, so results are bitwise
// independent of the worker count.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "starsvm/errors.hpp"
#include "starsvm/feature_map.hpp"
#include "starsvm/io_util.hpp"
#include "starsvm/matrix.hpp"
#include "starsvm/statevector.hpp"

namespace starsvm {

enum class KernelKind { quantum_fidelity, rbf, precomputed };

inline std::string kernel_kind_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::quantum_fidelity: return "quantum-fidelity";
        case KernelKind::rbf: return "rbf";
        case KernelKind::precomputed: return "precomputed";
    }
    return "unknown";
}

// Which kernel to evaluate, plus its parameters (the Gram provenance).
struct KernelSpec {
    KernelKind kind = KernelKind::quantum_fidelity;
    FeatureMapConfig feature_map;  // used when kind == quantum_fidelity
    double sigma = 1.0;            // used when kind == rbf

    static KernelSpec quantum(FeatureMapConfig config) {
        KernelSpec spec;
        spec.kind = KernelKind::quantum_fidelity;
        spec.feature_map = std::move(config);
        return spec;
    }

    static KernelSpec gaussian(double sigma) {
        KernelSpec spec;
        spec.kind = KernelKind::rbf;
        spec.sigma = sigma;
        return spec;
    }
};

inline double rbf_kernel(std::span<const double> x, std::span<const double> y, double sigma) {
    if (x.size() != y.size()) throw std::invalid_argument("rbf kernel needs equal dimensions");
    if (!(sigma > 0.0)) throw std::invalid_argument("rbf sigma must be positive");
    double dist_sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        dist_sq += d * d;
    }
    return std::exp(-dist_sq / (2.0 * sigma * sigma));
}

// |<a|b>|^2, clamped to [0, 1] to absorb roundoff.
inline double fidelity_from_states(const StateVector& a, const StateVector& b) {
    const double f = std::norm(inner_product(a, b));
    if (f < 0.0) return 0.0;
    if (f > 1.0) return 1.0;
    return f;
}

inline double fidelity_kernel(std::span<const double> x, std::span<const double> y,
                              const FeatureMapConfig& config) {
    return fidelity_from_states(encode_feature_map(x, config), encode_feature_map(y, config));
}

// One encoding per sample: O(n) circuit runs instead of O(n^2). Encodings
// are independent, so they may run on parallel workers; element i always
// equals encode_feature_map(samples.row(i), config) exactly.
inline std::vector<StateVector> precompute_encodings(const Matrix& samples,
                                                     const FeatureMapConfig& config,
                                                     std::size_t workers = 1);

class KernelMatrix {
public:
    KernelMatrix() = default;
    KernelMatrix(std::size_t n, KernelSpec provenance)
        : n_(n), entries_(n * n, 0.0), provenance_(std::move(provenance)) {}

    // Wraps a precomputed symmetric Gram matrix (row-major, n*n entries).
    static KernelMatrix from_dense(std::size_t n, std::vector<double> entries,
                                   KernelSpec provenance = {KernelKind::precomputed, {}, 1.0}) {
        if (entries.size() != n * n)
            throw std::invalid_argument("dense kernel needs n*n entries");
        KernelMatrix k;
        k.n_ = n;
        k.entries_ = std::move(entries);
        k.provenance_ = std::move(provenance);
        return k;
    }

    std::size_t size() const { return n_; }
    KernelKind kind() const { return provenance_.kind; }
    const KernelSpec& provenance() const { return provenance_; }

    double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
    double& at(std::size_t i, std::size_t j) { return entries_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const { return {entries_.data() + i * n_, n_}; }
    std::span<const double> entries() const { return entries_; }

private:
    std::size_t n_ = 0;
    std::vector<double> entries_;
    KernelSpec provenance_{KernelKind::precomputed, {}, 1.0};
};

namespace detail {

// Split rows [0, n) into at most `workers` contiguous blocks with roughly
// equal total cost, where row r costs cost(r).
template <typename CostFn>
std::vector<std::pair<std::size_t, std::size_t>> balanced_row_blocks(std::size_t n,
                                                                     std::size_t workers,
                                                                     CostFn cost) {
    std::vector<std::pair<std::size_t, std::size_t>> blocks;
    if (n == 0) return blocks;
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) total += static_cast<double>(cost(r));
    const double per_block = total / static_cast<double>(workers);
    std::size_t begin = 0;
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        acc += static_cast<double>(cost(r));
        if (acc >= per_block && blocks.size() + 1 < workers) {
            blocks.emplace_back(begin, r + 1);
            begin = r + 1;
            acc = 0.0;
        }
    }
    if (begin < n) blocks.emplace_back(begin, n);
    return blocks;
}

// Run fn(begin, end) over each block; block 0 runs on the calling thread.
// The first exception from any block is rethrown after all blocks join.
template <typename Fn>
void run_on_blocks(const std::vector<std::pair<std::size_t, std::size_t>>& blocks, Fn fn) {
    if (blocks.empty()) return;
    std::vector<std::exception_ptr> errors(blocks.size());
    std::vector<std::thread> pool;
    pool.reserve(blocks.size() - 1);
    for (std::size_t b = 1; b < blocks.size(); ++b)
        pool.emplace_back([&fn, &blocks, &errors, b] {
            try {
                fn(blocks[b].first, blocks[b].second);
            } catch (...) {
                errors[b] = std::current_exception();
            }
        });
    try {
        fn(blocks[0].first, blocks[0].second);
    } catch (...) {
        errors[0] = std::current_exception();
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline void check_kernel_inputs(const Matrix& samples, const KernelSpec& spec,
                                std::size_t workers) {
    if (samples.rows() == 0) throw std::invalid_argument("kernel matrix needs at least one sample");
    if (workers < 1) throw std::invalid_argument("worker count must be at least 1");
    if (spec.kind == KernelKind::quantum_fidelity) {
        spec.feature_map.validate();
        if (spec.feature_map.n_features != samples.cols())
            throw std::invalid_argument("feature map width does not match sample dimension");
    } else if (spec.kind == KernelKind::rbf) {
        if (!(spec.sigma > 0.0)) throw std::invalid_argument("rbf sigma must be positive");
    } else {
        throw std::invalid_argument("cannot evaluate a precomputed kernel spec");
    }
}

}  // namespace detail

inline std::vector<StateVector> precompute_encodings(const Matrix& samples,
                                                     const FeatureMapConfig& config,
                                                     std::size_t workers) {
    std::vector<StateVector> states;
    if (samples.rows() == 0) return states;
    if (workers <= 1 || samples.rows() < 4 * workers) {
        states.reserve(samples.rows());
        for (std::size_t i = 0; i < samples.rows(); ++i)
            states.push_back(encode_feature_map(samples.row(i), config));
        return states;
    }
    states.assign(samples.rows(), StateVector(config.n_features));
    const auto blocks =
        detail::balanced_row_blocks(samples.rows(), workers, [](std::size_t) { return 1; });
    detail::run_on_blocks(blocks, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            states[i] = encode_feature_map(samples.row(i), config);
    });
    return states;
}

// Symmetric Gram matrix K[i][j] = k(X[i], X[j]). The upper triangle is
// computed then mirrored; the diagonal is pinned analytically to 1 for the
// fidelity kernel.
inline KernelMatrix kernel_matrix(const Matrix& samples, const KernelSpec& spec,
                                  std::size_t workers = 1) {
    detail::check_kernel_inputs(samples, spec, workers);
    const std::size_t n = samples.rows();
    KernelMatrix k(n, spec);

    auto blocks =
        detail::balanced_row_blocks(n, workers, [n](std::size_t r) { return n - 1 - r; });
    if (spec.kind == KernelKind::quantum_fidelity) {
        const auto states = precompute_encodings(samples, spec.feature_map, workers);
        detail::run_on_blocks(blocks, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double v = fidelity_from_states(states[i], states[j]);
                    k.at(i, j) = v;
                    k.at(j, i) = v;
                }
        });
        for (std::size_t i = 0; i < n; ++i) k.at(i, i) = 1.0;
    } else {
        detail::run_on_blocks(blocks, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double v = rbf_kernel(samples.row(i), samples.row(j), spec.sigma);
                    k.at(i, j) = v;
                    k.at(j, i) = v;
                }
        });
        for (std::size_t i = 0; i < n; ++i)
            k.at(i, i) = rbf_kernel(samples.row(i), samples.row(i), spec.sigma);
    }
    return k;
}

// Rectangular kernel block: entry [i][j] = k(X_test[i], X_train[j]).
inline Matrix cross_kernel_matrix(const Matrix& train, const Matrix& test, const KernelSpec& spec,
                                  std::size_t workers = 1) {
    detail::check_kernel_inputs(train, spec, workers);
    if (test.rows() == 0) throw std::invalid_argument("kernel matrix needs at least one sample");
    if (test.cols() != train.cols())
        throw std::invalid_argument("train/test sample dimensions differ");

    const std::size_t rows = test.rows();
    const std::size_t cols = train.rows();
    Matrix k(rows, cols);
    auto blocks = detail::balanced_row_blocks(rows, workers, [](std::size_t) { return 1; });

    if (spec.kind == KernelKind::quantum_fidelity) {
        const auto train_states = precompute_encodings(train, spec.feature_map, workers);
        const auto test_states = precompute_encodings(test, spec.feature_map, workers);
        detail::run_on_blocks(blocks, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i)
                for (std::size_t j = 0; j < cols; ++j)
                    k(i, j) = fidelity_from_states(test_states[i], train_states[j]);
        });
    } else {
        detail::run_on_blocks(blocks, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i)
                for (std::size_t j = 0; j < cols; ++j)
                    k(i, j) = rbf_kernel(test.row(i), train.row(j), spec.sigma);
        });
    }
    return k;
}

// CSV export/import: row-major full matrix, 17 significant digits, so
// training can be decoupled from kernel computation.
inline void write_kernel_csv(const std::string& path, const KernelMatrix& k) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (std::size_t i = 0; i < k.size(); ++i) {
        for (std::size_t j = 0; j < k.size(); ++j) {
            if (j) out << ',';
            out << format_g17(k(i, j));
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

inline KernelMatrix read_kernel_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::vector<double> entries;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() && in.eof()) break;
        const auto fields = split_csv_line(line);
        if (rows == 0) cols = fields.size();
        if (fields.size() != cols) throw SchemaError("ragged kernel CSV: " + path);
        for (const auto& f : fields) {
            double v = 0.0;
            if (!parse_double(f, v)) throw SchemaError("bad kernel CSV value '" + f + "' in " + path);
            entries.push_back(v);
        }
        ++rows;
    }
    if (rows == 0 || rows != cols) throw SchemaError("kernel CSV must be square: " + path);
    return KernelMatrix::from_dense(rows, std::move(entries));
}

}  // namespace starsvm
