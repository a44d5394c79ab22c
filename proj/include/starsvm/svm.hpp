#pragma once
// Soft-margin SVM trained on a precomputed kernel by sequential minimal
// optimization, plus a one-vs-rest multi-class wrapper.
//
// Pair selection is Platt-style: sweep every index i, and when i violates
// its KKT condition pick the partner j maximizing |E_i - E_j| (falling back
// to a scan when that pair cannot make progress). Full sweeps alternate
// with passes over the non-bound subset, where almost all late violations
// live. A full sweep with no violating index terminates training;
// exhausting max_passes full sweeps flags the model as non-converged but
// still returns it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "starsvm/errors.hpp"
#include "starsvm/kernel.hpp"
#include "starsvm/matrix.hpp"

namespace starsvm {

// alpha values above this count as support vectors
inline constexpr double kSupportEpsilon = 1e-8;

struct SvmTrainOptions {
    double c = 1.0;
    double tol = 1e-3;
    std::size_t max_passes = 100;
};

struct SvmModel {
    std::vector<double> alpha;  // dual coefficients, 0 <= alpha_i <= c
    std::vector<int> labels;    // training labels, -1/+1
    double bias = 0.0;
    double c = 1.0;
    bool converged = true;
    std::size_t sweeps = 0;

    std::vector<std::size_t> support_indices() const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < alpha.size(); ++i)
            if (alpha[i] > kSupportEpsilon) idx.push_back(i);
        return idx;
    }
};

// W(alpha) = sum alpha_i - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
inline double dual_objective(const KernelMatrix& k, std::span<const int> y,
                             std::span<const double> alpha) {
    double linear = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        linear += alpha[i];
        if (alpha[i] == 0.0) continue;
        for (std::size_t j = 0; j < alpha.size(); ++j)
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k(i, j);
    }
    return linear - 0.5 * quad;
}

namespace detail {

// Bias from the trained alphas: the mean over free support vectors
// (0 < alpha < C), or the midpoint of the KKT-derived interval when no
// support vector is free.
inline double bias_from_alphas(const KernelMatrix& k, std::span<const int> y,
                               std::span<const double> alpha, double c) {
    const std::size_t n = alpha.size();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double g = 0.0;
        for (std::size_t j = 0; j < n; ++j) g += alpha[j] * y[j] * k(i, j);
        const double u = static_cast<double>(y[i]) - g;  // b making y_i f_i = 1
        const bool at_zero = alpha[i] <= kSupportEpsilon;
        const bool at_c = alpha[i] >= c - kSupportEpsilon;
        if (!at_zero && !at_c) {
            free_sum += u;
            ++free_count;
        } else if ((at_zero && y[i] > 0) || (at_c && y[i] < 0)) {
            lower = std::max(lower, u);
        } else {
            upper = std::min(upper, u);
        }
    }
    if (free_count > 0) return free_sum / static_cast<double>(free_count);
    if (!std::isfinite(lower)) return upper;
    if (!std::isfinite(upper)) return lower;
    return 0.5 * (lower + upper);
}

}  // namespace detail

inline SvmModel train_svm(const KernelMatrix& k, const std::vector<int>& y,
                          const SvmTrainOptions& opt = {}) {
    const std::size_t n = k.size();
    if (n == 0 || y.size() != n)
        throw std::invalid_argument("label count does not match kernel size");
    if (!(opt.c > 0.0)) throw std::invalid_argument("C must be positive");
    if (!(opt.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (opt.max_passes < 1) throw std::invalid_argument("max_passes must be at least 1");
    bool has_pos = false;
    bool has_neg = false;
    for (const int v : y) {
        if (v == 1) has_pos = true;
        else if (v == -1) has_neg = true;
        else throw std::invalid_argument("labels must be -1 or +1");
    }
    if (!has_pos || !has_neg)
        throw std::invalid_argument("training needs at least one sample of each class");

    SvmModel model;
    model.alpha.assign(n, 0.0);
    model.labels = y;
    model.c = opt.c;

    std::vector<double>& alpha = model.alpha;
    std::vector<double> f(n, 0.0);  // f_i = sum_j alpha_j y_j K_ij (bias excluded)
    double b = 0.0;
    const double c = opt.c;

    auto error = [&](std::size_t i) { return f[i] + b - static_cast<double>(y[i]); };

    // One analytic two-variable step; returns false when the pair cannot move.
    auto try_step = [&](std::size_t i, std::size_t j) -> bool {
        if (i == j) return false;
        const double ai_old = alpha[i];
        const double aj_old = alpha[j];
        const double yi = y[i];
        const double yj = y[j];
        double low;
        double high;
        if (y[i] != y[j]) {
            low = std::max(0.0, aj_old - ai_old);
            high = std::min(c, c + aj_old - ai_old);
        } else {
            low = std::max(0.0, ai_old + aj_old - c);
            high = std::min(c, ai_old + aj_old);
        }
        if (low >= high) return false;
        const double eta = 2.0 * k(i, j) - k(i, i) - k(j, j);
        if (eta >= 0.0) return false;
        const double ei = error(i);
        const double ej = error(j);
        double aj_new = aj_old - yj * (ei - ej) / eta;
        aj_new = std::clamp(aj_new, low, high);
        if (aj_new == aj_old) return false;
        const double ai_new = ai_old + yi * yj * (aj_old - aj_new);

        alpha[i] = ai_new;
        alpha[j] = aj_new;
        const double di = yi * (ai_new - ai_old);
        const double dj = yj * (aj_new - aj_old);
        for (std::size_t t = 0; t < n; ++t) f[t] += di * k(i, t) + dj * k(j, t);

        const double b1 = b - ei - di * k(i, i) - dj * k(i, j);
        const double b2 = b - ej - di * k(i, j) - dj * k(j, j);
        if (ai_new > kSupportEpsilon && ai_new < c - kSupportEpsilon) b = b1;
        else if (aj_new > kSupportEpsilon && aj_new < c - kSupportEpsilon) b = b2;
        else b = 0.5 * (b1 + b2);
        return true;
    };

    // Sweeps check KKT at tol/2 against the running Platt bias; the final
    // bias is recomputed from the alphas, which can move margins by up to
    // another tol/2, so the returned pair still meets the contract at tol.
    const double sweep_tol = 0.5 * opt.tol;

    auto violating = [&](std::size_t i) {
        const double r = error(i) * static_cast<double>(y[i]);
        return (r < -sweep_tol && alpha[i] < c) || (r > sweep_tol && alpha[i] > 0.0);
    };

    auto examine = [&](std::size_t i) -> bool {
        if (!violating(i)) return false;
        const double ei = error(i);
        std::size_t best = i;
        double best_gap = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double gap = std::abs(ei - error(j));
            if (gap > best_gap) {
                best_gap = gap;
                best = j;
            }
        }
        if (best != i && try_step(i, best)) return true;
        for (std::size_t j = 0; j < n; ++j)
            if (j != best && try_step(i, j)) return true;
        return false;
    };

    bool converged = false;
    std::size_t sweeps = 0;  // full passes over every index
    while (sweeps < opt.max_passes) {
        ++sweeps;
        std::size_t violations = 0;
        std::size_t updates = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!violating(i)) continue;
            ++violations;
            if (examine(i)) ++updates;
        }
        if (violations == 0) {
            converged = true;
            break;
        }
        if (updates == 0) break;  // stalled: violations remain but no pair can move

        // drain the non-bound subset before the next full sweep
        for (std::size_t round = 0; round < 100; ++round) {
            std::size_t moved = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (alpha[i] <= kSupportEpsilon || alpha[i] >= c - kSupportEpsilon) continue;
                if (examine(i)) ++moved;
            }
            if (moved == 0) break;
        }
    }

    model.sweeps = sweeps;
    model.converged = converged;
    model.bias = detail::bias_from_alphas(k, y, alpha, c);
    return model;
}

// f(x) = sum_j alpha_j y_j k(x, x_j) + b for each test kernel row.
inline std::vector<double> decision_values(const SvmModel& model, const Matrix& k_rows) {
    if (k_rows.cols() != model.alpha.size())
        throw std::invalid_argument("kernel row width does not match training size");
    std::vector<double> values(k_rows.rows(), 0.0);
    for (std::size_t r = 0; r < k_rows.rows(); ++r) {
        double acc = 0.0;
        const auto row = k_rows.row(r);
        for (std::size_t j = 0; j < row.size(); ++j)
            acc += model.alpha[j] * static_cast<double>(model.labels[j]) * row[j];
        values[r] = acc + model.bias;
    }
    return values;
}

// Sign of the decision value; f = 0 resolves to +1.
inline std::vector<int> predict_binary(const SvmModel& model, const Matrix& k_rows) {
    const auto values = decision_values(model, k_rows);
    std::vector<int> labels(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) labels[i] = values[i] >= 0.0 ? 1 : -1;
    return labels;
}

struct MultiClassModel {
    std::vector<std::string> classes;  // sorted lexicographically
    std::vector<SvmModel> models;      // one per class, same order
};

inline MultiClassModel train_one_vs_rest(const KernelMatrix& k,
                                         const std::vector<std::string>& labels,
                                         const SvmTrainOptions& opt = {}) {
    if (labels.size() != k.size())
        throw std::invalid_argument("label count does not match kernel size");
    std::set<std::string> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2)
        throw std::invalid_argument("one-vs-rest needs at least two distinct classes");

    MultiClassModel model;
    model.classes.assign(distinct.begin(), distinct.end());
    for (const auto& cls : model.classes) {
        std::vector<int> y(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == cls ? 1 : -1;
        model.models.push_back(train_svm(k, y, opt));
    }
    return model;
}

// Argmax of per-class decision values; ties break to the lexicographically
// smallest class.
inline std::vector<std::string> predict_multi(const MultiClassModel& model,
                                              const Matrix& k_rows) {
    if (model.classes.empty()) throw std::invalid_argument("empty multi-class model");
    std::vector<std::vector<double>> scores;
    scores.reserve(model.models.size());
    for (const auto& m : model.models) scores.push_back(decision_values(m, k_rows));

    std::vector<std::string> out(k_rows.rows());
    for (std::size_t r = 0; r < k_rows.rows(); ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < model.classes.size(); ++c)
            if (scores[c][r] > scores[best][r]) best = c;
        out[r] = model.classes[best];
    }
    return out;
}

// --- JSON serialization -----------------------------------------------------

inline nlohmann::json svm_model_to_json(const SvmModel& model) {
    return nlohmann::json{{"alpha", model.alpha}, {"labels", model.labels},
                          {"bias", model.bias},   {"c", model.c},
                          {"converged", model.converged}, {"sweeps", model.sweeps}};
}

inline SvmModel svm_model_from_json(const nlohmann::json& j) {
    SvmModel model;
    model.alpha = j.at("alpha").get<std::vector<double>>();
    model.labels = j.at("labels").get<std::vector<int>>();
    model.bias = j.at("bias").get<double>();
    model.c = j.at("c").get<double>();
    model.converged = j.at("converged").get<bool>();
    model.sweeps = j.value("sweeps", std::size_t{0});
    if (model.alpha.size() != model.labels.size())
        throw SchemaError("svm model json: alpha/labels size mismatch");
    return model;
}

inline nlohmann::json multi_model_to_json(const MultiClassModel& model) {
    nlohmann::json models = nlohmann::json::array();
    for (const auto& m : model.models) models.push_back(svm_model_to_json(m));
    return nlohmann::json{{"classes", model.classes}, {"models", std::move(models)}};
}

inline MultiClassModel multi_model_from_json(const nlohmann::json& j) {
    MultiClassModel model;
    model.classes = j.at("classes").get<std::vector<std::string>>();
    for (const auto& mj : j.at("models")) model.models.push_back(svm_model_from_json(mj));
    if (model.classes.size() != model.models.size())
        throw SchemaError("multi-class model json: classes/models size mismatch");
    return model;
}

}  // namespace starsvm
