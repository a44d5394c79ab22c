#pragma once
// Classical baselines: k-nearest-neighbour voting and L2-regularised
// logistic regression trained by full-batch gradient descent, with a
// one-vs-rest wrapper for multi-class.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "starsvm/matrix.hpp"

namespace starsvm {

struct KnnModel {
    Matrix train_features;
    std::vector<std::string> train_labels;
    std::size_t k = 5;
};

inline KnnModel make_knn(Matrix features, std::vector<std::string> labels, std::size_t k) {
    if (features.rows() == 0) throw std::invalid_argument("knn needs at least one training sample");
    if (features.rows() != labels.size())
        throw std::invalid_argument("knn feature/label count mismatch");
    if (k < 1 || k > features.rows())
        throw std::invalid_argument("knn k must be in [1, training size]");
    return {std::move(features), std::move(labels), k};
}

// Majority label among the k nearest training points (Euclidean distance).
// Distance ties break to the lower training index; vote ties break to the
// lexicographically smallest class.
inline std::string knn_predict(const KnnModel& model, std::span<const double> x) {
    const std::size_t n = model.train_features.rows();
    if (n == 0) throw std::invalid_argument("empty knn model");
    if (x.size() != model.train_features.cols())
        throw std::invalid_argument("knn query dimension mismatch");

    std::vector<std::pair<double, std::size_t>> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = model.train_features.row(i);
        double dist_sq = 0.0;
        for (std::size_t c = 0; c < row.size(); ++c) {
            const double d = x[c] - row[c];
            dist_sq += d * d;
        }
        order[i] = {dist_sq, i};
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(model.k),
                      order.end());

    std::map<std::string, std::size_t> votes;
    for (std::size_t i = 0; i < model.k; ++i) ++votes[model.train_labels[order[i].second]];
    std::size_t best_count = 0;
    std::string best;
    for (const auto& [cls, count] : votes) {  // map order is lexicographic
        if (count > best_count) {
            best_count = count;
            best = cls;
        }
    }
    return best;
}

inline std::vector<std::string> knn_predict_all(const KnnModel& model, const Matrix& queries) {
    std::vector<std::string> out(queries.rows());
    for (std::size_t r = 0; r < queries.rows(); ++r) out[r] = knn_predict(model, queries.row(r));
    return out;
}

// --- logistic regression ----------------------------------------------------

struct LogisticOptions {
    double l2 = 1e-4;           // strength of (l2/2)*||w||^2; bias unregularised
    double learning_rate = 0.1;
    std::size_t max_iter = 5000;
    double grad_tol = 1e-6;     // infinity norm over (dw, db)
};

struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
    std::size_t iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double logistic_score(const LogisticModel& model, std::span<const double> x) {
    if (x.size() != model.weights.size())
        throw std::invalid_argument("logistic query dimension mismatch");
    double z = model.bias;
    for (std::size_t c = 0; c < x.size(); ++c) z += model.weights[c] * x[c];
    return z;
}

// Mean logistic loss + (l2/2)*||w||^2, with labels in {-1, +1}.
inline double logistic_loss(const Matrix& x, std::span<const int> y, std::span<const double> w,
                            double b, double l2) {
    const std::size_t n = x.rows();
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double z = b;
        const auto row = x.row(i);
        for (std::size_t c = 0; c < row.size(); ++c) z += w[c] * row[c];
        const double m = -static_cast<double>(y[i]) * z;
        // log(1 + exp(m)) without overflow
        loss += m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    }
    loss /= static_cast<double>(n);
    for (const double wc : w) loss += 0.5 * l2 * wc * wc;
    return loss;
}

struct LogisticGradient {
    std::vector<double> dw;
    double db = 0.0;
};

inline LogisticGradient logistic_gradient(const Matrix& x, std::span<const int> y,
                                          std::span<const double> w, double b, double l2) {
    const std::size_t n = x.rows();
    LogisticGradient g;
    g.dw.assign(x.cols(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double z = b;
        const auto row = x.row(i);
        for (std::size_t c = 0; c < row.size(); ++c) z += w[c] * row[c];
        const double t = y[i] > 0 ? 1.0 : 0.0;
        const double err = sigmoid(z) - t;
        for (std::size_t c = 0; c < row.size(); ++c) g.dw[c] += err * row[c];
        g.db += err;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t c = 0; c < g.dw.size(); ++c) g.dw[c] = g.dw[c] * inv_n + l2 * w[c];
    g.db *= inv_n;
    return g;
}

inline LogisticModel logistic_train(const Matrix& x, const std::vector<int>& y,
                                    const LogisticOptions& opt = {}) {
    if (x.rows() == 0 || x.rows() != y.size())
        throw std::invalid_argument("logistic feature/label count mismatch");
    bool has_pos = false;
    bool has_neg = false;
    for (const int v : y) {
        if (v == 1) has_pos = true;
        else if (v == -1) has_neg = true;
        else throw std::invalid_argument("labels must be -1 or +1");
    }
    if (!has_pos || !has_neg)
        throw std::invalid_argument("logistic training needs both classes");
    if (!(opt.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (opt.l2 < 0.0) throw std::invalid_argument("l2 strength must be non-negative");

    LogisticModel model;
    model.weights.assign(x.cols(), 0.0);
    for (std::size_t iter = 0; iter < opt.max_iter; ++iter) {
        const auto g = logistic_gradient(x, y, model.weights, model.bias, opt.l2);
        double norm = std::abs(g.db);
        for (const double v : g.dw) norm = std::max(norm, std::abs(v));
        model.gradient_norm = norm;
        model.iterations = iter;
        if (norm <= opt.grad_tol) {
            model.converged = true;
            return model;
        }
        for (std::size_t c = 0; c < model.weights.size(); ++c)
            model.weights[c] -= opt.learning_rate * g.dw[c];
        model.bias -= opt.learning_rate * g.db;
    }
    model.iterations = opt.max_iter;
    const auto g = logistic_gradient(x, y, model.weights, model.bias, opt.l2);
    double norm = std::abs(g.db);
    for (const double v : g.dw) norm = std::max(norm, std::abs(v));
    model.gradient_norm = norm;
    model.converged = norm <= opt.grad_tol;
    return model;
}

// sigmoid >= 0.5 maps to +1
inline int logistic_predict(const LogisticModel& model, std::span<const double> x) {
    return sigmoid(logistic_score(model, x)) >= 0.5 ? 1 : -1;
}

struct MultiLogisticModel {
    std::vector<std::string> classes;  // sorted lexicographically
    std::vector<LogisticModel> models;
};

inline MultiLogisticModel train_logistic_ovr(const Matrix& x,
                                             const std::vector<std::string>& labels,
                                             const LogisticOptions& opt = {}) {
    if (labels.size() != x.rows())
        throw std::invalid_argument("logistic feature/label count mismatch");
    std::set<std::string> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2)
        throw std::invalid_argument("one-vs-rest needs at least two distinct classes");
    MultiLogisticModel model;
    model.classes.assign(distinct.begin(), distinct.end());
    for (const auto& cls : model.classes) {
        std::vector<int> y(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == cls ? 1 : -1;
        model.models.push_back(logistic_train(x, y, opt));
    }
    return model;
}

// Argmax of per-class linear scores; ties break to the lexicographically
// smallest class.
inline std::string logistic_predict_multi(const MultiLogisticModel& model,
                                          std::span<const double> x) {
    if (model.classes.empty()) throw std::invalid_argument("empty multi-class logistic model");
    std::size_t best = 0;
    double best_score = logistic_score(model.models[0], x);
    for (std::size_t c = 1; c < model.classes.size(); ++c) {
        const double s = logistic_score(model.models[c], x);
        if (s > best_score) {
            best_score = s;
            best = c;
        }
    }
    return model.classes[best];
}

inline std::vector<std::string> logistic_predict_multi_all(const MultiLogisticModel& model,
                                                           const Matrix& queries) {
    std::vector<std::string> out(queries.rows());
    for (std::size_t r = 0; r < queries.rows(); ++r)
        out[r] = logistic_predict_multi(model, queries.row(r));
    return out;
}

}  // namespace starsvm
