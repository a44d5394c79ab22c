#pragma once
// Confusion matrices and the classification metrics emitted by the
// experiment harness: accuracy, F1, specificity, sensitivity, macro-F1,
// plus row-percentage views.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "starsvm/errors.hpp"
#include "starsvm/io_util.hpp"

namespace starsvm {

class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::vector<std::string> classes)
        : classes_(std::move(classes)), counts_(classes_.size() * classes_.size(), 0) {
        if (classes_.empty()) throw std::invalid_argument("confusion matrix needs classes");
    }

    const std::vector<std::string>& classes() const { return classes_; }
    std::size_t size() const { return classes_.size(); }

    std::size_t count(std::size_t true_idx, std::size_t pred_idx) const {
        return counts_[true_idx * size() + pred_idx];
    }
    std::size_t& at(std::size_t true_idx, std::size_t pred_idx) {
        return counts_[true_idx * size() + pred_idx];
    }

    std::size_t row_sum(std::size_t true_idx) const {
        std::size_t s = 0;
        for (std::size_t j = 0; j < size(); ++j) s += count(true_idx, j);
        return s;
    }
    std::size_t col_sum(std::size_t pred_idx) const {
        std::size_t s = 0;
        for (std::size_t i = 0; i < size(); ++i) s += count(i, pred_idx);
        return s;
    }
    std::size_t total() const {
        std::size_t s = 0;
        for (const auto c : counts_) s += c;
        return s;
    }

    std::size_t class_index(const std::string& label) const {
        for (std::size_t i = 0; i < classes_.size(); ++i)
            if (classes_[i] == label) return i;
        throw std::invalid_argument("label '" + label + "' not in class list");
    }

private:
    std::vector<std::string> classes_;
    std::vector<std::size_t> counts_;
};

// counts[i][j] = samples with true class i predicted as class j
inline ConfusionMatrix confusion(std::span<const std::string> y_true,
                                 std::span<const std::string> y_pred,
                                 std::vector<std::string> classes) {
    if (y_true.size() != y_pred.size())
        throw std::invalid_argument("true/predicted label counts differ");
    ConfusionMatrix cm(std::move(classes));
    for (std::size_t i = 0; i < y_true.size(); ++i)
        ++cm.at(cm.class_index(y_true[i]), cm.class_index(y_pred[i]));
    return cm;
}

struct PercentMatrix {
    std::vector<std::string> classes;
    std::vector<double> values;     // row-major, rows sum to 100 when non-empty
    std::vector<bool> empty_rows;   // true where the class had no samples

    double at(std::size_t i, std::size_t j) const { return values[i * classes.size() + j]; }
};

// Row-wise percentages (per true class). Zero-count rows become all-zero
// and are flagged.
inline PercentMatrix to_percent(const ConfusionMatrix& cm) {
    PercentMatrix pm;
    pm.classes = cm.classes();
    pm.values.assign(cm.size() * cm.size(), 0.0);
    pm.empty_rows.assign(cm.size(), false);
    for (std::size_t i = 0; i < cm.size(); ++i) {
        const std::size_t rs = cm.row_sum(i);
        if (rs == 0) {
            pm.empty_rows[i] = true;
            continue;
        }
        for (std::size_t j = 0; j < cm.size(); ++j)
            pm.values[i * cm.size() + j] =
                100.0 * static_cast<double>(cm.count(i, j)) / static_cast<double>(rs);
    }
    return pm;
}

struct BinaryMetrics {
    double accuracy = std::numeric_limits<double>::quiet_NaN();
    double f1 = std::numeric_limits<double>::quiet_NaN();
    double specificity = std::numeric_limits<double>::quiet_NaN();
    double sensitivity = std::numeric_limits<double>::quiet_NaN();
    bool accuracy_defined = false;
    bool f1_defined = false;
    bool specificity_defined = false;
    bool sensitivity_defined = false;
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
};

// Metrics for a two-class confusion matrix with the given positive class.
// Ratios with a zero denominator stay NaN and are flagged undefined.
inline BinaryMetrics binary_metrics(const ConfusionMatrix& cm, const std::string& positive_class) {
    if (cm.size() != 2) throw std::invalid_argument("binary metrics need a 2x2 confusion matrix");
    const std::size_t pos = cm.class_index(positive_class);
    const std::size_t neg = 1 - pos;

    BinaryMetrics m;
    m.tp = cm.count(pos, pos);
    m.fn = cm.count(pos, neg);
    m.fp = cm.count(neg, pos);
    m.tn = cm.count(neg, neg);
    const std::size_t n = m.tp + m.tn + m.fp + m.fn;
    if (n > 0) {
        m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(n);
        m.accuracy_defined = true;
    }
    if (m.tp + m.fn > 0) {
        m.sensitivity = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
        m.sensitivity_defined = true;
    }
    if (m.tn + m.fp > 0) {
        m.specificity = static_cast<double>(m.tn) / static_cast<double>(m.tn + m.fp);
        m.specificity_defined = true;
    }
    if (2 * m.tp + m.fp + m.fn > 0) {
        m.f1 = static_cast<double>(2 * m.tp) / static_cast<double>(2 * m.tp + m.fp + m.fn);
        m.f1_defined = true;
    }
    return m;
}

inline double accuracy(const ConfusionMatrix& cm) {
    const std::size_t n = cm.total();
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    std::size_t diag = 0;
    for (std::size_t i = 0; i < cm.size(); ++i) diag += cm.count(i, i);
    return static_cast<double>(diag) / static_cast<double>(n);
}

struct MacroF1Result {
    double value = std::numeric_limits<double>::quiet_NaN();
    bool defined = false;
    std::vector<std::string> excluded_classes;  // classes with undefined F1
};

// Unweighted mean of per-class one-vs-rest F1; classes absent from both
// truth and prediction are excluded and flagged.
inline MacroF1Result macro_f1(const ConfusionMatrix& cm) {
    MacroF1Result result;
    double sum = 0.0;
    std::size_t included = 0;
    for (std::size_t c = 0; c < cm.size(); ++c) {
        const std::size_t tp = cm.count(c, c);
        const std::size_t fp = cm.col_sum(c) - tp;
        const std::size_t fn = cm.row_sum(c) - tp;
        const std::size_t denom = 2 * tp + fp + fn;
        if (denom == 0) {
            result.excluded_classes.push_back(cm.classes()[c]);
            continue;
        }
        sum += static_cast<double>(2 * tp) / static_cast<double>(denom);
        ++included;
    }
    if (included > 0) {
        result.value = sum / static_cast<double>(included);
        result.defined = true;
    }
    return result;
}

// --- emission ----------------------------------------------------------------

inline nlohmann::json binary_metrics_to_json(const BinaryMetrics& m) {
    auto field = [](double v, bool defined) {
        return defined ? nlohmann::json(v) : nlohmann::json(nullptr);
    };
    return nlohmann::json{
        {"accuracy", field(m.accuracy, m.accuracy_defined)},
        {"f1", field(m.f1, m.f1_defined)},
        {"specificity", field(m.specificity, m.specificity_defined)},
        {"sensitivity", field(m.sensitivity, m.sensitivity_defined)},
        {"tp", m.tp}, {"tn", m.tn}, {"fp", m.fp}, {"fn", m.fn}};
}

inline void write_confusion_counts_csv(const std::string& path, const ConfusionMatrix& cm) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "true\\pred";
    for (const auto& c : cm.classes()) out << ',' << c;
    out << '\n';
    for (std::size_t i = 0; i < cm.size(); ++i) {
        out << cm.classes()[i];
        for (std::size_t j = 0; j < cm.size(); ++j) out << ',' << cm.count(i, j);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

inline void write_confusion_percent_csv(const std::string& path, const ConfusionMatrix& cm) {
    const auto pm = to_percent(cm);
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "true\\pred";
    for (const auto& c : pm.classes) out << ',' << c;
    out << ",empty\n";
    for (std::size_t i = 0; i < pm.classes.size(); ++i) {
        out << pm.classes[i];
        for (std::size_t j = 0; j < pm.classes.size(); ++j) out << ',' << format_g17(pm.at(i, j));
        out << ',' << (pm.empty_rows[i] ? 1 : 0) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace starsvm
