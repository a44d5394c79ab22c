#pragma once
// Star catalogue ingestion and preparation: CSV loading against the
// Vmag/Plx/e_Plx/B-V/SpType/Amag/TargetClass schema, cleaning, composite
// feature engineering, label extraction, train-fitted scaling and
// deterministic stratified splitting.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "starsvm/errors.hpp"
#include "starsvm/io_util.hpp"
#include "starsvm/matrix.hpp"
#include "starsvm/rng.hpp"

namespace starsvm {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct StarRecord {
    double vmag = kMissing;   // apparent visual magnitude
    double plx = kMissing;    // parallax, as stored in the source file (mas)
    double e_plx = kMissing;  // parallax error
    double bv = kMissing;     // B-V colour index
    std::string sp_type;      // spectral type string; empty = missing
    double amag = kMissing;   // absolute magnitude column from the file
    int target_class = -1;    // 0 dwarf, 1 giant; -1 = missing
};

inline const std::array<std::string, 7> kCatalogueColumns = {
    "Vmag", "Plx", "e_Plx", "B-V", "SpType", "Amag", "TargetClass"};

inline std::vector<StarRecord> load_star_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset: " + path);

    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty dataset file: " + path);
    const auto header = split_csv_line(line);

    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < header.size(); ++i) column.emplace(header[i], i);

    std::vector<std::string> missing_cols;
    for (const auto& name : kCatalogueColumns)
        if (!column.count(name)) missing_cols.push_back(name);
    if (!missing_cols.empty()) {
        std::string msg = "dataset is missing required columns:";
        for (const auto& name : missing_cols) msg += " " + name;
        throw SchemaError(msg);
    }

    auto num = [&](const std::vector<std::string>& fields, const std::string& name) {
        const std::size_t idx = column.at(name);
        double v = kMissing;
        if (idx < fields.size()) parse_double(fields[idx], v);
        return v;
    };

    std::vector<StarRecord> records;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        StarRecord rec;
        rec.vmag = num(fields, "Vmag");
        rec.plx = num(fields, "Plx");
        rec.e_plx = num(fields, "e_Plx");
        rec.bv = num(fields, "B-V");
        rec.amag = num(fields, "Amag");
        const std::size_t sp_idx = column.at("SpType");
        if (sp_idx < fields.size()) rec.sp_type = fields[sp_idx];
        const std::size_t tc_idx = column.at("TargetClass");
        long tc = -1;
        if (tc_idx < fields.size() && parse_long(fields[tc_idx], tc) && (tc == 0 || tc == 1))
            rec.target_class = static_cast<int>(tc);
        records.push_back(std::move(rec));
    }
    return records;
}

struct CleanReport {
    std::size_t input_rows = 0;
    std::size_t duplicates = 0;
    std::size_t missing = 0;
    std::size_t nonpositive_plx = 0;
    std::size_t kept = 0;
};

inline nlohmann::json clean_report_to_json(const CleanReport& r) {
    return nlohmann::json{{"input_rows", r.input_rows},
                          {"dropped_duplicates", r.duplicates},
                          {"dropped_missing", r.missing},
                          {"dropped_nonpositive_parallax", r.nonpositive_plx},
                          {"kept", r.kept}};
}

namespace detail {

inline std::string record_key(const StarRecord& r) {
    return format_g17(r.vmag) + '|' + format_g17(r.plx) + '|' + format_g17(r.e_plx) + '|' +
           format_g17(r.bv) + '|' + r.sp_type + '|' + format_g17(r.amag) + '|' +
           std::to_string(r.target_class);
}

inline bool has_missing(const StarRecord& r) {
    return std::isnan(r.vmag) || std::isnan(r.plx) || std::isnan(r.e_plx) || std::isnan(r.bv) ||
           std::isnan(r.amag) || r.sp_type.empty() || r.target_class < 0;
}

}  // namespace detail

// Drops exact duplicate rows (first occurrence kept), rows with any missing
// field and rows with non-positive parallax, in that order.
inline std::vector<StarRecord> clean(const std::vector<StarRecord>& records,
                                     CleanReport* report = nullptr) {
    CleanReport local;
    local.input_rows = records.size();
    std::vector<StarRecord> kept;
    kept.reserve(records.size());
    std::unordered_set<std::string> seen;
    for (const auto& rec : records) {
        if (!seen.insert(detail::record_key(rec)).second) {
            ++local.duplicates;
            continue;
        }
        if (detail::has_missing(rec)) {
            ++local.missing;
            continue;
        }
        if (!(rec.plx > 0.0)) {
            ++local.nonpositive_plx;
            continue;
        }
        kept.push_back(rec);
    }
    local.kept = kept.size();
    if (report) *report = local;
    return kept;
}

enum class ParallaxUnit { arcsec, mas };

// Amag = Vmag + 5*log10(plx) + 5 with plx in arcseconds; the mas variant
// subtracts the 5*log10(1000) offset. Used for validation reporting against
// the file's own Amag column.
inline double absolute_magnitude(double vmag, double plx, ParallaxUnit unit = ParallaxUnit::arcsec) {
    if (!(plx > 0.0)) throw std::domain_error("parallax must be positive");
    const double base = vmag + 5.0 * std::log10(plx) + 5.0;
    return unit == ParallaxUnit::arcsec ? base : base - 15.0;
}

// --- feature engineering ------------------------------------------------------

enum class Feature {
    amag,
    bv,
    vmag,
    plx,
    e_plx,
    amag_sq,
    bv_sq,
    bv_plus_amag,
    bv_minus_amag,
};

inline std::string feature_name(Feature f) {
    switch (f) {
        case Feature::amag: return "Amag";
        case Feature::bv: return "B-V";
        case Feature::vmag: return "Vmag";
        case Feature::plx: return "Plx";
        case Feature::e_plx: return "e_Plx";
        case Feature::amag_sq: return "Amag_SQ";
        case Feature::bv_sq: return "B-V_SQ";
        case Feature::bv_plus_amag: return "B-V+Amag";
        case Feature::bv_minus_amag: return "B-V-Amag";
    }
    return "unknown";
}

inline Feature feature_from_name(const std::string& name) {
    for (const Feature f : {Feature::amag, Feature::bv, Feature::vmag, Feature::plx,
                            Feature::e_plx, Feature::amag_sq, Feature::bv_sq,
                            Feature::bv_plus_amag, Feature::bv_minus_amag})
        if (feature_name(f) == name) return f;
    throw ValidationError("unknown feature name: " + name);
}

inline std::vector<Feature> default_feature_set() {
    return {Feature::amag, Feature::bv, Feature::bv_plus_amag, Feature::bv_minus_amag};
}

inline double feature_value(const StarRecord& r, Feature f) {
    switch (f) {
        case Feature::amag: return r.amag;
        case Feature::bv: return r.bv;
        case Feature::vmag: return r.vmag;
        case Feature::plx: return r.plx;
        case Feature::e_plx: return r.e_plx;
        case Feature::amag_sq: return r.amag * r.amag;
        case Feature::bv_sq: return r.bv * r.bv;
        case Feature::bv_plus_amag: return r.bv + r.amag;
        case Feature::bv_minus_amag: return r.bv - r.amag;
    }
    return kMissing;
}

inline std::vector<double> engineer_features(const StarRecord& r,
                                             std::span<const Feature> selection) {
    std::vector<double> out;
    out.reserve(selection.size());
    for (const Feature f : selection) out.push_back(feature_value(r, f));
    return out;
}

// --- labels -------------------------------------------------------------------

inline const std::string kSpectralLetters = "OBAFGKM";

struct SampleLabels {
    int binary = 0;        // -1 dwarf, +1 giant
    std::string spectral;  // single letter in O,B,A,F,G,K,M; empty when invalid
};

inline SampleLabels extract_labels(const StarRecord& r) {
    SampleLabels labels;
    labels.binary = r.target_class == 1 ? 1 : -1;
    if (!r.sp_type.empty()) {
        const char first = static_cast<char>(std::toupper(static_cast<unsigned char>(r.sp_type[0])));
        if (kSpectralLetters.find(first) != std::string::npos) labels.spectral = std::string(1, first);
    }
    return labels;
}

struct Dataset {
    Matrix features;                          // engineered values, pre-scaling
    std::vector<int> binary_labels;           // -1 dwarf / +1 giant
    std::vector<std::string> spectral_labels; // "" = excluded from multi-class
    std::vector<Feature> feature_set;
};

inline Dataset make_dataset(const std::vector<StarRecord>& records,
                            std::span<const Feature> selection) {
    if (selection.empty()) throw ValidationError("feature selection is empty");
    Dataset ds;
    ds.feature_set.assign(selection.begin(), selection.end());
    ds.features = Matrix(records.size(), selection.size());
    ds.binary_labels.resize(records.size());
    ds.spectral_labels.resize(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto values = engineer_features(records[i], selection);
        for (std::size_t c = 0; c < values.size(); ++c) ds.features(i, c) = values[c];
        const auto labels = extract_labels(records[i]);
        ds.binary_labels[i] = labels.binary;
        ds.spectral_labels[i] = labels.spectral;
    }
    return ds;
}

// --- scaling ------------------------------------------------------------------

struct ScalerParams {
    std::vector<double> mean;     // fit on the train split only
    std::vector<double> stddev;
    std::vector<double> std_min;  // per-feature range after standardisation
    std::vector<double> std_max;
};

inline ScalerParams fit_scaler(const Matrix& train, std::span<const std::string> names = {}) {
    if (train.rows() < 2) throw ValidationError("scaler needs at least two training rows");
    ScalerParams p;
    const std::size_t d = train.cols();
    p.mean.assign(d, 0.0);
    p.stddev.assign(d, 0.0);
    p.std_min.assign(d, 0.0);
    p.std_max.assign(d, 0.0);
    const double n = static_cast<double>(train.rows());
    for (std::size_t c = 0; c < d; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < train.rows(); ++r) sum += train(r, c);
        p.mean[c] = sum / n;
        double var = 0.0;
        for (std::size_t r = 0; r < train.rows(); ++r) {
            const double dlt = train(r, c) - p.mean[c];
            var += dlt * dlt;
        }
        p.stddev[c] = std::sqrt(var / n);
        if (!(p.stddev[c] > 0.0)) {
            const std::string label = c < names.size() ? names[c] : std::to_string(c);
            throw ValidationError("feature '" + label + "' has zero variance on the train split");
        }
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < train.rows(); ++r) {
            const double z = (train(r, c) - p.mean[c]) / p.stddev[c];
            lo = std::min(lo, z);
            hi = std::max(hi, z);
        }
        p.std_min[c] = lo;
        p.std_max[c] = hi;
    }
    return p;
}

// (x - mean) / std per feature
inline Matrix standardize(const ScalerParams& p, const Matrix& samples) {
    if (samples.cols() != p.mean.size())
        throw std::invalid_argument("scaler dimension mismatch");
    Matrix out(samples.rows(), samples.cols());
    for (std::size_t r = 0; r < samples.rows(); ++r)
        for (std::size_t c = 0; c < samples.cols(); ++c)
            out(r, c) = (samples(r, c) - p.mean[c]) / p.stddev[c];
    return out;
}

// Affine map of each standardized feature's train range [min, max] onto
// [0, pi], with out-of-range values clipped.
inline Matrix to_quantum_range(const ScalerParams& p, const Matrix& standardized) {
    if (standardized.cols() != p.mean.size())
        throw std::invalid_argument("scaler dimension mismatch");
    constexpr double pi = 3.14159265358979323846;
    Matrix out(standardized.rows(), standardized.cols());
    for (std::size_t c = 0; c < standardized.cols(); ++c) {
        const double width = p.std_max[c] - p.std_min[c];
        for (std::size_t r = 0; r < standardized.rows(); ++r) {
            double v = width > 0.0 ? (standardized(r, c) - p.std_min[c]) / width * pi : 0.0;
            if (v < 0.0) v = 0.0;
            if (v > pi) v = pi;
            out(r, c) = v;
        }
    }
    return out;
}

inline Matrix apply_scaler(const ScalerParams& p, const Matrix& samples) {
    return to_quantum_range(p, standardize(p, samples));
}

// --- splitting ------------------------------------------------------------------

namespace detail {

// Largest-remainder allocation of `total` slots across class counts.
inline std::vector<std::size_t> allocate_proportional(const std::vector<std::size_t>& counts,
                                                      std::size_t total) {
    const std::size_t n = [&] {
        std::size_t s = 0;
        for (const auto c : counts) s += c;
        return s;
    }();
    std::vector<std::size_t> alloc(counts.size(), 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        const double quota =
            static_cast<double>(total) * static_cast<double>(counts[c]) / static_cast<double>(n);
        alloc[c] = static_cast<std::size_t>(quota);
        if (alloc[c] > counts[c]) alloc[c] = counts[c];
        assigned += alloc[c];
        remainders.emplace_back(quota - static_cast<double>(alloc[c]), c);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::size_t at = 0;
    while (assigned < total && at < remainders.size()) {
        const std::size_t c = remainders[at++].second;
        if (alloc[c] < counts[c]) {
            ++alloc[c];
            ++assigned;
        }
    }
    // spill over if some classes were capped
    at = 0;
    while (assigned < total) {
        const std::size_t c = at % counts.size();
        if (alloc[c] < counts[c]) {
            ++alloc[c];
            ++assigned;
        }
        ++at;
    }
    return alloc;
}

inline std::map<std::string, std::vector<std::size_t>> group_by_label(
    std::span<const std::string> labels, std::span<const std::size_t> pool) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (const std::size_t idx : pool) groups[labels[idx]].push_back(idx);
    return groups;
}

}  // namespace detail

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Deterministic stratified split: per-class proportions in the test set
// match the requested fraction within one sample. Returned index lists are
// sorted ascending.
inline SplitIndices stratified_split(std::span<const std::string> labels, double test_fraction,
                                     std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ValidationError("test fraction must be inside (0, 1)");
    if (labels.empty()) throw ValidationError("cannot split an empty dataset");

    std::vector<std::size_t> all(labels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    auto groups = detail::group_by_label(labels, all);

    std::vector<std::size_t> counts;
    counts.reserve(groups.size());
    for (const auto& [cls, idx] : groups) counts.push_back(idx.size());
    const std::size_t want_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(labels.size())));
    const auto alloc = detail::allocate_proportional(counts, want_test);

    SplitIndices split;
    std::size_t g = 0;
    for (auto& [cls, idx] : groups) {
        Rng rng(seed * 0x9E3779B97F4A7C15ULL + g);
        rng.shuffle(idx);
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < alloc[g] ? split.test : split.train).push_back(idx[i]);
        ++g;
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

// Deterministic stratified subsample of `size` indices from `pool`.
// size == pool size returns the pool unchanged.
inline std::vector<std::size_t> stratified_subsample(std::span<const std::string> labels,
                                                     std::span<const std::size_t> pool,
                                                     std::size_t size, std::uint64_t seed) {
    if (size > pool.size())
        throw ValidationError("subsample size " + std::to_string(size) +
                              " exceeds pool size " + std::to_string(pool.size()));
    if (size == pool.size()) return {pool.begin(), pool.end()};

    auto groups = detail::group_by_label(labels, pool);
    std::vector<std::size_t> counts;
    counts.reserve(groups.size());
    for (const auto& [cls, idx] : groups) counts.push_back(idx.size());
    const auto alloc = detail::allocate_proportional(counts, size);

    std::vector<std::size_t> chosen;
    chosen.reserve(size);
    std::size_t g = 0;
    for (auto& [cls, idx] : groups) {
        Rng rng(seed * 0xD1B54A32D192ED03ULL + g);
        rng.shuffle(idx);
        for (std::size_t i = 0; i < alloc[g]; ++i) chosen.push_back(idx[i]);
        ++g;
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

// --- catalogue export ----------------------------------------------------------

inline void write_star_csv(const std::string& path, const std::vector<StarRecord>& records) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "Vmag,Plx,e_Plx,B-V,SpType,Amag,TargetClass\n";
    auto cell = [](double v) { return std::isnan(v) ? std::string() : format_g17(v); };
    for (const auto& r : records) {
        out << cell(r.vmag) << ',' << cell(r.plx) << ',' << cell(r.e_plx) << ',' << cell(r.bv)
            << ',' << r.sp_type << ',' << cell(r.amag) << ','
            << (r.target_class < 0 ? std::string() : std::to_string(r.target_class)) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace starsvm
