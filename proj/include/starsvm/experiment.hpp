#pragma once
// Experiment harness: JSON configuration and the drivers behind the CLI
// subcommands (prep, train, eval, curve, baseline, bench). Every driver is
// deterministic given (config, seed); only the bench timing columns vary
// between runs.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "starsvm/baselines.hpp"
#include "starsvm/errors.hpp"
#include "starsvm/kernel.hpp"
#include "starsvm/metrics.hpp"
#include "starsvm/stellar_data.hpp"
#include "starsvm/svm.hpp"

namespace starsvm {

using nlohmann::json;

struct ExperimentConfig {
    std::string dataset;
    std::string out_dir = "out";
    std::string task = "binary";    // binary | multiclass
    std::string kernel = "quantum"; // quantum | rbf
    std::vector<std::string> features = {"Amag", "B-V", "B-V+Amag", "B-V-Amag"};

    // quantum feature map
    std::size_t repetitions = 2;
    std::string entanglement = "full"; // only "full" or an explicit pair list
    std::vector<std::pair<std::size_t, std::size_t>> entanglement_pairs;

    double rbf_sigma = 1.0;

    // svm
    double svm_c = 1.0;
    double svm_tol = 1e-3;
    std::size_t svm_max_passes = 100;

    // baselines
    std::size_t knn_k = 5;
    double lr_l2 = 1e-4;
    double lr_rate = 0.1;
    std::size_t lr_max_iter = 5000;
    double lr_grad_tol = 1e-6;

    // data handling
    double test_fraction = 0.2;
    std::size_t train_size = 0; // 0 = entire train split (capped for kernels)
    std::size_t test_size = 0;  // 0 = entire test split
    std::size_t max_kernel_size = 5000;
    std::size_t min_class_count = 50;

    // learning curve
    std::vector<std::size_t> train_sizes = {1000, 2000, 5000, 10000, 15000, 20000};

    // bench
    std::vector<std::size_t> bench_workers = {1, 2, 4, 8};
    std::size_t bench_size = 500;
    std::size_t bench_repeats = 5;

    std::uint64_t seed = 42;
    std::size_t workers = 1;
    bool export_kernel = false;

    void validate() const {
        if (task != "binary" && task != "multiclass")
            throw ValidationError("task must be 'binary' or 'multiclass', got '" + task + "'");
        if (kernel != "quantum" && kernel != "rbf")
            throw ValidationError("kernel must be 'quantum' or 'rbf', got '" + kernel + "'");
        if (features.empty()) throw ValidationError("feature selection is empty");
        for (const auto& f : features) feature_from_name(f);
        if (!(test_fraction > 0.0 && test_fraction < 1.0))
            throw ValidationError("test_fraction must be inside (0, 1)");
        if (workers < 1) throw ValidationError("workers must be at least 1");
        if (repetitions < 1) throw ValidationError("repetitions must be at least 1");
        if (!(rbf_sigma > 0.0)) throw ValidationError("rbf_sigma must be positive");
        if (!(svm_c > 0.0)) throw ValidationError("svm_c must be positive");
        if (knn_k < 1) throw ValidationError("knn_k must be at least 1");
        if (bench_size < 2) throw ValidationError("bench_size must be at least 2");
        if (bench_workers.empty()) throw ValidationError("bench_workers is empty");
        if (entanglement != "full" && entanglement != "pairs")
            throw ValidationError("entanglement must be 'full' or 'pairs'");
    }

    std::vector<Feature> feature_set() const {
        std::vector<Feature> out;
        out.reserve(features.size());
        for (const auto& f : features) out.push_back(feature_from_name(f));
        return out;
    }

    FeatureMapConfig feature_map() const {
        if (entanglement == "full") return FeatureMapConfig::full(features.size(), repetitions);
        FeatureMapConfig cfg;
        cfg.n_features = features.size();
        cfg.repetitions = repetitions;
        cfg.entanglement = entanglement_pairs;
        cfg.validate();
        return cfg;
    }

    KernelSpec kernel_spec() const {
        return kernel == "quantum" ? KernelSpec::quantum(feature_map())
                                   : KernelSpec::gaussian(rbf_sigma);
    }
};

inline json config_to_json(const ExperimentConfig& c) {
    json pairs = json::array();
    for (const auto& [i, j] : c.entanglement_pairs) pairs.push_back({i, j});
    return json{{"dataset", c.dataset},
                {"out_dir", c.out_dir},
                {"task", c.task},
                {"kernel", c.kernel},
                {"features", c.features},
                {"repetitions", c.repetitions},
                {"entanglement", c.entanglement},
                {"entanglement_pairs", pairs},
                {"rbf_sigma", c.rbf_sigma},
                {"svm_c", c.svm_c},
                {"svm_tol", c.svm_tol},
                {"svm_max_passes", c.svm_max_passes},
                {"knn_k", c.knn_k},
                {"lr_l2", c.lr_l2},
                {"lr_rate", c.lr_rate},
                {"lr_max_iter", c.lr_max_iter},
                {"lr_grad_tol", c.lr_grad_tol},
                {"test_fraction", c.test_fraction},
                {"train_size", c.train_size},
                {"test_size", c.test_size},
                {"max_kernel_size", c.max_kernel_size},
                {"min_class_count", c.min_class_count},
                {"train_sizes", c.train_sizes},
                {"bench_workers", c.bench_workers},
                {"bench_size", c.bench_size},
                {"bench_repeats", c.bench_repeats},
                {"seed", c.seed},
                {"workers", c.workers},
                {"export_kernel", c.export_kernel}};
}

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    static const std::set<std::string> known{
        "dataset",      "out_dir",       "task",           "kernel",
        "features",     "repetitions",   "entanglement",   "entanglement_pairs",
        "rbf_sigma",    "svm_c",         "svm_tol",        "svm_max_passes",
        "knn_k",        "lr_l2",         "lr_rate",        "lr_max_iter",
        "lr_grad_tol",  "test_fraction", "train_size",     "test_size",
        "max_kernel_size", "min_class_count", "train_sizes", "bench_workers",
        "bench_size",   "bench_repeats", "seed",           "workers",
        "export_kernel"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw ValidationError("unknown config key: " + key);

    auto get = [&j](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("dataset", c.dataset);
    get("out_dir", c.out_dir);
    get("task", c.task);
    get("kernel", c.kernel);
    get("features", c.features);
    get("repetitions", c.repetitions);
    get("entanglement", c.entanglement);
    get("rbf_sigma", c.rbf_sigma);
    get("svm_c", c.svm_c);
    get("svm_tol", c.svm_tol);
    get("svm_max_passes", c.svm_max_passes);
    get("knn_k", c.knn_k);
    get("lr_l2", c.lr_l2);
    get("lr_rate", c.lr_rate);
    get("lr_max_iter", c.lr_max_iter);
    get("lr_grad_tol", c.lr_grad_tol);
    get("test_fraction", c.test_fraction);
    get("train_size", c.train_size);
    get("test_size", c.test_size);
    get("max_kernel_size", c.max_kernel_size);
    get("min_class_count", c.min_class_count);
    get("train_sizes", c.train_sizes);
    get("bench_workers", c.bench_workers);
    get("bench_size", c.bench_size);
    get("bench_repeats", c.bench_repeats);
    get("seed", c.seed);
    get("workers", c.workers);
    get("export_kernel", c.export_kernel);
    if (j.contains("entanglement_pairs"))
        for (const auto& p : j.at("entanglement_pairs"))
            c.entanglement_pairs.emplace_back(p.at(0).get<std::size_t>(),
                                              p.at(1).get<std::size_t>());
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError("config is not valid JSON: " + std::string(e.what()));
    }
    return config_from_json(j);
}

// --- shared pipeline ---------------------------------------------------------

struct TaskData {
    std::vector<std::string> classes;
    std::vector<std::string> train_labels, test_labels;
    Matrix train_raw, test_raw; // engineered features before scaling
    Matrix train_std, test_std; // standardized features (rbf, baselines)
    Matrix train_q, test_q;     // [0, pi] features (quantum kernel)
    ScalerParams scaler;
    CleanReport clean_report;
    std::size_t pool_train = 0, pool_test = 0;
    std::vector<std::string> dropped_classes;
};

namespace detail {

inline std::vector<StarRecord> load_clean(const ExperimentConfig& cfg, CleanReport* report) {
    if (cfg.dataset.empty()) throw ValidationError("config needs a dataset path");
    return clean(load_star_csv(cfg.dataset), report);
}

inline std::string binary_name(int label) { return label > 0 ? "giant" : "dwarf"; }

}  // namespace detail

// Loads, cleans, labels, splits, subsamples and scales per the config.
inline TaskData prepare_task(const ExperimentConfig& cfg) {
    cfg.validate();
    TaskData data;
    const auto records = detail::load_clean(cfg, &data.clean_report);
    if (records.size() < 10) throw ValidationError("dataset too small after cleaning");
    const auto selection = cfg.feature_set();
    const auto ds = make_dataset(records, selection);

    // task labels per dataset row; multiclass drops invalid or rare letters
    std::vector<std::size_t> rows;
    std::vector<std::string> labels;
    if (cfg.task == "binary") {
        rows.resize(ds.binary_labels.size());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
        labels.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            labels[i] = detail::binary_name(ds.binary_labels[i]);
    } else {
        std::map<std::string, std::size_t> counts;
        for (const auto& s : ds.spectral_labels)
            if (!s.empty()) ++counts[s];
        std::set<std::string> keep;
        for (const auto& [cls, n] : counts) {
            if (n >= cfg.min_class_count) keep.insert(cls);
            else data.dropped_classes.push_back(cls);
        }
        if (keep.size() < 2)
            throw ValidationError("fewer than two spectral classes pass min_class_count");
        for (std::size_t i = 0; i < ds.spectral_labels.size(); ++i) {
            if (keep.count(ds.spectral_labels[i])) {
                rows.push_back(i);
                labels.push_back(ds.spectral_labels[i]);
            }
        }
    }

    const auto split = stratified_split(labels, cfg.test_fraction, cfg.seed);
    data.pool_train = split.train.size();
    data.pool_test = split.test.size();

    auto cap = [&](std::size_t requested, std::size_t pool, const char* what) {
        if (requested == 0) return std::min(pool, cfg.max_kernel_size);
        if (requested > pool)
            throw ValidationError(std::string(what) + " size " + std::to_string(requested) +
                                  " exceeds available " + std::to_string(pool));
        return requested;
    };
    const std::size_t n_train = std::min(cap(cfg.train_size, split.train.size(), "train"),
                                         cfg.max_kernel_size);
    const std::size_t n_test = cfg.test_size == 0
                                   ? split.test.size()
                                   : cap(cfg.test_size, split.test.size(), "test");

    const auto train_rows = stratified_subsample(labels, split.train, n_train, cfg.seed + 1);
    const auto test_rows = stratified_subsample(labels, split.test, n_test, cfg.seed + 2);

    auto gather = [&](std::span<const std::size_t> picked, Matrix& feats,
                      std::vector<std::string>& labs) {
        feats = Matrix(picked.size(), selection.size());
        labs.resize(picked.size());
        for (std::size_t r = 0; r < picked.size(); ++r) {
            for (std::size_t c = 0; c < selection.size(); ++c)
                feats(r, c) = ds.features(rows[picked[r]], c);
            labs[r] = labels[picked[r]];
        }
    };
    gather(train_rows, data.train_raw, data.train_labels);
    gather(test_rows, data.test_raw, data.test_labels);

    std::set<std::string> distinct(data.train_labels.begin(), data.train_labels.end());
    data.classes.assign(distinct.begin(), distinct.end());

    data.scaler = fit_scaler(data.train_raw, cfg.features);
    data.train_std = standardize(data.scaler, data.train_raw);
    data.test_std = standardize(data.scaler, data.test_raw);
    data.train_q = to_quantum_range(data.scaler, data.train_std);
    data.test_q = to_quantum_range(data.scaler, data.test_std);
    return data;
}

// --- output helpers ------------------------------------------------------------

namespace detail {

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir);
}

inline void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << body;
    if (!out) throw IoError("write failed: " + path);
}

inline void write_json(const std::string& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

inline std::string fingerprint_hex(const Matrix& features,
                                   std::span<const std::string> labels) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* bytes, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(bytes);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    };
    const auto span = features.data();
    mix(span.data(), span.size() * sizeof(double));
    for (const auto& l : labels) mix(l.data(), l.size());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline json scaler_to_json(const ScalerParams& p) {
    return json{{"mean", p.mean},
                {"stddev", p.stddev},
                {"std_min", p.std_min},
                {"std_max", p.std_max}};
}

inline ScalerParams scaler_from_json(const json& j) {
    ScalerParams p;
    p.mean = j.at("mean").get<std::vector<double>>();
    p.stddev = j.at("stddev").get<std::vector<double>>();
    p.std_min = j.at("std_min").get<std::vector<double>>();
    p.std_max = j.at("std_max").get<std::vector<double>>();
    return p;
}

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j) {
    const std::size_t rows = j.size();
    const std::size_t cols = rows == 0 ? 0 : j.at(0).size();
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
    return m;
}

}  // namespace detail

// --- trained model bundle --------------------------------------------------------

struct TrainedModel {
    std::string task;    // binary | multiclass
    std::string kernel;  // quantum | rbf
    std::vector<std::string> features;
    FeatureMapConfig feature_map;
    double rbf_sigma = 1.0;
    ScalerParams scaler;
    Matrix train_features; // representation the kernel consumes
    std::vector<std::string> classes;
    // binary: one model for giant-vs-dwarf under classes {dwarf, giant};
    // multiclass: one model per class in class order
    std::vector<SvmModel> models;
    std::string fingerprint;
    std::uint64_t seed = 0;

    KernelSpec kernel_spec() const {
        return kernel == "quantum" ? KernelSpec::quantum(feature_map)
                                   : KernelSpec::gaussian(rbf_sigma);
    }
    bool all_converged() const {
        for (const auto& m : models)
            if (!m.converged) return false;
        return true;
    }
    std::vector<std::string> predict(const Matrix& cross) const {
        if (task == "binary") {
            const auto signs = predict_binary(models.at(0), cross);
            std::vector<std::string> out(signs.size());
            for (std::size_t i = 0; i < signs.size(); ++i)
                out[i] = detail::binary_name(signs[i]);
            return out;
        }
        MultiClassModel mc{classes, models};
        return predict_multi(mc, cross);
    }
    // per-class decision scores; binary yields a single giant-side column
    std::vector<std::vector<double>> scores(const Matrix& cross) const {
        std::vector<std::vector<double>> out;
        for (const auto& m : models) out.push_back(decision_values(m, cross));
        return out;
    }
};

inline json model_to_json(const TrainedModel& m) {
    json fm{{"n_features", m.feature_map.n_features},
            {"repetitions", m.feature_map.repetitions},
            {"scale_lo", m.feature_map.scale_lo},
            {"scale_hi", m.feature_map.scale_hi}};
    json pairs = json::array();
    for (const auto& [i, j] : m.feature_map.entanglement) pairs.push_back({i, j});
    fm["entanglement"] = std::move(pairs);
    json models = json::array();
    for (const auto& sm : m.models) models.push_back(svm_model_to_json(sm));
    return json{{"format", "starsvm-model-v1"},
                {"task", m.task},
                {"kernel", m.kernel},
                {"features", m.features},
                {"feature_map", std::move(fm)},
                {"rbf_sigma", m.rbf_sigma},
                {"scaler", detail::scaler_to_json(m.scaler)},
                {"train_features", detail::matrix_to_json(m.train_features)},
                {"classes", m.classes},
                {"models", std::move(models)},
                {"fingerprint", m.fingerprint},
                {"seed", m.seed}};
}

inline TrainedModel model_from_json(const json& j) {
    if (j.value("format", "") != "starsvm-model-v1")
        throw SchemaError("not a starsvm model file");
    TrainedModel m;
    m.task = j.at("task").get<std::string>();
    m.kernel = j.at("kernel").get<std::string>();
    m.features = j.at("features").get<std::vector<std::string>>();
    const auto& fm = j.at("feature_map");
    m.feature_map.n_features = fm.at("n_features").get<std::size_t>();
    m.feature_map.repetitions = fm.at("repetitions").get<std::size_t>();
    m.feature_map.scale_lo = fm.at("scale_lo").get<double>();
    m.feature_map.scale_hi = fm.at("scale_hi").get<double>();
    for (const auto& p : fm.at("entanglement"))
        m.feature_map.entanglement.emplace_back(p.at(0).get<std::size_t>(),
                                                p.at(1).get<std::size_t>());
    m.rbf_sigma = j.at("rbf_sigma").get<double>();
    m.scaler = detail::scaler_from_json(j.at("scaler"));
    m.train_features = detail::matrix_from_json(j.at("train_features"));
    m.classes = j.at("classes").get<std::vector<std::string>>();
    for (const auto& mj : j.at("models")) m.models.push_back(svm_model_from_json(mj));
    const std::size_t expect = m.task == "binary" ? 1 : m.classes.size();
    if (m.models.size() != expect) throw SchemaError("model file has wrong model count");
    m.fingerprint = j.at("fingerprint").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    return m;
}

inline TrainedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError("model is not valid JSON: " + std::string(e.what()));
    }
    return model_from_json(j);
}

// --- drivers -------------------------------------------------------------------

struct PrepResult {
    CleanReport report;
    double amag_recompute_max_dev = 0.0;
    std::string cleaned_csv, engineered_csv, report_json;
};

// prep: clean the catalogue, emit the cleaned rows, the engineered feature
// table (with one-hot spectral columns) and a cleaning report.
inline PrepResult run_prep(const ExperimentConfig& cfg) {
    cfg.validate();
    detail::ensure_dir(cfg.out_dir);
    PrepResult result;
    const auto records = detail::load_clean(cfg, &result.report);

    const auto dir = std::filesystem::path(cfg.out_dir);
    result.cleaned_csv = (dir / "cleaned.csv").string();
    write_star_csv(result.cleaned_csv, records);

    // the file's own Amag column against the parallax formula, first 100 rows
    for (std::size_t i = 0; i < records.size() && i < 100; ++i) {
        const double recomputed = absolute_magnitude(records[i].vmag, records[i].plx);
        result.amag_recompute_max_dev =
            std::max(result.amag_recompute_max_dev, std::abs(recomputed - records[i].amag));
    }

    const auto selection = cfg.feature_set();
    result.engineered_csv = (dir / "engineered.csv").string();
    {
        std::ofstream out(result.engineered_csv);
        if (!out) throw IoError("cannot open for writing: " + result.engineered_csv);
        for (std::size_t c = 0; c < cfg.features.size(); ++c) {
            if (c) out << ',';
            out << cfg.features[c];
        }
        out << ",binary_label,spectral_class";
        for (const char cls : kSpectralLetters) out << ",is_" << cls;
        out << '\n';
        for (const auto& rec : records) {
            const auto values = engineer_features(rec, selection);
            const auto labels = extract_labels(rec);
            for (std::size_t c = 0; c < values.size(); ++c) {
                if (c) out << ',';
                out << format_g17(values[c]);
            }
            out << ',' << labels.binary << ',' << labels.spectral;
            for (const char cls : kSpectralLetters)
                out << ',' << (labels.spectral.size() == 1 && labels.spectral[0] == cls ? 1 : 0);
            out << '\n';
        }
        if (!out) throw IoError("write failed: " + result.engineered_csv);
    }

    result.report_json = (dir / "clean_report.json").string();
    json rj = clean_report_to_json(result.report);
    rj["amag_recompute_max_dev"] = result.amag_recompute_max_dev;
    detail::write_json(result.report_json, rj);
    detail::write_json((dir / "effective_config.json").string(), config_to_json(cfg));
    return result;
}

struct TrainResult {
    TrainedModel model;
    json train_metrics;
    std::string model_path;
    double kernel_seconds = 0.0;
    double solve_seconds = 0.0;
};

inline TrainResult run_train(const ExperimentConfig& cfg) {
    cfg.validate();
    detail::ensure_dir(cfg.out_dir);
    const auto data = prepare_task(cfg);
    const auto spec = cfg.kernel_spec();
    const Matrix& train = cfg.kernel == "quantum" ? data.train_q : data.train_std;

    const auto t0 = std::chrono::steady_clock::now();
    const auto gram = kernel_matrix(train, spec, cfg.workers);
    const auto t1 = std::chrono::steady_clock::now();

    const SvmTrainOptions opt{cfg.svm_c, cfg.svm_tol, cfg.svm_max_passes};
    TrainedModel model;
    model.task = cfg.task;
    model.kernel = cfg.kernel;
    model.features = cfg.features;
    if (cfg.kernel == "quantum") model.feature_map = spec.feature_map;
    model.rbf_sigma = cfg.rbf_sigma;
    model.scaler = data.scaler;
    model.train_features = train;
    model.classes = data.classes;
    if (cfg.task == "binary") {
        std::vector<int> y(data.train_labels.size());
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] = data.train_labels[i] == "giant" ? 1 : -1;
        model.models.push_back(train_svm(gram, y, opt));
    } else {
        auto mc = train_one_vs_rest(gram, data.train_labels, opt);
        model.models = std::move(mc.models);
    }
    model.fingerprint = detail::fingerprint_hex(train, data.train_labels);
    model.seed = cfg.seed;
    const auto t2 = std::chrono::steady_clock::now();

    TrainResult result;
    result.model = model;
    result.kernel_seconds = std::chrono::duration<double>(t1 - t0).count();
    result.solve_seconds = std::chrono::duration<double>(t2 - t1).count();

    // training-set metrics from the Gram rows
    Matrix rows(gram.size(), gram.size());
    for (std::size_t i = 0; i < gram.size(); ++i)
        for (std::size_t j = 0; j < gram.size(); ++j) rows(i, j) = gram(i, j);
    const auto pred = model.predict(rows);
    const auto cm = confusion(data.train_labels, pred, model.classes);
    json metrics{{"task", cfg.task},
                 {"kernel", cfg.kernel},
                 {"n_train", gram.size()},
                 {"train_accuracy", accuracy(cm)},
                 {"converged", model.all_converged()},
                 {"classes", model.classes}};
    std::vector<std::size_t> sweeps;
    for (const auto& m : model.models) sweeps.push_back(m.sweeps);
    metrics["sweeps"] = sweeps;
    result.train_metrics = metrics;

    const auto dir = std::filesystem::path(cfg.out_dir);
    result.model_path = (dir / "model.json").string();
    detail::write_json(result.model_path, model_to_json(model));
    detail::write_json((dir / "train_metrics.json").string(), metrics);
    detail::write_json((dir / "effective_config.json").string(), config_to_json(cfg));
    if (cfg.export_kernel) write_kernel_csv((dir / "kernel.csv").string(), gram);
    return result;
}

struct EvalResult {
    json metrics;
    std::vector<std::string> y_true, y_pred;
    std::string metrics_path, predictions_path;
};

namespace detail {

inline json evaluate_predictions(const std::string& task,
                                 const std::vector<std::string>& classes,
                                 std::span<const std::string> y_true,
                                 std::span<const std::string> y_pred,
                                 const std::string& out_dir, const std::string& tag) {
    const auto cm = confusion(y_true, y_pred, classes);
    const auto dir = std::filesystem::path(out_dir);
    write_confusion_counts_csv((dir / (tag + "_confusion_counts.csv")).string(), cm);
    write_confusion_percent_csv((dir / (tag + "_confusion_percent.csv")).string(), cm);

    json metrics{{"n_test", y_true.size()}, {"classes", classes}, {"accuracy", accuracy(cm)}};
    if (task == "binary") {
        const auto bm = binary_metrics(cm, "giant");
        metrics["binary"] = binary_metrics_to_json(bm);
    }
    const auto mf = macro_f1(cm);
    metrics["macro_f1"] = mf.defined ? json(mf.value) : json(nullptr);
    metrics["macro_f1_excluded"] = mf.excluded_classes;
    return metrics;
}

}  // namespace detail

inline EvalResult run_eval(const ExperimentConfig& cfg, const std::string& model_path) {
    cfg.validate();
    detail::ensure_dir(cfg.out_dir);
    const auto model = load_model(model_path);
    if (model.features != cfg.features)
        throw ValidationError("config feature set does not match the model's");
    if (model.task != cfg.task)
        throw ValidationError("config task does not match the model's");

    const auto data = prepare_task(cfg);
    // scale the test rows with the model's stored scaler, not a refit
    const Matrix test_std = standardize(model.scaler, data.test_raw);
    const Matrix test =
        model.kernel == "quantum" ? to_quantum_range(model.scaler, test_std) : test_std;

    const auto cross = cross_kernel_matrix(model.train_features, test, model.kernel_spec(),
                                           cfg.workers);
    const auto pred = model.predict(cross);

    EvalResult result;
    result.y_true = data.test_labels;
    result.y_pred = pred;
    result.metrics = detail::evaluate_predictions(model.task, model.classes, data.test_labels,
                                                  pred, cfg.out_dir, "eval");
    result.metrics["kernel"] = model.kernel;
    result.metrics["task"] = model.task;
    result.metrics["n_train"] = model.train_features.rows();
    result.metrics["fingerprint"] = model.fingerprint;
    result.metrics["converged"] = model.all_converged();

    const auto dir = std::filesystem::path(cfg.out_dir);
    result.predictions_path = (dir / "predictions.csv").string();
    {
        std::ofstream out(result.predictions_path);
        if (!out) throw IoError("cannot open for writing: " + result.predictions_path);
        const auto scores = model.scores(cross);
        out << "row,true,predicted";
        if (model.task == "binary") out << ",score_giant";
        else
            for (const auto& c : model.classes) out << ",score_" << c;
        out << '\n';
        for (std::size_t r = 0; r < pred.size(); ++r) {
            out << r << ',' << data.test_labels[r] << ',' << pred[r];
            for (const auto& col : scores) out << ',' << format_g17(col[r]);
            out << '\n';
        }
        if (!out) throw IoError("write failed: " + result.predictions_path);
    }
    result.metrics_path = (dir / "metrics.json").string();
    detail::write_json(result.metrics_path, result.metrics);
    detail::write_json((dir / "effective_config.json").string(), config_to_json(cfg));
    return result;
}

struct CurvePoint {
    std::size_t requested = 0;
    std::size_t used = 0;
    std::string kernel;
    double accuracy = 0.0, f1 = 0.0, specificity = 0.0, sensitivity = 0.0;
    bool converged = true;
};

struct CurveResult {
    std::vector<CurvePoint> points;
    std::string csv_path;
};

// Learning curve over train sizes for both kernels on the shared test set.
inline CurveResult run_curve(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.task != "binary")
        throw ValidationError("the learning curve experiment is a binary task");
    detail::ensure_dir(cfg.out_dir);

    ExperimentConfig base = cfg;
    base.train_size = 0;
    const auto data = prepare_task(base);

    // validate sizes against the available pool before running anything
    std::string oversized;
    for (const auto size : cfg.train_sizes)
        if (size > data.pool_train) oversized += " " + std::to_string(size);
    if (!oversized.empty())
        throw ValidationError("train sizes exceed the available pool (" +
                              std::to_string(data.pool_train) + "):" + oversized);

    CurveResult result;
    for (const auto size : cfg.train_sizes) {
        for (const std::string kernel : {"quantum", "rbf"}) {
            ExperimentConfig point = cfg;
            point.kernel = kernel;
            point.train_size = std::min(size, cfg.max_kernel_size);

            const auto task = prepare_task(point);
            const Matrix& train = kernel == "quantum" ? task.train_q : task.train_std;
            const Matrix& test = kernel == "quantum" ? task.test_q : task.test_std;
            const auto spec = point.kernel_spec();
            const auto gram = kernel_matrix(train, spec, cfg.workers);
            const SvmTrainOptions opt{cfg.svm_c, cfg.svm_tol, cfg.svm_max_passes};
            std::vector<int> y(task.train_labels.size());
            for (std::size_t i = 0; i < y.size(); ++i)
                y[i] = task.train_labels[i] == "giant" ? 1 : -1;
            const auto m = train_svm(gram, y, opt);
            const auto cross = cross_kernel_matrix(train, test, spec, cfg.workers);
            const auto signs = predict_binary(m, cross);
            std::vector<std::string> pred(signs.size());
            for (std::size_t i = 0; i < signs.size(); ++i)
                pred[i] = detail::binary_name(signs[i]);
            const auto cm = confusion(task.test_labels, pred, {"dwarf", "giant"});
            const auto bm = binary_metrics(cm, "giant");

            CurvePoint pt;
            pt.requested = size;
            pt.used = train.rows();
            pt.kernel = kernel;
            pt.accuracy = bm.accuracy;
            pt.f1 = bm.f1;
            pt.specificity = bm.specificity;
            pt.sensitivity = bm.sensitivity;
            pt.converged = m.converged;
            result.points.push_back(pt);
        }
    }

    const auto dir = std::filesystem::path(cfg.out_dir);
    result.csv_path = (dir / "curve.csv").string();
    {
        std::ofstream out(result.csv_path);
        if (!out) throw IoError("cannot open for writing: " + result.csv_path);
        out << "train_size,used_size,kernel,accuracy,f1,specificity,sensitivity,converged\n";
        for (const auto& p : result.points)
            out << p.requested << ',' << p.used << ',' << p.kernel << ','
                << format_g17(p.accuracy) << ',' << format_g17(p.f1) << ','
                << format_g17(p.specificity) << ',' << format_g17(p.sensitivity) << ','
                << (p.converged ? 1 : 0) << '\n';
        if (!out) throw IoError("write failed: " + result.csv_path);
    }
    detail::write_json((dir / "effective_config.json").string(), config_to_json(cfg));
    return result;
}

struct BaselineResult {
    json metrics;
    std::string metrics_path;
};

// KNN and logistic-regression baselines on both tasks.
inline BaselineResult run_baseline(const ExperimentConfig& cfg) {
    cfg.validate();
    detail::ensure_dir(cfg.out_dir);
    json all;
    for (const std::string task : {"binary", "multiclass"}) {
        ExperimentConfig tcfg = cfg;
        tcfg.task = task;
        const auto data = prepare_task(tcfg);

        const auto knn = make_knn(data.train_std, data.train_labels,
                                  std::min(cfg.knn_k, data.train_std.rows()));
        const auto knn_pred = knn_predict_all(knn, data.test_std);
        all[task]["knn"] = detail::evaluate_predictions(task, data.classes, data.test_labels,
                                                        knn_pred, cfg.out_dir,
                                                        task + "_knn");

        const LogisticOptions lopt{cfg.lr_l2, cfg.lr_rate, cfg.lr_max_iter, cfg.lr_grad_tol};
        std::vector<std::string> lr_pred;
        if (task == "binary") {
            std::vector<int> y(data.train_labels.size());
            for (std::size_t i = 0; i < y.size(); ++i)
                y[i] = data.train_labels[i] == "giant" ? 1 : -1;
            const auto lr = logistic_train(data.train_std, y, lopt);
            lr_pred.resize(data.test_std.rows());
            for (std::size_t r = 0; r < lr_pred.size(); ++r)
                lr_pred[r] = detail::binary_name(logistic_predict(lr, data.test_std.row(r)));
        } else {
            const auto lr = train_logistic_ovr(data.train_std, data.train_labels, lopt);
            lr_pred = logistic_predict_multi_all(lr, data.test_std);
        }
        all[task]["lr"] = detail::evaluate_predictions(task, data.classes, data.test_labels,
                                                       lr_pred, cfg.out_dir, task + "_lr");
        all[task]["n_train"] = data.train_std.rows();
        all[task]["n_test"] = data.test_std.rows();
    }

    BaselineResult result;
    result.metrics = all;
    const auto dir = std::filesystem::path(cfg.out_dir);
    result.metrics_path = (dir / "baseline_metrics.json").string();
    detail::write_json(result.metrics_path, all);
    detail::write_json((dir / "effective_config.json").string(), config_to_json(cfg));
    return result;
}

struct BenchRow {
    std::size_t workers = 0;
    double best_seconds = 0.0;
    double speedup = 1.0;
    bool identical = true;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    std::string csv_path;
};

// Kernel-build wall time vs worker count on a fixed sample, best of
// bench_repeats; all worker counts must produce bitwise identical matrices.
inline BenchResult run_bench(const ExperimentConfig& cfg) {
    cfg.validate();
    detail::ensure_dir(cfg.out_dir);
    ExperimentConfig tcfg = cfg;
    tcfg.task = "binary";
    tcfg.train_size = cfg.bench_size;
    tcfg.kernel = "quantum";
    const auto data = prepare_task(tcfg);
    const auto spec = tcfg.kernel_spec();

    BenchResult result;
    std::vector<double> reference;
    kernel_matrix(data.train_q, spec, 1);  // warm up caches and the allocator
    for (const auto w : cfg.bench_workers) {
        if (w < 1) throw ValidationError("bench worker counts must be at least 1");
        BenchRow row;
        row.workers = w;
        row.best_seconds = std::numeric_limits<double>::infinity();
        KernelMatrix gram;
        for (std::size_t rep = 0; rep < std::max<std::size_t>(1, cfg.bench_repeats); ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            gram = kernel_matrix(data.train_q, spec, w);
            const auto t1 = std::chrono::steady_clock::now();
            row.best_seconds = std::min(row.best_seconds,
                                        std::chrono::duration<double>(t1 - t0).count());
        }
        if (reference.empty()) {
            reference.assign(gram.entries().begin(), gram.entries().end());
        } else {
            row.identical = gram.entries().size() == reference.size() &&
                            std::memcmp(gram.entries().data(), reference.data(),
                                        reference.size() * sizeof(double)) == 0;
        }
        result.rows.push_back(row);
    }
    const double base = result.rows.front().best_seconds;
    for (auto& row : result.rows) row.speedup = base / row.best_seconds;

    const auto dir = std::filesystem::path(cfg.out_dir);
    result.csv_path = (dir / "timing.csv").string();
    {
        std::ofstream out(result.csv_path);
        if (!out) throw IoError("cannot open for writing: " + result.csv_path);
        out << "workers,best_seconds,speedup,identical\n";
        for (const auto& row : result.rows)
            out << row.workers << ',' << format_g17(row.best_seconds) << ','
                << format_g17(row.speedup) << ',' << (row.identical ? 1 : 0) << '\n';
        if (!out) throw IoError("write failed: " + result.csv_path);
    }
    detail::write_json((dir / "effective_config.json").string(), config_to_json(cfg));
    return result;
}

}  // namespace starsvm
