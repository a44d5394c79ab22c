#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "starsvm/experiment.hpp"
#include "starsvm/synthetic_catalogue.hpp"

using namespace starsvm;
namespace fs = std::filesystem;

namespace {

struct Workspace {
    fs::path dir;
    std::string dataset;

    Workspace() {
        dir = fs::temp_directory_path() / ("starsvm_exp_" + std::to_string(::getpid()));
        fs::create_directories(dir);
        dataset = (dir / "stars.csv").string();
        SyntheticCatalogueOptions opt;
        opt.clean_rows = 3000;
        opt.duplicate_rows = 25;
        opt.missing_rows = 20;
        opt.nonpositive_plx_rows = 8;
        write_synthetic_catalogue(dataset, opt);
    }
    ~Workspace() { fs::remove_all(dir); }

    ExperimentConfig config(const std::string& name) const {
        ExperimentConfig cfg;
        cfg.dataset = dataset;
        cfg.out_dir = (dir / name).string();
        cfg.train_size = 400;
        cfg.test_size = 400;
        cfg.svm_max_passes = 300;
        cfg.workers = 2;
        return cfg;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const Workspace& workspace() {
    static Workspace ws;
    return ws;
}

}  // namespace

TEST_CASE("config json round trip and validation") {
    ExperimentConfig cfg = workspace().config("cfgtest");
    cfg.task = "multiclass";
    cfg.kernel = "rbf";
    cfg.rbf_sigma = 1.5;
    const auto j = config_to_json(cfg);
    const auto back = config_from_json(j);
    CHECK(back.task == "multiclass");
    CHECK(back.kernel == "rbf");
    CHECK(back.rbf_sigma == 1.5);
    CHECK(back.features == cfg.features);
    CHECK(back.seed == cfg.seed);

    json bad = j;
    bad["kern"] = "quantum";
    CHECK_THROWS_AS(config_from_json(bad), ValidationError);

    json bad_task = j;
    bad_task["task"] = "ternary";
    CHECK_THROWS_AS(config_from_json(bad_task), ValidationError);

    json bad_feature = j;
    bad_feature["features"] = {"Amag", "Bogus"};
    CHECK_THROWS_AS(config_from_json(bad_feature), ValidationError);
}

TEST_CASE("prepare_task shapes, stratification and scaling") {
    auto cfg = workspace().config("prep_task");

    SUBCASE("binary") {
        const auto data = prepare_task(cfg);
        CHECK(data.classes == std::vector<std::string>{"dwarf", "giant"});
        CHECK(data.train_std.rows() == 400);
        CHECK(data.test_std.rows() == 400);
        CHECK(data.train_std.cols() == 4);
        // quantum features live in [0, pi]
        for (std::size_t r = 0; r < data.train_q.rows(); ++r)
            for (std::size_t c = 0; c < 4; ++c) {
                CHECK(data.train_q(r, c) >= 0.0);
                CHECK(data.train_q(r, c) <= 3.14159265358979324);
            }
        // near-balanced stratification
        std::size_t giants = 0;
        for (const auto& l : data.train_labels)
            if (l == "giant") ++giants;
        CHECK(giants >= 195);
        CHECK(giants <= 205);
    }

    SUBCASE("multiclass filters rare classes") {
        cfg.task = "multiclass";
        cfg.min_class_count = 40;
        const auto data = prepare_task(cfg);
        CHECK(data.classes.size() >= 4);
        for (const auto& c : data.classes) CHECK(c.size() == 1);
        // O is far below the threshold at 3000 rows
        for (const auto& c : data.classes) CHECK(c != "O");
        CHECK(!data.dropped_classes.empty());
    }

    SUBCASE("oversized request is rejected") {
        cfg.train_size = 100000;
        CHECK_THROWS_AS(prepare_task(cfg), ValidationError);
    }

    SUBCASE("deterministic for a fixed seed") {
        const auto a = prepare_task(cfg);
        const auto b = prepare_task(cfg);
        CHECK(a.train_std == b.train_std);
        CHECK(a.train_labels == b.train_labels);
        cfg.seed = 43;
        const auto c = prepare_task(cfg);
        CHECK(a.train_labels != c.train_labels);
    }
}

TEST_CASE("prep emits cleaned data and a report") {
    auto cfg = workspace().config("prep_out");
    const auto r = run_prep(cfg);
    CHECK(r.report.kept == 3000);
    CHECK(r.report.duplicates == 25);
    CHECK(r.report.missing == 20);
    CHECK(r.report.nonpositive_plx == 8);
    CHECK(r.amag_recompute_max_dev <= 0.011);
    CHECK(fs::exists(r.cleaned_csv));
    CHECK(fs::exists(r.engineered_csv));
    CHECK(fs::exists(r.report_json));

    // prep is idempotent: cleaning the cleaned file drops nothing
    ExperimentConfig again = cfg;
    again.dataset = r.cleaned_csv;
    again.out_dir = (workspace().dir / "prep_idem").string();
    const auto r2 = run_prep(again);
    CHECK(r2.report.kept == 3000);
    CHECK(r2.report.duplicates == 0);
    CHECK(r2.report.missing == 0);
    CHECK(r2.report.nonpositive_plx == 0);

    const auto engineered = slurp(r.engineered_csv);
    CHECK(engineered.find("Amag,B-V,B-V+Amag,B-V-Amag,binary_label,spectral_class") == 0);
}

TEST_CASE("train then eval round trips through the model file") {
    auto cfg = workspace().config("train_eval");
    const auto tr = run_train(cfg);
    CHECK(fs::exists(tr.model_path));
    CHECK(tr.model.all_converged());
    CHECK(tr.model.models.size() == 1);
    CHECK(tr.train_metrics.at("train_accuracy").get<double>() > 0.7);

    const auto loaded = load_model(tr.model_path);
    CHECK(loaded.fingerprint == tr.model.fingerprint);
    CHECK(loaded.train_features == tr.model.train_features);
    CHECK(loaded.models[0].alpha == tr.model.models[0].alpha);
    CHECK(loaded.models[0].bias == tr.model.models[0].bias);

    const auto ev = run_eval(cfg, tr.model_path);
    CHECK(ev.metrics.at("accuracy").get<double>() > 0.7);
    CHECK(ev.y_true.size() == 400);

    // the emitted metrics are reproducible from the emitted predictions
    const auto cm = confusion(ev.y_true, ev.y_pred, {"dwarf", "giant"});
    CHECK(accuracy(cm) == ev.metrics.at("accuracy").get<double>());
    const auto bm = binary_metrics(cm, "giant");
    CHECK(bm.sensitivity == ev.metrics.at("binary").at("sensitivity").get<double>());

    SUBCASE("feature mismatch is rejected") {
        ExperimentConfig other = cfg;
        other.features = {"Amag", "B-V"};
        CHECK_THROWS_AS(run_eval(other, tr.model_path), ValidationError);
    }

    SUBCASE("task mismatch is rejected") {
        ExperimentConfig other = cfg;
        other.task = "multiclass";
        CHECK_THROWS_AS(run_eval(other, tr.model_path), ValidationError);
    }

    SUBCASE("missing model file raises an io error") {
        CHECK_THROWS_AS(run_eval(cfg, "nope.json"), IoError);
    }
}

TEST_CASE("self-evaluation on the training rows reproduces the training accuracy") {
    auto cfg = workspace().config("self_eval");
    cfg.train_size = 150;
    const auto tr = run_train(cfg);
    const auto gram = kernel_matrix(tr.model.train_features, tr.model.kernel_spec(), 2);
    Matrix rows(gram.size(), gram.size());
    for (std::size_t i = 0; i < gram.size(); ++i)
        for (std::size_t j = 0; j < gram.size(); ++j) rows(i, j) = gram(i, j);
    const auto pred = tr.model.predict(rows);
    std::vector<std::string> labels;
    for (const int y : tr.model.models[0].labels) labels.push_back(y > 0 ? "giant" : "dwarf");
    std::size_t agree = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == labels[i]) ++agree;
    const double train_acc = tr.train_metrics.at("train_accuracy").get<double>();
    CHECK(static_cast<double>(agree) / static_cast<double>(pred.size()) == train_acc);
}

TEST_CASE("multiclass train and eval") {
    auto cfg = workspace().config("multi");
    cfg.task = "multiclass";
    cfg.min_class_count = 40;
    const auto tr = run_train(cfg);
    CHECK(tr.model.models.size() == tr.model.classes.size());
    const auto ev = run_eval(cfg, tr.model_path);
    CHECK(ev.metrics.at("accuracy").get<double>() > 0.5);
    const auto cm = confusion(ev.y_true, ev.y_pred, tr.model.classes);
    CHECK(accuracy(cm) == ev.metrics.at("accuracy").get<double>());
}

TEST_CASE("identical config and seed produce byte-identical outputs") {
    auto cfg_a = workspace().config("repro_a");
    auto cfg_b = workspace().config("repro_b");
    cfg_a.train_size = cfg_b.train_size = 200;
    cfg_a.test_size = cfg_b.test_size = 200;

    const auto ta = run_train(cfg_a);
    const auto tb = run_train(cfg_b);
    CHECK(slurp(ta.model_path) == slurp(tb.model_path));

    const auto ea = run_eval(cfg_a, ta.model_path);
    const auto eb = run_eval(cfg_b, tb.model_path);
    CHECK(slurp(ea.metrics_path) == slurp(eb.metrics_path));
    CHECK(slurp(ea.predictions_path) == slurp(eb.predictions_path));

    const auto pa = run_prep(cfg_a);
    const auto pb = run_prep(cfg_b);
    CHECK(slurp(pa.cleaned_csv) == slurp(pb.cleaned_csv));
    CHECK(slurp(pa.report_json) == slurp(pb.report_json));
}

TEST_CASE("learning curve table") {
    auto cfg = workspace().config("curve");
    cfg.train_sizes = {100, 200};
    cfg.test_size = 300;
    const auto r = run_curve(cfg);
    REQUIRE(r.points.size() == 4);  // two sizes x two kernels
    CHECK(r.points[0].kernel == "quantum");
    CHECK(r.points[1].kernel == "rbf");
    CHECK(r.points[0].used == 100);
    CHECK(r.points[2].used == 200);
    for (const auto& p : r.points) {
        CHECK(p.accuracy > 0.6);
        CHECK(p.accuracy <= 1.0);
    }
    CHECK(fs::exists(r.csv_path));

    // per-size metrics match a standalone train+eval with the same seed
    ExperimentConfig one = cfg;
    one.train_size = 200;
    one.kernel = "quantum";
    one.out_dir = (workspace().dir / "curve_check").string();
    const auto tr = run_train(one);
    const auto ev = run_eval(one, tr.model_path);
    CHECK(ev.metrics.at("accuracy").get<double>() == r.points[2].accuracy);

    SUBCASE("oversized curve size is reported with the offending value") {
        cfg.train_sizes = {100, 90000};
        try {
            run_curve(cfg);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("90000") != std::string::npos);
        }
    }

    SUBCASE("curve needs the binary task") {
        cfg.task = "multiclass";
        CHECK_THROWS_AS(run_curve(cfg), ValidationError);
    }
}

TEST_CASE("baseline driver covers both tasks and models") {
    auto cfg = workspace().config("baseline");
    cfg.min_class_count = 40;
    const auto r = run_baseline(cfg);
    for (const std::string task : {"binary", "multiclass"})
        for (const std::string model : {"knn", "lr"}) {
            const double acc = r.metrics.at(task).at(model).at("accuracy").get<double>();
            CHECK(acc > 0.5);
            CHECK(acc <= 1.0);
        }
    CHECK(fs::exists(workspace().dir / "baseline" / "binary_knn_confusion_counts.csv"));
    CHECK(fs::exists(workspace().dir / "baseline" / "multiclass_lr_confusion_percent.csv"));
}

TEST_CASE("bench rows are identical across worker counts") {
    auto cfg = workspace().config("bench");
    cfg.bench_size = 150;
    cfg.bench_workers = {1, 2, 4};
    cfg.bench_repeats = 2;
    const auto r = run_bench(cfg);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[0].speedup == 1.0);
    for (const auto& row : r.rows) {
        CHECK(row.identical);
        CHECK(row.best_seconds > 0.0);
    }
    CHECK(fs::exists(r.csv_path));
}

TEST_CASE("train can export the Gram matrix it solved") {
    auto cfg = workspace().config("kexport");
    cfg.train_size = 120;
    cfg.export_kernel = true;
    const auto tr = run_train(cfg);
    const auto path = (fs::path(cfg.out_dir) / "kernel.csv").string();
    REQUIRE(fs::exists(path));
    const auto k = read_kernel_csv(path);
    CHECK(k.size() == 120);
    // decoupled training on the reimported kernel reproduces the model
    std::vector<int> y = tr.model.models[0].labels;
    const auto again = train_svm(k, y, {cfg.svm_c, cfg.svm_tol, cfg.svm_max_passes});
    CHECK(again.alpha == tr.model.models[0].alpha);
    CHECK(again.bias == tr.model.models[0].bias);
}

TEST_CASE("non-convergence surfaces as a flag") {
    auto cfg = workspace().config("noconv");
    cfg.svm_max_passes = 1;
    cfg.svm_tol = 1e-12;
    const auto tr = run_train(cfg);
    CHECK_FALSE(tr.model.all_converged());
    CHECK(tr.train_metrics.at("converged").get<bool>() == false);
}
