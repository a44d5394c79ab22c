// starsvm: quantum-kernel SVM experiments on the giants/dwarfs star
// catalogue. Subcommands map onto the experiment drivers: prep, train,
// eval, curve, baseline, bench.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "starsvm/experiment.hpp"

namespace {

using namespace starsvm;

struct CommonArgs {
    std::string config_path;
    long seed = -1;
    long workers = -1;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config JSON")->required();
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--workers", args.workers, "override the config worker count");
    cmd->add_option("--out", args.out_dir, "override the config output directory");
}

ExperimentConfig make_config(const CommonArgs& args) {
    ExperimentConfig cfg = load_config(args.config_path);
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
    if (args.workers > 0) cfg.workers = static_cast<std::size_t>(args.workers);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    cfg.validate();
    return cfg;
}

int dispatch(const std::string& command, const CommonArgs& args,
             const std::string& model_path) {
    const ExperimentConfig cfg = make_config(args);
    if (command == "prep") {
        const auto r = run_prep(cfg);
        std::printf("prep: %zu rows in, %zu kept (%zu duplicates, %zu missing, %zu bad plx)\n",
                    r.report.input_rows, r.report.kept, r.report.duplicates, r.report.missing,
                    r.report.nonpositive_plx);
        std::printf("prep: Amag recompute max deviation %.4f\n", r.amag_recompute_max_dev);
        std::printf("prep: wrote %s\n", r.cleaned_csv.c_str());
        return exit_code::ok;
    }
    if (command == "train") {
        const auto r = run_train(cfg);
        std::printf("train: %s/%s on %zu samples, train accuracy %.4f (kernel %.2fs, solve %.2fs)\n",
                    cfg.task.c_str(), cfg.kernel.c_str(), r.model.train_features.rows(),
                    r.train_metrics.at("train_accuracy").get<double>(), r.kernel_seconds,
                    r.solve_seconds);
        std::printf("train: wrote %s\n", r.model_path.c_str());
        if (!r.model.all_converged())
            throw ConvergenceError("SMO exhausted max_passes; model written but flagged");
        return exit_code::ok;
    }
    if (command == "eval") {
        if (model_path.empty()) throw ValidationError("eval needs --model");
        const auto r = run_eval(cfg, model_path);
        std::printf("eval: accuracy %.4f on %zu samples\n",
                    r.metrics.at("accuracy").get<double>(), r.y_true.size());
        std::printf("eval: wrote %s\n", r.metrics_path.c_str());
        return exit_code::ok;
    }
    if (command == "curve") {
        const auto r = run_curve(cfg);
        for (const auto& p : r.points)
            std::printf("curve: size %zu (%zu used) %-7s accuracy %.4f f1 %.4f\n", p.requested,
                        p.used, p.kernel.c_str(), p.accuracy, p.f1);
        std::printf("curve: wrote %s\n", r.csv_path.c_str());
        return exit_code::ok;
    }
    if (command == "baseline") {
        const auto r = run_baseline(cfg);
        for (const std::string task : {"binary", "multiclass"})
            for (const std::string m : {"knn", "lr"})
                std::printf("baseline: %-10s %-3s accuracy %.4f\n", task.c_str(), m.c_str(),
                            r.metrics.at(task).at(m).at("accuracy").get<double>());
        std::printf("baseline: wrote %s\n", r.metrics_path.c_str());
        return exit_code::ok;
    }
    if (command == "bench") {
        const auto r = run_bench(cfg);
        for (const auto& row : r.rows)
            std::printf("bench: %2zu workers  %8.2f ms  speedup %.2f  identical %s\n", row.workers,
                        1e3 * row.best_seconds, row.speedup, row.identical ? "yes" : "no");
        std::printf("bench: wrote %s\n", r.csv_path.c_str());
        return exit_code::ok;
    }
    throw ValidationError("unknown command: " + command);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum-kernel SVM experiments on the giants/dwarfs star catalogue"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string model_path;
    const char* names[] = {"prep", "train", "eval", "curve", "baseline", "bench"};
    const char* descriptions[] = {
        "clean the catalogue and emit engineered features",
        "train an SVM on a precomputed kernel",
        "evaluate a trained model on the test split",
        "learning curve over training sizes, quantum vs rbf",
        "KNN and logistic-regression baselines",
        "kernel-build wall time vs worker count"};
    for (int i = 0; i < 6; ++i) {
        auto* cmd = app.add_subcommand(names[i], descriptions[i]);
        add_common(cmd, args);
        if (std::string(names[i]) == "eval")
            cmd->add_option("--model", model_path, "trained model JSON")->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : starsvm::exit_code::validation;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return dispatch(command, args, model_path);
    } catch (const starsvm::SchemaError& e) {
        std::fprintf(stderr, "schema error: %s\n", e.what());
        return starsvm::exit_code::schema;
    } catch (const starsvm::ConvergenceError& e) {
        std::fprintf(stderr, "convergence error: %s\n", e.what());
        return starsvm::exit_code::convergence;
    } catch (const starsvm::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return starsvm::exit_code::io;
    } catch (const starsvm::ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return starsvm::exit_code::validation;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return starsvm::exit_code::validation;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return starsvm::exit_code::validation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return starsvm::exit_code::failure;
    }
}
