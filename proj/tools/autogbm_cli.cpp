#include "autogbm/error.hpp"
#include "autogbm/features.hpp"
#include "autogbm/pipeline.hpp"
#include "autogbm/simulator.hpp"
#include "autogbm/trajectory.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace autogbm;

namespace {

struct CommonArgs {
    std::uint64_t seed = 0;
    std::string out = "out";
    int folds = 10;
    std::size_t iters = 200;
    std::string split = "all";
    bool resample = false;
    bool filter = false;
    int filter_window = 5;
    double window = 1.0;
    std::vector<std::string> inputs;
    std::string features;
    std::vector<std::string> space;
    int estimator_cap = 0;
    bool group_by_drive = false;
    bool no_rfe = false;
    int rfe_reps = 5;
    bool quiet = false;
};

// name=lo:hi for numeric parameters, name=a,b,c for categorical ones.
ParamSpec parse_space_override(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("space override '" + text + "' is not name=value");
    const std::string name = text.substr(0, eq);
    const std::string value = text.substr(eq + 1);
    const auto space = gbdt_search_space();
    const auto idx = space.find(name);
    if (!idx) throw ConfigError("space override names unknown parameter '" + name + "'");
    ParamSpec spec = space[*idx];
    try {
        if (spec.kind == ParamKind::categorical) {
            spec.choices.clear();
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) spec.choices.push_back(std::stod(item));
        } else {
            const auto colon = value.find(':');
            if (colon == std::string::npos) throw ConfigError("space override '" + text + "' is not name=lo:hi");
            spec.low = std::stod(value.substr(0, colon));
            spec.high = std::stod(value.substr(colon + 1));
        }
    } catch (const std::logic_error&) {
        throw ConfigError("space override '" + text + "' has a non-numeric bound");
    }
    spec.validate();
    return spec;
}

ExperimentConfig make_config(const CommonArgs& a) {
    ExperimentConfig c;
    for (const auto& p : a.inputs) c.trajectory_paths.emplace_back(p);
    if (!a.features.empty()) c.features_path = a.features;
    c.split = parse_split(a.split);
    c.k = a.folds;
    c.n_iter = a.iters;
    c.seed = a.seed;
    c.resample = a.resample;
    c.filter = a.filter;
    c.filter_window = a.filter_window;
    c.window_seconds = a.window;
    c.group_by_drive = a.group_by_drive;
    if (a.estimator_cap > 0) c.fixed_estimator_cap = a.estimator_cap;
    for (const auto& s : a.space) c.space_overrides.push_back(parse_space_override(s));
    c.run_rfe = !a.no_rfe;
    c.rfe_repetitions = a.rfe_reps;
    c.validate();
    return c;
}

TrialCallback progress(bool quiet) {
    if (quiet) return {};
    auto start = std::make_shared<std::chrono::steady_clock::time_point>(std::chrono::steady_clock::now());
    auto best = std::make_shared<double>(std::numeric_limits<double>::infinity());
    return [start, best](const Trial& t) {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - *start).count();
        if (t.status == TrialStatus::ok) {
            *best = std::min(*best, t.loss);
            std::cerr << "trial " << t.iteration << " loss " << t.loss << " best " << *best;
        } else {
            std::cerr << "trial " << t.iteration << " failed: " << t.error;
        }
        std::cerr << " (" << secs << " s)\n";
    };
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

fs::path ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
    return dir;
}

Hyperparameters read_hyperparameters(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    const auto& h = doc.contains("hyperparameters") ? doc["hyperparameters"] : doc;
    Hyperparameters hp;
    try {
        hp.n_estimators = h.value("n_estimators", hp.n_estimators);
        hp.learning_rate = h.value("learning_rate", hp.learning_rate);
        hp.colsample_bylevel = h.value("colsample_bylevel", hp.colsample_bylevel);
        hp.colsample_bytree = h.value("colsample_bytree", hp.colsample_bytree);
        hp.subsample = h.value("subsample", hp.subsample);
        hp.max_depth = h.value("max_depth", hp.max_depth);
        hp.min_child_weight = h.value("min_child_weight", hp.min_child_weight);
        hp.l1_alpha = h.value("l1_alpha", hp.l1_alpha);
        hp.split_gamma = h.value("split_gamma", hp.split_gamma);
        hp.l2_lambda = h.value("l2_lambda", hp.l2_lambda);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    hp.validate();
    return hp;
}

void print_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (doc.value("format", "") != "autogbm-report") throw ParseError(path + ": not a report document");
    std::cout << "split: " << doc["config"]["split"].get<std::string>() << "\n";
    std::cout << "windows: " << doc["data"]["windows"] << " (" << doc["data"]["distracted"] << " distracted)\n\n";
    for (const auto& [key, value] : doc["summary_table"].items()) {
        std::cout << std::left << std::setw(24) << key << value << "\n";
    }
    if (doc.contains("rfe")) {
        std::cout << "\nfeature ranking (" << doc["rfe"]["ranking_basis"].get<std::string>() << "):\n";
        int rank = 1;
        for (const auto& f : doc["rfe"]["ranking"]) std::cout << "  " << rank++ << ". " << f.get<std::string>() << "\n";
        std::cout << "selected " << doc["rfe"]["selected_size"] << " features, CV accuracy "
                  << doc["rfe"]["selected_accuracy"] << " vs " << doc["rfe"]["full_accuracy"] << " with all\n";
    }
    std::cout << "\nleakage violations: " << doc["leakage_audit"]["violations"] << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lane-keeping distraction detection with boosted trees and TPE tuning"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key-value config file; command-line flags take precedence");

    CommonArgs a;
    app.add_option("--seed", a.seed, "Random seed");
    app.add_option("--out", a.out, "Output directory");
    app.add_option("--folds", a.folds, "Cross-validation folds");
    app.add_option("--iters", a.iters, "TPE iterations");
    app.add_option("--split", a.split, "all | task:<name> | driver:<id>");
    app.add_flag("--resample", a.resample, "Oversample the minority class inside training folds");
    app.add_flag("--filter", a.filter, "Median-filter signals before windowing");
    app.add_option("--filter-window", a.filter_window, "Median filter length in samples (odd)");
    app.add_option("--window", a.window, "Window length in seconds");
    app.add_option("--input", a.inputs, "Trajectory CSV file(s)");
    app.add_option("--features", a.features, "Feature CSV (instead of --input)");
    app.add_option("--space", a.space, "Search space override, name=lo:hi or name=a,b,c");
    app.add_option("--estimator-cap", a.estimator_cap,
                   "Fix the boosting budget at this cap with early stopping instead of searching it");
    app.add_flag("--group-by-drive", a.group_by_drive, "Keep whole drives in one fold");
    app.add_flag("--no-rfe", a.no_rfe, "Skip feature elimination in run");
    app.add_option("--rfe-reps", a.rfe_reps, "Permutation repetitions per feature");
    app.add_flag("--quiet", a.quiet, "No progress output");

    int drivers = 8;
    std::string spread = "default";
    double duration = 660.0;
    double rate = 20.0;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic cohort");
    simulate->add_option("--drivers", drivers, "Number of drivers");
    simulate->add_option("--spread", spread, "default | risky | conservative");
    simulate->add_option("--duration", duration, "Drive length in seconds");
    simulate->add_option("--rate", rate, "Sample rate in Hz");

    auto* extract = app.add_subcommand("extract", "Trajectory CSV to features.csv");
    auto* tune_cmd = app.add_subcommand("tune", "TPE hyperparameter search");
    std::string params_path;
    auto* rfe_cmd = app.add_subcommand("rfe", "Recursive feature elimination");
    rfe_cmd->add_option("--params", params_path, "JSON with a hyperparameters object (e.g. best_params.json)");
    auto* run = app.add_subcommand("run", "Full pipeline");
    std::string report_dir;
    auto* report = app.add_subcommand("report", "Print the summary of a finished run");
    report->add_option("--in", report_dir, "Directory holding report.json")->required();
    for (auto* sub : {simulate, extract, tune_cmd, rfe_cmd, run, report}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) {
            CohortOptions opt;
            opt.n_drivers = drivers;
            opt.spread = parse_spread(spread);
            opt.duration = duration;
            opt.sample_rate = rate;
            opt.seed = a.seed;
            const auto cohort = generate_cohort(opt);
            const auto dir = ensure_dir(a.out);
            write_trajectory_csv(cohort.dataset, dir / "trajectories.csv");
            write_file(dir / "manifest.json", cohort_manifest_json(cohort));
            std::cerr << "wrote " << cohort.dataset.sample_count() << " samples to " << (dir / "trajectories.csv")
                      << "\n";
        } else if (*extract) {
            if (a.inputs.empty()) throw ConfigError("extract needs --input");
            auto config = make_config(a);
            const auto rows = load_features(config);
            const auto dir = ensure_dir(a.out);
            write_features_csv(rows, dir / "features.csv");
            std::cerr << "wrote " << rows.size() << " windows to " << (dir / "features.csv") << "\n";
        } else if (*tune_cmd) {
            const auto config = make_config(a);
            const auto rows = apply_split(load_features(config), config.split);
            const auto result = tune(rows, config, progress(a.quiet));
            const auto dir = ensure_dir(a.out);
            std::ostringstream trials, loss;
            write_trials_csv(result.history, result.space, trials);
            write_loss_curve_csv(result.history, loss);
            write_file(dir / "trials.csv", trials.str());
            write_file(dir / "loss_vs_iteration.csv", loss.str());
            auto hp = result.best_hp;
            hp.n_estimators = result.refit_estimators;
            nlohmann::ordered_json doc;
            doc["best_iteration"] = result.history.best_trial().iteration;
            doc["best_loss"] = result.history.best_trial().loss;
            doc["hyperparameters"] = nlohmann::ordered_json::parse(model_to_json(GbdtModel{{}, hp}))["hyperparameters"];
            write_file(dir / "best_params.json", doc.dump(2) + "\n");
        } else if (*rfe_cmd) {
            const auto config = make_config(a);
            const auto rows = apply_split(load_features(config), config.split);
            const Hyperparameters hp = params_path.empty() ? Hyperparameters{} : read_hyperparameters(params_path);
            RfeOptions opt;
            opt.k = config.k;
            opt.seed = config.seed;
            opt.resample = config.resample;
            opt.repetitions = config.rfe_repetitions;
            const auto result = rfe(to_labeled_data(rows), hp, opt);
            const auto dir = ensure_dir(a.out);
            std::ostringstream curve, ranking;
            write_rfe_curve_csv(result, curve);
            write_ranking_csv(result, ranking);
            write_file(dir / "rfe_curve.csv", curve.str());
            write_file(dir / "ranking.csv", ranking.str());
        } else if (*run) {
            const auto config = make_config(a);
            const auto t0 = std::chrono::steady_clock::now();
            const auto result = run_experiment(config, progress(a.quiet));
            emit_report(result, a.out);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (!a.quiet) std::cerr << "run finished in " << secs << " s\n";
        } else if (*report) {
            print_report((fs::path(report_dir) / "report.json").string());
        }
    } catch (const autogbm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
