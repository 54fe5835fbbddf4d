#include "autogbm/pipeline.hpp"

#include "autogbm/error.hpp"
#include "autogbm/matrix.hpp"
#include "autogbm/random.hpp"
#include "autogbm/trajectory.hpp"
#include "error_context.hpp"
#include "text_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace autogbm {

namespace {

using ojson = nlohmann::ordered_json;

// Stream purposes under the experiment seed.
constexpr std::uint64_t kCvStream = 11;
constexpr std::uint64_t kTpeStream = 12;
constexpr std::uint64_t kRefitStream = 13;
constexpr std::uint64_t kEnsembleStream = 14;
constexpr std::uint64_t kRfeStream = 15;

std::vector<std::string> drive_groups(std::span<const FeatureVector> rows) {
    std::vector<std::string> groups;
    groups.reserve(rows.size());
    for (const auto& r : rows) {
        if (r.drive_id.empty()) {
            throw ConfigError("grouping by drive needs trajectory input; feature tables carry no drive id");
        }
        groups.push_back(r.driver_id + "/" + r.drive_id);
    }
    return groups;
}

std::vector<int> labels_of(std::span<const FeatureVector> rows) {
    std::vector<int> y;
    y.reserve(rows.size());
    for (const auto& r : rows) y.push_back(r.label);
    return y;
}

FoldAssignment experiment_folds(std::span<const FeatureVector> rows, const ExperimentConfig& config,
                                 std::uint64_t seed) {
    const auto y = labels_of(rows);
    if (config.group_by_drive) {
        const auto groups = drive_groups(rows);
        return group_kfold(y, groups, config.k, seed);
    }
    return stratified_kfold(y, config.k, seed);
}

ojson params_json(const SearchSpace& space, const Params& params) {
    ojson out = ojson::object();
    for (std::size_t i = 0; i < space.size(); ++i) out[space[i].name] = params[i];
    return out;
}

ojson hp_json(const Hyperparameters& hp) {
    return ojson{{"n_estimators", hp.n_estimators},       {"learning_rate", hp.learning_rate},
                 {"colsample_bylevel", hp.colsample_bylevel}, {"colsample_bytree", hp.colsample_bytree},
                 {"subsample", hp.subsample},             {"max_depth", hp.max_depth},
                 {"min_child_weight", hp.min_child_weight}, {"l1_alpha", hp.l1_alpha},
                 {"split_gamma", hp.split_gamma},         {"l2_lambda", hp.l2_lambda}};
}

ojson summary_json(const CvReport& report) {
    ojson out = ojson::object();
    for (const auto& name : cv_metric_names()) {
        const auto& s = report.at(name);
        out[name] = {{"mean", s.mean}, {"sd", s.sd}};
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

std::string join(const std::vector<std::string>& items, char sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

}  // namespace

std::string SplitSpec::to_string() const {
    switch (kind) {
        case Kind::all: return "all";
        case Kind::task: return "task:" + std::string(task_name(task));
        case Kind::driver: return "driver:" + driver_id;
    }
    return "all";
}

SplitSpec parse_split(std::string_view text) {
    SplitSpec out;
    if (text == "all") return out;
    const auto colon = text.find(':');
    if (colon != std::string_view::npos) {
        const auto kind = text.substr(0, colon);
        const auto value = text.substr(colon + 1);
        if (kind == "task") {
            const auto task = parse_task(value);
            if (!task || *task == Task::none) throw ConfigError("unknown task in split '" + std::string(text) + "'");
            out.kind = SplitSpec::Kind::task;
            out.task = *task;
            return out;
        }
        if (kind == "driver" && !value.empty()) {
            out.kind = SplitSpec::Kind::driver;
            out.driver_id = std::string(value);
            return out;
        }
    }
    throw ConfigError("split must be all, task:<name> or driver:<id>, got '" + std::string(text) + "'");
}

std::vector<FeatureVector> apply_split(std::span<const FeatureVector> rows, const SplitSpec& split) {
    std::vector<FeatureVector> out;
    for (const auto& r : rows) {
        bool keep = true;
        switch (split.kind) {
            case SplitSpec::Kind::all: break;
            case SplitSpec::Kind::task: keep = r.label == 0 || r.task == split.task; break;
            case SplitSpec::Kind::driver: keep = r.driver_id == split.driver_id; break;
        }
        if (keep) out.push_back(r);
    }
    const auto positives = std::count_if(out.begin(), out.end(), [](const FeatureVector& r) { return r.label == 1; });
    if (positives == 0 || static_cast<std::size_t>(positives) == out.size()) {
        throw ConfigError("split " + split.to_string() + " leaves " + std::to_string(positives) + " distracted and " +
                          std::to_string(out.size() - static_cast<std::size_t>(positives)) + " baseline windows");
    }
    return out;
}

void ExperimentConfig::validate() const {
    if (k < 2) throw ConfigError("folds must be at least 2");
    if (n_iter < 1) throw ConfigError("iterations must be at least 1");
    if (!(window_seconds > 0.0)) throw ConfigError("window seconds must be positive");
    if (filter && (filter_window < 1 || filter_window % 2 == 0)) {
        throw ConfigError("filter window must be a positive odd number");
    }
    if (fixed_estimator_cap && *fixed_estimator_cap < 1) throw ConfigError("estimator cap must be positive");
    if (top_trials < 1) throw ConfigError("top trials must be at least 1");
    if (ensemble_size < 1) throw ConfigError("ensemble size must be at least 1");
    if (rfe_repetitions < 1) throw ConfigError("rfe repetitions must be at least 1");
    if (!features_path && trajectory_paths.empty()) throw ConfigError("no input given");
}

SearchSpace experiment_space(const ExperimentConfig& config) {
    SearchSpace space = gbdt_search_space();
    if (config.fixed_estimator_cap) space.remove("n_estimators");
    for (const auto& spec : config.space_overrides) {
        try {
            space.replace(spec);
        } catch (const Error&) {
            detail::rethrow_with_context("search space override " + spec.name);
        }
    }
    return space;
}

Hyperparameters apply_params(const SearchSpace& space, const Params& params, Hyperparameters base) {
    if (params.size() != space.size()) throw ArgumentError("parameter vector does not match the search space");
    for (std::size_t i = 0; i < space.size(); ++i) {
        const auto& name = space[i].name;
        const double v = params[i];
        if (name == "n_estimators") base.n_estimators = static_cast<int>(std::llround(v));
        else if (name == "learning_rate") base.learning_rate = v;
        else if (name == "colsample_bylevel") base.colsample_bylevel = v;
        else if (name == "colsample_bytree") base.colsample_bytree = v;
        else if (name == "subsample") base.subsample = v;
        else if (name == "max_depth") base.max_depth = static_cast<int>(std::llround(v));
        else if (name == "min_child_weight") base.min_child_weight = v;
        else if (name == "l1_alpha") base.l1_alpha = v;
        else if (name == "split_gamma") base.split_gamma = v;
        else if (name == "l2_lambda") base.l2_lambda = v;
        else throw ArgumentError("unknown hyperparameter '" + name + "'");
    }
    return base;
}

std::vector<FeatureVector> load_features(const ExperimentConfig& config) {
    if (config.features_path) {
        try {
            return read_features_csv(*config.features_path);
        } catch (const Error&) {
            detail::rethrow_with_context("stage load");
        }
    }
    TrajectoryDataset all;
    try {
        for (std::size_t i = 0; i < config.trajectory_paths.size(); ++i) {
            auto part = parse_trajectory_csv(config.trajectory_paths[i]);
            if (i == 0) all.sample_rate = part.sample_rate;
            for (auto& d : part.drives) all.drives.push_back(std::move(d));
        }
    } catch (const Error&) {
        detail::rethrow_with_context("stage load");
    }
    try {
        if (config.filter) apply_median_filter(all, config.filter_window);
        const auto windows = window_segments(all, config.window_seconds);
        return extract_all(windows);
    } catch (const Error&) {
        detail::rethrow_with_context("stage extract");
    }
}

std::vector<double> Ensemble::combine(std::span<const std::vector<double>> pool_probs) const {
    if (members.empty()) return {};
    std::vector<double> out(pool_probs[members.front()].size(), 0.0);
    for (auto m : members) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += pool_probs[m][i];
    }
    for (auto& v : out) v /= static_cast<double>(members.size());
    return out;
}

Ensemble greedy_ensemble(std::span<const std::vector<double>> pool_probs, std::span<const int> labels,
                         std::size_t max_size) {
    if (pool_probs.empty()) throw ArgumentError("ensemble pool is empty");
    if (max_size < 1) throw ArgumentError("ensemble size must be at least 1");
    for (const auto& p : pool_probs) {
        if (p.size() != labels.size()) throw ArgumentError("pool predictions do not match the labels");
    }

    Ensemble ens;
    ens.best_single_accuracy = 0.0;
    for (const auto& p : pool_probs) ens.best_single_accuracy = std::max(ens.best_single_accuracy, accuracy(labels, p));

    std::vector<double> sum(labels.size(), 0.0);
    double current = -1.0;
    while (ens.members.size() < max_size) {
        std::size_t best = 0;
        double best_acc = -1.0;
        const double n = static_cast<double>(ens.members.size() + 1);
        std::vector<double> trial(labels.size());
        for (std::size_t m = 0; m < pool_probs.size(); ++m) {
            for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = (sum[i] + pool_probs[m][i]) / n;
            const double acc = accuracy(labels, trial);
            if (acc > best_acc) {
                best_acc = acc;
                best = m;
            }
        }
        if (best_acc <= current) break;
        ens.members.push_back(best);
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += pool_probs[best][i];
        current = best_acc;
    }
    ens.validation_accuracy = current;
    return ens;
}

Ensemble greedy_ensemble(std::span<const GbdtModel> models, const LabeledData& valid, std::size_t max_size) {
    if (models.empty()) throw ArgumentError("ensemble pool is empty");
    std::vector<std::vector<double>> probs;
    for (const auto& m : models) probs.push_back(predict_proba(m, valid.x));
    return greedy_ensemble(probs, valid.y, max_size);
}

CvOptions experiment_cv_options(const ExperimentConfig& config, std::span<const FeatureVector> rows) {
    CvOptions cv;
    cv.k = config.k;
    cv.seed = derive_seed(config.seed, kCvStream);
    cv.resample = config.resample;
    if (config.group_by_drive) cv.folds = experiment_folds(rows, config, cv.seed);
    return cv;
}

TuneResult tune(std::span<const FeatureVector> rows, const ExperimentConfig& config, const TrialCallback& on_trial) {
    TuneResult result;
    result.space = experiment_space(config);
    const auto data = to_labeled_data(rows);
    const auto cv = experiment_cv_options(config, rows);
    Hyperparameters base;
    if (config.fixed_estimator_cap) base.n_estimators = *config.fixed_estimator_cap;

    const Objective objective = [&](const Params& params, std::size_t) -> TrialOutcome {
        const auto hp = apply_params(result.space, params, base);
        auto report = cross_validate(data, hp, cv);
        const double loss = report.at("log_loss").mean;
        return {loss, std::move(report)};
    };
    result.history = optimize(objective, result.space, config.n_iter, derive_seed(config.seed, kTpeStream), {},
                              on_trial);

    const auto& best = result.history.best_trial();
    result.best_hp = apply_params(result.space, best.params, base);
    double iterations = 0.0;
    for (const auto& f : best.cv->folds) iterations += f.best_iteration;
    result.refit_estimators =
        std::max(1, static_cast<int>(std::llround(iterations / static_cast<double>(best.cv->folds.size()))));
    return result;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const TrialCallback& on_trial) {
    config.validate();
    const auto rows = load_features(config);
    return run_experiment(rows, config, on_trial);
}

ExperimentReport run_experiment(std::span<const FeatureVector> all_rows, const ExperimentConfig& config,
                                const TrialCallback& on_trial) {
    if (config.k < 2) throw ConfigError("folds must be at least 2");
    ExperimentReport report;
    report.config = config;

    std::vector<FeatureVector> rows;
    try {
        rows = apply_split(all_rows, config.split);
    } catch (const Error&) {
        detail::rethrow_with_context("stage split");
    }
    report.windows = rows.size();
    report.positives = static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const FeatureVector& r) { return r.label == 1; }));
    const auto data = to_labeled_data(rows);
    report.feature_names = data.x.names();

    try {
        report.tuning = tune(rows, config, on_trial);
    } catch (const Error&) {
        detail::rethrow_with_context("stage tune");
    }
    for (const auto& t : report.tuning.history.trials) {
        if (t.cv) report.audit += t.cv->audit;
    }

    try {
        auto hp = report.tuning.best_hp;
        hp.n_estimators = report.tuning.refit_estimators;
        report.model = fit(data, LabeledData{}, hp, derive_seed(config.seed, kRefitStream), FitOptions{false});
    } catch (const Error&) {
        detail::rethrow_with_context("stage refit");
    }

    try {
        report.top_trials = report.tuning.history.top(config.top_trials);
        const auto folds = experiment_folds(rows, config, derive_seed(config.seed, kEnsembleStream));
        const auto train_idx = folds.training_indices(0);
        const auto valid_idx = folds.validation_indices(0);
        const auto train = data.select_rows(train_idx);
        const auto valid = data.select_rows(valid_idx);
        std::vector<GbdtModel> pool;
        for (auto t : report.top_trials) {
            Hyperparameters base;
            if (config.fixed_estimator_cap) base.n_estimators = *config.fixed_estimator_cap;
            const auto hp = apply_params(report.tuning.space, report.tuning.history.trials[t].params, base);
            pool.push_back(fit(train, valid, hp, derive_seed(config.seed, kEnsembleStream, t + 1)));
        }
        report.ensemble = greedy_ensemble(pool, valid, config.ensemble_size);
    } catch (const Error&) {
        detail::rethrow_with_context("stage ensemble");
    }

    if (config.run_rfe) {
        try {
            RfeOptions opt;
            opt.k = config.k;
            opt.seed = derive_seed(config.seed, kRfeStream);
            opt.resample = config.resample;
            opt.repetitions = config.rfe_repetitions;
            if (config.group_by_drive) opt.folds = experiment_folds(rows, config, opt.seed);
            report.rfe = rfe(data, report.tuning.best_hp, opt);
            report.audit += report.rfe->audit;
        } catch (const Error&) {
            detail::rethrow_with_context("stage rfe");
        }
    }
    return report;
}

std::string report_to_json(const ExperimentReport& report) {
    const auto& cfg = report.config;
    const auto& space = report.tuning.space;
    const auto& history = report.tuning.history;
    const auto& best = report.best_trial();

    ojson doc;
    doc["format"] = "autogbm-report";
    doc["version"] = 1;

    ojson config;
    config["split"] = cfg.split.to_string();
    config["folds"] = cfg.k;
    config["iterations"] = cfg.n_iter;
    config["seed"] = cfg.seed;
    config["resample"] = cfg.resample;
    config["filter"] = cfg.filter;
    config["filter_window"] = cfg.filter_window;
    config["window_seconds"] = cfg.window_seconds;
    config["group_by_drive"] = cfg.group_by_drive;
    config["estimator_policy"] = cfg.fixed_estimator_cap
                                     ? "fixed cap " + std::to_string(*cfg.fixed_estimator_cap) + " with early stopping"
                                     : std::string("searched");
    doc["config"] = config;

    doc["data"] = {{"windows", report.windows},
                   {"distracted", report.positives},
                   {"baseline", report.windows - report.positives},
                   {"features", report.feature_names}};

    ojson space_doc = ojson::array();
    for (const auto& p : space.params()) {
        ojson s{{"name", p.name}, {"kind", std::string(param_kind_name(p.kind))}};
        if (p.kind == ParamKind::categorical) {
            s["choices"] = p.choices;
        } else {
            s["low"] = p.low;
            s["high"] = p.high;
        }
        space_doc.push_back(s);
    }
    doc["search_space"] = space_doc;

    doc["best_trial"] = {{"iteration", best.iteration}, {"loss", best.loss}, {"params", params_json(space, best.params)}};
    doc["hyperparameters"] = hp_json(report.tuning.best_hp);
    doc["number_of_estimators"] = report.tuning.refit_estimators;
    doc["cv"] = summary_json(*best.cv);

    ojson top = ojson::array();
    for (auto t : report.top_trials) {
        top.push_back({{"iteration", history.trials[t].iteration}, {"loss", history.trials[t].loss}});
    }
    doc["top_trials"] = top;

    ojson members = ojson::array();
    for (auto m : report.ensemble.members) members.push_back(history.trials[report.top_trials[m]].iteration);
    doc["ensemble"] = {{"member_iterations", members},
                       {"validation_accuracy", report.ensemble.validation_accuracy},
                       {"best_single_accuracy", report.ensemble.best_single_accuracy}};

    if (report.rfe) {
        const auto& r = *report.rfe;
        double selected_acc = 0.0;
        for (const auto& p : r.curve) {
            if (p.size == r.selected_size) selected_acc = p.mean_accuracy;
        }
        doc["rfe"] = {{"ranking_basis", "elimination order, late removal ranks high"},
                      {"ranking", r.ranking()},
                      {"selected_size", r.selected_size},
                      {"selected_features", r.selected_features},
                      {"full_accuracy", r.curve.front().mean_accuracy},
                      {"selected_accuracy", selected_acc}};
    }

    doc["leakage_audit"] = {{"cv_runs", report.audit.cv_runs},
                            {"duplicates_checked", report.audit.duplicates_checked},
                            {"violations", report.audit.violations}};

    std::size_t failed = history.trials.size() - history.ok_count();
    doc["runtime"] = {{"trials", history.trials.size()}, {"failed_trials", failed}, {"cv_runs", report.audit.cv_runs}};

    const auto& hp = report.tuning.best_hp;
    const auto& cv = *best.cv;
    doc["summary_table"] = ojson{
        {"Number of Estimators", report.tuning.refit_estimators},
        {"Learning Rate", hp.learning_rate},
        {"Colsample by Level", hp.colsample_bylevel},
        {"Colsample by Tree", hp.colsample_bytree},
        {"Subsample", hp.subsample},
        {"Max Depth", hp.max_depth},
        {"Min Child Weight", hp.min_child_weight},
        {"Alpha", hp.l1_alpha},
        {"Gamma", hp.split_gamma},
        {"Lambda", hp.l2_lambda},
        {"Accuracy", cv.at("accuracy").mean},
        {"Loss", best.loss},
    };
    return doc.dump(2) + "\n";
}

void write_rfe_curve_csv(const RfeResult& rfe, std::ostream& out) {
    out << "size,mean_accuracy,sd_accuracy,features\n";
    for (const auto& p : rfe.curve) {
        out << p.size << ',' << detail::format_double(p.mean_accuracy) << ',' << detail::format_double(p.sd_accuracy)
            << ',' << join(p.features, ';') << '\n';
    }
}

void write_ranking_csv(const RfeResult& rfe, std::ostream& out) {
    out << "rank,feature,selected\n";
    const auto ranking = rfe.ranking();
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        out << i + 1 << ',' << ranking[i] << ',' << (i < rfe.selected_size ? 1 : 0) << '\n';
    }
}

void write_loss_curve_csv(const TrialHistory& history, std::ostream& out) {
    out << "iteration,loss,best_so_far\n";
    const auto best = history.best_so_far();
    for (std::size_t i = 0; i < history.trials.size(); ++i) {
        const auto& t = history.trials[i];
        out << t.iteration << ','
            << (t.status == TrialStatus::ok ? detail::format_double(t.loss) : std::string("nan")) << ','
            << (std::isnan(best[i]) ? std::string("nan") : detail::format_double(best[i])) << '\n';
    }
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string());
    }
    write_text(dir / "report.json", report_to_json(report));

    std::ostringstream trials;
    write_trials_csv(report.tuning.history, report.tuning.space, trials);
    write_text(dir / "trials.csv", trials.str());

    std::ostringstream loss;
    write_loss_curve_csv(report.tuning.history, loss);
    write_text(dir / "loss_vs_iteration.csv", loss.str());

    if (report.rfe) {
        std::ostringstream curve, ranking;
        write_rfe_curve_csv(*report.rfe, curve);
        write_ranking_csv(*report.rfe, ranking);
        write_text(dir / "rfe_curve.csv", curve.str());
        write_text(dir / "ranking.csv", ranking.str());
    }
    write_text(dir / "cv_report.json", cv_report_to_json(*report.best_trial().cv));
    write_text(dir / "model.json", model_to_json(report.model));
}

}  // namespace autogbm
