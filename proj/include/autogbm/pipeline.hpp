#pragma once

#include "autogbm/evaluation.hpp"
#include "autogbm/features.hpp"
#include "autogbm/gbdt.hpp"
#include "autogbm/selection.hpp"
#include "autogbm/tpe.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace autogbm {

struct SplitSpec {
    enum class Kind { all, task, driver };
    Kind kind = Kind::all;
    Task task = Task::none;
    std::string driver_id;

    std::string to_string() const;
};

/// "all", "task:<name>" or "driver:<id>"; ConfigError otherwise.
SplitSpec parse_split(std::string_view text);

/// Task splits keep that task's distracted windows against every baseline window;
/// driver splits keep one driver's windows. ConfigError if a class ends up empty.
std::vector<FeatureVector> apply_split(std::span<const FeatureVector> rows, const SplitSpec& split);

struct ExperimentConfig {
    std::vector<std::filesystem::path> trajectory_paths;
    std::optional<std::filesystem::path> features_path;  // skips windowing when set
    SplitSpec split;
    int k = 10;
    std::size_t n_iter = 200;
    std::uint64_t seed = 0;
    bool resample = false;
    bool filter = false;
    int filter_window = 5;
    double window_seconds = 1.0;
    /// Folds keep whole drives together instead of stratifying windows.
    bool group_by_drive = false;
    /// Drop n_estimators from the search and boost up to this cap with early stopping.
    std::optional<int> fixed_estimator_cap;
    std::vector<ParamSpec> space_overrides;
    std::size_t top_trials = 5;
    std::size_t ensemble_size = 5;
    int rfe_repetitions = 5;
    bool run_rfe = true;

    void validate() const;
};

/// Search space after the estimator policy and the overrides are applied.
SearchSpace experiment_space(const ExperimentConfig& config);

/// Copies the named values of `params` onto `base`. Unknown names raise ArgumentError.
Hyperparameters apply_params(const SearchSpace& space, const Params& params, Hyperparameters base = {});

/// Loads trajectories (median-filtered on request), windows them and extracts features,
/// or reads the feature table directly.
std::vector<FeatureVector> load_features(const ExperimentConfig& config);

struct Ensemble {
    std::vector<std::size_t> members;  // pool indices, repeats allowed
    double validation_accuracy = 0.0;
    double best_single_accuracy = 0.0;

    /// Mean of member probabilities given each pool model's probabilities.
    std::vector<double> combine(std::span<const std::vector<double>> pool_probs) const;
};

/// Greedy forward selection with replacement on validation accuracy of the averaged
/// probabilities. Stops at max_size or when no addition strictly improves; ties pick
/// the lowest pool index. ArgumentError on an empty pool.
Ensemble greedy_ensemble(std::span<const std::vector<double>> pool_probs, std::span<const int> labels,
                         std::size_t max_size);
Ensemble greedy_ensemble(std::span<const GbdtModel> models, const LabeledData& valid, std::size_t max_size);

struct TuneResult {
    SearchSpace space;
    TrialHistory history;
    Hyperparameters best_hp;
    /// Rounded mean of the best trial's per-fold early-stopping iterations.
    int refit_estimators = 0;
};

CvOptions experiment_cv_options(const ExperimentConfig& config, std::span<const FeatureVector> rows);

/// TPE search minimising mean CV log loss.
TuneResult tune(std::span<const FeatureVector> rows, const ExperimentConfig& config,
                const TrialCallback& on_trial = {});

struct ExperimentReport {
    ExperimentConfig config;
    std::size_t windows = 0;
    std::size_t positives = 0;
    std::vector<std::string> feature_names;
    TuneResult tuning;
    GbdtModel model;  // best hyperparameters refit on every window
    std::vector<std::size_t> top_trials;  // indices into tuning.history.trials
    Ensemble ensemble;
    std::optional<RfeResult> rfe;
    LeakageAudit audit;  // summed over every cross-validation run

    const Trial& best_trial() const { return tuning.history.best_trial(); }
};

ExperimentReport run_experiment(const ExperimentConfig& config, const TrialCallback& on_trial = {});
ExperimentReport run_experiment(std::span<const FeatureVector> rows, const ExperimentConfig& config,
                                const TrialCallback& on_trial = {});

std::string report_to_json(const ExperimentReport& report);

/// Writes report.json, trials.csv, rfe_curve.csv, ranking.csv, loss_vs_iteration.csv,
/// cv_report.json and model.json into `dir` (created if needed). IoError if unwritable.
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir);

void write_rfe_curve_csv(const RfeResult& rfe, std::ostream& out);
void write_ranking_csv(const RfeResult& rfe, std::ostream& out);
void write_loss_curve_csv(const TrialHistory& history, std::ostream& out);

}  // namespace autogbm
