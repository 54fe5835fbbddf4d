#pragma once

#include "autogbm/evaluation.hpp"
#include "autogbm/gbdt.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace autogbm {

enum class ImportanceMethod { permutation, weight, gain };

struct ImportanceScores {
    std::vector<std::string> features;
    std::vector<double> scores;  // permutation scores may be negative
    ImportanceMethod method = ImportanceMethod::permutation;
    int repetitions = 0;
    std::uint64_t seed = 0;
};

/// Baseline validation accuracy minus the mean accuracy over `repetitions` independent
/// shuffles of one column at a time.
ImportanceScores permutation_importance(const GbdtModel& model, const LabeledData& valid, int repetitions,
                                        std::uint64_t seed);

/// Split-weight or mean-gain importance of a fitted model, normalized.
ImportanceScores builtin_importance_scores(const GbdtModel& model, ImportanceMethod method);

struct RfePoint {
    std::size_t size = 0;
    double mean_accuracy = 0.0;
    double sd_accuracy = 0.0;
    std::vector<std::string> features;
};

struct RfeResult {
    std::vector<std::string> elimination_order;  // first removed first
    std::vector<RfePoint> curve;                 // sizes from the full count down to 1
    std::size_t selected_size = 0;
    std::vector<std::string> selected_features;
    LeakageAudit audit;

    /// Survivor first, then features in reverse elimination order.
    std::vector<std::string> ranking() const;
};

struct RfeOptions {
    int k = 10;
    std::uint64_t seed = 0;
    bool resample = false;
    int repetitions = 5;
    /// Overrides the stratified folds, e.g. with whole-drive groups.
    std::optional<FoldAssignment> folds;
};

/// Recursive feature elimination. Column subsampling is pinned to 1.0; each round runs
/// k-fold CV on the surviving columns, averages held-out permutation importance over
/// the folds and drops the least important column (ties drop the higher column index).
RfeResult rfe(const LabeledData& data, Hyperparameters hp, const RfeOptions& options);

/// One-standard-error rule: the smallest size whose mean accuracy reaches the best mean
/// minus the sd at the best size.
std::size_t select_subset(std::span<const RfePoint> curve);

}  // namespace autogbm
