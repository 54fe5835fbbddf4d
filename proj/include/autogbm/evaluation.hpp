#pragma once

#include "autogbm/gbdt.hpp"
#include "autogbm/matrix.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace autogbm {

struct FoldAssignment {
    int k = 0;
    std::vector<int> fold;  // fold index per sample

    std::vector<std::size_t> validation_indices(int f) const;
    std::vector<std::size_t> training_indices(int f) const;
};

/// Shuffles each class with the seed and deals it round-robin over the folds. The
/// dealing position carries over from class 0 to class 1, so fold sizes also differ by
/// at most one. A class smaller than k simply leaves some folds without it.
FoldAssignment stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed);

/// Keeps every group (e.g. a drive) inside a single fold. Groups are shuffled with the
/// seed and each goes to the currently smallest fold. Every fold must end up with both
/// classes.
FoldAssignment group_kfold(std::span<const int> labels, std::span<const std::string> groups, int k,
                           std::uint64_t seed);

/// Training indices plus minority indices redrawn with replacement until both classes
/// have equal counts. The original indices come first, in their given order.
std::vector<std::size_t> oversample_minority(std::span<const std::size_t> train_indices, std::span<const int> labels,
                                             std::uint64_t seed);

/// Mean binary cross-entropy with probabilities clipped to [1e-15, 1 - 1e-15].
double log_loss(std::span<const int> labels, std::span<const double> probs);

/// Probability that a random positive outranks a random negative, ties counted 1/2.
double roc_auc(std::span<const int> labels, std::span<const double> scores);

/// Average precision: sum over descending distinct thresholds of (R_n - R_{n-1}) * P_n.
double auprc(std::span<const int> labels, std::span<const double> scores);

struct ClassificationReport {
    double accuracy = 0.0;
    std::array<double, 2> precision{};
    std::array<double, 2> recall{};
    std::array<std::size_t, 2> support{};
    /// Precision of a class that was never predicted (or recall of an absent class) is
    /// reported as 0 and flagged here.
    std::array<bool, 2> precision_undefined{};
    std::array<bool, 2> recall_undefined{};
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
};

ClassificationReport classification_report(std::span<const int> labels, std::span<const int> predictions);

/// Hard predictions at the 0.5 probability threshold (p >= 0.5 is class 1).
std::vector<int> threshold_predictions(std::span<const double> probs, double threshold = 0.5);

double accuracy(std::span<const int> labels, std::span<const double> probs);

struct FoldMetrics {
    int fold = 0;
    double log_loss = 0.0;
    double accuracy = 0.0;
    double auc = 0.0;
    double auprc = 0.0;
    ClassificationReport report;
    int best_iteration = 0;
    std::size_t train_size = 0;
    std::size_t valid_size = 0;
    std::size_t oversampled = 0;  // duplicates added by resampling
};

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation over folds
};

struct LeakageAudit {
    std::size_t cv_runs = 0;
    std::size_t duplicates_checked = 0;
    std::size_t violations = 0;  // oversampled duplicates found in a validation fold

    LeakageAudit& operator+=(const LeakageAudit& other);
};

struct CvReport {
    std::vector<FoldMetrics> folds;  // sorted by fold index
    std::map<std::string, MetricSummary> aggregates;
    LeakageAudit audit;

    const MetricSummary& at(const std::string& metric) const;
};

/// Names of the aggregated metrics, in report order.
const std::vector<std::string>& cv_metric_names();

CvReport aggregate_folds(std::vector<FoldMetrics> folds);

struct CvOptions {
    int k = 10;
    std::uint64_t seed = 0;
    bool resample = false;
    /// Optional fold assignment overriding the stratified one (e.g. from group_kfold).
    std::optional<FoldAssignment> folds;
    /// Called after each fold with the fitted model and that fold's validation data.
    std::function<void(int fold, const GbdtModel&, const LabeledData& valid)> on_fold;
};

/// k-fold cross-validation; each fold's held-out part is the early-stopping set and is
/// scored with the full metric suite. Without explicit folds each class needs at least k
/// samples (StratificationError otherwise). Errors are annotated with the fold index.
CvReport cross_validate(const LabeledData& data, const Hyperparameters& hp, const CvOptions& options);

std::string cv_report_to_json(const CvReport& report);

}  // namespace autogbm
