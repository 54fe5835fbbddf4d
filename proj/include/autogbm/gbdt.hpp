#pragma once

#include "autogbm/features.hpp"
#include "autogbm/matrix.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace autogbm {

/// Boosting settings. Field names double as the search-space parameter names.
struct Hyperparameters {
    int n_estimators = 100;
    double learning_rate = 0.1;
    double colsample_bylevel = 1.0;
    double colsample_bytree = 1.0;
    double subsample = 1.0;
    int max_depth = 6;
    double min_child_weight = 1.0;
    double l1_alpha = 0.0;
    double split_gamma = 0.0;
    double l2_lambda = 1.0;

    /// Basic well-formedness required by fit (positive sizes, ratios in (0, 1], ...).
    void validate() const;
    /// True when every field lies inside the tuned configuration space.
    bool within_search_ranges() const;

    bool operator==(const Hyperparameters&) const = default;
};

struct GradHess {
    double grad = 0.0;
    double hess = 0.0;
};

GradHess grad_hess_logloss(int label, double margin);

double sigmoid(double margin);

/// sign(G) * max(|G| - alpha, 0)
double soft_threshold(double grad_sum, double alpha);

/// Optimal leaf value -T(G) / (H + lambda), before shrinkage.
double leaf_weight(double grad_sum, double hess_sum, double alpha, double lambda);

/// T(G)^2 / (H + lambda)
double structure_score(double grad_sum, double hess_sum, double alpha, double lambda);

struct SplitDecision {
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
};

/// Exact greedy scan over the midpoints of consecutive distinct values. Rows with
/// x < threshold go left. Gains within a relative 1e-10 of each other are ties,
/// resolved toward the lowest feature index and then the lowest threshold.
std::optional<SplitDecision> find_best_split(const FeatureMatrix& x, std::span<const std::size_t> instances,
                                             std::span<const GradHess> gradients,
                                             std::span<const std::size_t> candidate_features,
                                             const Hyperparameters& hp);

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double gain = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0;  // leaf value, already scaled by the learning rate
    double cover = 0.0;   // training hessian sum reaching the node

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    template <class RowAccess>
    double predict(RowAccess&& value_of) const {
        int i = 0;
        while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
            const auto& n = nodes[static_cast<std::size_t>(i)];
            i = value_of(static_cast<std::size_t>(n.feature)) < n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].weight;
    }

    int depth() const;
    std::size_t split_count() const;
};

struct GbdtModel {
    std::vector<std::string> feature_names;
    Hyperparameters hp;
    double base_score = 0.0;  // logit
    double learning_rate = 0.1;
    std::vector<Tree> trees;
    /// Number of leading trees used at inference (the best validation round).
    int best_iteration = 0;
    /// Validation log loss after each trained round; empty without early stopping.
    std::vector<double> valid_loss;
};

struct FitOptions {
    bool early_stopping = true;
};

/// Second-order boosting of regression trees on the logistic loss.
///
/// The base score is the training prior log-odds. Each round samples rows without
/// replacement (subsample), a per-tree feature subset (colsample_bytree) and a subset
/// of that per depth level (colsample_bylevel). With early stopping, training halts
/// once validation log loss has not improved for ceil(0.1 * n_estimators) rounds.
GbdtModel fit(const LabeledData& train, const LabeledData& valid, const Hyperparameters& hp, std::uint64_t seed,
              FitOptions options = {});

double predict_margin(const GbdtModel& model, const FeatureMatrix& x, std::size_t row);
std::vector<double> predict_proba(const GbdtModel& model, const FeatureMatrix& x);
double predict_proba(const GbdtModel& model, const FeatureVector& features);
double predict_proba(const GbdtModel& model, const std::map<std::string, double>& named_features);

enum class ImportanceKind { weight, gain };

/// Per-feature split count (weight) or mean split gain (gain), normalized to sum to 1
/// over features with at least one split. All zeros when the forest has no splits.
std::vector<double> builtin_importance(const GbdtModel& model, ImportanceKind kind);

std::string model_to_json(const GbdtModel& model);
GbdtModel model_from_json(const std::string& text);

}  // namespace autogbm
