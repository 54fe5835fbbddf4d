#include "autogbm/selection.hpp"

#include "autogbm/error.hpp"
#include "autogbm/random.hpp"
#include "error_context.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace autogbm {

ImportanceScores permutation_importance(const GbdtModel& model, const LabeledData& valid, int repetitions,
                                        std::uint64_t seed) {
    if (valid.size() == 0) throw ArgumentError("permutation importance needs a non-empty validation set");
    if (repetitions < 1) throw ArgumentError("permutation importance needs at least one repetition");

    ImportanceScores out;
    out.features = valid.x.names();
    out.method = ImportanceMethod::permutation;
    out.repetitions = repetitions;
    out.seed = seed;

    if (valid.x.cols() != model.feature_names.size()) {
        throw InferenceError("expected " + std::to_string(model.feature_names.size()) + " features, got " +
                             std::to_string(valid.x.cols()));
    }

    // Per-tree outputs on the untouched rows. A shuffle of feature f only changes trees
    // that split on f, and summing in tree order keeps the margins identical to
    // predict_proba on the shuffled matrix.
    const std::size_t n = valid.size();
    const std::size_t used = std::min<std::size_t>(static_cast<std::size_t>(std::max(model.best_iteration, 0)),
                                                   model.trees.size());
    std::vector<std::vector<double>> cached(used, std::vector<double>(n));
    std::vector<std::vector<char>> uses(used, std::vector<char>(valid.x.cols(), 0));
    for (std::size_t t = 0; t < used; ++t) {
        const auto& tree = model.trees[t];
        for (const auto& node : tree.nodes) {
            if (!node.is_leaf()) uses[t][static_cast<std::size_t>(node.feature)] = 1;
        }
        for (std::size_t i = 0; i < n; ++i) cached[t][i] = tree.predict([&](std::size_t f) { return valid.x(i, f); });
    }
    std::vector<double> probs(n);
    for (std::size_t i = 0; i < n; ++i) {
        double margin = model.base_score;
        for (std::size_t t = 0; t < used; ++t) margin += cached[t][i];
        probs[i] = sigmoid(margin);
    }
    const double baseline = accuracy(valid.y, probs);

    std::mt19937_64 rng(seed);
    FeatureMatrix shuffled = valid.x;
    for (std::size_t f = 0; f < valid.x.cols(); ++f) {
        const auto original = valid.x.column(f);
        auto column = shuffled.column(f);
        double total = 0.0;
        for (int r = 0; r < repetitions; ++r) {
            std::shuffle(column.begin(), column.end(), rng);
            for (std::size_t i = 0; i < n; ++i) {
                double margin = model.base_score;
                for (std::size_t t = 0; t < used; ++t) {
                    margin += uses[t][f] ? model.trees[t].predict([&](std::size_t c) { return shuffled(i, c); })
                                         : cached[t][i];
                }
                probs[i] = sigmoid(margin);
            }
            total += accuracy(valid.y, probs);
        }
        std::copy(original.begin(), original.end(), column.begin());
        out.scores.push_back(baseline - total / repetitions);
    }
    return out;
}

ImportanceScores builtin_importance_scores(const GbdtModel& model, ImportanceMethod method) {
    if (method == ImportanceMethod::permutation) {
        throw ArgumentError("permutation importance needs validation data");
    }
    ImportanceScores out;
    out.features = model.feature_names;
    out.method = method;
    out.scores =
        builtin_importance(model, method == ImportanceMethod::weight ? ImportanceKind::weight : ImportanceKind::gain);
    return out;
}

std::vector<std::string> RfeResult::ranking() const {
    std::vector<std::string> out;
    if (!curve.empty()) out = curve.back().features;
    out.insert(out.end(), elimination_order.rbegin(), elimination_order.rend());
    return out;
}

std::size_t select_subset(std::span<const RfePoint> curve) {
    if (curve.empty()) throw ArgumentError("select_subset needs a non-empty curve");
    std::size_t best = 0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (curve[i].mean_accuracy > curve[best].mean_accuracy) best = i;
    }
    const double bar = curve[best].mean_accuracy - curve[best].sd_accuracy;
    std::size_t chosen = curve[best].size;
    for (const auto& p : curve) {
        if (p.mean_accuracy >= bar && p.size < chosen) chosen = p.size;
    }
    return chosen;
}

RfeResult rfe(const LabeledData& data, Hyperparameters hp, const RfeOptions& options) {
    if (data.x.cols() < 2) throw ArgumentError("rfe needs at least two features");
    hp.colsample_bytree = 1.0;
    hp.colsample_bylevel = 1.0;

    RfeResult result;
    std::vector<std::size_t> active(data.x.cols());
    std::iota(active.begin(), active.end(), std::size_t{0});
    const auto& names = data.x.names();

    for (std::size_t round = 0; !active.empty(); ++round) {
        std::vector<std::string> active_names;
        for (auto c : active) active_names.push_back(names[c]);
        try {
            const auto subset = data.select_columns(active);
            std::vector<double> importance(active.size(), 0.0);
            CvOptions cv;
            cv.k = options.k;
            cv.seed = options.seed;
            cv.resample = options.resample;
            cv.folds = options.folds;
            const bool eliminate = active.size() > 1;
            if (eliminate) {
                cv.on_fold = [&](int fold, const GbdtModel& model, const LabeledData& valid) {
                    const auto scores = permutation_importance(
                        model, valid, options.repetitions,
                        derive_seed(options.seed, round, static_cast<std::uint64_t>(fold) + 1000));
                    for (std::size_t j = 0; j < importance.size(); ++j) importance[j] += scores.scores[j];
                };
            }
            const auto report = cross_validate(subset, hp, cv);
            result.audit += report.audit;
            result.curve.push_back({active.size(), report.at("accuracy").mean, report.at("accuracy").sd, active_names});
            if (!eliminate) break;

            // Least important; exact ties go to the higher column index.
            std::size_t drop = 0;
            for (std::size_t j = 1; j < active.size(); ++j) {
                if (importance[j] <= importance[drop]) drop = j;
            }
            result.elimination_order.push_back(names[active[drop]]);
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
        } catch (const Error&) {
            std::string subset;
            for (const auto& n : active_names) subset += (subset.empty() ? "" : ",") + n;
            detail::rethrow_with_context("rfe with features {" + subset + "}");
        }
    }

    result.selected_size = select_subset(result.curve);
    auto ranked = result.ranking();
    result.selected_features.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(result.selected_size));
    return result;
}

}  // namespace autogbm
