#include "autogbm/error.hpp"
#include "autogbm/evaluation.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

using namespace autogbm;

namespace {

std::vector<int> fold_positive_counts(const FoldAssignment& fa, const std::vector<int>& y) {
    std::vector<int> out(static_cast<std::size_t>(fa.k), 0);
    for (std::size_t i = 0; i < y.size(); ++i) out[static_cast<std::size_t>(fa.fold[i])] += y[i];
    return out;
}

// Pairwise definition: positives outranking negatives, ties worth 1/2.
double auc_by_pairs(const std::vector<int>& y, const std::vector<double>& s) {
    double wins = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (y[i] != 1 || y[j] != 0) continue;
            pairs += 1.0;
            wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        }
    }
    return wins / pairs;
}

Hyperparameters small_hp() {
    Hyperparameters hp;
    hp.n_estimators = 30;
    hp.max_depth = 3;
    hp.learning_rate = 0.2;
    hp.subsample = 1.0;
    hp.colsample_bytree = 1.0;
    hp.colsample_bylevel = 1.0;
    hp.min_child_weight = 0.6;
    hp.l1_alpha = 0.0;
    hp.split_gamma = 0.0;
    hp.l2_lambda = 1.0;
    return hp;
}

LabeledData noisy_linear(std::size_t n, std::uint64_t seed, double positive_rate = 0.5) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::bernoulli_distribution pos(positive_rate);
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = pos(rng) ? 1 : 0;
        rows.push_back({normal(rng) + 1.5 * label, normal(rng), normal(rng)});
        y.push_back(label);
    }
    return fixtures::make_data(rows, y);
}

}  // namespace

TEST(stratified_kfold, ten_samples_three_positives) {
    const std::vector<int> y{1, 0, 0, 1, 0, 0, 0, 1, 0, 0};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto fa = stratified_kfold(y, 5, seed);
        for (int f = 0; f < 5; ++f) EXPECT_EQ(fa.validation_indices(f).size(), 2u);
        auto pos = fold_positive_counts(fa, y);
        std::sort(pos.begin(), pos.end(), std::greater<>());
        EXPECT_EQ(pos, (std::vector<int>{1, 1, 1, 0, 0}));
    }
}

TEST(stratified_kfold, dealing_carries_over_between_classes) {
    // 7 negatives fill folds 0..4 then 0, 1; the 3 positives continue at fold 2.
    const std::vector<int> y{0, 0, 0, 0, 0, 0, 0, 1, 1, 1};
    const auto fa = stratified_kfold(y, 5, 3);
    EXPECT_EQ(fold_positive_counts(fa, y), (std::vector<int>{0, 0, 1, 1, 1}));
}

TEST(stratified_kfold, balanced_hundred_gives_five_and_five) {
    std::vector<int> y(100);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = i % 2;
    const auto fa = stratified_kfold(y, 10, 3);
    for (int f = 0; f < 10; ++f) {
        const auto v = fa.validation_indices(f);
        ASSERT_EQ(v.size(), 10u);
        int pos = 0;
        for (auto i : v) pos += y[i];
        EXPECT_EQ(pos, 5);
    }
}

TEST(stratified_kfold, rejects_degenerate_k_and_small_classes) {
    const std::vector<int> y{0, 1, 0, 1};
    EXPECT_THROW(stratified_kfold(y, 1, 0), ArgumentError);
    EXPECT_THROW(stratified_kfold(y, 5, 0), StratificationError);
    try {
        CvOptions opt;
        opt.k = 2;
        cross_validate(fixtures::make_data({{0}, {1}, {2}, {3}}, {0, 0, 0, 1}), small_hp(), opt);
        FAIL() << "expected StratificationError";
    } catch (const StratificationError& e) {
        EXPECT_NE(std::string(e.what()).find("class 1"), std::string::npos) << e.what();
    }
}

TEST(stratified_kfold, per_class_counts_differ_by_at_most_one) {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 100; ++rep) {
        const int k = 2 + static_cast<int>(rng() % 9);
        const std::size_t n = 2 * k + rng() % 200;
        std::vector<int> y(n);
        for (auto& v : y) v = rng() % 3 == 0;
        const auto pos = std::count(y.begin(), y.end(), 1);
        if (pos < k || static_cast<long>(n) - pos < k) continue;
        const auto fa = stratified_kfold(y, k, rng());
        ASSERT_EQ(fa.fold.size(), n);
        std::vector<int> per_class[2] = {std::vector<int>(k, 0), std::vector<int>(k, 0)};
        std::vector<int> total(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ASSERT_GE(fa.fold[i], 0);
            ASSERT_LT(fa.fold[i], k);
            ++per_class[y[i]][fa.fold[i]];
            ++total[fa.fold[i]];
        }
        for (const auto& c : per_class) EXPECT_LE(*std::max_element(c.begin(), c.end()) - *std::min_element(c.begin(), c.end()), 1);
        EXPECT_LE(*std::max_element(total.begin(), total.end()) - *std::min_element(total.begin(), total.end()), 1);
        // Training and validation indices partition the samples.
        for (int f = 0; f < k; ++f) EXPECT_EQ(fa.training_indices(f).size() + fa.validation_indices(f).size(), n);
    }
}

TEST(group_kfold, keeps_groups_together) {
    std::vector<int> y;
    std::vector<std::string> g;
    for (int d = 0; d < 12; ++d) {
        for (int i = 0; i < 10; ++i) {
            y.push_back(i < 3 ? 1 : 0);
            g.push_back("drive" + std::to_string(d));
        }
    }
    const auto fa = group_kfold(y, g, 4, 9);
    std::map<std::string, std::set<int>> folds_of;
    for (std::size_t i = 0; i < y.size(); ++i) folds_of[g[i]].insert(fa.fold[i]);
    for (const auto& [name, folds] : folds_of) EXPECT_EQ(folds.size(), 1u) << name;
    EXPECT_THROW(group_kfold(y, g, 13, 9), StratificationError);
}

TEST(oversample_minority, eight_two_becomes_eight_eight) {
    const std::vector<int> y{0, 0, 0, 0, 0, 0, 0, 0, 1, 1};
    std::vector<std::size_t> idx(10);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto out = oversample_minority(idx, y, 5);
    ASSERT_EQ(out.size(), 16u);
    EXPECT_TRUE(std::equal(idx.begin(), idx.end(), out.begin()));
    int pos = 0;
    for (auto i : out) pos += y[i];
    EXPECT_EQ(pos, 8);
    for (std::size_t i = 10; i < out.size(); ++i) EXPECT_EQ(y[out[i]], 1);
}

TEST(oversample_minority, balanced_is_identity_and_single_class_fails) {
    const std::vector<int> y{0, 1, 1, 0};
    const std::vector<std::size_t> idx{3, 1, 0, 2};
    EXPECT_EQ(oversample_minority(idx, y, 1), idx);
    const std::vector<std::size_t> only_neg{0, 3};
    EXPECT_THROW(oversample_minority(only_neg, y, 1), ResamplingError);
}

TEST(oversample_minority, retains_originals_and_only_draws_from_training) {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 20 + rng() % 80;
        std::vector<int> y(n);
        for (auto& v : y) v = rng() % 4 == 0;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i) {
            if (rng() % 3) idx.push_back(i);
        }
        int pos = 0;
        for (auto i : idx) pos += y[i];
        if (pos == 0 || pos == static_cast<int>(idx.size())) continue;
        const auto out = oversample_minority(idx, y, rng());
        ASSERT_GE(out.size(), idx.size());
        EXPECT_TRUE(std::equal(idx.begin(), idx.end(), out.begin()));
        const std::set<std::size_t> allowed(idx.begin(), idx.end());
        std::array<int, 2> counts{};
        for (auto i : out) {
            EXPECT_EQ(allowed.count(i), 1u);
            ++counts[static_cast<std::size_t>(y[i])];
        }
        EXPECT_EQ(counts[0], counts[1]);
    }
}

TEST(log_loss, closed_forms) {
    EXPECT_NEAR(log_loss(std::vector<int>{1, 0}, std::vector<double>{0.5, 0.5}), std::log(2.0), 1e-12);
    EXPECT_LE(log_loss(std::vector<int>{1, 0}, std::vector<double>{1.0, 0.0}), 1e-14);
    EXPECT_NEAR(log_loss(std::vector<int>{0}, std::vector<double>{1.0}), -std::log(1e-15), 1e-6);
    EXPECT_NEAR(log_loss(std::vector<int>{0}, std::vector<double>{1.0}), 34.5388, 1e-4);
    EXPECT_THROW(log_loss(std::vector<int>{1, 0}, std::vector<double>{0.5}), ArgumentError);
}

TEST(log_loss, constant_predictor_is_best_at_prevalence) {
    const std::vector<int> y{1, 0, 0, 1, 0, 0, 0, 0};
    const double prevalence = 0.25;
    auto at = [&](double p) { return log_loss(y, std::vector<double>(y.size(), p)); };
    const double best = at(prevalence);
    for (double p = 0.01; p < 1.0; p += 0.01) EXPECT_GE(at(p) + 1e-15, best) << p;
}

TEST(roc_auc, closed_forms) {
    EXPECT_EQ(roc_auc(std::vector<int>{0, 0, 1, 1}, std::vector<double>{0.1, 0.4, 0.35, 0.8}), 0.75);
    EXPECT_EQ(roc_auc(std::vector<int>{0, 0, 1, 1}, std::vector<double>{0.1, 0.2, 0.3, 0.4}), 1.0);
    EXPECT_EQ(roc_auc(std::vector<int>{0, 1, 0, 1}, std::vector<double>(4, 0.3)), 0.5);
    EXPECT_THROW(roc_auc(std::vector<int>{1, 1}, std::vector<double>{0.2, 0.3}), MetricError);
}

TEST(roc_auc, matches_pair_counting_and_is_rank_invariant) {
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rng() % 40;
        std::vector<int> y(n);
        std::vector<double> s(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng() % 2;
            s[i] = static_cast<double>(rng() % 7) / 7.0;  // plenty of ties
        }
        y[0] = 0;
        y[1] = 1;
        const double auc = roc_auc(y, s);
        EXPECT_NEAR(auc, auc_by_pairs(y, s), 1e-12);
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(3.0 * s[i]) - 2.0;
        EXPECT_NEAR(roc_auc(y, t), auc, 1e-12);
    }
}

TEST(auprc, closed_forms) {
    EXPECT_EQ(auprc(std::vector<int>{0, 0, 1, 1}, std::vector<double>{0.1, 0.2, 0.3, 0.4}), 1.0);
    EXPECT_EQ(auprc(std::vector<int>{1, 0}, std::vector<double>{0.2, 0.9}), 0.5);
    EXPECT_DOUBLE_EQ(auprc(std::vector<int>{1, 0, 0, 1, 0}, std::vector<double>(5, 0.7)), 0.4);
    EXPECT_THROW(auprc(std::vector<int>{0, 0}, std::vector<double>{0.1, 0.2}), MetricError);
}

TEST(auprc, hand_computed_steps) {
    // Descending scores: 0.9(1) 0.8(0) 0.7(1) 0.1(0). Steps: R 0->0.5 at P 1, R 0.5->1 at P 2/3.
    EXPECT_DOUBLE_EQ(auprc(std::vector<int>{1, 0, 1, 0}, std::vector<double>{0.9, 0.8, 0.7, 0.1}),
                     0.5 * 1.0 + 0.5 * (2.0 / 3.0));
}

TEST(classification_report, hand_case) {
    const auto r = classification_report(std::vector<int>{1, 0, 1}, std::vector<int>{1, 0, 0});
    EXPECT_DOUBLE_EQ(r.accuracy, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(r.recall[1], 0.5);
    EXPECT_DOUBLE_EQ(r.precision[1], 1.0);
    EXPECT_DOUBLE_EQ(r.precision[0], 0.5);
    EXPECT_DOUBLE_EQ(r.recall[0], 1.0);
    EXPECT_DOUBLE_EQ(r.macro_recall, 0.75);
    EXPECT_EQ(r.support[0], 1u);
    EXPECT_EQ(r.support[1], 2u);
}

TEST(classification_report, undefined_precision_is_zero_and_flagged) {
    const auto r = classification_report(std::vector<int>{1, 0, 1}, std::vector<int>{0, 0, 0});
    EXPECT_EQ(r.precision[1], 0.0);
    EXPECT_TRUE(r.precision_undefined[1]);
    EXPECT_FALSE(r.precision_undefined[0]);
    EXPECT_THROW(classification_report(std::vector<int>{1}, std::vector<int>{1, 0}), ArgumentError);
}

TEST(classification_report, perfect_and_weighted_recall_identity) {
    const auto p = classification_report(std::vector<int>{1, 0, 1, 0}, std::vector<int>{1, 0, 1, 0});
    for (double v : {p.accuracy, p.precision[0], p.precision[1], p.recall[0], p.recall[1], p.macro_precision,
                     p.macro_recall, p.weighted_precision, p.weighted_recall}) {
        EXPECT_EQ(v, 1.0);
    }
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 500; ++rep) {
        const std::size_t n = 1 + rng() % 30;
        std::vector<int> y(n), yhat(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng() % 2;
            yhat[i] = rng() % 2;
        }
        const auto r = classification_report(y, yhat);
        EXPECT_NEAR(r.weighted_recall, r.accuracy, 1e-12);
        for (double v : {r.precision[0], r.precision[1], r.recall[0], r.recall[1], r.macro_precision,
                         r.weighted_precision}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(threshold_predictions, half_goes_to_class_one) {
    EXPECT_EQ(threshold_predictions(std::vector<double>{0.49, 0.5, 0.51}), (std::vector<int>{0, 1, 1}));
}

TEST(cross_validate, report_shape_and_metric_ranges) {
    const auto data = noisy_linear(300, 1, 0.3);
    CvOptions opt;
    opt.k = 10;
    opt.seed = 4;
    const auto r = cross_validate(data, small_hp(), opt);
    ASSERT_EQ(r.folds.size(), 10u);
    for (int f = 0; f < 10; ++f) EXPECT_EQ(r.folds[static_cast<std::size_t>(f)].fold, f);
    for (const auto& name : cv_metric_names()) EXPECT_NO_THROW(r.at(name)) << name;
    for (const auto& f : r.folds) {
        for (double v : {f.accuracy, f.auc, f.auprc, f.report.macro_precision, f.report.weighted_recall}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        EXPECT_EQ(f.oversampled, 0u);
    }
    EXPECT_GT(r.at("accuracy").mean, 0.7);
    EXPECT_EQ(r.audit.cv_runs, 1u);
    EXPECT_EQ(r.audit.duplicates_checked, 0u);
    EXPECT_THROW(r.at("nope"), ArgumentError);
}

TEST(cross_validate, resampling_never_leaks_into_validation) {
    const auto data = noisy_linear(240, 2, 0.2);
    CvOptions opt;
    opt.k = 5;
    opt.seed = 6;
    opt.resample = true;
    std::size_t seen = 0;
    opt.on_fold = [&](int, const GbdtModel&, const LabeledData& valid) { seen += valid.size(); };
    const auto r = cross_validate(data, small_hp(), opt);
    EXPECT_EQ(seen, data.size());
    EXPECT_GT(r.audit.duplicates_checked, 0u);
    EXPECT_EQ(r.audit.violations, 0u);
    std::size_t added = 0;
    for (const auto& f : r.folds) added += f.oversampled;
    EXPECT_EQ(added, r.audit.duplicates_checked);
}

TEST(cross_validate, shuffled_rows_with_matching_folds_give_the_same_metrics) {
    const auto data = noisy_linear(200, 3);
    const auto folds = stratified_kfold(data.y, 5, 7);
    CvOptions a;
    a.folds = folds;
    a.seed = 1;

    std::vector<std::size_t> perm(data.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(12);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto shuffled = data.select_rows(perm);
    FoldAssignment moved{5, std::vector<int>(data.size())};
    for (std::size_t i = 0; i < perm.size(); ++i) moved.fold[i] = folds.fold[perm[i]];
    CvOptions b = a;
    b.folds = moved;

    const auto ra = cross_validate(data, small_hp(), a);
    const auto rb = cross_validate(shuffled, small_hp(), b);
    for (const auto& name : cv_metric_names()) EXPECT_NEAR(ra.at(name).mean, rb.at(name).mean, 1e-9) << name;
}

TEST(cross_validate, errors_name_the_fold) {
    auto data = noisy_linear(60, 4);
    FoldAssignment fa{3, std::vector<int>(data.size(), 0)};
    // Fold 0 holds every positive, so its training part has a single class.
    for (std::size_t i = 0; i < data.size(); ++i) fa.fold[i] = data.y[i] == 1 ? 0 : 1 + static_cast<int>(i % 2);
    CvOptions opt;
    opt.folds = fa;
    try {
        cross_validate(data, small_hp(), opt);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("fold 0"), std::string::npos) << e.what();
    }
    opt.folds = FoldAssignment{3, std::vector<int>(5, 0)};
    EXPECT_THROW(cross_validate(data, small_hp(), opt), ArgumentError);
}

TEST(cv_report_json, contains_folds_and_aggregates) {
    const auto data = noisy_linear(100, 5);
    CvOptions opt;
    opt.k = 4;
    opt.seed = 2;
    const auto j = nlohmann::json::parse(cv_report_to_json(cross_validate(data, small_hp(), opt)));
    EXPECT_EQ(j.at("folds").size(), 4u);
    EXPECT_TRUE(j.contains("aggregates"));
}
