#include "autogbm/evaluation.hpp"

#include "autogbm/error.hpp"
#include "autogbm/random.hpp"
#include "error_context.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

namespace autogbm {

namespace {

void check_binary(std::span<const int> labels) {
    for (int y : labels) {
        if (y != 0 && y != 1) throw ArgumentError("labels must be 0 or 1");
    }
}

void check_lengths(std::size_t a, std::size_t b) {
    if (a != b) {
        throw ArgumentError("length mismatch: " + std::to_string(a) + " labels vs " + std::to_string(b) + " values");
    }
}

std::array<std::size_t, 2> class_counts(std::span<const int> labels) {
    std::array<std::size_t, 2> c{};
    for (int y : labels) ++c[static_cast<std::size_t>(y)];
    return c;
}

}  // namespace

std::vector<std::size_t> FoldAssignment::validation_indices(int f) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold.size(); ++i) {
        if (fold[i] == f) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldAssignment::training_indices(int f) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold.size(); ++i) {
        if (fold[i] != f) out.push_back(i);
    }
    return out;
}

namespace {

// Every validation fold needs both classes for the ranking metrics.
void require_class_sizes(std::span<const int> labels, int k) {
    const auto counts = class_counts(labels);
    for (int c = 0; c < 2; ++c) {
        if (counts[static_cast<std::size_t>(c)] < static_cast<std::size_t>(k)) {
            throw StratificationError("class " + std::to_string(c) + " has " +
                                      std::to_string(counts[static_cast<std::size_t>(c)]) + " samples, fewer than k = " +
                                      std::to_string(k));
        }
    }
}

}  // namespace

FoldAssignment stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
    if (k < 2) throw ArgumentError("k-fold needs k >= 2, got " + std::to_string(k));
    check_binary(labels);
    if (labels.size() < static_cast<std::size_t>(k)) {
        throw StratificationError(std::to_string(labels.size()) + " samples cannot fill k = " + std::to_string(k) +
                                  " folds");
    }
    FoldAssignment out{k, std::vector<int>(labels.size(), -1)};
    std::mt19937_64 rng(seed);
    int next = 0;
    for (int c = 0; c < 2; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == c) members.push_back(i);
        }
        std::shuffle(members.begin(), members.end(), rng);
        for (auto i : members) {
            out.fold[i] = next;
            next = (next + 1) % k;
        }
    }
    return out;
}

FoldAssignment group_kfold(std::span<const int> labels, std::span<const std::string> groups, int k,
                           std::uint64_t seed) {
    if (k < 2) throw ArgumentError("k-fold needs k >= 2, got " + std::to_string(k));
    check_lengths(labels.size(), groups.size());
    check_binary(labels);
    std::vector<std::string> keys;
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        auto [it, inserted] = members.try_emplace(groups[i]);
        if (inserted) keys.push_back(groups[i]);
        it->second.push_back(i);
    }
    if (keys.size() < static_cast<std::size_t>(k)) {
        throw StratificationError("only " + std::to_string(keys.size()) + " groups for k = " + std::to_string(k));
    }
    std::mt19937_64 rng(seed);
    std::shuffle(keys.begin(), keys.end(), rng);

    FoldAssignment out{k, std::vector<int>(labels.size(), -1)};
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (const auto& key : keys) {
        const auto target = static_cast<int>(std::min_element(sizes.begin(), sizes.end()) - sizes.begin());
        for (auto i : members[key]) out.fold[i] = target;
        sizes[static_cast<std::size_t>(target)] += members[key].size();
    }
    for (int f = 0; f < k; ++f) {
        std::array<std::size_t, 2> c{};
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (out.fold[i] == f) ++c[static_cast<std::size_t>(labels[i])];
        }
        if (c[0] == 0 || c[1] == 0) {
            throw StratificationError("group fold " + std::to_string(f) + " lacks one of the classes");
        }
    }
    return out;
}

std::vector<std::size_t> oversample_minority(std::span<const std::size_t> train_indices, std::span<const int> labels,
                                             std::uint64_t seed) {
    std::array<std::vector<std::size_t>, 2> by_class;
    for (auto i : train_indices) {
        if (i >= labels.size()) throw ArgumentError("training index out of range");
        by_class[static_cast<std::size_t>(labels[i] == 1)].push_back(i);
    }
    if (by_class[0].empty() || by_class[1].empty()) {
        throw ResamplingError("oversampling needs both classes in the training set");
    }
    std::vector<std::size_t> out(train_indices.begin(), train_indices.end());
    const std::size_t minority = by_class[0].size() < by_class[1].size() ? 0 : 1;
    const auto& pool = by_class[minority];
    const std::size_t deficit = by_class[1 - minority].size() - pool.size();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (std::size_t i = 0; i < deficit; ++i) out.push_back(pool[pick(rng)]);
    return out;
}

double log_loss(std::span<const int> labels, std::span<const double> probs) {
    check_lengths(labels.size(), probs.size());
    if (labels.empty()) throw ArgumentError("log_loss of an empty set");
    constexpr double eps = 1e-15;
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        // Clip the probability of the observed class so the floor is exactly eps.
        const double p = labels[i] == 1 ? probs[i] : 1.0 - probs[i];
        total += std::log(std::clamp(p, eps, 1.0 - eps));
    }
    return -total / static_cast<double>(labels.size());
}

double roc_auc(std::span<const int> labels, std::span<const double> scores) {
    check_lengths(labels.size(), scores.size());
    check_binary(labels);
    const auto counts = class_counts(labels);
    if (counts[0] == 0 || counts[1] == 0) throw MetricError("roc_auc needs both classes present");

    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Sum of midranks of the positives (Mann-Whitney U).
    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) {
            if (labels[order[t]] == 1) positive_rank_sum += midrank;
        }
        i = j + 1;
    }
    const auto np = static_cast<double>(counts[1]);
    const auto nn = static_cast<double>(counts[0]);
    return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double auprc(std::span<const int> labels, std::span<const double> scores) {
    check_lengths(labels.size(), scores.size());
    check_binary(labels);
    const auto counts = class_counts(labels);
    if (counts[1] == 0) throw MetricError("auprc needs at least one positive");

    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const auto positives = static_cast<double>(counts[1]);
    double tp = 0.0;
    double fp = 0.0;
    double prev_recall = 0.0;
    double ap = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        for (std::size_t t = i; t <= j; ++t) (labels[order[t]] == 1 ? tp : fp) += 1.0;
        const double recall = tp / positives;
        const double precision = tp / (tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j + 1;
    }
    return ap;
}

ClassificationReport classification_report(std::span<const int> labels, std::span<const int> predictions) {
    check_lengths(labels.size(), predictions.size());
    check_binary(labels);
    check_binary(predictions);
    if (labels.empty()) throw ArgumentError("classification_report of an empty set");
    ClassificationReport r;
    std::array<std::size_t, 2> predicted{};
    std::array<std::size_t, 2> hits{};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ++r.support[static_cast<std::size_t>(labels[i])];
        ++predicted[static_cast<std::size_t>(predictions[i])];
        if (labels[i] == predictions[i]) ++hits[static_cast<std::size_t>(labels[i])];
    }
    const auto n = static_cast<double>(labels.size());
    r.accuracy = static_cast<double>(hits[0] + hits[1]) / n;
    for (std::size_t c = 0; c < 2; ++c) {
        r.precision_undefined[c] = predicted[c] == 0;
        r.recall_undefined[c] = r.support[c] == 0;
        r.precision[c] = predicted[c] == 0 ? 0.0 : static_cast<double>(hits[c]) / static_cast<double>(predicted[c]);
        r.recall[c] = r.support[c] == 0 ? 0.0 : static_cast<double>(hits[c]) / static_cast<double>(r.support[c]);
        const double w = static_cast<double>(r.support[c]) / n;
        r.weighted_precision += w * r.precision[c];
        r.weighted_recall += w * r.recall[c];
    }
    r.macro_precision = 0.5 * (r.precision[0] + r.precision[1]);
    r.macro_recall = 0.5 * (r.recall[0] + r.recall[1]);
    return r;
}

std::vector<int> threshold_predictions(std::span<const double> probs, double threshold) {
    std::vector<int> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] >= threshold ? 1 : 0;
    return out;
}

double accuracy(std::span<const int> labels, std::span<const double> probs) {
    check_lengths(labels.size(), probs.size());
    if (labels.empty()) throw ArgumentError("accuracy of an empty set");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hits += static_cast<std::size_t>((probs[i] >= 0.5 ? 1 : 0) == labels[i]);
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

LeakageAudit& LeakageAudit::operator+=(const LeakageAudit& other) {
    cv_runs += other.cv_runs;
    duplicates_checked += other.duplicates_checked;
    violations += other.violations;
    return *this;
}

const MetricSummary& CvReport::at(const std::string& metric) const {
    auto it = aggregates.find(metric);
    if (it == aggregates.end()) throw ArgumentError("unknown CV metric: " + metric);
    return it->second;
}

const std::vector<std::string>& cv_metric_names() {
    static const std::vector<std::string> names = {
        "log_loss",     "accuracy",     "auc",          "auprc",           "precision_0",     "precision_1",
        "recall_0",     "recall_1",     "macro_precision", "macro_recall", "weighted_precision", "weighted_recall",
        "best_iteration"};
    return names;
}

namespace {

double fold_metric(const FoldMetrics& f, const std::string& name) {
    if (name == "log_loss") return f.log_loss;
    if (name == "accuracy") return f.accuracy;
    if (name == "auc") return f.auc;
    if (name == "auprc") return f.auprc;
    if (name == "precision_0") return f.report.precision[0];
    if (name == "precision_1") return f.report.precision[1];
    if (name == "recall_0") return f.report.recall[0];
    if (name == "recall_1") return f.report.recall[1];
    if (name == "macro_precision") return f.report.macro_precision;
    if (name == "macro_recall") return f.report.macro_recall;
    if (name == "weighted_precision") return f.report.weighted_precision;
    if (name == "weighted_recall") return f.report.weighted_recall;
    if (name == "best_iteration") return f.best_iteration;
    throw ArgumentError("unknown CV metric: " + name);
}

}  // namespace

CvReport aggregate_folds(std::vector<FoldMetrics> folds) {
    std::sort(folds.begin(), folds.end(), [](const FoldMetrics& a, const FoldMetrics& b) { return a.fold < b.fold; });
    CvReport report;
    report.folds = std::move(folds);
    const auto n = static_cast<double>(report.folds.size());
    for (const auto& name : cv_metric_names()) {
        MetricSummary s;
        if (!report.folds.empty()) {
            for (const auto& f : report.folds) s.mean += fold_metric(f, name);
            s.mean /= n;
            if (report.folds.size() > 1) {
                double ss = 0.0;
                for (const auto& f : report.folds) ss += std::pow(fold_metric(f, name) - s.mean, 2);
                s.sd = std::sqrt(ss / (n - 1.0));
            }
        }
        report.aggregates.emplace(name, s);
    }
    return report;
}

CvReport cross_validate(const LabeledData& data, const Hyperparameters& hp, const CvOptions& options) {
    if (!options.folds) require_class_sizes(data.y, options.k);
    const FoldAssignment folds = options.folds ? *options.folds : stratified_kfold(data.y, options.k, options.seed);
    if (folds.fold.size() != data.size()) throw ArgumentError("fold assignment does not match the data size");

    std::vector<FoldMetrics> results;
    LeakageAudit audit;
    audit.cv_runs = 1;
    for (int f = 0; f < folds.k; ++f) {
        try {
            const auto valid_idx = folds.validation_indices(f);
            auto train_idx = folds.training_indices(f);
            const std::size_t original = train_idx.size();
            if (options.resample) {
                train_idx = oversample_minority(train_idx, data.y, derive_seed(options.seed, static_cast<std::uint64_t>(f), 1));
                const std::unordered_set<std::size_t> held_out(valid_idx.begin(), valid_idx.end());
                for (std::size_t i = original; i < train_idx.size(); ++i) {
                    ++audit.duplicates_checked;
                    if (held_out.count(train_idx[i]) != 0) ++audit.violations;
                }
            }
            const auto train = data.select_rows(train_idx);
            const auto valid = data.select_rows(valid_idx);
            const auto model = fit(train, valid, hp, derive_seed(options.seed, static_cast<std::uint64_t>(f), 2));
            const auto probs = predict_proba(model, valid.x);

            FoldMetrics m;
            m.fold = f;
            m.log_loss = log_loss(valid.y, probs);
            m.report = classification_report(valid.y, threshold_predictions(probs));
            m.accuracy = m.report.accuracy;
            m.auc = roc_auc(valid.y, probs);
            m.auprc = auprc(valid.y, probs);
            m.best_iteration = model.best_iteration;
            m.train_size = train_idx.size();
            m.valid_size = valid_idx.size();
            m.oversampled = train_idx.size() - original;
            results.push_back(m);
            if (options.on_fold) options.on_fold(f, model, valid);
        } catch (const Error&) {
            detail::rethrow_with_context("fold " + std::to_string(f));
        }
    }
    auto report = aggregate_folds(std::move(results));
    report.audit = audit;
    return report;
}

std::string cv_report_to_json(const CvReport& report) {
    using nlohmann::ordered_json;
    ordered_json folds = ordered_json::array();
    for (const auto& f : report.folds) {
        folds.push_back({{"fold", f.fold},
                         {"log_loss", f.log_loss},
                         {"accuracy", f.accuracy},
                         {"auc", f.auc},
                         {"auprc", f.auprc},
                         {"precision", f.report.precision},
                         {"recall", f.report.recall},
                         {"support", f.report.support},
                         {"precision_undefined", f.report.precision_undefined},
                         {"macro_precision", f.report.macro_precision},
                         {"macro_recall", f.report.macro_recall},
                         {"weighted_precision", f.report.weighted_precision},
                         {"weighted_recall", f.report.weighted_recall},
                         {"best_iteration", f.best_iteration},
                         {"train_size", f.train_size},
                         {"valid_size", f.valid_size},
                         {"oversampled", f.oversampled}});
    }
    ordered_json agg = ordered_json::object();
    for (const auto& name : cv_metric_names()) {
        const auto& s = report.at(name);
        agg[name] = {{"mean", s.mean}, {"sd", s.sd}};
    }
    ordered_json doc{{"folds", std::move(folds)},
                     {"aggregates", std::move(agg)},
                     {"leakage_audit",
                      {{"cv_runs", report.audit.cv_runs},
                       {"duplicates_checked", report.audit.duplicates_checked},
                       {"violations", report.audit.violations}}}};
    return doc.dump(2);
}

}  // namespace autogbm
