#include "autogbm/gbdt.hpp"

#include "autogbm/error.hpp"
#include "autogbm/evaluation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <numeric>
#include <random>

namespace autogbm {

namespace {

// Relative tolerance under which two split gains are treated as equal.
constexpr double kGainTieTolerance = 1e-10;

// Same value as structure_score: the sign of the soft threshold vanishes in the square.
inline double squared_score(double grad, double hess, double alpha, double lambda) {
    double t = std::abs(grad) - alpha;
    t = t > 0.0 ? t : 0.0;
    return t * t / (hess + lambda);
}

// Running best split of one node. Candidates must be offered in ascending feature
// order and, within a feature, ascending threshold order for the tie rule to hold.
struct SplitSearch {
    double grad_total = 0.0;
    double hess_total = 0.0;
    double parent = 0.0;
    double alpha = 0.0;
    double lambda = 1.0;
    double gamma = 0.0;
    double min_child = 0.0;
    double bar = 0.0;  // a candidate must beat this gain
    bool found = false;
    SplitDecision decision;
    double left_grad = 0.0;
    double left_hess = 0.0;
    std::size_t left_count = 0;

    void reset(double grad, double hess, const Hyperparameters& hp) {
        grad_total = grad;
        hess_total = hess;
        alpha = hp.l1_alpha;
        lambda = hp.l2_lambda;
        gamma = hp.split_gamma;
        min_child = hp.min_child_weight;
        parent = squared_score(grad, hess, alpha, lambda);
        bar = 0.0;
        found = false;
    }

    // Left child holds every row with value <= here; position is its row count.
    void offer(std::size_t feature, double gl, double hl, double here, double next, std::size_t position) {
        const double gr = grad_total - gl;
        const double hr = hess_total - hl;
        if (hl < min_child || hr < min_child) return;
        const double gain =
            0.5 * (squared_score(gl, hl, alpha, lambda) + squared_score(gr, hr, alpha, lambda) - parent) - gamma;
        if (!(gain > bar)) return;
        accept(feature, gain, gl, hl, here, next, position);
    }

    void accept(std::size_t feature, double gain, double gl, double hl, double here, double next,
                std::size_t position) {
        double threshold = here + 0.5 * (next - here);
        if (!(threshold > here)) threshold = next;
        found = true;
        decision = {feature, threshold, gain};
        bar = gain + kGainTieTolerance * std::abs(gain);
        left_grad = gl;
        left_hess = hl;
        left_count = position;
    }
};

void scan_sorted(const FeatureMatrix& x, std::size_t feature, std::span<const std::size_t> rows,
                 std::span<const GradHess> gh, SplitSearch& best) {
    const auto col = x.column(feature);
    double gl = 0.0;
    double hl = 0.0;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        gl += gh[rows[i]].grad;
        hl += gh[rows[i]].hess;
        const double here = col[rows[i]];
        const double next = col[rows[i + 1]];
        if (next > here) best.offer(feature, gl, hl, here, next, i + 1);
    }
}

void check_finite(const FeatureMatrix& x) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
        for (double v : x.column(c)) {
            if (!std::isfinite(v)) throw NumericError("non-finite value in feature " + x.names()[c]);
        }
    }
}

std::size_t sample_count(double ratio, std::size_t n) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9)));
}

// Feature columns presorted once per fit: row order and the matching sorted values.
struct SortedColumns {
    std::vector<std::vector<std::uint32_t>> order;
    std::vector<std::vector<double>> values;

    explicit SortedColumns(const FeatureMatrix& x) : order(x.cols()), values(x.cols()) {
        for (std::size_t f = 0; f < x.cols(); ++f) {
            const auto col = x.column(f);
            auto& o = order[f];
            o.resize(x.rows());
            std::iota(o.begin(), o.end(), std::uint32_t{0});
            std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
            values[f].resize(x.rows());
            for (std::size_t k = 0; k < o.size(); ++k) values[f][k] = col[o[k]];
        }
    }
};

// Grows one tree level by level. Each tree feature keeps its in-sample rows in sorted
// order, arranged so every open node owns one contiguous segment; splitting a node
// stable-partitions its segment in every feature.
class TreeGrower {
public:
    TreeGrower(const FeatureMatrix& x, const SortedColumns& sorted, std::span<const GradHess> gh,
               const Hyperparameters& hp)
        : x_(x), sorted_(sorted), gh_(gh), hp_(hp), goes_left_(x.rows(), 0) {}

    Tree grow(const std::vector<char>& in_sample, const std::vector<std::size_t>& tree_features,
              const std::vector<std::vector<std::size_t>>& level_features) {
        load_columns(in_sample, tree_features);
        nodes_.clear();
        Pending root;
        for (std::size_t r = 0; r < in_sample.size(); ++r) {
            if (!in_sample[r]) continue;
            root.grad += gh_[r].grad;
            root.hess += gh_[r].hess;
            ++root.count;
        }
        root.end = root.count;
        nodes_.push_back(root);

        std::vector<int> frontier;
        if (hp_.max_depth > 0 && root.count >= 2) frontier.push_back(0);
        for (int depth = 0; depth < hp_.max_depth && !frontier.empty(); ++depth) {
            std::vector<int> next;
            const bool children_open = depth + 1 < hp_.max_depth;
            for (int id : frontier) {
                if (!split_node(id, level_features[static_cast<std::size_t>(depth)])) continue;
                const auto& node = nodes_[static_cast<std::size_t>(id)];
                for (int child : {node.left, node.right}) {
                    if (children_open && nodes_[static_cast<std::size_t>(child)].count >= 2) next.push_back(child);
                }
                if (children_open) partition(id);
            }
            frontier = std::move(next);
        }
        Tree tree;
        tree.nodes.reserve(nodes_.size());
        emit(0, tree);
        return tree;
    }

private:
    struct Pending {
        double grad = 0.0;
        double hess = 0.0;
        std::size_t count = 0;
        std::size_t begin = 0;  // segment in the column arrays
        std::size_t end = 0;
        int feature = -1;
        double threshold = 0.0;
        double gain = 0.0;
        int left = -1;
        int right = -1;
    };

    struct Column {
        std::size_t feature = 0;
        std::vector<std::uint32_t> rows;
        std::vector<double> values;
    };

    void load_columns(const std::vector<char>& in_sample, const std::vector<std::size_t>& tree_features) {
        columns_.resize(tree_features.size());
        slot_of_feature_.assign(x_.cols(), -1);
        for (std::size_t k = 0; k < tree_features.size(); ++k) {
            const auto f = tree_features[k];
            slot_of_feature_[f] = static_cast<int>(k);
            auto& c = columns_[k];
            c.feature = f;
            const auto& order = sorted_.order[f];
            const auto& values = sorted_.values[f];
            c.rows.resize(order.size());
            c.values.resize(order.size());
            std::size_t m = 0;
            for (std::size_t i = 0; i < order.size(); ++i) {
                c.rows[m] = order[i];
                c.values[m] = values[i];
                m += in_sample[order[i]] ? 1 : 0;
            }
            c.rows.resize(m);
            c.values.resize(m);
        }
        scratch_rows_.resize(x_.rows());
        scratch_values_.resize(x_.rows());
    }

    bool split_node(int id, const std::vector<std::size_t>& features) {
        SplitSearch search;
        {
            const auto& node = nodes_[static_cast<std::size_t>(id)];
            search.reset(node.grad, node.hess, hp_);
            for (auto f : features) {
                const auto& c = columns_[static_cast<std::size_t>(slot_of_feature_[f])];
                scan(c, node.begin, node.end, search);
            }
        }
        if (!search.found) return false;
        const int l = static_cast<int>(nodes_.size());
        Pending left;
        Pending right;
        auto& node = nodes_[static_cast<std::size_t>(id)];
        left.grad = search.left_grad;
        left.hess = search.left_hess;
        left.count = search.left_count;
        left.begin = node.begin;
        left.end = node.begin + search.left_count;
        right.grad = node.grad - search.left_grad;
        right.hess = node.hess - search.left_hess;
        right.count = node.count - search.left_count;
        right.begin = left.end;
        right.end = node.end;
        node.feature = static_cast<int>(search.decision.feature);
        node.threshold = search.decision.threshold;
        node.gain = search.decision.gain;
        node.left = l;
        node.right = l + 1;
        nodes_.push_back(left);
        nodes_.push_back(right);
        return true;
    }

    // Prefix sums, then gains in a branch-free loop the compiler can vectorize, then the
    // sequential tie rule over the gains that can win.
    void scan(const Column& c, std::size_t begin, std::size_t end, SplitSearch& search) {
        if (end - begin < 2) return;
        const std::size_t m = end - begin - 1;  // candidate positions
        prefix_grad_.resize(m);
        prefix_hess_.resize(m);
        gains_.resize(m);
        const std::uint32_t* rows = c.rows.data() + begin;
        const double* values = c.values.data() + begin;
        double gl = 0.0;
        double hl = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            gl += gh_[rows[k]].grad;
            hl += gh_[rows[k]].hess;
            prefix_grad_[k] = gl;
            prefix_hess_[k] = hl;
        }
        const double g_total = search.grad_total;
        const double h_total = search.hess_total;
        const double alpha = search.alpha;
        const double lambda = search.lambda;
        const double min_child = search.min_child;
        const double base = search.parent;
        const double gamma = search.gamma;
        const double* pg = prefix_grad_.data();
        const double* ph = prefix_hess_.data();
        double* out = gains_.data();
        for (std::size_t k = 0; k < m; ++k) {
            const double gr = g_total - pg[k];
            const double hr = h_total - ph[k];
            const double gain = 0.5 * (squared_score(pg[k], ph[k], alpha, lambda) + squared_score(gr, hr, alpha, lambda) - base) - gamma;
            const bool valid = (values[k + 1] > values[k]) & (ph[k] >= min_child) & (hr >= min_child);
            out[k] = valid ? gain : -std::numeric_limits<double>::infinity();
        }
        for (std::size_t k = 0; k < m; ++k) {
            if (out[k] > search.bar) search.accept(c.feature, out[k], pg[k], ph[k], values[k], values[k + 1], k + 1);
        }
    }

    // The split feature's segment is already ordered left then right; every other column
    // is stable-partitioned to match.
    void partition(int id) {
        const auto& node = nodes_[static_cast<std::size_t>(id)];
        const auto& split_col = columns_[static_cast<std::size_t>(slot_of_feature_[static_cast<std::size_t>(node.feature)])];
        const std::size_t mid = nodes_[static_cast<std::size_t>(node.left)].end;
        for (std::size_t k = node.begin; k < node.end; ++k) goes_left_[split_col.rows[k]] = k < mid ? 1 : 0;
        for (auto& c : columns_) {
            if (&c == &split_col) continue;
            std::size_t out = node.begin;
            std::size_t spill = 0;
            for (std::size_t k = node.begin; k < node.end; ++k) {
                const auto r = c.rows[k];
                const double v = c.values[k];
                if (goes_left_[r]) {
                    c.rows[out] = r;
                    c.values[out] = v;
                    ++out;
                } else {
                    scratch_rows_[spill] = r;
                    scratch_values_[spill] = v;
                    ++spill;
                }
            }
            std::copy_n(scratch_rows_.begin(), spill, c.rows.begin() + static_cast<std::ptrdiff_t>(out));
            std::copy_n(scratch_values_.begin(), spill, c.values.begin() + static_cast<std::ptrdiff_t>(out));
        }
    }

    // Depth-first preorder numbering, so node ids do not depend on the growth order.
    int emit(int id, Tree& tree) {
        const auto& p = nodes_[static_cast<std::size_t>(id)];
        const int out = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.back().cover = p.hess;
        if (p.feature < 0) {
            tree.nodes.back().weight = hp_.learning_rate * leaf_weight(p.grad, p.hess, hp_.l1_alpha, hp_.l2_lambda);
            return out;
        }
        const int l = emit(p.left, tree);
        const int r = emit(p.right, tree);
        auto& node = tree.nodes[static_cast<std::size_t>(out)];
        node.feature = p.feature;
        node.threshold = p.threshold;
        node.gain = p.gain;
        node.left = l;
        node.right = r;
        return out;
    }

    const FeatureMatrix& x_;
    const SortedColumns& sorted_;
    std::span<const GradHess> gh_;
    const Hyperparameters& hp_;
    std::vector<Pending> nodes_;
    std::vector<Column> columns_;
    std::vector<int> slot_of_feature_;
    std::vector<char> goes_left_;
    std::vector<std::uint32_t> scratch_rows_;
    std::vector<double> scratch_values_;
    std::vector<double> prefix_grad_;
    std::vector<double> prefix_hess_;
    std::vector<double> gains_;
};

double tree_margin(const Tree& tree, const FeatureMatrix& x, std::size_t row) {
    return tree.predict([&](std::size_t f) { return x(row, f); });
}

}  // namespace

void Hyperparameters::validate() const {
    auto ratio_ok = [](double r) { return r > 0.0 && r <= 1.0; };
    if (n_estimators < 1) throw ArgumentError("n_estimators must be >= 1");
    if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be positive");
    if (!ratio_ok(colsample_bylevel) || !ratio_ok(colsample_bytree) || !ratio_ok(subsample)) {
        throw ArgumentError("subsample ratios must lie in (0, 1]");
    }
    if (max_depth < 1) throw ArgumentError("max_depth must be >= 1");
    if (min_child_weight < 0.0 || l1_alpha < 0.0 || split_gamma < 0.0 || l2_lambda < 0.0) {
        throw ArgumentError("regularization terms must be non-negative");
    }
}

bool Hyperparameters::within_search_ranges() const {
    auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
    return in(n_estimators, 30, 150) && in(learning_rate, 0.05, 0.3) && in(colsample_bylevel, 0.6, 1.0) &&
           in(colsample_bytree, 0.6, 1.0) && in(subsample, 0.6, 1.0) && in(max_depth, 3, 6) &&
           in(min_child_weight, 0.6, 1.0) && in(l1_alpha, 0.0, 1.0) && in(split_gamma, 0.0, 1.0) &&
           in(l2_lambda, 0.4, 1.0);
}

double sigmoid(double margin) {
    return 1.0 / (1.0 + std::exp(-margin));
}

GradHess grad_hess_logloss(int label, double margin) {
    const double p = sigmoid(margin);
    return {p - static_cast<double>(label), p * (1.0 - p)};
}

double soft_threshold(double grad_sum, double alpha) {
    const double mag = std::max(std::abs(grad_sum) - alpha, 0.0);
    return grad_sum < 0.0 ? -mag : mag;
}

double leaf_weight(double grad_sum, double hess_sum, double alpha, double lambda) {
    if (!(hess_sum + lambda > 0.0)) throw NumericError("leaf weight denominator H + lambda must be positive");
    return -soft_threshold(grad_sum, alpha) / (hess_sum + lambda);
}

double structure_score(double grad_sum, double hess_sum, double alpha, double lambda) {
    const double t = soft_threshold(grad_sum, alpha);
    return t * t / (hess_sum + lambda);
}

std::optional<SplitDecision> find_best_split(const FeatureMatrix& x, std::span<const std::size_t> instances,
                                             std::span<const GradHess> gradients,
                                             std::span<const std::size_t> candidate_features,
                                             const Hyperparameters& hp) {
    if (instances.empty()) throw ArgumentError("find_best_split needs a non-empty instance set");
    std::vector<std::size_t> features(candidate_features.begin(), candidate_features.end());
    std::sort(features.begin(), features.end());

    double grad = 0.0;
    double hess = 0.0;
    for (auto r : instances) {
        grad += gradients[r].grad;
        hess += gradients[r].hess;
    }
    SplitSearch best;
    best.reset(grad, hess, hp);
    std::vector<std::size_t> rows(instances.begin(), instances.end());
    for (auto f : features) {
        const auto col = x.column(f);
        for (auto r : rows) {
            if (!std::isfinite(col[r])) throw NumericError("non-finite value in feature " + x.names()[f]);
        }
        std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) { return col[a] < col[b]; });
        scan_sorted(x, f, rows, gradients, best);
    }
    if (!best.found) return std::nullopt;
    return best.decision;
}

int Tree::depth() const {
    // Children always have larger indices than their parent.
    std::vector<int> d(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, d[i]);
        if (!nodes[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return deepest;
}

std::size_t Tree::split_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return !n.is_leaf(); }));
}

GbdtModel fit(const LabeledData& train, const LabeledData& valid, const Hyperparameters& hp, std::uint64_t seed,
              FitOptions options) {
    hp.validate();
    const std::size_t n = train.size();
    const std::size_t n_features = train.x.cols();
    if (n_features == 0) throw ArgumentError("fit needs at least one feature");
    if (train.x.rows() != n) throw ArgumentError("label count does not match feature rows");
    const auto positives = static_cast<std::size_t>(std::count(train.y.begin(), train.y.end(), 1));
    if (positives == 0 || positives == n) throw FitError("training data contains a single class");
    if (options.early_stopping && valid.size() == 0) {
        throw ArgumentError("early stopping requires a non-empty validation set");
    }
    if (valid.size() > 0 && valid.x.cols() != n_features) {
        throw ArgumentError("validation feature count does not match training");
    }
    check_finite(train.x);
    check_finite(valid.x);

    GbdtModel model;
    model.feature_names = train.x.names();
    model.hp = hp;
    model.learning_rate = hp.learning_rate;
    const double prior = static_cast<double>(positives) / static_cast<double>(n);
    model.base_score = std::log(prior / (1.0 - prior));

    const SortedColumns sorted(train.x);
    std::mt19937_64 rng(seed);
    std::vector<double> train_margin(n, model.base_score);
    std::vector<double> valid_margin(valid.size(), model.base_score);
    std::vector<double> valid_prob(valid.size());
    std::vector<GradHess> gh(n);
    TreeGrower grower(train.x, sorted, gh, hp);
    std::vector<std::size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
    std::vector<std::size_t> all_features(n_features);
    std::iota(all_features.begin(), all_features.end(), std::size_t{0});
    std::vector<char> in_sample(n, 1);

    const int patience = static_cast<int>(std::ceil(0.1 * hp.n_estimators));
    double best_loss = std::numeric_limits<double>::infinity();
    int best_round = 0;

    for (int round = 1; round <= hp.n_estimators; ++round) {
        for (std::size_t i = 0; i < n; ++i) gh[i] = grad_hess_logloss(train.y[i], train_margin[i]);

        if (hp.subsample < 1.0) {
            std::vector<std::size_t> picked;
            std::sample(all_rows.begin(), all_rows.end(), std::back_inserter(picked), sample_count(hp.subsample, n), rng);
            std::fill(in_sample.begin(), in_sample.end(), 0);
            for (auto r : picked) in_sample[r] = 1;
        }

        std::vector<std::size_t> tree_features;
        std::sample(all_features.begin(), all_features.end(), std::back_inserter(tree_features),
                    sample_count(hp.colsample_bytree, n_features), rng);
        std::vector<std::vector<std::size_t>> level_features(static_cast<std::size_t>(hp.max_depth));
        for (auto& level : level_features) {
            std::sample(tree_features.begin(), tree_features.end(), std::back_inserter(level),
                        sample_count(hp.colsample_bylevel, tree_features.size()), rng);
        }

        model.trees.push_back(grower.grow(in_sample, tree_features, level_features));
        const auto& tree = model.trees.back();
        for (std::size_t i = 0; i < n; ++i) train_margin[i] += tree_margin(tree, train.x, i);

        if (options.early_stopping) {
            for (std::size_t i = 0; i < valid.size(); ++i) {
                valid_margin[i] += tree_margin(tree, valid.x, i);
                valid_prob[i] = sigmoid(valid_margin[i]);
            }
            const double loss = log_loss(valid.y, valid_prob);
            model.valid_loss.push_back(loss);
            if (loss < best_loss) {
                best_loss = loss;
                best_round = round;
            }
            if (round - best_round >= patience) break;
        }
    }
    model.best_iteration = options.early_stopping ? best_round : static_cast<int>(model.trees.size());
    return model;
}

double predict_margin(const GbdtModel& model, const FeatureMatrix& x, std::size_t row) {
    double margin = model.base_score;
    const auto used = std::min<std::size_t>(static_cast<std::size_t>(model.best_iteration), model.trees.size());
    for (std::size_t t = 0; t < used; ++t) margin += tree_margin(model.trees[t], x, row);
    return margin;
}

std::vector<double> predict_proba(const GbdtModel& model, const FeatureMatrix& x) {
    if (x.cols() != model.feature_names.size()) {
        throw InferenceError("expected " + std::to_string(model.feature_names.size()) + " features, got " +
                             std::to_string(x.cols()));
    }
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = sigmoid(predict_margin(model, x, i));
    return out;
}

double predict_proba(const GbdtModel& model, const std::map<std::string, double>& named_features) {
    FeatureMatrix row(1, model.feature_names);
    for (std::size_t f = 0; f < model.feature_names.size(); ++f) {
        auto it = named_features.find(model.feature_names[f]);
        if (it == named_features.end()) throw InferenceError("missing feature " + model.feature_names[f]);
        if (!std::isfinite(it->second)) throw InferenceError("non-finite feature " + model.feature_names[f]);
        row(0, f) = it->second;
    }
    return sigmoid(predict_margin(model, row, 0));
}

double predict_proba(const GbdtModel& model, const FeatureVector& features) {
    std::map<std::string, double> named;
    for (std::size_t f = 0; f < kFeatureCount; ++f) named.emplace(std::string(kFeatures[f].name), features.values[f]);
    return predict_proba(model, named);
}

std::vector<double> builtin_importance(const GbdtModel& model, ImportanceKind kind) {
    const std::size_t nf = model.feature_names.size();
    std::vector<double> count(nf, 0.0);
    std::vector<double> gain(nf, 0.0);
    for (const auto& tree : model.trees) {
        for (const auto& node : tree.nodes) {
            if (node.is_leaf()) continue;
            count[static_cast<std::size_t>(node.feature)] += 1.0;
            gain[static_cast<std::size_t>(node.feature)] += node.gain;
        }
    }
    std::vector<double> score(nf, 0.0);
    for (std::size_t f = 0; f < nf; ++f) {
        if (count[f] > 0.0) score[f] = kind == ImportanceKind::weight ? count[f] : gain[f] / count[f];
    }
    const double total = std::accumulate(score.begin(), score.end(), 0.0);
    if (total > 0.0) {
        for (auto& s : score) s /= total;
    }
    return score;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json hp_to_json(const Hyperparameters& hp) {
    return json{{"n_estimators", hp.n_estimators},
                {"learning_rate", hp.learning_rate},
                {"colsample_bylevel", hp.colsample_bylevel},
                {"colsample_bytree", hp.colsample_bytree},
                {"subsample", hp.subsample},
                {"max_depth", hp.max_depth},
                {"min_child_weight", hp.min_child_weight},
                {"l1_alpha", hp.l1_alpha},
                {"split_gamma", hp.split_gamma},
                {"l2_lambda", hp.l2_lambda}};
}

Hyperparameters hp_from_json(const json& j) {
    Hyperparameters hp;
    hp.n_estimators = j.at("n_estimators").get<int>();
    hp.learning_rate = j.at("learning_rate").get<double>();
    hp.colsample_bylevel = j.at("colsample_bylevel").get<double>();
    hp.colsample_bytree = j.at("colsample_bytree").get<double>();
    hp.subsample = j.at("subsample").get<double>();
    hp.max_depth = j.at("max_depth").get<int>();
    hp.min_child_weight = j.at("min_child_weight").get<double>();
    hp.l1_alpha = j.at("l1_alpha").get<double>();
    hp.split_gamma = j.at("split_gamma").get<double>();
    hp.l2_lambda = j.at("l2_lambda").get<double>();
    return hp;
}

}  // namespace

std::string model_to_json(const GbdtModel& model) {
    json trees = json::array();
    for (const auto& tree : model.trees) {
        json nodes = json::array();
        for (const auto& n : tree.nodes) {
            if (n.is_leaf()) {
                nodes.push_back({{"leaf", n.weight}, {"cover", n.cover}});
            } else {
                nodes.push_back({{"feature", n.feature},
                                 {"threshold", n.threshold},
                                 {"gain", n.gain},
                                 {"left", n.left},
                                 {"right", n.right},
                                 {"cover", n.cover}});
            }
        }
        trees.push_back({{"nodes", std::move(nodes)}});
    }
    json doc{{"format", "autogbm-gbdt"},
             {"version", 1},
             {"objective", "binary:logistic"},
             {"feature_names", model.feature_names},
             {"hyperparameters", hp_to_json(model.hp)},
             {"base_score", model.base_score},
             {"learning_rate", model.learning_rate},
             {"best_iteration", model.best_iteration},
             {"valid_loss", model.valid_loss},
             {"trees", std::move(trees)}};
    return doc.dump(1);
}

GbdtModel model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model document is not valid JSON: ") + e.what());
    }
    try {
        if (doc.at("format") != "autogbm-gbdt") throw SchemaError("not an autogbm model document");
        GbdtModel model;
        model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        model.hp = hp_from_json(doc.at("hyperparameters"));
        model.base_score = doc.at("base_score").get<double>();
        model.learning_rate = doc.at("learning_rate").get<double>();
        model.best_iteration = doc.at("best_iteration").get<int>();
        model.valid_loss = doc.at("valid_loss").get<std::vector<double>>();
        for (const auto& t : doc.at("trees")) {
            Tree tree;
            for (const auto& jn : t.at("nodes")) {
                TreeNode n;
                n.cover = jn.at("cover").get<double>();
                if (jn.contains("leaf")) {
                    n.weight = jn.at("leaf").get<double>();
                } else {
                    n.feature = jn.at("feature").get<int>();
                    n.threshold = jn.at("threshold").get<double>();
                    n.gain = jn.at("gain").get<double>();
                    n.left = jn.at("left").get<int>();
                    n.right = jn.at("right").get<int>();
                }
                tree.nodes.push_back(n);
            }
            const auto count = static_cast<int>(tree.nodes.size());
            for (int i = 0; i < count; ++i) {
                const auto& n = tree.nodes[static_cast<std::size_t>(i)];
                if (!n.is_leaf() && (n.left <= i || n.right <= i || n.left >= count || n.right >= count ||
                                     n.feature >= static_cast<int>(model.feature_names.size()))) {
                    throw SchemaError("model tree has an out-of-range node reference");
                }
            }
            model.trees.push_back(std::move(tree));
        }
        return model;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed model document: ") + e.what());
    }
}

}  // namespace autogbm
