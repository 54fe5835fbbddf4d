#include "autogbm/tpe.hpp"

#include "autogbm/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>

namespace autogbm {

namespace {

constexpr std::size_t kMaxRejections = 1000;

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

std::string_view param_kind_name(ParamKind kind) {
    switch (kind) {
        case ParamKind::uniform_real: return "uniform";
        case ParamKind::log_uniform_real: return "log_uniform";
        case ParamKind::uniform_int: return "uniform_int";
        case ParamKind::categorical: return "categorical";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Search space
// ---------------------------------------------------------------------------

ParamSpec ParamSpec::uniform(std::string name, double low, double high) {
    return {std::move(name), ParamKind::uniform_real, low, high, {}};
}

ParamSpec ParamSpec::log_uniform(std::string name, double low, double high) {
    return {std::move(name), ParamKind::log_uniform_real, low, high, {}};
}

ParamSpec ParamSpec::integer(std::string name, long long low, long long high) {
    return {std::move(name), ParamKind::uniform_int, static_cast<double>(low), static_cast<double>(high), {}};
}

ParamSpec ParamSpec::categorical(std::string name, std::vector<double> choices) {
    return {std::move(name), ParamKind::categorical, 0.0, 0.0, std::move(choices)};
}

void ParamSpec::validate() const {
    if (name.empty()) throw ArgumentError("parameter without a name");
    if (kind == ParamKind::categorical) {
        if (choices.empty()) throw ArgumentError(name + ": categorical needs at least one choice");
        std::set<double> distinct(choices.begin(), choices.end());
        if (distinct.size() != choices.size()) throw ArgumentError(name + ": categorical choices must be distinct");
        return;
    }
    if (!(low < high)) throw ArgumentError(name + ": low must be below high");
    if (kind == ParamKind::log_uniform_real && !(low > 0.0)) {
        throw ArgumentError(name + ": log-uniform bounds must be positive");
    }
    if (kind == ParamKind::uniform_int && (low != std::floor(low) || high != std::floor(high))) {
        throw ArgumentError(name + ": integer bounds must be whole numbers");
    }
}

bool ParamSpec::contains(double value) const {
    switch (kind) {
        case ParamKind::categorical:
            return std::find(choices.begin(), choices.end(), value) != choices.end();
        case ParamKind::uniform_int:
            return value == std::floor(value) && value >= low && value <= high;
        default:
            return value >= low && value <= high;
    }
}

SearchSpace::SearchSpace(std::vector<ParamSpec> params) : params_(std::move(params)) {
    std::set<std::string> seen;
    for (const auto& p : params_) {
        p.validate();
        if (!seen.insert(p.name).second) throw ArgumentError("duplicate parameter name: " + p.name);
    }
}

std::optional<std::size_t> SearchSpace::find(std::string_view name) const {
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (params_[i].name == name) return i;
    }
    return std::nullopt;
}

std::vector<std::string> SearchSpace::names() const {
    std::vector<std::string> out;
    for (const auto& p : params_) out.push_back(p.name);
    return out;
}

void SearchSpace::replace(const ParamSpec& spec) {
    spec.validate();
    auto idx = find(spec.name);
    if (!idx) throw ArgumentError("unknown parameter: " + spec.name);
    params_[*idx] = spec;
}

void SearchSpace::remove(std::string_view name) {
    auto idx = find(name);
    if (!idx) throw ArgumentError("unknown parameter: " + std::string(name));
    params_.erase(params_.begin() + static_cast<std::ptrdiff_t>(*idx));
}

SearchSpace gbdt_search_space() {
    return SearchSpace({
        ParamSpec::integer("n_estimators", 30, 150),
        ParamSpec::log_uniform("learning_rate", 0.05, 0.3),
        ParamSpec::uniform("colsample_bylevel", 0.6, 1.0),
        ParamSpec::uniform("colsample_bytree", 0.6, 1.0),
        ParamSpec::uniform("subsample", 0.6, 1.0),
        ParamSpec::categorical("max_depth", {3, 4, 5, 6}),
        ParamSpec::uniform("min_child_weight", 0.6, 1.0),
        ParamSpec::uniform("l1_alpha", 0.0, 1.0),
        ParamSpec::uniform("split_gamma", 0.0, 1.0),
        ParamSpec::uniform("l2_lambda", 0.4, 1.0),
    });
}

Params sample_prior(const SearchSpace& space, std::mt19937_64& rng) {
    Params out;
    out.reserve(space.size());
    for (const auto& p : space.params()) {
        switch (p.kind) {
            case ParamKind::uniform_real:
                out.push_back(std::uniform_real_distribution<double>(p.low, p.high)(rng));
                break;
            case ParamKind::log_uniform_real: {
                const double v = std::exp(std::uniform_real_distribution<double>(std::log(p.low), std::log(p.high))(rng));
                out.push_back(std::clamp(v, p.low, p.high));
                break;
            }
            case ParamKind::uniform_int:
                out.push_back(static_cast<double>(std::uniform_int_distribution<long long>(
                    static_cast<long long>(p.low), static_cast<long long>(p.high))(rng)));
                break;
            case ParamKind::categorical:
                out.push_back(p.choices[std::uniform_int_distribution<std::size_t>(0, p.choices.size() - 1)(rng)]);
                break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trial history
// ---------------------------------------------------------------------------

std::size_t TrialHistory::ok_count() const {
    return static_cast<std::size_t>(
        std::count_if(trials.begin(), trials.end(), [](const Trial& t) { return t.status == TrialStatus::ok; }));
}

const Trial& TrialHistory::best_trial() const {
    if (!best) throw StateError("trial history has no successful trial");
    return trials[*best];
}

std::vector<double> TrialHistory::best_so_far() const {
    std::vector<double> out;
    double running = std::numeric_limits<double>::quiet_NaN();
    for (const auto& t : trials) {
        if (t.status == TrialStatus::ok && (std::isnan(running) || t.loss < running)) running = t.loss;
        out.push_back(running);
    }
    return out;
}

std::vector<std::size_t> TrialHistory::top(std::size_t n) const {
    std::vector<std::size_t> ok;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        if (trials[i].status == TrialStatus::ok) ok.push_back(i);
    }
    std::stable_sort(ok.begin(), ok.end(), [&](std::size_t a, std::size_t b) { return trials[a].loss < trials[b].loss; });
    if (ok.size() > n) ok.resize(n);
    return ok;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_trials(const std::vector<Trial>& history,
                                                                           double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ArgumentError("gamma must lie in (0, 1)");
    std::vector<std::size_t> ok;
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (history[i].status == TrialStatus::ok) ok.push_back(i);
    }
    if (ok.empty()) throw StateError("no successful trials to split");
    std::stable_sort(ok.begin(), ok.end(), [&](std::size_t a, std::size_t b) {
        if (history[a].loss != history[b].loss) return history[a].loss < history[b].loss;
        return history[a].iteration < history[b].iteration;
    });
    const auto n_good = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(gamma * static_cast<double>(ok.size()))));
    std::vector<std::size_t> good(ok.begin(), ok.begin() + static_cast<std::ptrdiff_t>(n_good));
    std::vector<std::size_t> bad(ok.begin() + static_cast<std::ptrdiff_t>(n_good), ok.end());
    return {std::move(good), std::move(bad)};
}

// ---------------------------------------------------------------------------
// Parzen densities
// ---------------------------------------------------------------------------

double ParzenDensity::internal(double value) const {
    return spec_.kind == ParamKind::log_uniform_real ? std::log(value) : value;
}

double ParzenDensity::pdf(double value) const {
    if (spec_.kind == ParamKind::categorical) {
        for (std::size_t i = 0; i < spec_.choices.size(); ++i) {
            if (spec_.choices[i] == value) return probs_[i];
        }
        return 0.0;
    }
    if (spec_.kind == ParamKind::log_uniform_real && !(value > 0.0)) return 0.0;
    const double x = internal(value);
    if (x < lo_ || x > hi_) return 0.0;
    if (mus_.empty()) return 1.0 / (hi_ - lo_);
    double total = 0.0;
    for (std::size_t k = 0; k < mus_.size(); ++k) {
        total += normal_pdf((x - mus_[k]) / sigmas_[k]) / (sigmas_[k] * masses_[k]);
    }
    return total / static_cast<double>(mus_.size());
}

double ParzenDensity::log_pdf(double value) const {
    return std::log(pdf(value));
}

double ParzenDensity::sample(std::mt19937_64& rng) const {
    if (spec_.kind == ParamKind::categorical) {
        std::discrete_distribution<std::size_t> pick(probs_.begin(), probs_.end());
        return spec_.choices[pick(rng)];
    }
    double x = 0.0;
    if (mus_.empty()) {
        x = std::uniform_real_distribution<double>(lo_, hi_)(rng);
    } else {
        const auto k = std::uniform_int_distribution<std::size_t>(0, mus_.size() - 1)(rng);
        std::normal_distribution<double> kernel(mus_[k], sigmas_[k]);
        bool accepted = false;
        for (std::size_t attempt = 0; attempt < kMaxRejections && !accepted; ++attempt) {
            x = kernel(rng);
            accepted = x >= lo_ && x <= hi_;
        }
        if (!accepted) x = std::uniform_real_distribution<double>(lo_, hi_)(rng);
    }
    switch (spec_.kind) {
        case ParamKind::log_uniform_real:
            return std::clamp(std::exp(x), spec_.low, spec_.high);
        case ParamKind::uniform_int:
            return std::clamp(std::round(x), spec_.low, spec_.high);
        default:
            return std::clamp(x, spec_.low, spec_.high);
    }
}

ParzenDensity build_parzen(std::span<const double> values, const ParamSpec& spec) {
    spec.validate();
    for (double v : values) {
        if (!spec.contains(v)) throw ArgumentError(spec.name + ": observation out of bounds");
    }
    ParzenDensity d;
    d.spec_ = spec;
    d.observations_ = values.size();

    if (spec.kind == ParamKind::categorical) {
        const auto k = static_cast<double>(spec.choices.size());
        const auto n = static_cast<double>(values.size());
        for (double c : spec.choices) {
            const auto count = static_cast<double>(std::count(values.begin(), values.end(), c));
            d.probs_.push_back((count + 1.0) / (n + k));
        }
        return d;
    }

    switch (spec.kind) {
        case ParamKind::log_uniform_real:
            d.lo_ = std::log(spec.low);
            d.hi_ = std::log(spec.high);
            break;
        case ParamKind::uniform_int:
            d.lo_ = spec.low - 0.5;
            d.hi_ = spec.high + 0.5;
            break;
        default:
            d.lo_ = spec.low;
            d.hi_ = spec.high;
            break;
    }
    if (values.empty()) return d;

    const double span = d.hi_ - d.lo_;
    std::vector<double> xs;
    for (double v : values) xs.push_back(d.internal(v));
    std::sort(xs.begin(), xs.end());
    const double floor_width = span / (1.0 + static_cast<double>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double nearest = 0.0;
        if (xs.size() > 1) {
            nearest = std::numeric_limits<double>::infinity();
            if (i > 0) nearest = std::min(nearest, xs[i] - xs[i - 1]);
            if (i + 1 < xs.size()) nearest = std::min(nearest, xs[i + 1] - xs[i]);
        }
        d.mus_.push_back(xs[i]);
        d.sigmas_.push_back(std::min(span, std::max(floor_width, nearest)));
    }
    d.mus_.push_back(0.5 * (d.lo_ + d.hi_));
    d.sigmas_.push_back(span);
    for (std::size_t k = 0; k < d.mus_.size(); ++k) {
        d.masses_.push_back(normal_cdf((d.hi_ - d.mus_[k]) / d.sigmas_[k]) -
                            normal_cdf((d.lo_ - d.mus_[k]) / d.sigmas_[k]));
    }
    return d;
}

double expected_improvement(double gamma, double l_density, double g_density) {
    return 1.0 / (gamma + g_density / l_density * (1.0 - gamma));
}

double log_density_ratio(std::span<const ParzenDensity> good, std::span<const ParzenDensity> bad, const Params& x) {
    double score = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) score += good[d].log_pdf(x[d]) - bad[d].log_pdf(x[d]);
    return score;
}

Params suggest(const TrialHistory& history, const SearchSpace& space, std::mt19937_64& rng, const TpeConfig& config) {
    if (history.ok_count() < config.n_startup || config.n_candidates == 0) return sample_prior(space, rng);

    const auto [good, bad] = split_trials(history.trials, config.gamma);
    std::vector<ParzenDensity> l;
    std::vector<ParzenDensity> g;
    for (std::size_t d = 0; d < space.size(); ++d) {
        std::vector<double> good_values;
        std::vector<double> bad_values;
        for (auto i : good) good_values.push_back(history.trials[i].params[d]);
        for (auto i : bad) bad_values.push_back(history.trials[i].params[d]);
        l.push_back(build_parzen(good_values, space[d]));
        g.push_back(build_parzen(bad_values, space[d]));
    }

    Params best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < config.n_candidates; ++c) {
        Params candidate;
        candidate.reserve(space.size());
        for (const auto& density : l) candidate.push_back(density.sample(rng));
        const double score = log_density_ratio(l, g, candidate);
        if (best.empty() || score > best_score) {
            best_score = score;
            best = std::move(candidate);
        }
    }
    if (!std::isfinite(best_score)) return sample_prior(space, rng);
    return best;
}

TrialHistory optimize(const Objective& objective, const SearchSpace& space, std::size_t n_iter, std::uint64_t seed,
                      const TpeConfig& config, const TrialCallback& on_trial) {
    if (n_iter < 1) throw ArgumentError("optimize needs n_iter >= 1");
    std::mt19937_64 rng(seed);
    TrialHistory history;
    for (std::size_t it = 1; it <= n_iter; ++it) {
        Trial trial;
        trial.iteration = it;
        trial.params = suggest(history, space, rng, config);
        try {
            auto outcome = objective(trial.params, it);
            trial.loss = outcome.loss;
            trial.cv = std::move(outcome.cv);
            if (!std::isfinite(trial.loss)) {
                trial.status = TrialStatus::failed;
                trial.error = "non-finite loss";
            }
        } catch (const std::exception& e) {
            trial.status = TrialStatus::failed;
            trial.loss = std::numeric_limits<double>::quiet_NaN();
            trial.error = e.what();
        }
        history.trials.push_back(std::move(trial));
        const auto& added = history.trials.back();
        if (added.status == TrialStatus::ok && (!history.best || added.loss < history.trials[*history.best].loss)) {
            history.best = history.trials.size() - 1;
        }
        if (on_trial) on_trial(added);
    }
    if (!history.best) {
        throw OptimizationError("all " + std::to_string(n_iter) + " trials failed; last error: " +
                                history.trials.back().error);
    }
    return history;
}

void write_trials_csv(const TrialHistory& history, const SearchSpace& space, std::ostream& out) {
    out << "iteration,status,loss";
    for (const auto& p : space.params()) out << ',' << p.name;
    out << '\n';
    for (const auto& t : history.trials) {
        out << t.iteration << ',' << (t.status == TrialStatus::ok ? "ok" : "failed") << ','
            << (t.status == TrialStatus::ok ? detail::format_double(t.loss) : std::string("nan"));
        for (double v : t.params) out << ',' << detail::format_double(v);
        out << '\n';
    }
}

}  // namespace autogbm
