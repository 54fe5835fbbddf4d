#pragma once

#include "autogbm/evaluation.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace autogbm {

enum class ParamKind { uniform_real, log_uniform_real, uniform_int, categorical };

std::string_view param_kind_name(ParamKind kind);

struct ParamSpec {
    std::string name;
    ParamKind kind = ParamKind::uniform_real;
    double low = 0.0;   // numeric kinds; bounds are given on the natural scale
    double high = 1.0;
    std::vector<double> choices;  // categorical only

    static ParamSpec uniform(std::string name, double low, double high);
    static ParamSpec log_uniform(std::string name, double low, double high);
    static ParamSpec integer(std::string name, long long low, long long high);
    static ParamSpec categorical(std::string name, std::vector<double> choices);

    void validate() const;
    bool contains(double value) const;
};

class SearchSpace {
public:
    SearchSpace() = default;
    explicit SearchSpace(std::vector<ParamSpec> params);

    const std::vector<ParamSpec>& params() const { return params_; }
    std::size_t size() const { return params_.size(); }
    const ParamSpec& operator[](std::size_t i) const { return params_[i]; }
    /// Index of the named parameter, or nullopt.
    std::optional<std::size_t> find(std::string_view name) const;
    std::vector<std::string> names() const;

    void replace(const ParamSpec& spec);
    void remove(std::string_view name);

private:
    std::vector<ParamSpec> params_;
};

/// Values aligned with SearchSpace::params().
using Params = std::vector<double>;

/// The ten boosting settings: n_estimators uniform on [30, 150], learning_rate
/// log-uniform on [0.05, 0.3], the three subsample ratios uniform on [0.6, 1],
/// max_depth a uniform choice over {3, 4, 5, 6}, min_child_weight uniform on [0.6, 1],
/// l1_alpha and split_gamma uniform on [0, 1], l2_lambda uniform on [0.4, 1].
SearchSpace gbdt_search_space();

Params sample_prior(const SearchSpace& space, std::mt19937_64& rng);

enum class TrialStatus { ok, failed };

struct Trial {
    std::size_t iteration = 0;  // 1-based
    Params params;
    double loss = 0.0;
    TrialStatus status = TrialStatus::ok;
    std::optional<CvReport> cv;
    std::string error;
};

struct TrialOutcome {
    double loss = 0.0;
    std::optional<CvReport> cv;

    TrialOutcome() = default;
    TrialOutcome(double l) : loss(l) {}  // NOLINT(google-explicit-constructor)
    TrialOutcome(double l, CvReport report) : loss(l), cv(std::move(report)) {}
};

struct TrialHistory {
    std::vector<Trial> trials;
    std::optional<std::size_t> best;  // index into trials

    std::size_t ok_count() const;
    const Trial& best_trial() const;
    /// Running minimum of ok losses; NaN before the first ok trial.
    std::vector<double> best_so_far() const;
    /// Indices of the n lowest-loss ok trials, best first.
    std::vector<std::size_t> top(std::size_t n) const;
};

/// Sorts ok trials by loss (then iteration) and returns (good, bad) index sets with
/// |good| = max(1, floor(gamma * n)).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_trials(const std::vector<Trial>& history,
                                                                           double gamma);

/// One-dimensional Parzen density. Numeric kinds are mixtures of truncated normals in
/// the modelling coordinate (log scale for log-uniform; integers widened by 0.5 on each
/// side); categorical kinds are smoothed frequency tables.
class ParzenDensity {
public:
    /// Density at a value given on the natural scale, in the modelling coordinate.
    double pdf(double value) const;
    double log_pdf(double value) const;
    /// Draw on the natural scale (integers rounded, categoricals a listed choice).
    double sample(std::mt19937_64& rng) const;

    const ParamSpec& spec() const { return spec_; }
    bool is_prior() const { return observations_ == 0; }
    const std::vector<double>& means() const { return mus_; }
    const std::vector<double>& widths() const { return sigmas_; }
    const std::vector<double>& choice_probabilities() const { return probs_; }
    /// Lower and upper bound of the modelling coordinate.
    std::pair<double, double> support() const { return {lo_, hi_}; }

private:
    friend ParzenDensity build_parzen(std::span<const double> values, const ParamSpec& spec);
    double internal(double value) const;

    ParamSpec spec_;
    double lo_ = 0.0;
    double hi_ = 1.0;
    std::vector<double> mus_;
    std::vector<double> sigmas_;
    std::vector<double> masses_;  // truncation normalizers
    std::vector<double> probs_;
    std::size_t observations_ = 0;
};

/// Equal-weight mixture of one kernel per observation and a prior kernel at the domain
/// midpoint (width = span). Observation widths are max(span / (1 + n), distance to the
/// nearest other observation). Categorical: (count + 1) / (n + choices). With no
/// observations the density is the uniform prior.
ParzenDensity build_parzen(std::span<const double> values, const ParamSpec& spec);

/// (gamma + g/l * (1 - gamma))^-1
double expected_improvement(double gamma, double l_density, double g_density);

/// Sum over dimensions of log l(x) - log g(x); monotone in the EI ratio.
double log_density_ratio(std::span<const ParzenDensity> good, std::span<const ParzenDensity> bad, const Params& x);

struct TpeConfig {
    double gamma = 0.25;
    std::size_t n_startup = 20;
    std::size_t n_candidates = 24;

    /// Pure prior sampling for a budget of n_iter.
    static TpeConfig random_search(std::size_t n_iter) { return {0.25, n_iter + 1, 24}; }
};

Params suggest(const TrialHistory& history, const SearchSpace& space, std::mt19937_64& rng,
               const TpeConfig& config = {});

using Objective = std::function<TrialOutcome(const Params&, std::size_t iteration)>;
using TrialCallback = std::function<void(const Trial&)>;

/// Sequential TPE loop. Objective exceptions mark the trial failed and keep it out of
/// the densities; OptimizationError if no trial succeeds.
TrialHistory optimize(const Objective& objective, const SearchSpace& space, std::size_t n_iter, std::uint64_t seed,
                      const TpeConfig& config = {}, const TrialCallback& on_trial = {});

/// iteration,status,loss,<parameter names...>
void write_trials_csv(const TrialHistory& history, const SearchSpace& space, std::ostream& out);

}  // namespace autogbm
