#include "autogbm/simulator.hpp"

#include "autogbm/error.hpp"
#include "autogbm/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace autogbm {

namespace {

std::string driver_label(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "D%02d", index + 1);
    return buf;
}

}  // namespace

void DriverProfile::validate() const {
    if (!(noise_scale > 0.0)) throw ArgumentError("noise_scale must be positive");
    if (!(reversion_rate > 0.0)) throw ArgumentError("reversion_rate must be positive");
    if (!(variance_multiplier >= 1.0)) throw ArgumentError("variance_multiplier must be >= 1");
    if (!(drift_event_rate >= 0.0)) throw ArgumentError("drift_event_rate must be non-negative");
    if (!(drift_acceleration >= 0.0)) throw ArgumentError("drift_acceleration must be non-negative");
    if (!(speed > 0.0)) throw ArgumentError("speed must be positive");
    if (!(lane_half_width > 0.0)) throw ArgumentError("lane_half_width must be positive");
    if (!(sensor_noise >= 0.0)) throw ArgumentError("sensor_noise must be non-negative");
}

void EpisodePlan::validate(double drive_duration) const {
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        const auto& e = episodes[i];
        if (e.task == Task::none) throw PlanError("episode " + std::to_string(i) + " has no task");
        if (!(e.duration > 0.0)) throw PlanError("episode " + std::to_string(i) + " has non-positive duration");
        if (e.start < 0.0 || e.end() > drive_duration) {
            throw PlanError("episode " + std::to_string(i) + " lies outside the drive");
        }
        if (i > 0 && e.start < episodes[i - 1].end()) {
            throw PlanError("episodes " + std::to_string(i - 1) + " and " + std::to_string(i) + " overlap");
        }
    }
}

double EpisodePlan::distracted_time() const {
    double total = 0.0;
    for (const auto& e : episodes) total += e.duration;
    return total;
}

const Episode* EpisodePlan::at(double t) const {
    for (const auto& e : episodes) {
        if (t >= e.start && t < e.end()) return &e;
    }
    return nullptr;
}

EpisodePlan default_distracted_plan(double drive_duration) {
    const double shares[] = {0.10, 0.15, 0.20};
    const Task tasks[] = {Task::short_msg, Task::call, Task::long_msg};
    const double gap = drive_duration * (1.0 - 0.45) / 4.0;
    EpisodePlan plan;
    // Boundaries snap to whole seconds so they line up with second-long windows.
    double t = gap;
    for (int i = 0; i < 3; ++i) {
        const double end = t + drive_duration * shares[i];
        const double start = std::round(t);
        plan.episodes.push_back({start, std::max(1.0, std::round(end) - start), tasks[i]});
        t = end + gap;
    }
    return plan;
}

double task_severity(Task task) {
    switch (task) {
        case Task::none: return 0.0;
        case Task::short_msg: return 0.8;
        case Task::call: return 0.9;
        case Task::long_msg: return 1.2;
    }
    return 0.0;
}

LateralProcess::LateralProcess(const DriverProfile& profile, double sample_rate)
    : profile_(profile), dt_(1.0 / sample_rate) {
    profile.validate();
    if (!(sample_rate > 0.0)) throw ArgumentError("sample rate must be positive");
}

void LateralProcess::step(double multiplier, double event_rate, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;

    const double w = profile_.reversion_rate;
    double k = w * w;
    const double c = 2.0 * w;
    double drift = 0.0;

    if (drift_left_ <= 0.0 && correct_left_ <= 0.0 && event_rate > 0.0 && unit(rng) < event_rate * dt_) {
        drift_left_ = 1.0 + 2.0 * unit(rng);
        drift_sign_ = unit(rng) < 0.5 ? -1.0 : 1.0;
    }
    if (drift_left_ > 0.0) {
        drift = drift_sign_ * profile_.drift_acceleration;
        k *= 0.2;
        drift_left_ -= dt_;
        if (drift_left_ <= 0.0) correct_left_ = 1.0;
    } else if (correct_left_ > 0.0) {
        k *= 4.0;
        correct_left_ -= dt_;
    }

    v_ += (-k * y_ - c * v_ + drift) * dt_ + profile_.noise_scale * multiplier * std::sqrt(dt_) * normal(rng);
    y_ += v_ * dt_;
}

TrajectoryDataset simulate_drive(const DriverProfile& profile, const EpisodePlan& plan, double duration,
                                 double sample_rate, std::uint64_t seed, std::string drive_id) {
    profile.validate();
    if (!(sample_rate > 0.0)) throw ArgumentError("sample rate must be positive");
    if (!(duration > 0.0)) throw ArgumentError("duration must be positive");
    plan.validate(duration);
    const double exact = duration * sample_rate;
    const auto n = static_cast<std::size_t>(std::llround(exact));
    if (std::abs(exact - static_cast<double>(n)) > 1e-9) {
        throw ArgumentError("duration * sample_rate must be an integer sample count");
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    LateralProcess process(profile, sample_rate);
    const double dt = 1.0 / sample_rate;

    // Burn in towards the stationary regime so the drive does not start on the centreline.
    const auto burn_in = static_cast<std::size_t>(std::ceil(10.0 * sample_rate));
    double v_prev = 0.0, yaw_prev = 0.0, yaw_vel_prev = 0.0;
    for (std::size_t i = 0; i < burn_in; ++i) {
        process.step(1.0, 0.0, rng);
        const double yaw = std::atan(process.velocity() / profile.speed);
        yaw_vel_prev = (yaw - yaw_prev) / dt;
        yaw_prev = yaw;
        v_prev = process.velocity();
    }

    Drive drive;
    drive.driver_id = profile.driver_id;
    drive.drive_id = std::move(drive_id);
    drive.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        const Episode* episode = plan.at(t);
        const double severity = episode ? task_severity(episode->task) : 0.0;
        const double multiplier = 1.0 + (profile.variance_multiplier - 1.0) * severity;
        process.step(multiplier, profile.drift_event_rate * severity, rng);

        TrajectorySample s;
        s.time = t;
        s.task = episode ? episode->task : Task::none;
        s.distracted = episode ? 1 : 0;
        const double y = process.position();
        const double v = process.velocity();
        const double yaw = std::atan(v / profile.speed);
        const double yaw_vel = (yaw - yaw_prev) / dt;
        s[Signal::lat_vel] = v;
        s[Signal::lat_acc] = (v - v_prev) / dt;
        s[Signal::yaw_vel] = yaw_vel;
        s[Signal::yaw_acc] = (yaw_vel - yaw_vel_prev) / dt;
        s[Signal::ld_center] = y;
        s[Signal::ld_left] = std::max(0.0, profile.lane_half_width - y + profile.sensor_noise * normal(rng));
        s[Signal::ld_right] = std::max(0.0, profile.lane_half_width + y + profile.sensor_noise * normal(rng));
        drive.samples.push_back(s);

        v_prev = v;
        yaw_prev = yaw;
        yaw_vel_prev = yaw_vel;
    }

    TrajectoryDataset out;
    out.sample_rate = sample_rate;
    out.drives.push_back(std::move(drive));
    return out;
}

std::string_view spread_name(CohortSpread spread) {
    switch (spread) {
        case CohortSpread::standard: return "default";
        case CohortSpread::risky: return "risky";
        case CohortSpread::conservative: return "conservative";
    }
    return "default";
}

CohortSpread parse_spread(std::string_view name) {
    if (name == "default") return CohortSpread::standard;
    if (name == "risky") return CohortSpread::risky;
    if (name == "conservative") return CohortSpread::conservative;
    throw ArgumentError("unknown spread '" + std::string(name) + "'");
}

DriverProfile spread_profile(CohortSpread spread) {
    DriverProfile p;
    switch (spread) {
        case CohortSpread::standard: break;
        case CohortSpread::risky:
            p.noise_scale = 0.12;
            p.variance_multiplier = 2.2;
            p.drift_event_rate = 0.15;
            break;
        case CohortSpread::conservative:
            p.noise_scale = 0.08;
            p.variance_multiplier = 1.25;
            p.drift_event_rate = 0.03;
            break;
    }
    return p;
}

Cohort generate_cohort(const CohortOptions& options) {
    if (options.n_drivers < 1) throw ArgumentError("n_drivers must be at least 1");
    Cohort cohort;
    cohort.options = options;
    cohort.dataset.sample_rate = options.sample_rate;
    const DriverProfile centre = spread_profile(options.spread);
    for (int d = 0; d < options.n_drivers; ++d) {
        std::mt19937_64 rng(derive_seed(options.seed, static_cast<std::uint64_t>(d), 0));
        std::normal_distribution<double> normal;
        CohortDriver driver;
        driver.profile = centre;
        driver.profile.driver_id = driver_label(d);
        driver.profile.noise_scale *= std::exp(0.15 * normal(rng));
        driver.profile.reversion_rate *= std::exp(0.15 * normal(rng));
        driver.profile.variance_multiplier = 1.0 + (centre.variance_multiplier - 1.0) * std::exp(0.2 * normal(rng));
        driver.profile.drift_event_rate *= std::exp(0.2 * normal(rng));
        driver.distracted_plan = default_distracted_plan(options.duration);
        driver.baseline_seed = derive_seed(options.seed, static_cast<std::uint64_t>(d), 1);
        driver.distracted_seed = derive_seed(options.seed, static_cast<std::uint64_t>(d), 2);

        auto base = simulate_drive(driver.profile, {}, options.duration, options.sample_rate, driver.baseline_seed,
                                   "baseline");
        auto dist = simulate_drive(driver.profile, driver.distracted_plan, options.duration, options.sample_rate,
                                   driver.distracted_seed, "distracted");
        cohort.dataset.drives.push_back(std::move(base.drives.front()));
        cohort.dataset.drives.push_back(std::move(dist.drives.front()));
        cohort.drivers.push_back(std::move(driver));
    }
    return cohort;
}

std::string cohort_manifest_json(const Cohort& cohort) {
    nlohmann::ordered_json doc;
    doc["format"] = "autogbm-cohort";
    doc["synthetic"] = true;
    doc["seed"] = cohort.options.seed;
    doc["spread"] = std::string(spread_name(cohort.options.spread));
    doc["duration_s"] = cohort.options.duration;
    doc["sample_rate_hz"] = cohort.options.sample_rate;
    auto& drivers = doc["drivers"] = nlohmann::ordered_json::array();
    for (const auto& d : cohort.drivers) {
        nlohmann::ordered_json entry;
        entry["driver_id"] = d.profile.driver_id;
        entry["profile"] = {
            {"noise_scale", d.profile.noise_scale},
            {"reversion_rate", d.profile.reversion_rate},
            {"variance_multiplier", d.profile.variance_multiplier},
            {"drift_event_rate", d.profile.drift_event_rate},
            {"drift_acceleration", d.profile.drift_acceleration},
            {"speed", d.profile.speed},
            {"lane_half_width", d.profile.lane_half_width},
            {"sensor_noise", d.profile.sensor_noise},
        };
        auto episodes = nlohmann::ordered_json::array();
        for (const auto& e : d.distracted_plan.episodes) {
            episodes.push_back({{"start_s", e.start}, {"duration_s", e.duration}, {"task", std::string(task_name(e.task))}});
        }
        entry["drives"] = nlohmann::ordered_json::array({
            {{"drive_id", "baseline"}, {"seed", d.baseline_seed}, {"episodes", nlohmann::ordered_json::array()}},
            {{"drive_id", "distracted"}, {"seed", d.distracted_seed}, {"episodes", episodes}},
        });
        drivers.push_back(std::move(entry));
    }
    return doc.dump(2) + "\n";
}

std::vector<FeatureVector> planted_feature_cohort(const PlantedOptions& options) {
    if (options.n_drivers < 1) throw ArgumentError("n_drivers must be at least 1");
    if (options.baseline_windows < 1 || options.distracted_windows < 1) {
        throw ArgumentError("each class needs at least one window per driver");
    }
    const int planted[] = {feature_index("LDL_SD"), feature_index("LDR_SD")};
    std::vector<FeatureVector> rows;
    for (int d = 0; d < options.n_drivers; ++d) {
        std::mt19937_64 rng(derive_seed(options.seed, static_cast<std::uint64_t>(d), 7));
        std::normal_distribution<double> normal;
        std::array<double, kFeatureCount> offset{};
        for (auto& o : offset) o = normal(rng);
        for (int label = 0; label < 2; ++label) {
            const int count = label ? options.distracted_windows : options.baseline_windows;
            for (int w = 0; w < count; ++w) {
                FeatureVector fv;
                fv.label = label;
                fv.task = label ? Task::long_msg : Task::none;
                fv.driver_id = driver_label(d);
                fv.drive_id = label ? "distracted" : "baseline";
                fv.window_index = static_cast<std::size_t>(w);
                for (std::size_t f = 0; f < kFeatureCount; ++f) {
                    const bool signal = static_cast<int>(f) == planted[0] || static_cast<int>(f) == planted[1];
                    const double base = signal ? 0.5 * offset[f] + options.effect * label : offset[f];
                    fv.values[f] = base + normal(rng);
                }
                rows.push_back(std::move(fv));
            }
        }
    }
    return rows;
}

}  // namespace autogbm
