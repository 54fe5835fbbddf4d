#pragma once

#include "autogbm/features.hpp"
#include "autogbm/trajectory.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace autogbm {

/// Lateral-control parameters of one synthetic driver. Values are synthetic; they only
/// have to make distracted and baseline driving separable to a controllable degree.
struct DriverProfile {
    std::string driver_id = "D01";
    double noise_scale = 0.10;          // m/s^1.5, diffusion of lateral velocity
    double reversion_rate = 0.5;        // 1/s, critically damped lane-centering
    double variance_multiplier = 1.6;   // noise multiplier while distracted, >= 1
    double drift_event_rate = 0.10;     // events/s while distracted
    double drift_acceleration = 0.40;   // m/s^2 during a drift event
    double speed = 60.0 / 3.6;          // m/s
    double lane_half_width = 1.875;     // m
    double sensor_noise = 0.02;         // m, on the lane-edge distances

    void validate() const;
};

struct Episode {
    double start = 0.0;     // s
    double duration = 0.0;  // s
    Task task = Task::short_msg;

    double end() const { return start + duration; }
};

struct EpisodePlan {
    std::vector<Episode> episodes;  // sorted by start

    /// PlanError on overlapping episodes, episodes outside [0, drive_duration],
    /// non-positive durations or a `none` task.
    void validate(double drive_duration) const;
    double distracted_time() const;
    /// Episode covering time t, if any.
    const Episode* at(double t) const;
};

/// short_msg, call and long_msg in that order, covering 10%, 15% and 20% of the drive
/// with equal gaps around them. Boundaries are rounded to whole seconds.
EpisodePlan default_distracted_plan(double drive_duration);

/// Relative strength of each task's effect; scales both the excess noise and the
/// drift-event rate.
double task_severity(Task task);

/// Second-order lateral dynamics, stepped with semi-implicit Euler:
///   v += (-k y - c v + drift) dt + sigma * m * sqrt(dt) * eps,   y += v dt
/// with k = rate^2 and c = 2 rate. Drift events push the car sideways for 1 to 3 s with
/// a weakened restoring force, followed by a 1 s stiffened correction.
class LateralProcess {
public:
    LateralProcess(const DriverProfile& profile, double sample_rate);

    /// `multiplier` scales the diffusion; `event_rate` is the drift-event rate in 1/s.
    void step(double multiplier, double event_rate, std::mt19937_64& rng);

    double position() const { return y_; }
    double velocity() const { return v_; }
    bool drifting() const { return drift_left_ > 0.0; }

private:
    DriverProfile profile_;
    double dt_;
    double y_ = 0.0;
    double v_ = 0.0;
    double drift_left_ = 0.0;
    double drift_sign_ = 1.0;
    double correct_left_ = 0.0;
};

/// One drive of duration * rate samples, labelled from the plan. Kinematic channels are
/// backward differences of the simulated path: lat_vel is the velocity state (so
/// y[i] = y[i-1] + lat_vel[i] / rate), yaw = atan(lat_vel / speed).
TrajectoryDataset simulate_drive(const DriverProfile& profile, const EpisodePlan& plan, double duration,
                                 double sample_rate, std::uint64_t seed, std::string drive_id = "drive");

enum class CohortSpread { standard, risky, conservative };

std::string_view spread_name(CohortSpread spread);
/// "default", "risky" or "conservative"; ArgumentError otherwise.
CohortSpread parse_spread(std::string_view name);

/// Centre of the profile distribution for a spread.
DriverProfile spread_profile(CohortSpread spread);

struct CohortOptions {
    int n_drivers = 8;
    CohortSpread spread = CohortSpread::standard;
    double duration = 660.0;
    double sample_rate = 20.0;
    std::uint64_t seed = 0;
};

struct CohortDriver {
    DriverProfile profile;
    EpisodePlan distracted_plan;
    std::uint64_t baseline_seed = 0;
    std::uint64_t distracted_seed = 0;
};

struct Cohort {
    CohortOptions options;
    std::vector<CohortDriver> drivers;
    TrajectoryDataset dataset;  // baseline then distracted drive per driver
};

/// Per driver, one baseline drive (empty plan) and one distracted drive. Profiles are
/// log-normally jittered around the spread centre.
Cohort generate_cohort(const CohortOptions& options);

/// Profiles, plans and seeds as a JSON document.
std::string cohort_manifest_json(const Cohort& cohort);

struct PlantedOptions {
    int n_drivers = 8;
    int baseline_windows = 30;    // per driver
    int distracted_windows = 12;  // per driver, roughly the simulated cohort's ratio
    double effect = 1.0;         // label shift of each planted column, in noise sds
    std::uint64_t seed = 0;
};

/// Feature table in which only LDL_SD and LDR_SD carry the label: each is a driver
/// offset plus effect * label plus independent unit noise. The other 17 columns are
/// driver offsets plus unit noise.
std::vector<FeatureVector> planted_feature_cohort(const PlantedOptions& options);

}  // namespace autogbm
