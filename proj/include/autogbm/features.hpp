#pragma once

#include "autogbm/trajectory.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace autogbm {

enum class Metric { mean, sd, range, cv, qcv };

struct Aggregate {
    double value = 0.0;
    /// Set when a cv/qcv denominator was below 1e-12 and the value was forced to 0.
    bool degenerate = false;
};

/// mean, sample sd (N-1), range, cv = sd/mean, qcv = (q75-q25)/(q75+q25) with
/// linearly interpolated quartiles.
Aggregate aggregate(std::span<const double> series, Metric metric);

/// Quantile by linear interpolation between order statistics (R type 7).
double quantile_linear(std::span<const double> sorted, double q);

inline constexpr std::size_t kFeatureCount = 19;

struct FeatureDefinition {
    std::string_view name;
    Signal signal;
    Metric metric;
};

/// The 19 window features in canonical column order.
inline constexpr std::array<FeatureDefinition, kFeatureCount> kFeatures = {{
    {"LV_M", Signal::lat_vel, Metric::mean},
    {"LA_M", Signal::lat_acc, Metric::mean},
    {"YV_M", Signal::yaw_vel, Metric::mean},
    {"YA_M", Signal::yaw_acc, Metric::mean},
    {"LD_M", Signal::ld_center, Metric::mean},
    {"LDL_M", Signal::ld_left, Metric::mean},
    {"LDR_M", Signal::ld_right, Metric::mean},
    {"LV_SD", Signal::lat_vel, Metric::sd},
    {"LA_SD", Signal::lat_acc, Metric::sd},
    {"YV_SD", Signal::yaw_vel, Metric::sd},
    {"YA_SD", Signal::yaw_acc, Metric::sd},
    {"LD_SD", Signal::ld_center, Metric::sd},
    {"LDL_SD", Signal::ld_left, Metric::sd},
    {"LDR_SD", Signal::ld_right, Metric::sd},
    {"LD_R", Signal::ld_center, Metric::range},
    {"LDL_Cv", Signal::ld_left, Metric::cv},
    {"LDR_Cv", Signal::ld_right, Metric::cv},
    {"LDL_Qcv", Signal::ld_left, Metric::qcv},
    {"LDR_Qcv", Signal::ld_right, Metric::qcv},
}};

std::vector<std::string> feature_names();
/// Index into kFeatures, or -1.
int feature_index(std::string_view name);

struct FeatureVector {
    std::array<double, kFeatureCount> values{};
    int label = 0;
    Task task = Task::none;
    std::string driver_id;
    std::string drive_id;  // in-memory only; not part of features.csv
    std::size_t window_index = 0;
    /// Bit i set when feature i hit a degenerate denominator.
    std::uint32_t degenerate_mask = 0;

    double operator[](std::size_t i) const { return values[i]; }
};

FeatureVector extract_features(const Window& window);
std::vector<FeatureVector> extract_all(std::span<const Window> windows);

inline constexpr std::string_view kFeatureMetaColumns = "driver_id,task,window_idx,label";

void write_features_csv(std::span<const FeatureVector> rows, std::ostream& out);
void write_features_csv(std::span<const FeatureVector> rows, const std::filesystem::path& path);
std::vector<FeatureVector> read_features_csv(std::istream& in);
std::vector<FeatureVector> read_features_csv(const std::filesystem::path& path);

}  // namespace autogbm
