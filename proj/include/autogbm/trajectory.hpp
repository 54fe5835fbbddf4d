#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace autogbm {

enum class Task { none, short_msg, long_msg, call };

std::string_view task_name(Task task);
std::optional<Task> parse_task(std::string_view name);

/// The seven lane-keeping signals recorded per sample, in canonical order.
enum class Signal { lat_vel, lat_acc, yaw_vel, yaw_acc, ld_center, ld_left, ld_right };
inline constexpr std::size_t kSignalCount = 7;
std::string_view signal_name(Signal signal);

struct TrajectorySample {
    double time = 0.0;
    Task task = Task::none;
    std::array<double, kSignalCount> signals{};
    int distracted = 0;

    double& operator[](Signal s) { return signals[static_cast<std::size_t>(s)]; }
    double operator[](Signal s) const { return signals[static_cast<std::size_t>(s)]; }
};

/// Samples of one drive, in time order.
struct Drive {
    std::string driver_id;
    std::string drive_id;
    std::vector<TrajectorySample> samples;
};

struct TrajectoryDataset {
    double sample_rate = 20.0;
    std::vector<Drive> drives;

    std::size_t sample_count() const;
};

inline constexpr std::string_view kTrajectoryHeader =
    "time_s,driver_id,drive_id,task,lat_vel,lat_acc,yaw_vel,yaw_acc,ld_center,ld_left,ld_right,distracted";

/// Reads the trajectory CSV. Rows are grouped into drives by (driver_id, drive_id)
/// in order of first appearance; row order is kept within each drive.
TrajectoryDataset parse_trajectory_csv(const std::filesystem::path& path, double sample_rate = 20.0);
TrajectoryDataset parse_trajectory_csv(std::istream& in, double sample_rate = 20.0);

/// Writes every drive in order using shortest round-trip number formatting.
void write_trajectory_csv(const TrajectoryDataset& dataset, std::ostream& out);
void write_trajectory_csv(const TrajectoryDataset& dataset, const std::filesystem::path& path);

/// Centered moving median; indices past either end are clamped to the end samples.
std::vector<double> median_filter(std::span<const double> series, int window);

/// Median-filters all seven signals of every drive in place.
void apply_median_filter(TrajectoryDataset& dataset, int window);

struct Window {
    std::string driver_id;
    std::string drive_id;
    std::size_t index = 0;
    std::vector<TrajectorySample> samples;
    int label = 0;
    Task task = Task::none;
};

/// Number of samples per window, or ArgumentError if window_seconds * rate is not a
/// positive integer.
std::size_t samples_per_window(double window_seconds, double sample_rate);

/// Non-overlapping windows aligned to each drive's start. The trailing partial window
/// is dropped. Labels are the majority of the distracted flags, ties going to 1.
std::vector<Window> window_segments(const TrajectoryDataset& dataset, double window_seconds);

}  // namespace autogbm
