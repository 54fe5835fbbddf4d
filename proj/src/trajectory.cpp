#include "autogbm/trajectory.hpp"

#include "autogbm/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace autogbm {

namespace {

constexpr std::array<std::string_view, 4> kTaskNames = {"none", "short_msg", "long_msg", "call"};
constexpr std::array<std::string_view, kSignalCount> kSignalNames = {
    "lat_vel", "lat_acc", "yaw_vel", "yaw_acc", "ld_center", "ld_left", "ld_right"};

enum Column : std::size_t {
    kTime,
    kDriver,
    kDrive,
    kTask,
    kFirstSignal,
    kDistracted = kFirstSignal + kSignalCount,
    kColumnCount
};

std::vector<std::string> header_columns() {
    return detail::split(kTrajectoryHeader, ',');
}

}  // namespace

std::string_view task_name(Task task) {
    return kTaskNames[static_cast<std::size_t>(task)];
}

std::optional<Task> parse_task(std::string_view name) {
    for (std::size_t i = 0; i < kTaskNames.size(); ++i) {
        if (kTaskNames[i] == name) return static_cast<Task>(i);
    }
    return std::nullopt;
}

std::string_view signal_name(Signal signal) {
    return kSignalNames[static_cast<std::size_t>(signal)];
}

std::size_t TrajectoryDataset::sample_count() const {
    std::size_t n = 0;
    for (const auto& d : drives) n += d.samples.size();
    return n;
}

TrajectoryDataset parse_trajectory_csv(const std::filesystem::path& path, double sample_rate) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trajectory file: " + path.string());
    return parse_trajectory_csv(in, sample_rate);
}

TrajectoryDataset parse_trajectory_csv(std::istream& in, double sample_rate) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("trajectory file is empty (missing header)");
    detail::strip_cr(line);

    // Map file columns onto schema columns by name.
    const auto expected = header_columns();
    const auto found = detail::split(line, ',');
    std::array<std::size_t, kColumnCount> position{};
    for (std::size_t c = 0; c < expected.size(); ++c) {
        auto it = std::find(found.begin(), found.end(), expected[c]);
        if (it == found.end()) throw SchemaError("missing column: " + expected[c]);
        position[c] = static_cast<std::size_t>(it - found.begin());
    }
    for (const auto& name : found) {
        if (std::count(expected.begin(), expected.end(), name) == 0) {
            throw SchemaError("unexpected column: " + name);
        }
        if (std::count(found.begin(), found.end(), name) > 1) {
            throw SchemaError("duplicate column: " + name);
        }
    }

    TrajectoryDataset dataset;
    dataset.sample_rate = sample_rate;
    std::map<std::pair<std::string, std::string>, std::size_t> drive_index;

    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        detail::strip_cr(line);
        if (line.empty()) continue;
        const auto fields = detail::split(line, ',');
        if (fields.size() != found.size()) {
            throw ParseError("row " + std::to_string(row) + ": expected " + std::to_string(found.size()) +
                             " fields, got " + std::to_string(fields.size()));
        }
        auto field = [&](std::size_t column) -> const std::string& { return fields[position[column]]; };
        auto number = [&](std::size_t column) {
            auto v = detail::parse_double(field(column));
            if (!v) {
                throw ParseError("row " + std::to_string(row) + ": non-numeric " + expected[column] + " '" +
                                 field(column) + "'");
            }
            return *v;
        };

        TrajectorySample s;
        s.time = number(kTime);
        auto task = parse_task(field(kTask));
        if (!task) throw ParseError("row " + std::to_string(row) + ": unknown task '" + field(kTask) + "'");
        s.task = *task;
        for (std::size_t k = 0; k < kSignalCount; ++k) s.signals[k] = number(kFirstSignal + k);
        const auto& flag = field(kDistracted);
        if (flag != "0" && flag != "1") {
            throw ParseError("row " + std::to_string(row) + ": distracted must be 0 or 1, got '" + flag + "'");
        }
        s.distracted = flag == "1" ? 1 : 0;

        if (s[Signal::ld_left] < 0.0) throw ValidationError("row " + std::to_string(row) + ": ld_left negative");
        if (s[Signal::ld_right] < 0.0) throw ValidationError("row " + std::to_string(row) + ": ld_right negative");
        if ((s.task != Task::none) != (s.distracted == 1)) {
            throw ValidationError("row " + std::to_string(row) + ": distracted flag disagrees with task");
        }

        auto key = std::make_pair(field(kDriver), field(kDrive));
        auto [it, inserted] = drive_index.emplace(key, dataset.drives.size());
        if (inserted) dataset.drives.push_back(Drive{key.first, key.second, {}});
        auto& drive = dataset.drives[it->second];
        if (!drive.samples.empty() && !(s.time > drive.samples.back().time)) {
            throw OrderingError("row " + std::to_string(row) + ": time not increasing within drive " + key.first +
                                "/" + key.second);
        }
        drive.samples.push_back(s);
    }
    return dataset;
}

void write_trajectory_csv(const TrajectoryDataset& dataset, std::ostream& out) {
    out << kTrajectoryHeader << '\n';
    for (const auto& drive : dataset.drives) {
        for (const auto& s : drive.samples) {
            out << detail::format_double(s.time) << ',' << drive.driver_id << ',' << drive.drive_id << ','
                << task_name(s.task);
            for (double v : s.signals) out << ',' << detail::format_double(v);
            out << ',' << s.distracted << '\n';
        }
    }
}

void write_trajectory_csv(const TrajectoryDataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trajectory file: " + path.string());
    write_trajectory_csv(dataset, out);
}

std::vector<double> median_filter(std::span<const double> series, int window) {
    if (window <= 0 || window % 2 == 0) {
        throw ArgumentError("median_filter window must be odd and positive, got " + std::to_string(window));
    }
    if (static_cast<std::size_t>(window) > series.size()) {
        throw ArgumentError("median_filter window exceeds series length");
    }
    const std::ptrdiff_t half = window / 2;
    const auto n = static_cast<std::ptrdiff_t>(series.size());
    std::vector<double> out(series.size());
    std::vector<double> buf(static_cast<std::size_t>(window));
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        // Indices past either end are clamped to the first/last sample.
        for (std::ptrdiff_t j = -half; j <= half; ++j) {
            const auto idx = std::clamp<std::ptrdiff_t>(i + j, 0, n - 1);
            buf[static_cast<std::size_t>(j + half)] = series[static_cast<std::size_t>(idx)];
        }
        std::nth_element(buf.begin(), buf.begin() + half, buf.end());
        out[static_cast<std::size_t>(i)] = buf[static_cast<std::size_t>(half)];
    }
    return out;
}

void apply_median_filter(TrajectoryDataset& dataset, int window) {
    for (auto& drive : dataset.drives) {
        if (drive.samples.size() < static_cast<std::size_t>(window)) continue;
        std::vector<double> column(drive.samples.size());
        for (std::size_t k = 0; k < kSignalCount; ++k) {
            for (std::size_t i = 0; i < column.size(); ++i) column[i] = drive.samples[i].signals[k];
            auto filtered = median_filter(column, window);
            for (std::size_t i = 0; i < column.size(); ++i) drive.samples[i].signals[k] = filtered[i];
        }
    }
}

std::size_t samples_per_window(double window_seconds, double sample_rate) {
    const double exact = window_seconds * sample_rate;
    const double rounded = std::round(exact);
    if (!(rounded >= 1.0) || std::abs(exact - rounded) > 1e-9) {
        std::ostringstream msg;
        msg << "window of " << window_seconds << " s at " << sample_rate
            << " Hz is not a positive whole number of samples";
        throw ArgumentError(msg.str());
    }
    return static_cast<std::size_t>(rounded);
}

std::vector<Window> window_segments(const TrajectoryDataset& dataset, double window_seconds) {
    const std::size_t len = samples_per_window(window_seconds, dataset.sample_rate);
    std::vector<Window> windows;
    for (const auto& drive : dataset.drives) {
        const std::size_t count = drive.samples.size() / len;
        for (std::size_t w = 0; w < count; ++w) {
            Window win;
            win.driver_id = drive.driver_id;
            win.drive_id = drive.drive_id;
            win.index = w;
            auto first = drive.samples.begin() + static_cast<std::ptrdiff_t>(w * len);
            win.samples.assign(first, first + static_cast<std::ptrdiff_t>(len));

            std::array<std::size_t, kTaskNames.size()> task_counts{};
            std::size_t distracted = 0;
            for (const auto& s : win.samples) {
                distracted += static_cast<std::size_t>(s.distracted);
                ++task_counts[static_cast<std::size_t>(s.task)];
            }
            win.label = 2 * distracted >= len ? 1 : 0;
            if (win.label == 1) {
                // Most frequent secondary task; lowest enum value on ties.
                std::size_t best = 1;
                for (std::size_t t = 2; t < task_counts.size(); ++t) {
                    if (task_counts[t] > task_counts[best]) best = t;
                }
                win.task = static_cast<Task>(best);
            }
            windows.push_back(std::move(win));
        }
    }
    return windows;
}

}  // namespace autogbm
