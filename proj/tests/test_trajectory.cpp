#include "autogbm/error.hpp"
#include "autogbm/trajectory.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace autogbm;

namespace {

std::string row(double t, const std::string& task, double ld_left = 1.8, int distracted = -1,
                const std::string& drive = "d1") {
    if (distracted < 0) distracted = task == "none" ? 0 : 1;
    std::ostringstream out;
    out << t << ",P1," << drive << ',' << task << ",0.1,0.2,0.01,0.02,0.05," << ld_left << ",1.9," << distracted
        << '\n';
    return out.str();
}

std::string with_header(const std::string& body) { return std::string(kTrajectoryHeader) + "\n" + body; }

TrajectoryDataset parse(const std::string& text) {
    std::istringstream in(text);
    return parse_trajectory_csv(in);
}

template <class E>
std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const E& e) {
        return e.what();
    }
    return "no error";
}

TrajectoryDataset synthetic_drive(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    TrajectoryDataset ds;
    Drive d{"P1", "d1", {}};
    for (std::size_t i = 0; i < n; ++i) {
        TrajectorySample s;
        s.time = static_cast<double>(i) / 20.0;
        for (auto& v : s.signals) v = normal(rng);
        s[Signal::ld_left] = std::abs(s[Signal::ld_left]);
        s[Signal::ld_right] = std::abs(s[Signal::ld_right]);
        s.distracted = (i / 7) % 2 == 1 ? 1 : 0;
        s.task = s.distracted ? Task::call : Task::none;
        d.samples.push_back(s);
    }
    ds.drives.push_back(d);
    return ds;
}

}  // namespace

TEST(parse_trajectory, three_rows_make_one_drive) {
    const auto ds = parse(with_header(row(0.0, "none") + row(0.05, "none") + row(0.1, "call")));
    ASSERT_EQ(ds.drives.size(), 1u);
    EXPECT_EQ(ds.sample_count(), 3u);
    EXPECT_EQ(ds.drives[0].driver_id, "P1");
    EXPECT_EQ(ds.drives[0].samples[2].task, Task::call);
    EXPECT_EQ(ds.drives[0].samples[2].distracted, 1);
    EXPECT_DOUBLE_EQ(ds.drives[0].samples[1][Signal::ld_left], 1.8);
}

TEST(parse_trajectory, negative_ld_left_is_reported_at_row_two) {
    const auto msg = error_of<ValidationError>(with_header(row(0.0, "none", -0.1)));
    EXPECT_NE(msg.find("ld_left negative"), std::string::npos) << msg;
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
}

TEST(parse_trajectory, missing_column_is_named) {
    std::string header(kTrajectoryHeader);
    header = header.substr(0, header.rfind(','));  // drop "distracted"
    const auto msg = error_of<SchemaError>(header + "\n0,P1,d1,none,0,0,0,0,0,1,1\n");
    EXPECT_NE(msg.find("distracted"), std::string::npos) << msg;
}

TEST(parse_trajectory, extra_column_is_named) {
    const auto msg = error_of<SchemaError>(std::string(kTrajectoryHeader) + ",speed\n" + "0,P1,d1,none,0,0,0,0,0,1,1,0,16\n");
    EXPECT_NE(msg.find("speed"), std::string::npos) << msg;
}

TEST(parse_trajectory, non_numeric_field_gives_row_number) {
    const auto msg = error_of<ParseError>(with_header(row(0.0, "none") + "0.05,P1,d1,none,abc,0,0,0,0,1,1,0\n"));
    EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
}

TEST(parse_trajectory, time_must_increase_within_a_drive) {
    EXPECT_THROW(parse(with_header(row(0.0, "none") + row(0.0, "none"))), OrderingError);
    EXPECT_THROW(parse(with_header(row(0.1, "none") + row(0.05, "none"))), OrderingError);
    // Separate drives keep separate clocks.
    EXPECT_NO_THROW(parse(with_header(row(0.1, "none") + row(0.0, "none", 1.8, -1, "d2"))));
}

TEST(parse_trajectory, label_must_agree_with_task) {
    EXPECT_THROW(parse(with_header(row(0.0, "call", 1.8, 0))), ValidationError);
    EXPECT_THROW(parse(with_header(row(0.0, "none", 1.8, 1))), ValidationError);
}

TEST(parse_trajectory, drives_keep_first_appearance_order) {
    const auto ds = parse(with_header(row(0.0, "none", 1.8, -1, "b") + row(0.0, "none", 1.8, -1, "a") +
                                      row(0.05, "none", 1.8, -1, "b")));
    ASSERT_EQ(ds.drives.size(), 2u);
    EXPECT_EQ(ds.drives[0].drive_id, "b");
    EXPECT_EQ(ds.drives[0].samples.size(), 2u);
    EXPECT_EQ(ds.drives[1].drive_id, "a");
}

TEST(parse_trajectory, long_drive_spans_660_seconds) {
    std::string body;
    for (int i = 0; i < 13200; ++i) body += row(i * 0.05, "none");
    const auto ds = parse(with_header(body));
    ASSERT_EQ(ds.drives.size(), 1u);
    const auto& s = ds.drives[0].samples;
    ASSERT_EQ(s.size(), 13200u);
    EXPECT_NEAR(s.size() / ds.sample_rate, 660.0, 1e-12);
    EXPECT_NEAR(s.back().time - s.front().time + 1.0 / ds.sample_rate, 660.0, 1e-9);
}

TEST(trajectory_csv, write_then_parse_reproduces_values_exactly) {
    const auto ds = synthetic_drive(57, 11);
    std::stringstream buf;
    write_trajectory_csv(ds, buf);
    const auto back = parse_trajectory_csv(buf);
    ASSERT_EQ(back.sample_count(), ds.sample_count());
    for (std::size_t i = 0; i < ds.drives[0].samples.size(); ++i) {
        const auto& a = ds.drives[0].samples[i];
        const auto& b = back.drives[0].samples[i];
        EXPECT_EQ(a.time, b.time);
        EXPECT_EQ(a.signals, b.signals);
        EXPECT_EQ(a.task, b.task);
        EXPECT_EQ(a.distracted, b.distracted);
    }
}

TEST(median_filter, constant_series_is_unchanged) {
    const std::vector<double> x{1, 1, 1, 1};
    EXPECT_EQ(median_filter(x, 3), x);
}

TEST(median_filter, removes_an_isolated_spike) {
    const std::vector<double> x{1, 9, 1, 1, 1};
    EXPECT_EQ(median_filter(x, 3), (std::vector<double>{1, 1, 1, 1, 1}));
}

TEST(median_filter, window_one_is_identity) {
    const std::vector<double> x{3, -1, 4, 1, -5, 9};
    EXPECT_EQ(median_filter(x, 1), x);
}

TEST(median_filter, rejects_even_or_zero_or_oversized_windows) {
    const std::vector<double> x{1, 2, 3};
    EXPECT_THROW(median_filter(x, 2), ArgumentError);
    EXPECT_THROW(median_filter(x, 0), ArgumentError);
    EXPECT_THROW(median_filter(x, -3), ArgumentError);
    EXPECT_THROW(median_filter(x, 5), ArgumentError);
}

TEST(median_filter, idempotent_on_monotone_series) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> step(0.0, 2.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> x(3 + rep);
        double acc = -5.0;
        for (auto& v : x) v = acc += step(rng);
        const auto once = median_filter(x, 3);
        EXPECT_EQ(median_filter(once, 3), once);
    }
}

TEST(median_filter, edges_use_the_clamped_window) {
    // Out-of-range indices repeat the end samples: element 0 sees {5, 5, 1}.
    const std::vector<double> x{5, 1, 2};
    const auto y = median_filter(x, 3);
    EXPECT_DOUBLE_EQ(y[0], 5.0);
    EXPECT_DOUBLE_EQ(y[1], 2.0);
    EXPECT_DOUBLE_EQ(y[2], 2.0);
}

TEST(samples_per_window, requires_an_integer_count) {
    EXPECT_EQ(samples_per_window(1.0, 20.0), 20u);
    EXPECT_EQ(samples_per_window(0.5, 20.0), 10u);
    EXPECT_THROW(samples_per_window(0.33, 20.0), ArgumentError);
    EXPECT_THROW(samples_per_window(0.0, 20.0), ArgumentError);
}

TEST(window_segments, drops_the_partial_tail) {
    const auto ds = synthetic_drive(45, 1);
    const auto w = window_segments(ds, 1.0);
    ASSERT_EQ(w.size(), 2u);
    EXPECT_EQ(w[0].samples.size(), 20u);
    EXPECT_EQ(w[1].samples.size(), 20u);
    EXPECT_EQ(w[0].index, 0u);
    EXPECT_EQ(w[1].index, 1u);
    EXPECT_EQ(w[1].samples.front().time, ds.drives[0].samples[20].time);
}

TEST(window_segments, even_split_labels_distracted) {
    TrajectoryDataset ds;
    Drive d{"P1", "d1", {}};
    for (int i = 0; i < 20; ++i) {
        TrajectorySample s;
        s.time = i * 0.05;
        s.distracted = i < 10 ? 1 : 0;
        s.task = s.distracted ? Task::long_msg : Task::none;
        d.samples.push_back(s);
    }
    ds.drives.push_back(d);
    const auto w = window_segments(ds, 1.0);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0].label, 1);
    EXPECT_EQ(w[0].task, Task::long_msg);

    ds.drives[0].samples[0].distracted = 0;
    ds.drives[0].samples[0].task = Task::none;
    EXPECT_EQ(window_segments(ds, 1.0)[0].label, 0);
}

TEST(window_segments, eleven_minute_drive_gives_660_windows) {
    const auto ds = synthetic_drive(13200, 2);
    EXPECT_EQ(window_segments(ds, 1.0).size(), 660u);
}

TEST(window_segments, empty_drive_yields_nothing) {
    TrajectoryDataset ds;
    ds.drives.push_back(Drive{"P1", "d1", {}});
    EXPECT_TRUE(window_segments(ds, 1.0).empty());
}

TEST(window_segments, windows_partition_each_drive) {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t n = rng() % 300;
        const auto ds = synthetic_drive(n, rep);
        for (double secs : {0.5, 1.0, 2.0}) {
            const auto per = samples_per_window(secs, 20.0);
            const auto w = window_segments(ds, secs);
            std::size_t covered = 0;
            for (std::size_t i = 0; i < w.size(); ++i) {
                EXPECT_EQ(w[i].index, i);
                EXPECT_EQ(w[i].samples.size(), per);
                EXPECT_EQ(w[i].samples.front().time, ds.drives[0].samples[covered].time);
                covered += w[i].samples.size();
            }
            EXPECT_LT(n - covered, per);
            EXPECT_EQ(covered + n % per, n);
        }
    }
}
