#pragma once

#include "autogbm/features.hpp"
#include "autogbm/matrix.hpp"
#include "autogbm/trajectory.hpp"

#include <random>
#include <string>
#include <vector>

namespace fixtures {

// Window of n samples with independent random signals; lane-edge distances stay positive.
inline autogbm::Window random_window(std::mt19937_64& rng, std::size_t n = 20) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> scale(0.1, 3.0);
    const double s = scale(rng);
    autogbm::Window w;
    w.driver_id = "P1";
    w.drive_id = "d1";
    for (std::size_t i = 0; i < n; ++i) {
        autogbm::TrajectorySample x;
        x.time = static_cast<double>(i) * 0.05;
        for (auto& v : x.signals) v = s * normal(rng);
        x[autogbm::Signal::ld_left] = 1.8 + 0.3 * normal(rng);
        x[autogbm::Signal::ld_right] = 1.9 + 0.3 * normal(rng);
        w.samples.push_back(x);
    }
    return w;
}

// Dense table with named columns f0, f1, ...
inline autogbm::LabeledData make_data(const std::vector<std::vector<double>>& rows, const std::vector<int>& y) {
    std::vector<std::string> names;
    for (std::size_t c = 0; c < (rows.empty() ? 0 : rows[0].size()); ++c) names.push_back("f" + std::to_string(c));
    autogbm::LabeledData d{autogbm::FeatureMatrix(rows.size(), names), y};
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) d.x(r, c) = rows[r][c];
    }
    return d;
}

// XOR of the signs of two informative columns, padded with noise columns.
inline autogbm::LabeledData xor_data(std::size_t n, std::size_t noise_cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> r{u(rng), u(rng)};
        for (std::size_t j = 0; j < noise_cols; ++j) r.push_back(u(rng));
        y.push_back((r[0] > 0) != (r[1] > 0) ? 1 : 0);
        rows.push_back(std::move(r));
    }
    return make_data(rows, y);
}

// XOR of the two signs, but the second column is uniform on [-0.5, 1] so its sign is
// positive two times in three. The first column then carries marginal signal, which a
// greedy split search needs to start the interaction; with balanced quadrants neither
// column helps on its own and held-out accuracy depends on luck.
inline autogbm::LabeledData skewed_xor_data(std::size_t n, std::size_t noise_cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0), skewed(-0.5, 1.0);
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> r{u(rng), skewed(rng)};
        for (std::size_t j = 0; j < noise_cols; ++j) r.push_back(u(rng));
        y.push_back((r[0] > 0) != (r[1] > 0) ? 1 : 0);
        rows.push_back(std::move(r));
    }
    return make_data(rows, y);
}

}  // namespace fixtures
