#pragma once

// Reference implementation of the 19 window features, written directly from the metric
// definitions with long double accumulation and no shared code with the library.

#include "autogbm/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace oracle {

inline long double mean(const std::vector<long double>& x) {
    long double s = 0;
    for (auto v : x) s += v;
    return s / x.size();
}

inline long double sd(const std::vector<long double>& x) {
    const long double m = mean(x);
    long double ss = 0;
    for (auto v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / (x.size() - 1));
}

// 1-based position p = 1 + (N - 1) q, interpolating between the neighbouring order statistics.
inline long double quantile(std::vector<long double> x, long double q) {
    std::sort(x.begin(), x.end());
    const long double p = 1 + (x.size() - 1) * q;
    const auto k = static_cast<std::size_t>(std::floor(p));
    const long double frac = p - k;
    if (k >= x.size()) return x.back();
    return x[k - 1] + frac * (x[k] - x[k - 1]);
}

inline long double cv(const std::vector<long double>& x) {
    const long double m = mean(x);
    return std::fabs(m) < 1e-12L ? 0 : sd(x) / m;
}

inline long double qcv(const std::vector<long double>& x) {
    const long double a = quantile(x, 0.25L), b = quantile(x, 0.75L);
    return std::fabs(a + b) < 1e-12L ? 0 : (b - a) / (b + a);
}

inline long double range(const std::vector<long double>& x) {
    return *std::max_element(x.begin(), x.end()) - *std::min_element(x.begin(), x.end());
}

struct Named {
    std::string name;
    double value;
};

inline std::vector<Named> features(const autogbm::Window& w) {
    auto column = [&](autogbm::Signal s) {
        std::vector<long double> out;
        for (const auto& x : w.samples) out.push_back(x[s]);
        return out;
    };
    using S = autogbm::Signal;
    const auto lv = column(S::lat_vel), la = column(S::lat_acc), yv = column(S::yaw_vel), ya = column(S::yaw_acc);
    const auto ld = column(S::ld_center), ldl = column(S::ld_left), ldr = column(S::ld_right);
    auto d = [](long double v) { return static_cast<double>(v); };
    return {
        {"LV_M", d(mean(lv))},   {"LA_M", d(mean(la))},     {"YV_M", d(mean(yv))},     {"YA_M", d(mean(ya))},
        {"LD_M", d(mean(ld))},   {"LDL_M", d(mean(ldl))},   {"LDR_M", d(mean(ldr))},   {"LV_SD", d(sd(lv))},
        {"LA_SD", d(sd(la))},    {"YV_SD", d(sd(yv))},      {"YA_SD", d(sd(ya))},      {"LD_SD", d(sd(ld))},
        {"LDL_SD", d(sd(ldl))},  {"LDR_SD", d(sd(ldr))},    {"LD_R", d(range(ld))},    {"LDL_Cv", d(cv(ldl))},
        {"LDR_Cv", d(cv(ldr))},  {"LDL_Qcv", d(qcv(ldl))},  {"LDR_Qcv", d(qcv(ldr))},
    };
}

}  // namespace oracle
