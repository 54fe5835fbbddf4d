#include "autogbm/features.hpp"

#include "autogbm/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace autogbm {

namespace {

constexpr double kDenominatorFloor = 1e-12;

std::size_t min_length(Metric metric) {
    return metric == Metric::mean || metric == Metric::range ? 1 : 2;
}

// Both accumulate offsets from the first sample, so constant series come out exact.
double mean_of(std::span<const double> xs) {
    const double origin = xs.front();
    double s = 0.0;
    for (double x : xs) s += x - origin;
    return origin + s / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
    const double origin = xs.front();
    double s = 0.0;
    for (double x : xs) s += x - origin;
    const double m = s / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - origin - m) * (x - origin - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

double quantile_linear(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw ArgumentError("quantile of empty series");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Aggregate aggregate(std::span<const double> series, Metric metric) {
    if (series.size() < min_length(metric)) {
        throw ArgumentError("series too short for metric (length " + std::to_string(series.size()) + ")");
    }
    switch (metric) {
        case Metric::mean:
            return {mean_of(series), false};
        case Metric::sd:
            return {sample_sd(series), false};
        case Metric::range: {
            auto [lo, hi] = std::minmax_element(series.begin(), series.end());
            return {*hi - *lo, false};
        }
        case Metric::cv: {
            const double m = mean_of(series);
            if (std::abs(m) < kDenominatorFloor) return {0.0, true};
            return {sample_sd(series) / m, false};
        }
        case Metric::qcv: {
            std::vector<double> sorted(series.begin(), series.end());
            std::sort(sorted.begin(), sorted.end());
            const double q25 = quantile_linear(sorted, 0.25);
            const double q75 = quantile_linear(sorted, 0.75);
            if (std::abs(q75 + q25) < kDenominatorFloor) return {0.0, true};
            return {(q75 - q25) / (q75 + q25), false};
        }
    }
    throw ArgumentError("unknown metric");
}

std::vector<std::string> feature_names() {
    std::vector<std::string> names;
    for (const auto& f : kFeatures) names.emplace_back(f.name);
    return names;
}

int feature_index(std::string_view name) {
    for (std::size_t i = 0; i < kFeatures.size(); ++i) {
        if (kFeatures[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

FeatureVector extract_features(const Window& window) {
    std::array<std::vector<double>, kSignalCount> columns;
    for (auto& c : columns) c.reserve(window.samples.size());
    for (std::size_t i = 0; i < window.samples.size(); ++i) {
        for (std::size_t k = 0; k < kSignalCount; ++k) {
            const double v = window.samples[i].signals[k];
            if (!std::isfinite(v)) {
                throw ExtractionError("non-finite " + std::string(signal_name(static_cast<Signal>(k))) +
                                      " at sample " + std::to_string(i) + " of window " +
                                      std::to_string(window.index));
            }
            columns[k].push_back(v);
        }
    }

    FeatureVector fv;
    fv.label = window.label;
    fv.task = window.task;
    fv.driver_id = window.driver_id;
    fv.drive_id = window.drive_id;
    fv.window_index = window.index;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const auto& def = kFeatures[f];
        const auto agg = aggregate(columns[static_cast<std::size_t>(def.signal)], def.metric);
        fv.values[f] = agg.value;
        if (agg.degenerate) fv.degenerate_mask |= (1u << f);
    }
    return fv;
}

std::vector<FeatureVector> extract_all(std::span<const Window> windows) {
    std::vector<FeatureVector> out;
    out.reserve(windows.size());
    for (const auto& w : windows) out.push_back(extract_features(w));
    return out;
}

void write_features_csv(std::span<const FeatureVector> rows, std::ostream& out) {
    for (const auto& f : kFeatures) out << f.name << ',';
    out << kFeatureMetaColumns << '\n';
    for (const auto& row : rows) {
        for (double v : row.values) out << detail::format_double(v) << ',';
        out << row.driver_id << ',' << task_name(row.task) << ',' << row.window_index << ',' << row.label << '\n';
    }
}

void write_features_csv(std::span<const FeatureVector> rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write features file: " + path.string());
    write_features_csv(rows, out);
}

std::vector<FeatureVector> read_features_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("features file is empty (missing header)");
    detail::strip_cr(line);
    std::string expected;
    for (const auto& f : kFeatures) expected.append(f.name).push_back(',');
    expected.append(kFeatureMetaColumns);
    if (line != expected) throw SchemaError("features header mismatch: '" + line + "'");

    std::vector<FeatureVector> rows;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        detail::strip_cr(line);
        if (line.empty()) continue;
        const auto fields = detail::split(line, ',');
        if (fields.size() != kFeatureCount + 4) {
            throw ParseError("row " + std::to_string(row) + ": wrong field count");
        }
        FeatureVector fv;
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            auto v = detail::parse_double(fields[f]);
            if (!v) throw ParseError("row " + std::to_string(row) + ": non-numeric " + std::string(kFeatures[f].name));
            fv.values[f] = *v;
        }
        fv.driver_id = fields[kFeatureCount];
        auto task = parse_task(fields[kFeatureCount + 1]);
        if (!task) throw ParseError("row " + std::to_string(row) + ": unknown task");
        fv.task = *task;
        auto idx = detail::parse_int(fields[kFeatureCount + 2]);
        auto label = detail::parse_int(fields[kFeatureCount + 3]);
        if (!idx || *idx < 0) throw ParseError("row " + std::to_string(row) + ": bad window_idx");
        if (!label || (*label != 0 && *label != 1)) throw ParseError("row " + std::to_string(row) + ": bad label");
        fv.window_index = static_cast<std::size_t>(*idx);
        fv.label = static_cast<int>(*label);
        rows.push_back(std::move(fv));
    }
    return rows;
}

std::vector<FeatureVector> read_features_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open features file: " + path.string());
    return read_features_csv(in);
}

}  // namespace autogbm
