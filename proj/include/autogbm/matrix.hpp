#pragma once

#include "autogbm/features.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace autogbm {

/// Dense column-major feature table with named columns.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::vector<std::string> column_names);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    double operator()(std::size_t row, std::size_t col) const { return data_[col * rows_ + row]; }
    double& operator()(std::size_t row, std::size_t col) { return data_[col * rows_ + row]; }

    std::span<const double> column(std::size_t col) const { return {data_.data() + col * rows_, rows_}; }
    std::span<double> column(std::size_t col) { return {data_.data() + col * rows_, rows_}; }

    FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
    FeatureMatrix select_columns(std::span<const std::size_t> cols) const;

private:
    std::size_t rows_ = 0;
    std::vector<std::string> names_;
    std::vector<double> data_;
};

struct LabeledData {
    FeatureMatrix x;
    std::vector<int> y;

    std::size_t size() const { return y.size(); }
    LabeledData select_rows(std::span<const std::size_t> rows) const;
    LabeledData select_columns(std::span<const std::size_t> cols) const;
};

/// Stacks feature vectors into a 19-column table with their labels.
LabeledData to_labeled_data(std::span<const FeatureVector> rows);

}  // namespace autogbm
