#include "autogbm/matrix.hpp"

#include "autogbm/error.hpp"

namespace autogbm {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::vector<std::string> column_names)
    : rows_(rows), names_(std::move(column_names)), data_(rows_ * names_.size(), 0.0) {}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
    FeatureMatrix out(rows.size(), names_);
    for (std::size_t c = 0; c < cols(); ++c) {
        const auto src = column(c);
        auto dst = out.column(c);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i] >= rows_) throw ArgumentError("row index out of range");
            dst[i] = src[rows[i]];
        }
    }
    return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> cols) const {
    std::vector<std::string> names;
    for (auto c : cols) {
        if (c >= this->cols()) throw ArgumentError("column index out of range");
        names.push_back(names_[c]);
    }
    FeatureMatrix out(rows_, std::move(names));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        const auto src = column(cols[j]);
        std::copy(src.begin(), src.end(), out.column(j).begin());
    }
    return out;
}

LabeledData LabeledData::select_rows(std::span<const std::size_t> rows) const {
    LabeledData out{x.select_rows(rows), {}};
    out.y.reserve(rows.size());
    for (auto r : rows) out.y.push_back(y[r]);
    return out;
}

LabeledData LabeledData::select_columns(std::span<const std::size_t> cols) const {
    return {x.select_columns(cols), y};
}

LabeledData to_labeled_data(std::span<const FeatureVector> rows) {
    LabeledData data{FeatureMatrix(rows.size(), feature_names()), {}};
    data.y.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t f = 0; f < kFeatureCount; ++f) data.x(i, f) = rows[i].values[f];
        data.y.push_back(rows[i].label);
    }
    return data;
}

}  // namespace autogbm
