#include "fseg/tensor.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "fseg/error.hpp"

namespace fseg {

namespace {

void require_positive(std::size_t value, const char* what) {
    if (value == 0) {
        throw DimensionError(fmt::format("{} must be positive", what));
    }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t n_rows, std::size_t n_cols)
    : DenseMatrix(n_rows, n_cols, std::vector<float>(n_rows * n_cols, 0.0F)) {}

DenseMatrix::DenseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<float> data)
    : n_rows_(n_rows), n_cols_(n_cols), data_(std::move(data)) {
    require_positive(n_rows, "n_rows");
    require_positive(n_cols, "n_cols");
    if (data_.size() != n_rows * n_cols) {
        throw DimensionError(
            fmt::format("matrix data length {} != {} x {}", data_.size(), n_rows, n_cols));
    }
}

FeatureTensor::FeatureTensor(std::size_t rows, std::size_t cols, std::size_t channels,
                             std::vector<float> data)
    : rows_(rows), cols_(cols), channels_(channels), data_(std::move(data)) {
    require_positive(rows, "rows");
    require_positive(cols, "cols");
    require_positive(channels, "channels");
    if (data_.size() != rows * cols * channels) {
        throw DimensionError(fmt::format("tensor data length {} != {} x {} x {}", data_.size(), rows,
                                         cols, channels));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        const float v = data_[i];
        if (!std::isfinite(v)) {
            throw InputError(fmt::format("tensor element {} is not finite", i));
        }
        if (v < 0.0F) {
            throw InputError(fmt::format("tensor element {} is negative ({})", i, v));
        }
    }
}

LabelMask::LabelMask(std::size_t rows, std::size_t cols, std::uint32_t n_labels,
                     std::vector<std::uint32_t> labels)
    : rows_(rows), cols_(cols), n_labels_(n_labels), labels_(std::move(labels)) {
    require_positive(rows, "rows");
    require_positive(cols, "cols");
    require_positive(n_labels, "n_labels");
    if (labels_.size() != rows * cols) {
        throw DimensionError(
            fmt::format("label data length {} != {} x {}", labels_.size(), rows, cols));
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] > n_labels) {
            throw InputError(
                fmt::format("label {} at index {} exceeds n_labels {}", labels_[i], i, n_labels));
        }
    }
}

std::vector<std::size_t> label_histogram(const LabelMask& mask) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(mask.n_labels()) + 1, 0);
    for (const auto label : mask.labels()) {
        ++counts[label];
    }
    return counts;
}

}  // namespace fseg
