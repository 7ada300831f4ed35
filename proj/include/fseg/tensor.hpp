#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fseg {

/// Read-only row-major view over a contiguous matrix buffer.
template <typename T>
struct MatrixView {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::span<const T> data;

    [[nodiscard]] const T& operator()(std::size_t r, std::size_t c) const { return data[r * n_cols + c]; }
    [[nodiscard]] std::span<const T> row(std::size_t r) const { return data.subspan(r * n_cols, n_cols); }
};

/// Row-major matrix of 32-bit floats. Used for factor matrices, cluster
/// centers and probe weights; no sign constraint of its own.
class DenseMatrix {
public:
    DenseMatrix() = default;
    /// Zero-filled n_rows x n_cols matrix.
    DenseMatrix(std::size_t n_rows, std::size_t n_cols);
    /// Throws DimensionError unless data.size() == n_rows * n_cols and both are positive.
    DenseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<float> data);

    [[nodiscard]] std::size_t n_rows() const { return n_rows_; }
    [[nodiscard]] std::size_t n_cols() const { return n_cols_; }
    [[nodiscard]] std::span<const float> data() const { return data_; }
    [[nodiscard]] std::span<float> mutable_data() { return data_; }
    [[nodiscard]] std::span<const float> row(std::size_t r) const {
        return std::span<const float>(data_).subspan(r * n_cols_, n_cols_);
    }
    [[nodiscard]] float operator()(std::size_t r, std::size_t c) const { return data_[r * n_cols_ + c]; }
    [[nodiscard]] float& operator()(std::size_t r, std::size_t c) { return data_[r * n_cols_ + c]; }
    [[nodiscard]] MatrixView<float> view() const { return {n_rows_, n_cols_, data_}; }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t n_rows_ = 0;
    std::size_t n_cols_ = 0;
    std::vector<float> data_;
};

/// Non-negative spatial activation grid, row-major (row, col, channel).
class FeatureTensor {
public:
    FeatureTensor() = default;
    /// Validates sizes and that every element is finite and >= 0 (InputError otherwise).
    FeatureTensor(std::size_t rows, std::size_t cols, std::size_t channels, std::vector<float> data);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] std::size_t channels() const { return channels_; }
    [[nodiscard]] std::size_t pixels() const { return rows_ * cols_; }
    [[nodiscard]] std::span<const float> data() const { return data_; }
    [[nodiscard]] std::span<const float> pixel(std::size_t r, std::size_t c) const {
        return std::span<const float>(data_).subspan((r * cols_ + c) * channels_, channels_);
    }
    /// The (rows*cols) x channels matrix over the same buffer.
    [[nodiscard]] MatrixView<float> flat() const { return {pixels(), channels_, data_}; }

    bool operator==(const FeatureTensor&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t channels_ = 0;
    std::vector<float> data_;
};

/// Integer label grid. Valid labels are < n_labels; the value n_labels itself
/// is reserved as the ignore label (unmapped ground-truth pixels) and is
/// skipped by every metric.
class LabelMask {
public:
    LabelMask() = default;
    /// Throws DimensionError on size mismatch, InputError on labels > n_labels.
    LabelMask(std::size_t rows, std::size_t cols, std::uint32_t n_labels, std::vector<std::uint32_t> labels);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] std::size_t size() const { return labels_.size(); }
    [[nodiscard]] std::uint32_t n_labels() const { return n_labels_; }
    [[nodiscard]] std::uint32_t ignore_label() const { return n_labels_; }
    [[nodiscard]] bool is_ignored(std::size_t i) const { return labels_[i] == n_labels_; }
    [[nodiscard]] std::span<const std::uint32_t> labels() const { return labels_; }
    [[nodiscard]] std::uint32_t operator[](std::size_t i) const { return labels_[i]; }
    [[nodiscard]] std::uint32_t at(std::size_t r, std::size_t c) const { return labels_[r * cols_ + c]; }

    bool operator==(const LabelMask&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::uint32_t n_labels_ = 0;
    std::vector<std::uint32_t> labels_;
};

/// Per-label pixel counts; index n_labels holds the ignored pixels.
std::vector<std::size_t> label_histogram(const LabelMask& mask);

}  // namespace fseg
