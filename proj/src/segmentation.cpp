#include "fseg/segmentation.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "fseg/error.hpp"
#include "fseg/log.hpp"

namespace fseg {

namespace {

std::vector<std::uint32_t> compose(const LabelMask& concepts, std::span<const std::uint32_t> concept_to_cluster) {
    std::vector<std::uint32_t> out(concepts.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = concept_to_cluster[concepts[i]];
    }
    return out;
}

// Source coordinate of output index `i` under half-pixel centers, clamped.
struct Tap {
    std::size_t lo;
    std::size_t hi;
    double frac;
};

Tap bilinear_tap(std::size_t i, std::size_t in, std::size_t out) {
    double s = (static_cast<double>(i) + 0.5) * static_cast<double>(in) / static_cast<double>(out) - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(in - 1));
    const auto lo = static_cast<std::size_t>(std::floor(s));
    const std::size_t hi = std::min(lo + 1, in - 1);
    return {lo, hi, s - static_cast<double>(lo)};
}

std::size_t nearest_index(std::size_t i, std::size_t in, std::size_t out) {
    return ((2 * i + 1) * in) / (2 * out);
}

}  // namespace

void SegmentationRequest::validate() const {
    if (mode == SegmentationMode::FullNmfCosine && k_concepts < 1) {
        throw InputError("full-NMF segmentation requires k_concepts >= 1");
    }
    if (resize_to && (resize_to->rows == 0 || resize_to->cols == 0)) {
        throw InputError("resize target must be positive in both dimensions");
    }
    nmf.validate();
}

LabelMask concept_labels(const DenseMatrix& w, std::size_t rows, std::size_t cols) {
    if (w.n_rows() != rows * cols) {
        throw DimensionError(fmt::format("W has {} rows, grid {} x {} needs {}", w.n_rows(), rows, cols, rows * cols));
    }
    std::vector<std::uint32_t> labels(w.n_rows());
    for (std::size_t p = 0; p < w.n_rows(); ++p) {
        const auto row = w.row(p);
        std::size_t best = 0;
        for (std::size_t j = 1; j < row.size(); ++j) {
            if (row[j] > row[best]) {
                best = j;
            }
        }
        labels[p] = static_cast<std::uint32_t>(best);
    }
    return LabelMask(rows, cols, static_cast<std::uint32_t>(w.n_cols()), std::move(labels));
}

std::vector<std::uint32_t> match_concepts_to_clusters(const DenseMatrix& h, const ClusterModel& model) {
    if (h.n_cols() != model.channels()) {
        throw DimensionError(
            fmt::format("concepts have {} channels, cluster model has {}", h.n_cols(), model.channels()));
    }
    const DenseMatrix& centers = model.centers();
    const std::size_t d = centers.n_cols();
    // Unit-norm centers; the concept norm is common to every candidate and
    // drops out of the argmax.
    std::vector<double> unit(centers.data().size());
    for (std::size_t k = 0; k < centers.n_rows(); ++k) {
        double norm = 0.0;
        for (const float v : centers.row(k)) {
            norm += static_cast<double>(v) * v;
        }
        norm = std::sqrt(norm);
        for (std::size_t c = 0; c < d; ++c) {
            unit[k * d + c] = static_cast<double>(centers(k, c)) / norm;
        }
    }

    std::vector<std::uint32_t> mapping(h.n_rows(), 0);
    for (std::size_t m = 0; m < h.n_rows(); ++m) {
        const auto concept_row = h.row(m);
        const bool zero = std::all_of(concept_row.begin(), concept_row.end(), [](float v) { return v == 0.0F; });
        if (zero) {
            log::warn("zero_norm_concept", {{"concept", std::to_string(m)}, {"assigned_cluster", "0"}});
            continue;
        }
        double best_score = -std::numeric_limits<double>::infinity();
        std::uint32_t best = 0;
        for (std::size_t k = 0; k < centers.n_rows(); ++k) {
            double score = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                score += unit[k * d + c] * static_cast<double>(concept_row[c]);
            }
            if (score > best_score) {
                best_score = score;
                best = static_cast<std::uint32_t>(k);
            }
        }
        mapping[m] = best;
    }
    return mapping;
}

SegmentationResult segment_tile(const FeatureTensor& a, const ClusterModel& model, const SegmentationRequest& req) {
    req.validate();
    if (a.channels() != model.channels()) {
        throw DimensionError(
            fmt::format("tensor has {} channels, cluster model has {}", a.channels(), model.channels()));
    }
    SegmentationResult result;
    if (req.mode == SegmentationMode::FullNmfCosine) {
        result.factorization = nmf_factorize(a, req.k_concepts, req.nmf);
        result.concept_mask = concept_labels(result.factorization.w, a.rows(), a.cols());
        result.concept_to_cluster = match_concepts_to_clusters(result.factorization.h, model);
        result.cluster_mask = LabelMask(a.rows(), a.cols(), static_cast<std::uint32_t>(model.k()),
                                        compose(result.concept_mask, result.concept_to_cluster));
    } else {
        result.factorization = nmf_solve_w(a, model.centers(), req.nmf);
        result.concept_mask = concept_labels(result.factorization.w, a.rows(), a.cols());
        result.concept_to_cluster.resize(model.k());
        std::iota(result.concept_to_cluster.begin(), result.concept_to_cluster.end(), 0U);
        result.cluster_mask = result.concept_mask;
    }
    if (req.resize_to) {
        result.resized_mask = resize_mask(result, *req.resize_to, req.resize_mode);
    }
    return result;
}

LabelMask resize_mask(const SegmentationResult& result, GridSize target, ResizeMode mode) {
    const LabelMask& grid = result.cluster_mask;
    if (target.rows < grid.rows() || target.cols < grid.cols()) {
        throw UnsupportedError(fmt::format("resize target {} x {} is smaller than the {} x {} grid (downscaling unsupported)",
                                           target.rows, target.cols, grid.rows(), grid.cols()));
    }
    if (mode == ResizeMode::NearestLabel) {
        return resize_labels_nearest(grid, target);
    }

    const DenseMatrix& w = result.factorization.w;
    const std::size_t k = w.n_cols();
    if (w.n_rows() != grid.size() || result.concept_to_cluster.size() != k) {
        throw DimensionError("factorization does not match the label grid");
    }
    std::vector<std::uint32_t> labels(target.rows * target.cols);
    std::vector<Tap> col_taps(target.cols);
    for (std::size_t x = 0; x < target.cols; ++x) {
        col_taps[x] = bilinear_tap(x, grid.cols(), target.cols);
    }
    for (std::size_t y = 0; y < target.rows; ++y) {
        const Tap ty = bilinear_tap(y, grid.rows(), target.rows);
        for (std::size_t x = 0; x < target.cols; ++x) {
            const Tap& tx = col_taps[x];
            const auto w00 = w.row(ty.lo * grid.cols() + tx.lo);
            const auto w01 = w.row(ty.lo * grid.cols() + tx.hi);
            const auto w10 = w.row(ty.hi * grid.cols() + tx.lo);
            const auto w11 = w.row(ty.hi * grid.cols() + tx.hi);
            std::size_t best = 0;
            double best_value = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < k; ++j) {
                const double top = (1.0 - tx.frac) * w00[j] + tx.frac * w01[j];
                const double bottom = (1.0 - tx.frac) * w10[j] + tx.frac * w11[j];
                const double value = (1.0 - ty.frac) * top + ty.frac * bottom;
                if (value > best_value) {
                    best_value = value;
                    best = j;
                }
            }
            labels[y * target.cols + x] = result.concept_to_cluster[best];
        }
    }
    return LabelMask(target.rows, target.cols, grid.n_labels(), std::move(labels));
}

LabelMask resize_labels_nearest(const LabelMask& mask, GridSize target) {
    if (target.rows == 0 || target.cols == 0) {
        throw InputError("resize target must be positive in both dimensions");
    }
    std::vector<std::size_t> src_col(target.cols);
    for (std::size_t x = 0; x < target.cols; ++x) {
        src_col[x] = nearest_index(x, mask.cols(), target.cols);
    }
    std::vector<std::uint32_t> labels(target.rows * target.cols);
    for (std::size_t y = 0; y < target.rows; ++y) {
        const std::size_t sy = nearest_index(y, mask.rows(), target.rows);
        for (std::size_t x = 0; x < target.cols; ++x) {
            labels[y * target.cols + x] = mask.at(sy, src_col[x]);
        }
    }
    return LabelMask(target.rows, target.cols, mask.n_labels(), std::move(labels));
}

}  // namespace fseg
