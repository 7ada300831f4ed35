#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fseg/clustering.hpp"
#include "fseg/nmf.hpp"
#include "fseg/tensor.hpp"

namespace fseg {

enum class SegmentationMode {
    /// Free NMF at rank k_concepts, then each concept goes to the cluster
    /// center with the highest cosine similarity.
    FullNmfCosine,
    /// H pinned to the cluster centers; only W is solved.
    FixedH,
};

enum class ResizeMode {
    /// Nearest-neighbour upsampling of the final label grid.
    NearestLabel,
    /// Bilinear upsampling of every W column (half-pixel centers), then argmax.
    BilinearW,
};

struct GridSize {
    std::size_t rows = 0;
    std::size_t cols = 0;

    bool operator==(const GridSize&) const = default;
};

struct SegmentationRequest {
    SegmentationMode mode = SegmentationMode::FixedH;
    /// Rank of the free factorization; ignored in FixedH mode (rank = model.k).
    std::size_t k_concepts = 0;
    std::optional<GridSize> resize_to;
    ResizeMode resize_mode = ResizeMode::NearestLabel;
    NmfConfig nmf;

    void validate() const;
};

struct SegmentationResult {
    /// Per-pixel argmax over W, n_labels = rank.
    LabelMask concept_mask;
    /// Concepts mapped into cluster space, n_labels = model.k.
    LabelMask cluster_mask;
    std::optional<LabelMask> resized_mask;
    Factorization factorization;
    /// Cluster index per concept; the identity in FixedH mode.
    std::vector<std::uint32_t> concept_to_cluster;
};

/// Per-pixel argmax over the columns of w (pixels x k), ties to the lowest
/// concept. Requires w.n_rows() == rows * cols.
LabelMask concept_labels(const DenseMatrix& w, std::size_t rows, std::size_t cols);

/// Highest-cosine cluster per concept row of h, ties to the lowest index.
/// Zero concept rows go to cluster 0 with a warning.
std::vector<std::uint32_t> match_concepts_to_clusters(const DenseMatrix& h, const ClusterModel& model);

SegmentationResult segment_tile(const FeatureTensor& a, const ClusterModel& model, const SegmentationRequest& req);

/// Upsamples the result's cluster labels to `target`; throws UnsupportedError
/// when target is smaller than the grid in either dimension.
LabelMask resize_mask(const SegmentationResult& result, GridSize target, ResizeMode mode);

/// Nearest-neighbour resampling with half-pixel centers, any direction. The
/// ignore label is carried through like any other label.
LabelMask resize_labels_nearest(const LabelMask& mask, GridSize target);

}  // namespace fseg
