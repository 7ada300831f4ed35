#pragma once

// Batch commands behind the `fseg` executable. Each command writes its
// reports to files, logs progress to stderr and emits a run manifest. The
// return value is the process exit code: 0 when every item succeeded, 1 when
// at least one item failed and was skipped. Errors that stop the whole run
// propagate as fseg::Error.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fseg/clustering.hpp"
#include "fseg/nmf.hpp"
#include "fseg/segmentation.hpp"

namespace fseg::app {

inline constexpr const char* kToolVersion = "0.1.0";

struct CommonOptions {
    std::uint64_t seed = 17;
    /// Worker threads for per-tile work; 0 means one per logical core.
    int jobs = 0;
    std::filesystem::path out;
    /// Command line as invoked, recorded verbatim in the manifest.
    std::vector<std::string> argv;
};

struct NmfOptions {
    int max_iters = 200;
    double tol = 1e-4;
    NmfSolver solver = NmfSolver::Hals;

    [[nodiscard]] NmfConfig config(std::uint64_t seed) const;
};

struct ClusterFitOptions {
    CommonOptions common;
    std::filesystem::path features_dir;
    std::size_t k = 0;
    int max_iters = 300;
    double tol = 1e-4;
    int n_init = 4;
    MetaMap meta;
};

struct SegmentOptions {
    CommonOptions common;
    /// A single .fst tensor or a directory of them.
    std::filesystem::path input;
    std::filesystem::path model;
    SegmentationMode mode = SegmentationMode::FixedH;
    std::optional<std::size_t> k_concepts;
    std::optional<GridSize> resize;
    ResizeMode resize_mode = ResizeMode::NearestLabel;
    NmfOptions nmf;
    /// Stretch labels over 0..255 in the PGM previews.
    bool pgm_scale = true;
};

struct EvalMatchOptions {
    CommonOptions common;
    std::filesystem::path pred_dir;
    std::filesystem::path gt_dir;
    std::filesystem::path palette;
    bool normalized = false;
    bool strict_palette = false;
};

struct EvalProbeOptions {
    CommonOptions common;
    std::filesystem::path features_dir;
    std::filesystem::path gt_dir;
    std::filesystem::path palette;
    /// Required in fixed-h mode.
    std::optional<std::filesystem::path> model;
    SegmentationMode mode = SegmentationMode::FixedH;
    std::optional<std::size_t> k_concepts;
    double threshold = 0.75;
    double reg = 1e-3;
    bool use_bias = true;
    int probe_max_iters = 10000;
    NmfOptions nmf;
    bool strict_palette = false;
    /// Held-out tiles to evaluate on; defaults to the training tiles.
    std::optional<std::filesystem::path> test_features_dir;
    std::optional<std::filesystem::path> test_gt_dir;
};

int run_cluster_fit(const ClusterFitOptions& opts);
int run_segment(const SegmentOptions& opts);
int run_eval_match(const EvalMatchOptions& opts);
int run_eval_probe(const EvalProbeOptions& opts);
/// Prints one header summary line per file; returns 1 if any file failed to parse.
int run_info(const std::vector<std::filesystem::path>& files, std::ostream& out);

/// Parses "HxW" (e.g. "256x256").
GridSize parse_grid_size(const std::string& text);

}  // namespace fseg::app
