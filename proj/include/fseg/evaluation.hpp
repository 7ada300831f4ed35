#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fseg/nmf.hpp"
#include "fseg/tensor.hpp"

namespace fseg {

// ---------------------------------------------------------------------------
// Frequency matching
// ---------------------------------------------------------------------------

/// counts(c, g) = pixels predicted as cluster c whose ground truth is g.
class FrequencyMatrix {
public:
    FrequencyMatrix() = default;
    FrequencyMatrix(std::size_t n_clusters, std::size_t n_categories);

    [[nodiscard]] std::size_t n_clusters() const { return n_clusters_; }
    [[nodiscard]] std::size_t n_categories() const { return n_categories_; }
    [[nodiscard]] std::uint64_t at(std::size_t cluster, std::size_t category) const {
        return counts_[cluster * n_categories_ + category];
    }
    void add(std::size_t cluster, std::size_t category, std::uint64_t n = 1) {
        counts_[cluster * n_categories_ + category] += n;
    }
    [[nodiscard]] std::uint64_t total() const;
    /// Column sums: pixels per ground-truth category.
    [[nodiscard]] std::vector<std::uint64_t> category_totals() const;

    FrequencyMatrix& operator+=(const FrequencyMatrix& other);
    bool operator==(const FrequencyMatrix&) const = default;

private:
    std::size_t n_clusters_ = 0;
    std::size_t n_categories_ = 0;
    std::vector<std::uint64_t> counts_;
};

/// Adds one tile's (cluster, category) pixel pairs to `acc`; ground-truth
/// pixels carrying the ignore label are skipped.
FrequencyMatrix accumulate_frequencies(const LabelMask& pred, const LabelMask& gt, FrequencyMatrix acc);

struct ClusterMapping {
    /// Category per cluster.
    std::vector<std::uint32_t> map;
    std::uint32_t n_categories = 0;
    bool normalized = false;
};

/// Plain: argmax_g counts(c, g). Normalized: argmax_g counts(c, g) / total_g
/// over categories with total_g > 0 (compared exactly). Ties go to the lowest
/// category; all-zero cluster rows map to 0 with a warning.
ClusterMapping match_clusters(const FrequencyMatrix& freq, bool normalized);

/// Relabels cluster predictions into category space.
LabelMask apply_mapping(const LabelMask& pred, const ClusterMapping& mapping);

// ---------------------------------------------------------------------------
// F1
// ---------------------------------------------------------------------------

/// Category confusion counts accumulated across tiles.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t n_categories);

    /// Skips ground-truth ignore pixels; predictions must be < n_categories.
    void add(const LabelMask& pred, const LabelMask& gt);
    void add(std::size_t pred, std::size_t truth, std::uint64_t n) { counts_[pred * n_ + truth] += n; }

    [[nodiscard]] std::size_t n_categories() const { return n_; }
    [[nodiscard]] std::uint64_t at(std::size_t pred, std::size_t truth) const { return counts_[pred * n_ + truth]; }

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> counts_;
};

struct F1Report {
    /// Undefined (nullopt) when the class is absent from both pred and gt.
    std::vector<std::optional<double>> per_class_f1;
    std::vector<std::optional<double>> per_class_precision;
    std::vector<std::optional<double>> per_class_recall;
    /// Ground-truth pixels per class.
    std::vector<std::uint64_t> pixel_counts;
    /// Predicted pixels per class.
    std::vector<std::uint64_t> predicted_counts;
    /// Mean F1 over classes present in the ground truth.
    std::optional<double> macro_f1;
    /// Pooled over all evaluated pixels (equals pixel accuracy).
    std::optional<double> micro_f1;
    std::uint64_t evaluated_pixels = 0;
};

/// Category confusion implied by relabelling every cluster through `mapping`.
ConfusionMatrix confusion_from_frequencies(const FrequencyMatrix& freq, const ClusterMapping& mapping);

F1Report f1_from_confusion(const ConfusionMatrix& confusion);
F1Report f1_report(const LabelMask& pred_categories, const LabelMask& gt, std::size_t n_categories);

// ---------------------------------------------------------------------------
// Linear probing
// ---------------------------------------------------------------------------

/// Concept feature vectors with the category each one was associated with.
class ProbeSet {
public:
    explicit ProbeSet(double threshold = 0.75);

    [[nodiscard]] double threshold() const { return threshold_; }
    [[nodiscard]] std::size_t size() const { return labels_.size(); }
    [[nodiscard]] bool empty() const { return labels_.empty(); }
    [[nodiscard]] std::size_t channels() const { return channels_; }
    [[nodiscard]] std::span<const float> feature(std::size_t i) const {
        return std::span<const float>(features_).subspan(i * channels_, channels_);
    }
    [[nodiscard]] std::span<const std::uint32_t> labels() const { return labels_; }
    [[nodiscard]] MatrixView<float> features() const { return {size(), channels_, features_}; }

    /// Appends one pair; the first pair fixes the channel count.
    void add(std::span<const float> feature, std::uint32_t label);

private:
    double threshold_;
    std::size_t channels_ = 0;
    std::vector<float> features_;
    std::vector<std::uint32_t> labels_;
};

/// For every concept present in the tile, the share of its (non-ignored)
/// pixels falling in each category; when the largest share is >= threshold,
/// (H_m, category) joins the set.
ProbeSet probe_collect(const Factorization& factorization, const LabelMask& concept_mask, const LabelMask& gt,
                       double threshold, ProbeSet acc);

struct LinearProbe {
    /// n_categories x channels.
    DenseMatrix weights;
    std::vector<float> bias;
    bool use_bias = true;
};

struct ProbeTrainConfig {
    /// L2 penalty reg * ||W||_F^2 (bias unpenalized).
    double reg = 1e-3;
    std::uint64_t seed = 17;
    int max_iters = 10000;
    double grad_tol = 1e-5;
    bool use_bias = true;
};

/// Mean cross-entropy + reg * ||W||^2 and its gradient. Parameters are
/// W (n_categories x channels, row-major) and b (n_categories).
struct ProbeObjective {
    double loss = 0.0;
    std::vector<double> grad_weights;
    std::vector<double> grad_bias;
};

ProbeObjective probe_objective(const ProbeSet& set, std::size_t n_categories, std::span<const double> weights,
                               std::span<const double> bias, double reg, bool use_bias);

struct ProbeTrainResult {
    LinearProbe probe;
    int iterations = 0;
    double gradient_norm = 0.0;
    double loss = 0.0;
};

/// Multinomial logistic regression by accelerated full-batch gradient descent
/// until the gradient norm drops below grad_tol or max_iters is reached.
/// Throws CoverageError naming every category without examples.
ProbeTrainResult probe_train_detailed(const ProbeSet& set, std::size_t n_categories, const ProbeTrainConfig& cfg);
LinearProbe probe_train(const ProbeSet& set, std::size_t n_categories, const ProbeTrainConfig& cfg);

/// argmax_c w_c . h_m (+ b_c), ties to the lowest category.
std::vector<std::uint32_t> probe_classify(const DenseMatrix& h, const LinearProbe& probe);

/// Weights with the bias appended as a last column (zeros without bias).
DenseMatrix probe_to_matrix(const LinearProbe& probe);

}  // namespace fseg
