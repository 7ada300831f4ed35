#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fseg/tensor.hpp"

namespace fseg {

using MetaMap = std::map<std::string, std::string>;

/// Cluster vocabulary: k non-negative, non-zero centers in channel space.
class ClusterModel {
public:
    ClusterModel() = default;
    /// Throws DegenerateError on an all-zero row, InputError on negative or
    /// non-finite entries.
    explicit ClusterModel(DenseMatrix centers, MetaMap meta = {});

    [[nodiscard]] const DenseMatrix& centers() const { return centers_; }
    [[nodiscard]] std::size_t k() const { return centers_.n_rows(); }
    [[nodiscard]] std::size_t channels() const { return centers_.n_cols(); }
    [[nodiscard]] const MetaMap& meta() const { return meta_; }

private:
    DenseMatrix centers_;
    MetaMap meta_;
};

struct KMeansConfig {
    std::size_t k = 2;
    std::uint64_t seed = 17;
    int max_iters = 300;
    /// Stop when the relative inertia decrease between iterations is below tol.
    double tol = 1e-4;
    /// Independent k-means++ restarts; the lowest final inertia wins.
    int n_init = 4;

    void validate() const;
};

struct KMeansResult {
    DenseMatrix centers;
    /// Nearest-center label of every input point, in input order.
    std::vector<std::uint32_t> labels;
    double inertia = 0.0;
    /// Inertia after every assignment step of the winning restart.
    std::vector<double> inertia_trace;
    int n_iters = 0;
};

/// Per-channel mean over all spatial positions.
std::vector<float> gap_pool(const FeatureTensor& tensor);

/// Lloyd iterations from k-means++ seeds. Points are sorted lexicographically
/// before seeding, so the result does not depend on input order.
KMeansResult kmeans_run(MatrixView<float> points, const KMeansConfig& cfg);

/// kmeans_run wrapped into a validated ClusterModel.
ClusterModel kmeans_fit(MatrixView<float> points, const KMeansConfig& cfg, MetaMap meta = {});

/// Nearest center by squared Euclidean distance, ties to the lowest index.
/// Returns a 1 x n mask with n_labels = k.
LabelMask kmeans_assign(MatrixView<float> points, const ClusterModel& model);

/// Sum of squared distances of each point to its nearest center.
double inertia(MatrixView<float> points, const DenseMatrix& centers);

/// `<base>.fst` holds the k x channels centers, `<base>.meta.json` the meta map.
/// A trailing ".fst" on `base` is ignored.
void save_cluster_model(const std::filesystem::path& base, const ClusterModel& model);
ClusterModel load_cluster_model(const std::filesystem::path& base);

}  // namespace fseg
