#include "fseg/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "fseg/error.hpp"
#include "fseg/fst.hpp"
#include "fseg/kernels.hpp"
#include "fseg/random.hpp"

namespace fseg {

namespace {

using kernels::MatrixF64;

void check_points(MatrixView<float> points) {
    for (std::size_t i = 0; i < points.data.size(); ++i) {
        if (!std::isfinite(points.data[i])) {
            throw InputError(fmt::format("point {} has a non-finite coordinate", i / points.n_cols));
        }
        if (points.data[i] < 0.0F) {
            throw InputError(fmt::format("point {} has a negative coordinate", i / points.n_cols));
        }
    }
}

// Lexicographic row order; equal rows are interchangeable.
std::vector<std::size_t> canonical_order(MatrixView<float> points) {
    std::vector<std::size_t> order(points.n_rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        const auto rx = points.row(x);
        const auto ry = points.row(y);
        return std::lexicographical_compare(rx.begin(), rx.end(), ry.begin(), ry.end());
    });
    return order;
}

double sq_dist(const MatrixF64& a, std::size_t i, const MatrixF64& b, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.n_cols; ++c) {
        const double d = a(i, c) - b(j, c);
        s += d * d;
    }
    return s;
}

MatrixF64 seed_plus_plus(const MatrixF64& x, std::size_t k, Rng& rng) {
    const std::size_t n = x.n_rows;
    MatrixF64 centers(k, x.n_cols);
    auto copy_point = [&](std::size_t j, std::size_t i) {
        std::copy_n(x.data.begin() + static_cast<std::ptrdiff_t>(i * x.n_cols), x.n_cols,
                    centers.data.begin() + static_cast<std::ptrdiff_t>(j * x.n_cols));
    };
    copy_point(0, rng.index(n));
    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) {
        nearest[i] = sq_dist(x, i, centers, 0);
    }
    for (std::size_t j = 1; j < k; ++j) {
        const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform01() * total;
            double cumulative = 0.0;
            pick = n;
            for (std::size_t i = 0; i < n; ++i) {
                cumulative += nearest[i];
                if (cumulative > target && nearest[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) {
                // Rounding left the target past the last positive weight.
                for (std::size_t i = n; i-- > 0;) {
                    if (nearest[i] > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        } else {
            pick = rng.index(n);
        }
        copy_point(j, pick);
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], sq_dist(x, i, centers, j));
        }
    }
    return centers;
}

struct LloydRun {
    MatrixF64 centers;
    std::vector<double> trace;
    int iters = 0;
};

LloydRun lloyd(const MatrixF64& x, MatrixF64 centers, const KMeansConfig& cfg) {
    const std::size_t n = x.n_rows;
    const std::size_t k = centers.n_rows;
    const std::size_t d = x.n_cols;
    std::vector<std::uint32_t> labels(n, 0);
    std::vector<std::uint32_t> previous_labels;
    LloydRun run;
    for (int it = 0;; ++it) {
        std::vector<double> dist = kernels::assign_nearest(x.view(), centers.view(), labels);
        const double current = std::accumulate(dist.begin(), dist.end(), 0.0);
        run.trace.push_back(current);
        run.iters = it;
        if (it > 0) {
            const double prev = run.trace[run.trace.size() - 2];
            if (labels == previous_labels || prev <= 0.0 || (prev - current) < cfg.tol * prev) {
                break;
            }
        }
        if (it + 1 >= cfg.max_iters) {
            break;
        }
        previous_labels = labels;

        // Centroid update.
        MatrixF64 sums(k, d);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[labels[i]];
            for (std::size_t c = 0; c < d; ++c) {
                sums(labels[i], c) += x(i, c);
            }
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] == 0) {
                continue;
            }
            for (std::size_t c = 0; c < d; ++c) {
                centers(j, c) = sums(j, c) / static_cast<double>(counts[j]);
            }
        }
        // Empty clusters take the point farthest from its current center.
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] != 0) {
                continue;
            }
            const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
            for (std::size_t c = 0; c < d; ++c) {
                centers(j, c) = x(far, c);
            }
            dist[far] = 0.0;
        }
    }
    run.centers = std::move(centers);
    return run;
}

std::filesystem::path strip_fst(const std::filesystem::path& base) {
    if (base.extension() == ".fst") {
        auto p = base;
        p.replace_extension();
        return p;
    }
    return base;
}

std::filesystem::path with_suffix(const std::filesystem::path& base, const char* suffix) {
    auto p = base;
    p += suffix;
    return p;
}

}  // namespace

ClusterModel::ClusterModel(DenseMatrix centers, MetaMap meta) : centers_(std::move(centers)), meta_(std::move(meta)) {
    if (centers_.n_rows() == 0) {
        throw DimensionError("cluster model needs at least one center");
    }
    for (std::size_t r = 0; r < centers_.n_rows(); ++r) {
        bool nonzero = false;
        for (const float v : centers_.row(r)) {
            if (!std::isfinite(v) || v < 0.0F) {
                throw InputError(fmt::format("cluster center {} has a negative or non-finite entry", r));
            }
            nonzero = nonzero || v > 0.0F;
        }
        if (!nonzero) {
            throw DegenerateError(fmt::format("cluster center {} is all-zero", r));
        }
    }
}

void KMeansConfig::validate() const {
    if (k < 2) {
        throw InputError("k-means needs k >= 2");
    }
    if (n_init < 1) {
        throw InputError("k-means n_init must be >= 1");
    }
    if (max_iters < 1) {
        throw InputError("k-means max_iters must be >= 1");
    }
    if (!(tol >= 0.0)) {
        throw InputError("k-means tol must be >= 0");
    }
}

std::vector<float> gap_pool(const FeatureTensor& tensor) {
    const auto means = kernels::column_means(tensor.flat());
    return {means.begin(), means.end()};
}

KMeansResult kmeans_run(MatrixView<float> points, const KMeansConfig& cfg) {
    cfg.validate();
    if (points.n_rows < cfg.k) {
        throw InsufficientDataError(fmt::format("k-means with k = {} needs at least {} points, got {}", cfg.k,
                                                cfg.k, points.n_rows));
    }
    check_points(points);

    const auto order = canonical_order(points);
    MatrixF64 sorted(points.n_rows, points.n_cols);
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t c = 0; c < points.n_cols; ++c) {
            sorted(i, c) = points(order[i], c);
        }
    }

    Rng rng(cfg.seed);
    LloydRun best;
    for (int restart = 0; restart < cfg.n_init; ++restart) {
        LloydRun run = lloyd(sorted, seed_plus_plus(sorted, cfg.k, rng), cfg);
        if (restart == 0 || run.trace.back() < best.trace.back()) {
            best = std::move(run);
        }
    }

    KMeansResult result;
    result.centers = kernels::to_dense(best.centers);
    result.inertia_trace = std::move(best.trace);
    result.n_iters = best.iters;
    result.labels.resize(points.n_rows);
    const MatrixF64 x = kernels::to_f64(points);
    const MatrixF64 centers = kernels::to_f64(result.centers.view());
    const auto dist = kernels::assign_nearest(x.view(), centers.view(), result.labels);
    result.inertia = std::accumulate(dist.begin(), dist.end(), 0.0);
    return result;
}

ClusterModel kmeans_fit(MatrixView<float> points, const KMeansConfig& cfg, MetaMap meta) {
    return ClusterModel(kmeans_run(points, cfg).centers, std::move(meta));
}

LabelMask kmeans_assign(MatrixView<float> points, const ClusterModel& model) {
    if (points.n_cols != model.channels()) {
        throw DimensionError(
            fmt::format("points have {} channels, cluster model has {}", points.n_cols, model.channels()));
    }
    if (points.n_rows == 0) {
        throw DimensionError("no points to assign");
    }
    std::vector<std::uint32_t> labels(points.n_rows);
    const MatrixF64 x = kernels::to_f64(points);
    const MatrixF64 centers = kernels::to_f64(model.centers().view());
    kernels::assign_nearest(x.view(), centers.view(), labels);
    return LabelMask(1, points.n_rows, static_cast<std::uint32_t>(model.k()), std::move(labels));
}

double inertia(MatrixView<float> points, const DenseMatrix& centers) {
    if (points.n_cols != centers.n_cols()) {
        throw DimensionError("points and centers differ in dimension");
    }
    std::vector<std::uint32_t> labels(points.n_rows);
    const MatrixF64 x = kernels::to_f64(points);
    const MatrixF64 c = kernels::to_f64(centers.view());
    const auto dist = kernels::assign_nearest(x.view(), c.view(), labels);
    return std::accumulate(dist.begin(), dist.end(), 0.0);
}

void save_cluster_model(const std::filesystem::path& base, const ClusterModel& model) {
    const auto stem = strip_fst(base);
    write_fst(with_suffix(stem, ".fst"), model.centers());
    const auto meta_path = with_suffix(stem, ".meta.json");
    std::ofstream out(meta_path, std::ios::trunc);
    if (!out) {
        throw IoError(fmt::format("cannot open {} for writing", meta_path.string()));
    }
    out << nlohmann::json(model.meta()).dump(2) << '\n';
}

ClusterModel load_cluster_model(const std::filesystem::path& base) {
    const auto stem = strip_fst(base);
    DenseMatrix centers = read_matrix(with_suffix(stem, ".fst"));
    MetaMap meta;
    const auto meta_path = with_suffix(stem, ".meta.json");
    if (std::filesystem::exists(meta_path)) {
        std::ifstream in(meta_path);
        try {
            const auto j = nlohmann::json::parse(in);
            if (!j.is_object()) {
                throw FormatError("not a JSON object");
            }
            for (const auto& [key, value] : j.items()) {
                meta[key] = value.is_string() ? value.get<std::string>() : value.dump();
            }
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(fmt::format("{}: {}", meta_path.string(), e.what()));
        } catch (const FormatError& e) {
            throw FormatError(fmt::format("{}: {}", meta_path.string(), e.what()));
        }
    }
    return ClusterModel(std::move(centers), std::move(meta));
}

}  // namespace fseg
