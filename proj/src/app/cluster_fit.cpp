#include <fmt/format.h>

#include "common.hpp"
#include "fseg/clustering.hpp"
#include "fseg/error.hpp"
#include "fseg/fst.hpp"
#include "fseg/log.hpp"

namespace fseg::app {

namespace {

// Pooled feature vectors contributed by one file: GAP over a 3-D tensor, or
// every row of a 1-D/2-D matrix.
std::vector<std::vector<float>> vectors_from(const detail::fs::path& path) {
    const FstObject object = read_fst(path);
    if (const auto* tensor = std::get_if<FeatureTensor>(&object)) {
        return {gap_pool(*tensor)};
    }
    if (const auto* matrix = std::get_if<DenseMatrix>(&object)) {
        std::vector<std::vector<float>> rows;
        for (std::size_t r = 0; r < matrix->n_rows(); ++r) {
            const auto row = matrix->row(r);
            rows.emplace_back(row.begin(), row.end());
        }
        return rows;
    }
    throw FormatError(fmt::format("{}: label masks are not feature vectors", path.string()));
}

}  // namespace

int run_cluster_fit(const ClusterFitOptions& opts) {
    if (opts.common.out.empty()) {
        throw IoError("cluster-fit needs --out");
    }
    detail::Manifest manifest("cluster-fit", opts.common);
    const auto files = detail::list_files(opts.features_dir, {".fst"});
    if (files.empty()) {
        throw InsufficientDataError(fmt::format("no .fst feature files in {}", opts.features_dir.string()));
    }
    std::vector<std::vector<std::vector<float>>> per_file(files.size());
    const auto failures = detail::parallel_for_items(files.size(), opts.common.jobs,
                                                     [&](std::size_t i) { per_file[i] = vectors_from(files[i]); });
    const std::size_t n_failed = detail::report_failures(failures, files, "load");

    std::size_t channels = 0;
    std::vector<float> data;
    std::size_t n_vectors = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (failures[i]) {
            continue;
        }
        manifest.add_input(files[i]);
        for (const auto& v : per_file[i]) {
            if (channels == 0) {
                channels = v.size();
            } else if (v.size() != channels) {
                throw DimensionError(fmt::format("{}: {} channels, earlier files have {}", files[i].string(), v.size(),
                                                 channels));
            }
            data.insert(data.end(), v.begin(), v.end());
            ++n_vectors;
        }
    }
    if (n_vectors == 0) {
        throw InsufficientDataError("no feature vectors could be loaded");
    }

    KMeansConfig cfg;
    cfg.k = opts.k;
    cfg.seed = opts.common.seed;
    cfg.max_iters = opts.max_iters;
    cfg.tol = opts.tol;
    cfg.n_init = opts.n_init;
    const MatrixView<float> points{n_vectors, channels, data};
    const KMeansResult fit = kmeans_run(points, cfg);

    MetaMap meta = opts.meta;
    meta.emplace("k", std::to_string(cfg.k));
    meta.emplace("channels", std::to_string(channels));
    meta.emplace("n_vectors", std::to_string(n_vectors));
    meta.emplace("n_files", std::to_string(files.size() - n_failed));
    meta.emplace("seed", std::to_string(cfg.seed));
    meta.emplace("n_init", std::to_string(cfg.n_init));
    meta.emplace("inertia", fmt::format("{:.9g}", fit.inertia));
    const ClusterModel model(fit.centers, meta);

    auto base = opts.common.out;
    if (base.extension() == ".fst") {
        base.replace_extension();
    }
    if (base.has_parent_path()) {
        detail::ensure_directory(base.parent_path());
    }
    save_cluster_model(base, model);
    log::info("cluster_model_written", {{"path", base.string()},
                                        {"k", std::to_string(cfg.k)},
                                        {"vectors", std::to_string(n_vectors)},
                                        {"inertia", fmt::format("{:.6g}", fit.inertia)}});

    auto with = [&](const char* suffix) {
        auto p = base;
        p += suffix;
        return p;
    };
    manifest.add_output(with(".fst"));
    manifest.add_output(with(".meta.json"));
    manifest.parameters() = {{"features_dir", opts.features_dir.string()},
                             {"k", cfg.k},
                             {"max_iters", cfg.max_iters},
                             {"tol", cfg.tol},
                             {"n_init", cfg.n_init},
                             {"out", base.string()}};
    manifest.set_failures(n_failed);
    manifest.write(with(".manifest.json"));
    return n_failed == 0 ? 0 : 1;
}

}  // namespace fseg::app
