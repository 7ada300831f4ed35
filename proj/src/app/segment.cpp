#include <fmt/format.h>

#include "common.hpp"
#include "fseg/error.hpp"
#include "fseg/fst.hpp"
#include "fseg/log.hpp"
#include "fseg/mask_io.hpp"
#include "fseg/report.hpp"

namespace fseg::app {

namespace {

std::vector<detail::fs::path> segment_inputs(const detail::fs::path& input) {
    if (detail::fs::is_directory(input)) {
        auto files = detail::list_files(input, {".fst"});
        if (files.empty()) {
            throw InsufficientDataError(fmt::format("no .fst tensors in {}", input.string()));
        }
        return files;
    }
    if (!detail::fs::is_regular_file(input)) {
        throw IoError(fmt::format("{}: no such file or directory", input.string()));
    }
    return {input};
}

}  // namespace

int run_segment(const SegmentOptions& opts) {
    if (opts.common.out.empty()) {
        throw IoError("segment needs --out");
    }
    if (opts.mode == SegmentationMode::FullNmfCosine && !opts.k_concepts) {
        throw InputError("--mode full-nmf requires --k-concepts");
    }
    SegmentationRequest req;
    req.mode = opts.mode;
    req.k_concepts = opts.k_concepts.value_or(0);
    req.resize_to = opts.resize;
    req.resize_mode = opts.resize_mode;
    req.nmf = opts.nmf.config(opts.common.seed);
    req.validate();

    const ClusterModel model = load_cluster_model(opts.model);
    const auto files = segment_inputs(opts.input);
    const detail::fs::path out_dir = opts.common.out;
    detail::ensure_directory(out_dir);
    detail::ensure_directory(out_dir / "concepts");

    detail::Manifest manifest("segment", opts.common);
    const auto failures = detail::parallel_for_items(files.size(), opts.common.jobs, [&](std::size_t i) {
        const auto& path = files[i];
        const std::string stem = path.stem().string();
        const FeatureTensor tensor = read_feature_tensor(path);
        const SegmentationResult result = segment_tile(tensor, model, req);
        const LabelMask& final_mask = result.resized_mask ? *result.resized_mask : result.cluster_mask;

        write_fst(out_dir / (stem + ".fst"), final_mask);
        write_mask_pgm(out_dir / (stem + ".pgm"), final_mask, opts.pgm_scale);
        write_fst(out_dir / "concepts" / (stem + ".fst"), result.concept_mask);
        const nlohmann::json info = {{"mode", detail::mode_name(opts.mode)},
                                     {"rank", result.factorization.k_c},
                                     {"grid_rows", tensor.rows()},
                                     {"grid_cols", tensor.cols()},
                                     {"mask_rows", final_mask.rows()},
                                     {"mask_cols", final_mask.cols()},
                                     {"final_error", result.factorization.final_error},
                                     {"n_iters", result.factorization.n_iters},
                                     {"concept_to_cluster", result.concept_to_cluster}};
        write_text(out_dir / (stem + ".json"), info.dump(2) + "\n");
        log::debug("tile_segmented", {{"item", path.string()},
                                      {"final_error", fmt::format("{:.6g}", result.factorization.final_error)},
                                      {"n_iters", std::to_string(result.factorization.n_iters)}});
    });
    const std::size_t n_failed = detail::report_failures(failures, files, "segment");

    for (std::size_t i = 0; i < files.size(); ++i) {
        manifest.add_input(files[i]);
        if (failures[i]) {
            continue;
        }
        const std::string stem = files[i].stem().string();
        manifest.add_output(stem + ".fst");
        manifest.add_output(stem + ".pgm");
        manifest.add_output(stem + ".json");
    }
    nlohmann::json params = {{"input", opts.input.string()},
                             {"model", opts.model.string()},
                             {"mode", detail::mode_name(opts.mode)},
                             {"resize_mode", detail::resize_mode_name(opts.resize_mode)},
                             {"max_iters", opts.nmf.max_iters},
                             {"tol", opts.nmf.tol},
                             {"solver", detail::solver_name(opts.nmf.solver)},
                             {"pgm_scale", opts.pgm_scale},
                             {"out", out_dir.string()}};
    params["k_concepts"] = opts.k_concepts ? nlohmann::json(*opts.k_concepts) : nlohmann::json(nullptr);
    params["resize"] = opts.resize ? nlohmann::json(fmt::format("{}x{}", opts.resize->rows, opts.resize->cols))
                                   : nlohmann::json(nullptr);
    manifest.parameters() = params;
    manifest.set_failures(n_failed);
    manifest.write(out_dir / "manifest.json");
    log::info("segment_done", {{"tiles", std::to_string(files.size())}, {"failed", std::to_string(n_failed)}});
    return n_failed == 0 ? 0 : 1;
}

}  // namespace fseg::app
