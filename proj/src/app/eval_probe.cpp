#include <fmt/format.h>

#include "common.hpp"
#include "fseg/error.hpp"
#include "fseg/evaluation.hpp"
#include "fseg/fst.hpp"
#include "fseg/log.hpp"
#include "fseg/mask_io.hpp"
#include "fseg/report.hpp"
#include "fseg/segmentation.hpp"

namespace fseg::app {

namespace {

struct ProbeTile {
    /// Concept features only; W is dropped once the labels are taken.
    Factorization factorization;
    /// Concept labels at ground-truth resolution.
    LabelMask concepts;
    LabelMask gt;
};

struct TileBatch {
    std::vector<std::pair<detail::fs::path, detail::fs::path>> pairs;
    std::vector<ProbeTile> tiles;
    std::vector<std::optional<std::string>> failures;
    std::size_t n_failed = 0;
};

TileBatch factorize_tiles(const detail::fs::path& features_dir, const detail::fs::path& gt_dir,
                          const Palette& palette, const std::optional<ClusterModel>& model,
                          const EvalProbeOptions& opts) {
    const auto features = detail::list_files(features_dir, {".fst"});
    const auto gts = detail::list_files(gt_dir, {".png", ".pgm"});
    if (features.empty()) {
        throw InsufficientDataError(fmt::format("no .fst tensors in {}", features_dir.string()));
    }
    if (gts.empty()) {
        throw InsufficientDataError(fmt::format("no ground-truth masks in {}", gt_dir.string()));
    }
    detail::StemPairs paired = detail::pair_by_stem(features, gts);
    for (const auto& path : paired.unpaired) {
        log::error("unpaired_file", {{"item", path.string()}});
    }
    if (paired.pairs.empty()) {
        throw InsufficientDataError("no feature / ground-truth pairs share a file stem");
    }

    TileBatch batch;
    batch.pairs = std::move(paired.pairs);
    batch.tiles.resize(batch.pairs.size());
    const NmfConfig nmf = opts.nmf.config(opts.common.seed);
    batch.failures = detail::parallel_for_items(batch.pairs.size(), opts.common.jobs, [&](std::size_t i) {
        const auto& [feature_path, gt_path] = batch.pairs[i];
        const FeatureTensor tensor = read_feature_tensor(feature_path);
        Factorization f = model ? nmf_solve_w(tensor, model->centers(), nmf)
                                : nmf_factorize(tensor, *opts.k_concepts, nmf);
        LabelMask concepts = concept_labels(f.w, tensor.rows(), tensor.cols());
        LabelMask gt = read_gt_mask(gt_path, palette);
        if (concepts.rows() != gt.rows() || concepts.cols() != gt.cols()) {
            concepts = resize_labels_nearest(concepts, {gt.rows(), gt.cols()});
        }
        f.w = DenseMatrix();
        batch.tiles[i] = ProbeTile{std::move(f), std::move(concepts), std::move(gt)};
    });
    std::vector<detail::fs::path> items;
    for (const auto& pair : batch.pairs) {
        items.push_back(pair.first);
    }
    batch.n_failed = detail::report_failures(batch.failures, items, "factorize") + paired.unpaired.size();
    return batch;
}

}  // namespace

int run_eval_probe(const EvalProbeOptions& opts) {
    if (opts.common.out.empty()) {
        throw IoError("eval-probe needs --out");
    }
    std::optional<ClusterModel> model;
    if (opts.mode == SegmentationMode::FixedH) {
        if (!opts.model) {
            throw InputError("--mode fixed-h requires --model");
        }
        model = load_cluster_model(*opts.model);
    } else if (!opts.k_concepts || *opts.k_concepts == 0) {
        throw InputError("--mode full-nmf requires --k-concepts");
    }
    if (opts.test_features_dir.has_value() != opts.test_gt_dir.has_value()) {
        throw InputError("held-out evaluation needs both test feature and test ground-truth directories");
    }
    Palette palette = read_palette(opts.palette);
    palette.unique_targets = opts.strict_palette;
    const std::uint32_t n_categories = palette.n_labels();

    const TileBatch train = factorize_tiles(opts.features_dir, opts.gt_dir, palette, model, opts);
    ProbeSet set(opts.threshold);
    for (std::size_t i = 0; i < train.tiles.size(); ++i) {
        if (!train.failures[i]) {
            const ProbeTile& t = train.tiles[i];
            set = probe_collect(t.factorization, t.concepts, t.gt, opts.threshold, std::move(set));
        }
    }
    if (set.empty()) {
        throw InsufficientDataError(
            fmt::format("probe set is empty: no concept reached the {} purity threshold", opts.threshold));
    }

    ProbeTrainConfig cfg;
    cfg.reg = opts.reg;
    cfg.seed = opts.common.seed;
    cfg.max_iters = opts.probe_max_iters;
    cfg.use_bias = opts.use_bias;
    const ProbeTrainResult trained = probe_train_detailed(set, n_categories, cfg);
    log::info("probe_trained", {{"examples", std::to_string(set.size())},
                                {"iterations", std::to_string(trained.iterations)},
                                {"gradient_norm", fmt::format("{:.3g}", trained.gradient_norm)},
                                {"loss", fmt::format("{:.6g}", trained.loss)}});

    std::optional<TileBatch> held_out;
    if (opts.test_features_dir) {
        held_out = factorize_tiles(*opts.test_features_dir, *opts.test_gt_dir, palette, model, opts);
    }
    const TileBatch& eval = held_out ? *held_out : train;
    ConfusionMatrix confusion(n_categories);
    for (std::size_t i = 0; i < eval.tiles.size(); ++i) {
        if (eval.failures[i]) {
            continue;
        }
        const ProbeTile& t = eval.tiles[i];
        const auto concept_category = probe_classify(t.factorization.h, trained.probe);
        std::vector<std::uint32_t> labels(t.concepts.size());
        for (std::size_t p = 0; p < labels.size(); ++p) {
            labels[p] = concept_category[t.concepts[p]];
        }
        confusion.add(LabelMask(t.concepts.rows(), t.concepts.cols(), n_categories, std::move(labels)), t.gt);
    }
    const F1Report report = f1_from_confusion(confusion);

    std::vector<std::uint64_t> examples_per_category(n_categories, 0);
    for (const auto label : set.labels()) {
        ++examples_per_category[label];
    }
    const detail::fs::path out_dir = opts.common.out;
    detail::ensure_directory(out_dir);
    write_fst(out_dir / "probe.fst", probe_to_matrix(trained.probe));
    const nlohmann::json probe_info = {{"n_categories", n_categories},
                                       {"channels", set.channels()},
                                       {"use_bias", opts.use_bias},
                                       {"reg", opts.reg},
                                       {"threshold", opts.threshold},
                                       {"examples", set.size()},
                                       {"examples_per_category", examples_per_category},
                                       {"iterations", trained.iterations},
                                       {"gradient_norm", trained.gradient_norm},
                                       {"loss", trained.loss}};
    write_text(out_dir / "probe.json", probe_info.dump(2) + "\n");
    write_text(out_dir / "f1.csv", f1_report_csv(report));
    write_text(out_dir / "f1.json", f1_report_json(report).dump(2) + "\n");
    log::info("eval_probe_done",
              {{"macro_f1", report.macro_f1 ? fmt::format("{:.6f}", *report.macro_f1) : "null"}});

    const std::size_t n_failed = train.n_failed + (held_out ? held_out->n_failed : 0);
    detail::Manifest manifest("eval-probe", opts.common);
    for (const TileBatch* batch : std::initializer_list<const TileBatch*>{&train, held_out ? &*held_out : nullptr}) {
        if (batch == nullptr) {
            continue;
        }
        for (const auto& [feature_path, gt_path] : batch->pairs) {
            manifest.add_input(feature_path);
            manifest.add_input(gt_path);
        }
    }
    for (const char* name : {"probe.fst", "probe.json", "f1.csv", "f1.json"}) {
        manifest.add_output(name);
    }
    nlohmann::json params = {{"features_dir", opts.features_dir.string()},
                             {"gt_dir", opts.gt_dir.string()},
                             {"palette", opts.palette.string()},
                             {"mode", detail::mode_name(opts.mode)},
                             {"threshold", opts.threshold},
                             {"reg", opts.reg},
                             {"use_bias", opts.use_bias},
                             {"probe_max_iters", opts.probe_max_iters},
                             {"max_iters", opts.nmf.max_iters},
                             {"tol", opts.nmf.tol},
                             {"solver", detail::solver_name(opts.nmf.solver)},
                             {"strict_palette", opts.strict_palette},
                             {"out", out_dir.string()}};
    params["model"] = opts.model ? nlohmann::json(opts.model->string()) : nlohmann::json(nullptr);
    params["k_concepts"] = opts.k_concepts ? nlohmann::json(*opts.k_concepts) : nlohmann::json(nullptr);
    params["test_features_dir"] =
        opts.test_features_dir ? nlohmann::json(opts.test_features_dir->string()) : nlohmann::json(nullptr);
    params["test_gt_dir"] = opts.test_gt_dir ? nlohmann::json(opts.test_gt_dir->string()) : nlohmann::json(nullptr);
    manifest.parameters() = params;
    manifest.set_failures(n_failed);
    manifest.write(out_dir / "manifest.json");
    return n_failed == 0 ? 0 : 1;
}

}  // namespace fseg::app
