#include <algorithm>

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

int run_eval_match(const EvalMatchOptions& opts) {
    if (opts.common.out.empty()) {
        throw IoError("eval-match needs --out");
    }
    Palette palette = read_palette(opts.palette);
    palette.unique_targets = opts.strict_palette;
    const std::uint32_t n_categories = palette.n_labels();

    const auto preds = detail::list_files(opts.pred_dir, {".fst"});
    const auto gts = detail::list_files(opts.gt_dir, {".png", ".pgm"});
    if (gts.empty()) {
        throw InsufficientDataError(fmt::format("no ground-truth masks in {}", opts.gt_dir.string()));
    }
    const detail::StemPairs paired = detail::pair_by_stem(preds, gts);
    for (const auto& path : paired.unpaired) {
        log::error("unpaired_file", {{"item", path.string()}});
    }
    if (paired.pairs.empty()) {
        throw InsufficientDataError("no prediction / ground-truth pairs share a file stem");
    }

    const std::size_t n = paired.pairs.size();
    std::vector<FrequencyMatrix> tile_freq(n);
    const auto failures = detail::parallel_for_items(n, opts.common.jobs, [&](std::size_t i) {
        const auto& [pred_path, gt_path] = paired.pairs[i];
        LabelMask pred = read_label_mask(pred_path);
        const LabelMask gt = read_gt_mask(gt_path, palette);
        if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
            pred = resize_labels_nearest(pred, {gt.rows(), gt.cols()});
        }
        tile_freq[i] = accumulate_frequencies(pred, gt, FrequencyMatrix(pred.n_labels(), n_categories));
    });
    std::vector<detail::fs::path> pred_paths;
    for (const auto& pair : paired.pairs) {
        pred_paths.push_back(pair.first);
    }
    const std::size_t n_failed = detail::report_failures(failures, pred_paths, "eval") + paired.unpaired.size();

    std::size_t n_clusters = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!failures[i]) {
            n_clusters = std::max(n_clusters, tile_freq[i].n_clusters());
        }
    }
    if (n_clusters == 0) {
        throw InsufficientDataError("no prediction / ground-truth pair could be evaluated");
    }
    // Merged in sorted stem order.
    FrequencyMatrix freq(n_clusters, n_categories);
    for (std::size_t i = 0; i < n; ++i) {
        if (failures[i]) {
            continue;
        }
        for (std::size_t c = 0; c < tile_freq[i].n_clusters(); ++c) {
            for (std::size_t g = 0; g < n_categories; ++g) {
                freq.add(c, g, tile_freq[i].at(c, g));
            }
        }
    }

    const ClusterMapping mapping = match_clusters(freq, opts.normalized);
    const F1Report report = f1_from_confusion(confusion_from_frequencies(freq, mapping));

    const detail::fs::path out_dir = opts.common.out;
    detail::ensure_directory(out_dir);
    write_text(out_dir / "frequency.csv", frequency_csv(freq));
    write_text(out_dir / "mapping.json", mapping_json(mapping).dump(2) + "\n");
    write_text(out_dir / "f1.csv", f1_report_csv(report));
    write_text(out_dir / "f1.json", f1_report_json(report).dump(2) + "\n");
    log::info("eval_match_done", {{"pairs", std::to_string(n)},
                                  {"failed", std::to_string(n_failed)},
                                  {"macro_f1", report.macro_f1 ? fmt::format("{:.6f}", *report.macro_f1) : "null"}});

    detail::Manifest manifest("eval-match", opts.common);
    for (const auto& [pred_path, gt_path] : paired.pairs) {
        manifest.add_input(pred_path);
        manifest.add_input(gt_path);
    }
    for (const char* name : {"frequency.csv", "mapping.json", "f1.csv", "f1.json"}) {
        manifest.add_output(name);
    }
    manifest.parameters() = {{"pred_dir", opts.pred_dir.string()},
                             {"gt_dir", opts.gt_dir.string()},
                             {"palette", opts.palette.string()},
                             {"normalized", opts.normalized},
                             {"strict_palette", opts.strict_palette},
                             {"out", out_dir.string()}};
    manifest.set_failures(n_failed);
    manifest.write(out_dir / "manifest.json");
    return n_failed == 0 ? 0 : 1;
}

}  // namespace fseg::app
