// fseg: batch front-end for clustering, segmentation and evaluation.
//
// Exit codes: 0 success, 1 some items failed and were skipped, 2 usage or
// fatal error.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fseg/app.hpp"
#include "fseg/error.hpp"
#include "fseg/log.hpp"

namespace {

const std::map<std::string, fseg::SegmentationMode> kModes{{"full-nmf", fseg::SegmentationMode::FullNmfCosine},
                                                            {"fixed-h", fseg::SegmentationMode::FixedH}};
const std::map<std::string, fseg::ResizeMode> kResizeModes{{"nearest", fseg::ResizeMode::NearestLabel},
                                                            {"bilinear-w", fseg::ResizeMode::BilinearW}};
const std::map<std::string, fseg::NmfSolver> kSolvers{{"hals", fseg::NmfSolver::Hals},
                                                       {"mu", fseg::NmfSolver::MultiplicativeUpdate}};
const std::map<std::string, fseg::log::Level> kLevels{{"debug", fseg::log::Level::Debug},
                                                       {"info", fseg::log::Level::Info},
                                                       {"warn", fseg::log::Level::Warn},
                                                       {"error", fseg::log::Level::Error}};

void add_nmf_flags(CLI::App* cmd, fseg::app::NmfOptions& nmf) {
    cmd->add_option("--max-iters", nmf.max_iters, "NMF iteration cap")->capture_default_str();
    cmd->add_option("--tol", nmf.tol, "NMF relative objective tolerance")->capture_default_str();
    cmd->add_option("--solver", nmf.solver, "NMF update rule")
        ->transform(CLI::CheckedTransformer(kSolvers, CLI::ignore_case))
        ->default_str("hals");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Segmentation by factorization of spatial feature tensors"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", fseg::app::kToolVersion);

    fseg::app::CommonOptions common;
    common.argv.assign(argv, argv + argc);
    fseg::log::Level level = fseg::log::Level::Info;
    app.add_option("--seed", common.seed, "Seed for every random draw")->capture_default_str();
    app.add_option("--jobs", common.jobs, "Worker threads (0 = logical cores)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--out", common.out, "Output path or directory");
    app.add_option("--log-level", level, "Minimum stderr log level")
        ->transform(CLI::CheckedTransformer(kLevels, CLI::ignore_case))
        ->default_str("info");

    fseg::app::ClusterFitOptions fit;
    std::vector<std::string> meta_pairs;
    auto* cmd_fit = app.add_subcommand("cluster-fit", "Fit k-means centers over pooled feature vectors");
    cmd_fit->add_option("features_dir", fit.features_dir, "Directory of 1-D, 2-D or 3-D .fst files")
        ->required()
        ->check(CLI::ExistingDirectory);
    cmd_fit->add_option("--k", fit.k, "Number of clusters")->required()->check(CLI::PositiveNumber);
    cmd_fit->add_option("--max-iters", fit.max_iters, "Lloyd iteration cap")->capture_default_str();
    cmd_fit->add_option("--tol", fit.tol, "Relative inertia tolerance")->capture_default_str();
    cmd_fit->add_option("--n-init", fit.n_init, "k-means++ restarts")->capture_default_str();
    cmd_fit->add_option("--meta", meta_pairs, "Extra KEY=VALUE metadata stored with the model");

    fseg::app::SegmentOptions seg;
    std::size_t seg_k = 0;
    std::string seg_resize;
    bool raw_pgm = false;
    auto* cmd_seg = app.add_subcommand("segment", "Segment feature tensors against a cluster model");
    cmd_seg->add_option("input", seg.input, "A .fst tensor or a directory of them")->required();
    cmd_seg->add_option("--model", seg.model, "Cluster model (.fst with .meta.json)")->required();
    cmd_seg->add_option("--mode", seg.mode, "Segmentation method")
        ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case))
        ->default_str("fixed-h");
    auto* seg_k_opt = cmd_seg->add_option("--k-concepts", seg_k, "Factorization rank (full-nmf)")
                          ->check(CLI::PositiveNumber);
    cmd_seg->add_option("--resize", seg_resize, "Upsample masks to HxW");
    cmd_seg->add_option("--resize-mode", seg.resize_mode, "Upsampling method")
        ->transform(CLI::CheckedTransformer(kResizeModes, CLI::ignore_case))
        ->default_str("nearest");
    cmd_seg->add_flag("--raw-pgm", raw_pgm, "Store label values verbatim in the PGM previews");
    add_nmf_flags(cmd_seg, seg.nmf);

    fseg::app::EvalMatchOptions em;
    auto* cmd_em = app.add_subcommand("eval-match", "Score cluster masks by matching clusters to categories");
    cmd_em->add_option("pred_dir", em.pred_dir, "Directory of predicted .fst label masks")
        ->required()
        ->check(CLI::ExistingDirectory);
    cmd_em->add_option("gt_dir", em.gt_dir, "Directory of ground-truth .png/.pgm masks")
        ->required()
        ->check(CLI::ExistingDirectory);
    cmd_em->add_option("--palette", em.palette, "Mask code to category table")->required();
    cmd_em->add_flag("--normalized", em.normalized, "Match on category-normalized frequencies");
    cmd_em->add_flag("--strict-palette", em.strict_palette, "Reject palettes that merge source codes");

    fseg::app::EvalProbeOptions ep;
    std::size_t ep_k = 0;
    std::string ep_model;
    std::string ep_test_features;
    std::string ep_test_gt;
    bool no_bias = false;
    auto* cmd_ep = app.add_subcommand("eval-probe", "Score concepts classified by a trained linear probe");
    cmd_ep->add_option("features_dir", ep.features_dir, "Directory of .fst feature tensors")
        ->required()
        ->check(CLI::ExistingDirectory);
    cmd_ep->add_option("gt_dir", ep.gt_dir, "Directory of ground-truth .png/.pgm masks")
        ->required()
        ->check(CLI::ExistingDirectory);
    cmd_ep->add_option("--palette", ep.palette, "Mask code to category table")->required();
    auto* ep_model_opt = cmd_ep->add_option("--model", ep_model, "Cluster model (fixed-h)");
    cmd_ep->add_option("--mode", ep.mode, "Factorization method")
        ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case))
        ->default_str("fixed-h");
    auto* ep_k_opt = cmd_ep->add_option("--k-concepts", ep_k, "Factorization rank (full-nmf)")
                         ->check(CLI::PositiveNumber);
    cmd_ep->add_option("--threshold", ep.threshold, "Minimum category share for a concept to join the probe set")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd_ep->add_option("--reg", ep.reg, "L2 penalty on probe weights")->capture_default_str();
    cmd_ep->add_flag("--no-bias", no_bias, "Train and classify without a bias term");
    cmd_ep->add_option("--probe-max-iters", ep.probe_max_iters, "Probe optimizer iteration cap")
        ->capture_default_str();
    cmd_ep->add_flag("--strict-palette", ep.strict_palette, "Reject palettes that merge source codes");
    auto* test_features_opt =
        cmd_ep->add_option("--test-features", ep_test_features, "Held-out tensors to score on");
    auto* test_gt_opt = cmd_ep->add_option("--test-gt", ep_test_gt, "Held-out ground truth to score on");
    test_features_opt->needs(test_gt_opt);
    test_gt_opt->needs(test_features_opt);
    add_nmf_flags(cmd_ep, ep.nmf);

    std::vector<std::filesystem::path> info_files;
    auto* cmd_info = app.add_subcommand("info", "Print FST headers");
    cmd_info->add_option("files", info_files, "FST files")->required();

    try {
        app.parse(argc, argv);
        if (cmd_seg->parsed() && seg.mode == fseg::SegmentationMode::FullNmfCosine && seg_k_opt->count() == 0) {
            throw CLI::RequiredError("--mode full-nmf requires --k-concepts");
        }
        if (cmd_ep->parsed()) {
            if (ep.mode == fseg::SegmentationMode::FullNmfCosine && ep_k_opt->count() == 0) {
                throw CLI::RequiredError("--mode full-nmf requires --k-concepts");
            }
            if (ep.mode == fseg::SegmentationMode::FixedH && ep_model_opt->count() == 0) {
                throw CLI::RequiredError("--mode fixed-h requires --model");
            }
        }
        if ((cmd_fit->parsed() || cmd_seg->parsed() || cmd_em->parsed() || cmd_ep->parsed()) && common.out.empty()) {
            throw CLI::RequiredError("--out");
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    fseg::log::set_level(level);

    try {
        if (cmd_fit->parsed()) {
            fit.common = common;
            for (const auto& pair : meta_pairs) {
                const auto eq = pair.find('=');
                if (eq == std::string::npos || eq == 0) {
                    throw fseg::InputError("--meta expects KEY=VALUE, got '" + pair + "'");
                }
                fit.meta[pair.substr(0, eq)] = pair.substr(eq + 1);
            }
            return fseg::app::run_cluster_fit(fit);
        }
        if (cmd_seg->parsed()) {
            seg.common = common;
            if (seg_k_opt->count() > 0) {
                seg.k_concepts = seg_k;
            }
            if (!seg_resize.empty()) {
                seg.resize = fseg::app::parse_grid_size(seg_resize);
            }
            seg.pgm_scale = !raw_pgm;
            return fseg::app::run_segment(seg);
        }
        if (cmd_em->parsed()) {
            em.common = common;
            return fseg::app::run_eval_match(em);
        }
        if (cmd_ep->parsed()) {
            ep.common = common;
            if (ep_k_opt->count() > 0) {
                ep.k_concepts = ep_k;
            }
            if (ep_model_opt->count() > 0) {
                ep.model = ep_model;
            }
            if (test_features_opt->count() > 0) {
                ep.test_features_dir = ep_test_features;
                ep.test_gt_dir = ep_test_gt;
            }
            ep.use_bias = !no_bias;
            return fseg::app::run_eval_probe(ep);
        }
        return fseg::app::run_info(info_files, std::cout);
    } catch (const std::exception& e) {
        fseg::log::error("fatal", {{"error", e.what()}});
        return 2;
    }
}
