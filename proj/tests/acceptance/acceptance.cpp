// Acceptance suite: one PASS/FAIL line per criterion.
//
// usage: fseg_acceptance <path-to-fseg-executable>

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "corpus.hpp"
#include "fseg/clustering.hpp"
#include "fseg/evaluation.hpp"
#include "fseg/fst.hpp"
#include "fseg/log.hpp"
#include "fseg/nmf.hpp"
#include "fseg/segmentation.hpp"
#include "support.hpp"

using namespace fseg;
using namespace fseg::test;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (const char ch : s) {
        out += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
    }
    return out + "'";
}

fs::path g_tool;
fs::path g_log;

int run_tool(const std::vector<std::string>& args) {
    std::string cmd = shell_quote(g_tool.string());
    for (const auto& a : args) {
        cmd += " " + shell_quote(a);
    }
    cmd += " >>" + shell_quote(g_log.string()) + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run_argv(const std::vector<std::string>& argv) {
    return run_tool(std::vector<std::string>(argv.begin() + 1, argv.end()));
}

std::vector<std::uint8_t> file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

// ---------------------------------------------------------------------------

Outcome monotone_descent() {
    const auto start = Clock::now();
    int ok = 0;
    double worst_rise = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(1000 + seed);
        const std::size_t rows = 2 + rng.index(63);
        const std::size_t cols = 2 + rng.index(47);
        const std::size_t rank = std::min<std::size_t>(2 + rng.index(7), std::min(rows, cols));
        const DenseMatrix a = random_nonneg(rng, rows, cols, 0.3 + 0.7 * rng.uniform01());
        NmfConfig cfg;
        cfg.seed = seed;
        cfg.tol = 0.0;
        const auto f = nmf_factorize(a.view(), rank, cfg);
        bool good = true;
        for (std::size_t t = 1; t < f.objective_trace.size(); ++t) {
            const double rise = f.objective_trace[t] - f.objective_trace[t - 1];
            worst_rise = std::max(worst_rise, rise);
            good = good && rise <= 1e-6;
        }
        ok += good ? 1 : 0;
    }
    const double elapsed = seconds_since(start);
    return {ok == 50 && elapsed < 10.0,
            fmt::format("{}/50 traces non-increasing (largest rise {:.3g}), {:.2f} s", ok, worst_rise, elapsed)};
}

Outcome rank_exact_recovery() {
    int ok = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(2000 + seed);
        const std::size_t rows = 8 + rng.index(25);
        const std::size_t cols = 8 + rng.index(25);
        const std::size_t rank = 2 + rng.index(3);
        const DenseMatrix a = matmul(random_nonneg(rng, rows, rank, 0.5), random_nonneg(rng, rank, cols, 0.5));
        NmfConfig cfg;
        cfg.seed = seed;
        cfg.max_iters = 200;
        cfg.tol = 0.0;
        const auto f = nmf_factorize(a.view(), rank, cfg);
        const double rel = f.final_error / frobenius(a);
        worst = std::max(worst, rel);
        ok += rel < 1e-3 ? 1 : 0;
    }
    return {ok >= 18, fmt::format("{}/20 seeds below 1e-3 relative error in 200 iterations (worst {:.3g})", ok, worst)};
}

Outcome fixed_h_oracle_match() {
    int ok = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(3000 + seed);
        const std::size_t rows = 1 + rng.index(16);
        const std::size_t cols = 2 + rng.index(7);
        const std::size_t k = 1 + rng.index(4);
        const DenseMatrix a = random_nonneg(rng, rows, cols);
        const DenseMatrix h = random_nonneg(rng, k, cols);
        NmfConfig cfg;
        cfg.seed = seed;
        cfg.tol = 1e-7;
        cfg.max_iters = 1000;
        const auto f = nmf_solve_w(a.view(), h, cfg);
        const double got = f.final_error * f.final_error;
        const double want = fixed_h_oracle(a.view(), h);
        const double rel = std::abs(got - want) / std::max(want, 1e-12);
        worst = std::max(worst, rel);
        ok += rel <= 1e-3 && f.h == h ? 1 : 0;
    }
    return {ok == 20, fmt::format("{}/20 instances within 1e-3 of the active-set optimum (worst {:.3g})", ok, worst)};
}

// Fixture set: random points, duplicated points, and well-separated groups.
std::vector<std::pair<DenseMatrix, std::size_t>> kmeans_fixtures() {
    std::vector<std::pair<DenseMatrix, std::size_t>> out;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        Rng rng(4000 + seed);
        const std::size_t k = 2 + rng.index(2);
        const std::size_t n = k + rng.index(9 - k);
        const std::size_t d = 1 + rng.index(3);
        DenseMatrix pts = random_nonneg(rng, n, d);
        if (seed % 3 == 1) {
            for (std::size_t i = 1; i < n; i += 2) {
                for (std::size_t c = 0; c < d; ++c) {
                    pts(i, c) = pts(i - 1, c);
                }
            }
        } else if (seed % 3 == 2) {
            for (std::size_t i = 0; i < n; ++i) {
                pts(i, 0) += static_cast<float>(5 * (i % k));
            }
        }
        out.emplace_back(std::move(pts), k);
    }
    return out;
}

Outcome kmeans_global_optimum() {
    const auto fixtures = kmeans_fixtures();
    int ok = 0;
    double worst = 0.0;
    for (const auto& [pts, k] : fixtures) {
        KMeansConfig cfg;
        cfg.k = k;
        cfg.n_init = 16;
        const ClusterModel model = kmeans_fit(pts.view(), cfg);
        const double got = inertia(pts.view(), model.centers());
        const double best = kmeans_exhaustive(pts.view(), k);
        const double rel = std::abs(got - best) / std::max(best, 1e-12);
        worst = std::max(worst, best == 0.0 && got < 1e-12 ? 0.0 : rel);
        ok += (rel <= 1e-6 || std::abs(got - best) <= 1e-12) ? 1 : 0;
    }
    return {ok == static_cast<int>(fixtures.size()),
            fmt::format("{}/{} fixtures at the exhaustive optimum (worst relative gap {:.3g})", ok, fixtures.size(),
                        worst)};
}

double accuracy(const LabelMask& mask, const std::vector<std::uint32_t>& truth) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        hit += mask[i] == truth[i] ? 1 : 0;
    }
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

Outcome synthetic_end_to_end() {
    double worst_fixed = 1.0;
    double worst_full = 1.0;
    for (const std::size_t p : {2U, 4U, 8U}) {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            Rng rng(5000 + 10 * p + seed);
            const Mosaic m = make_mosaic(rng, p, 24, 24, 64, 0.05);
            const ClusterModel model(m.prototypes);
            SegmentationRequest fixed;
            fixed.nmf.seed = seed;
            worst_fixed = std::min(worst_fixed, accuracy(segment_tile(m.tensor, model, fixed).cluster_mask, m.truth));
            SegmentationRequest full;
            full.mode = SegmentationMode::FullNmfCosine;
            full.k_concepts = p;
            full.nmf.seed = seed;
            worst_full = std::min(worst_full, accuracy(segment_tile(m.tensor, model, full).cluster_mask, m.truth));
        }
    }
    return {worst_fixed >= 0.95 && worst_full >= 0.90,
            fmt::format("p in {{2,4,8}} x 3 seeds: worst fixed-h accuracy {:.4f}, worst full-nmf accuracy {:.4f}",
                        worst_fixed, worst_full)};
}

FrequencyMatrix freq_of(std::size_t clusters, std::size_t categories, const std::vector<std::uint64_t>& counts) {
    FrequencyMatrix f(clusters, categories);
    for (std::size_t c = 0; c < clusters; ++c) {
        for (std::size_t g = 0; g < categories; ++g) {
            f.add(c, g, counts[c * categories + g]);
        }
    }
    return f;
}

Outcome evaluation_arithmetic(const fs::path& work) {
    std::vector<std::string> problems;
    const auto f = freq_of(2, 2, {90, 10, 5, 5});
    if (match_clusters(f, false).map != std::vector<std::uint32_t>{0, 0}) {
        problems.emplace_back("plain map");
    }
    if (match_clusters(f, true).map != std::vector<std::uint32_t>{0, 1}) {
        problems.emplace_back("normalized map");
    }
    const auto r = f1_report(LabelMask(1, 4, 2, {0, 0, 1, 1}), LabelMask(1, 4, 2, {0, 1, 1, 1}), 2);
    if (!r.macro_f1 || std::abs(*r.macro_f1 - 0.7333) > 1e-4) {
        problems.emplace_back("macro F1");
    }

    int agree = 0;
    Rng rng(6000);
    for (int t = 0; t < 100; ++t) {
        const std::size_t clusters = 2 + rng.index(6);
        const std::size_t cats = 2 + rng.index(5);
        const std::uint64_t total = 20 + rng.index(200);
        std::vector<std::uint64_t> counts(clusters * cats, 0);
        for (std::size_t g = 0; g < cats; ++g) {
            for (std::uint64_t n = 0; n < total; ++n) {
                ++counts[rng.index(clusters) * cats + g];
            }
        }
        const auto m = freq_of(clusters, cats, counts);
        agree += match_clusters(m, true).map == match_clusters(m, false).map ? 1 : 0;
    }
    if (agree != 100) {
        problems.push_back(fmt::format("equal-totals agreement {}/100", agree));
    }

    // The same fixtures through the command line.
    const fs::path pred = work / "pred";
    const fs::path gt = work / "gt";
    fs::create_directories(pred);
    fs::create_directories(gt);
    write_fst(pred / "a.fst", LabelMask(1, 4, 2, {0, 0, 1, 1}));
    write_pgm(gt / "a.pgm", GrayImage{1, 4, {1, 2, 2, 2}});
    write_text(work / "palette.txt", "1 0\n2 1\n");
    run_tool({"eval-match", pred.string(), gt.string(), "--palette", (work / "palette.txt").string(), "--out",
              (work / "plain").string()});
    const auto cli = read_json(work / "plain" / "f1.json");
    if (cli.at("macro_f1").is_null() || std::abs(cli.at("macro_f1").get<double>() - 0.7333) > 1e-4) {
        problems.emplace_back("CLI macro F1");
    }

    // [[90,10],[5,5]] as two 110-pixel masks.
    std::vector<std::uint32_t> p;
    std::vector<std::uint8_t> g;
    const std::vector<std::array<std::size_t, 3>> cells{{0, 0, 90}, {0, 1, 10}, {1, 0, 5}, {1, 1, 5}};
    for (const auto& [c, cat, n] : cells) {
        p.insert(p.end(), n, static_cast<std::uint32_t>(c));
        g.insert(g.end(), n, static_cast<std::uint8_t>(cat + 1));
    }
    fs::create_directories(work / "pred2");
    fs::create_directories(work / "gt2");
    write_fst(work / "pred2" / "b.fst", LabelMask(10, 11, 2, p));
    write_pgm(work / "gt2" / "b.pgm", GrayImage{10, 11, g});
    run_tool({"eval-match", (work / "pred2").string(), (work / "gt2").string(), "--palette",
              (work / "palette.txt").string(), "--normalized", "--out", (work / "normalized").string()});
    const auto mapping = read_json(work / "normalized" / "mapping.json");
    if (mapping.at("map") != nlohmann::json::array({0, 1})) {
        problems.emplace_back("CLI normalized map");
    }

    std::string detail = problems.empty() ? "maps {0,0}/{0,1}, macro F1 0.7333, 100/100 equal-totals agreements, "
                                            "CLI reports match"
                                          : "mismatch: ";
    for (std::size_t i = 0; i < problems.size(); ++i) {
        detail += (i == 0 ? "" : ", ") + problems[i];
    }
    return {problems.empty(), detail};
}

ProbeSet ten_examples() {
    ProbeSet set(0.75);
    const std::vector<std::vector<float>> feats{{1.0F, 0.1F, 0.0F}, {0.9F, 0.2F, 0.1F}, {0.1F, 1.0F, 0.2F},
                                                {0.0F, 0.8F, 0.1F}, {0.2F, 0.1F, 1.0F}, {0.3F, 0.0F, 0.9F},
                                                {0.5F, 0.5F, 0.0F}, {0.6F, 0.4F, 0.2F}, {0.1F, 0.5F, 0.5F},
                                                {0.4F, 0.1F, 0.6F}};
    const std::vector<std::uint32_t> labels{0, 0, 1, 1, 2, 2, 0, 1, 2, 2};
    for (std::size_t i = 0; i < feats.size(); ++i) {
        set.add(feats[i], labels[i]);
    }
    return set;
}

Outcome probe_check(const fs::path& work) {
    const ProbeSet set = ten_examples();
    ProbeTrainConfig cfg;
    const LinearProbe probe = probe_train(set, 3, cfg);
    const std::vector<double> w(probe.weights.data().begin(), probe.weights.data().end());
    const std::vector<double> b(probe.bias.begin(), probe.bias.end());
    const auto obj = probe_objective(set, 3, w, b, cfg.reg, true);
    const double h = 1e-4;
    double max_diff = 0.0;
    auto loss = [&](const std::vector<double>& ww, const std::vector<double>& bb) {
        return probe_objective(set, 3, ww, bb, cfg.reg, true).loss;
    };
    for (std::size_t i = 0; i < w.size(); ++i) {
        auto wp = w;
        auto wm = w;
        wp[i] += h;
        wm[i] -= h;
        max_diff = std::max(max_diff, std::abs((loss(wp, b) - loss(wm, b)) / (2 * h) - obj.grad_weights[i]));
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        auto bp = b;
        auto bm = b;
        bp[i] += h;
        bm[i] -= h;
        max_diff = std::max(max_diff, std::abs((loss(w, bp) - loss(w, bm)) / (2 * h) - obj.grad_bias[i]));
    }

    const Corpus c = write_corpus(work, CorpusSpec{});
    const int code = run_tool({"eval-probe", c.features.string(), c.gt.string(), "--palette", c.palette.string(),
                               "--model", c.model.string(), "--out", (work / "probe").string()});
    double macro = -1.0;
    if (code == 0) {
        const auto report = read_json(work / "probe" / "f1.json");
        macro = report.at("macro_f1").is_null() ? -1.0 : report.at("macro_f1").get<double>();
    }
    return {max_diff < 1e-5 && macro == 1.0,
            fmt::format("finite-difference gap {:.3g}; eval-probe exit {} with macro F1 {:.6f}", max_diff, code, macro)};
}

// ---------------------------------------------------------------------------

std::map<std::string, std::vector<std::uint8_t>> tree_contents(const fs::path& root) {
    std::map<std::string, std::vector<std::uint8_t>> out;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().filename() != "manifest.json") {
            out[fs::relative(entry.path(), root).string()] = file_bytes(entry.path());
        }
    }
    return out;
}

// Re-runs the command recorded in `manifest` with --out redirected.
std::vector<std::string> rerun_argv(const nlohmann::json& manifest, const std::string& new_out) {
    auto argv = manifest.at("argv").get<std::vector<std::string>>();
    for (std::size_t i = 0; i + 1 < argv.size(); ++i) {
        if (argv[i] == "--out") {
            argv[i + 1] = new_out;
        }
    }
    return argv;
}

FstObject random_object(Rng& rng) {
    const std::size_t kind = rng.index(3);
    auto dim = [&] { return 1 + rng.index(rng.uniform01() < 0.1 ? 40 : 6); };
    auto value = [&](bool allow_negative) {
        const double u = rng.uniform01();
        float v = 0.0F;
        if (u < 0.05) {
            v = std::numeric_limits<float>::denorm_min() * static_cast<float>(1 + rng.index(1000));
        } else if (u < 0.1) {
            v = std::numeric_limits<float>::max() * static_cast<float>(rng.uniform01());
        } else if (u < 0.15) {
            v = 0.0F;
        } else {
            std::uint32_t bits = static_cast<std::uint32_t>(rng.next());
            bits &= 0x7FFFFFFFU;
            if ((bits & 0x7F800000U) == 0x7F800000U) {
                bits &= 0xBFFFFFFFU;
            }
            std::memcpy(&v, &bits, 4);
        }
        if (allow_negative && rng.uniform01() < 0.5) {
            v = -v;
        }
        return v;
    };
    if (kind == 0) {
        const std::size_t r = dim();
        const std::size_t c = dim();
        const std::size_t ch = dim();
        std::vector<float> data(r * c * ch);
        for (auto& v : data) {
            v = value(false);
        }
        return FeatureTensor(r, c, ch, std::move(data));
    }
    if (kind == 1) {
        const std::size_t r = dim();
        const std::size_t c = dim();
        std::vector<float> data(r * c);
        for (auto& v : data) {
            v = value(true);
        }
        return DenseMatrix(r, c, std::move(data));
    }
    const std::size_t r = dim();
    const std::size_t c = dim();
    const auto n_labels = static_cast<std::uint32_t>(1 + rng.index(rng.uniform01() < 0.1 ? 100000 : 10));
    std::vector<std::uint32_t> labels(r * c);
    for (auto& l : labels) {
        l = static_cast<std::uint32_t>(rng.index(n_labels + 1));
    }
    return LabelMask(r, c, n_labels, std::move(labels));
}

bool same_bits(const FstObject& a, const FstObject& b) {
    if (a.index() != b.index()) {
        return false;
    }
    auto floats_equal = [](std::span<const float> x, std::span<const float> y) {
        return x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size() * sizeof(float)) == 0;
    };
    if (const auto* t = std::get_if<FeatureTensor>(&a)) {
        const auto& u = std::get<FeatureTensor>(b);
        return t->rows() == u.rows() && t->cols() == u.cols() && t->channels() == u.channels() &&
               floats_equal(t->data(), u.data());
    }
    if (const auto* m = std::get_if<DenseMatrix>(&a)) {
        const auto& n = std::get<DenseMatrix>(b);
        return m->n_rows() == n.n_rows() && m->n_cols() == n.n_cols() && floats_equal(m->data(), n.data());
    }
    return std::get<LabelMask>(a) == std::get<LabelMask>(b);
}

Outcome determinism_and_format(const fs::path& work) {
    std::vector<std::string> problems;
    const Corpus c = write_corpus(work / "corpus", CorpusSpec{.seed = 7, .tiles = 5});
    const std::string feat = c.features.string();
    const fs::path runs = work / "runs";
    fs::create_directories(runs);

    struct Command {
        std::string name;
        std::vector<std::string> args;
        bool out_is_base = false;
    };
    const std::vector<Command> commands{
        {"cluster-fit", {"cluster-fit", feat, "--k", "3", "--seed", "5", "--meta", "layer=synthetic"}, true},
        {"segment-fixed-h", {"segment", feat, "--model", c.model.string(), "--resize", "16x16"}},
        {"segment-full-nmf",
         {"segment", feat, "--model", c.model.string(), "--mode", "full-nmf", "--k-concepts", "3", "--resize",
          "20x20", "--resize-mode", "bilinear-w", "--seed", "9"}},
        {"segment-single", {"segment", (c.features / "tile_00.fst").string(), "--model", c.model.string()}},
        {"eval-match",
         {"eval-match", (runs / "segment-fixed-h").string(), c.gt.string(), "--palette", c.palette.string()}},
        {"eval-match-normalized",
         {"eval-match", (runs / "segment-full-nmf").string(), c.gt.string(), "--palette", c.palette.string(),
          "--normalized"}},
        {"eval-probe",
         {"eval-probe", feat, c.gt.string(), "--palette", c.palette.string(), "--model", c.model.string(),
          "--threshold", "0.8"}},
        {"eval-probe-full-nmf",
         {"eval-probe", feat, c.gt.string(), "--palette", c.palette.string(), "--mode", "full-nmf", "--k-concepts",
          "4", "--no-bias"}},
    };
    int reproduced = 0;
    for (const auto& cmd : commands) {
        const fs::path out = runs / (cmd.out_is_base ? cmd.name + "/model" : cmd.name);
        auto args = cmd.args;
        args.insert(args.end(), {"--out", out.string()});
        if (run_tool(args) != 0) {
            problems.push_back(cmd.name + " failed");
            continue;
        }
        const fs::path manifest_path = cmd.out_is_base ? fs::path(out.string() + ".manifest.json") : out / "manifest.json";
        const auto manifest = read_json(manifest_path);
        const fs::path again = work / "again" / (cmd.out_is_base ? cmd.name + "/model" : cmd.name);
        if (run_argv(rerun_argv(manifest, again.string())) != 0) {
            problems.push_back(cmd.name + " re-run failed");
            continue;
        }
        const auto first = tree_contents(cmd.out_is_base ? out.parent_path() : out);
        auto second = tree_contents(cmd.out_is_base ? again.parent_path() : again);
        if (cmd.out_is_base) {
            second.erase("model.manifest.json");
            auto trimmed = first;
            trimmed.erase("model.manifest.json");
            if (trimmed == second && !trimmed.empty()) {
                ++reproduced;
            } else {
                problems.push_back(cmd.name + " differs");
            }
            continue;
        }
        if (first == second && !first.empty()) {
            ++reproduced;
        } else {
            problems.push_back(cmd.name + " differs");
        }
    }

    Rng rng(8000);
    int round_trips = 0;
    const fs::path fst_dir = work / "fst";
    fs::create_directories(fst_dir);
    for (int i = 0; i < 1000; ++i) {
        const FstObject obj = random_object(rng);
        const auto bytes = encode_fst(obj);
        const fs::path path = fst_dir / fmt::format("obj_{}.fst", i);
        write_fst(path, obj);
        const FstObject back = read_fst(path);
        round_trips += same_bits(obj, back) && encode_fst(back) == bytes && file_bytes(path) == bytes ? 1 : 0;
    }
    if (round_trips != 1000) {
        problems.push_back(fmt::format("{} round trips differ", 1000 - round_trips));
    }

    std::string detail = fmt::format("{}/{} commands byte-identical on re-run, {}/1000 FST round trips bit-exact",
                                     reproduced, commands.size(), round_trips);
    for (const auto& p : problems) {
        detail += "; " + p;
    }
    return {problems.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: fseg_acceptance <fseg-executable>\n";
        return 2;
    }
    g_tool = fs::absolute(argv[1]);
    log::set_level(log::Level::Error);
    TempDir work;
    g_log = work / "tool.log";

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"NMF monotone descent", monotone_descent},
        {"rank-exact recovery", rank_exact_recovery},
        {"fixed-H NNLS oracle", fixed_h_oracle_match},
        {"k-means global optimum", kmeans_global_optimum},
        {"synthetic end-to-end segmentation", synthetic_end_to_end},
        {"evaluation arithmetic", [&] { return evaluation_arithmetic(work / "c6"); }},
        {"probe gradient and separable corpus", [&] { return probe_check(work / "c7"); }},
        {"determinism and FST round trip", [&] { return determinism_and_format(work / "c8"); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << fmt::format("{} criterion {}: {}: {}", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                                 o.detail)
                  << std::endl;
    }
    if (failed > 0) {
        std::ifstream log_in(g_log);
        std::cout << "--- tool stderr ---\n" << log_in.rdbuf();
    }
    return failed == 0 ? 0 : 1;
}
