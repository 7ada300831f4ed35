#include "common.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <thread>

#include <fmt/format.h>
#include <omp.h>

#include "fseg/error.hpp"
#include "fseg/log.hpp"
#include "fseg/report.hpp"

namespace fseg::app {

NmfConfig NmfOptions::config(std::uint64_t seed) const {
    NmfConfig cfg;
    cfg.max_iters = max_iters;
    cfg.tol = tol;
    cfg.seed = seed;
    cfg.solver = solver;
    return cfg;
}

GridSize parse_grid_size(const std::string& text) {
    const auto x = text.find_first_of("xX");
    if (x == std::string::npos) {
        throw InputError(fmt::format("bad size '{}': expected HxW", text));
    }
    try {
        std::size_t used_h = 0;
        std::size_t used_w = 0;
        const std::string h = text.substr(0, x);
        const std::string w = text.substr(x + 1);
        const auto rows = std::stoul(h, &used_h);
        const auto cols = std::stoul(w, &used_w);
        if (used_h != h.size() || used_w != w.size() || rows == 0 || cols == 0) {
            throw InputError("");
        }
        return {rows, cols};
    } catch (const std::exception&) {
        throw InputError(fmt::format("bad size '{}': expected HxW with positive integers", text));
    }
}

}  // namespace fseg::app

namespace fseg::app::detail {

std::vector<fs::path> list_files(const fs::path& dir, std::initializer_list<std::string_view> extensions) {
    if (!fs::is_directory(dir)) {
        throw IoError(fmt::format("{} is not a directory", dir.string()));
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (std::find(extensions.begin(), extensions.end(), ext) != extensions.end()) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return files;
}

StemPairs pair_by_stem(const std::vector<fs::path>& left, const std::vector<fs::path>& right) {
    std::map<std::string, std::vector<fs::path>> l;
    std::map<std::string, std::vector<fs::path>> r;
    for (const auto& p : left) {
        l[p.stem().string()].push_back(p);
    }
    for (const auto& p : right) {
        r[p.stem().string()].push_back(p);
    }
    StemPairs out;
    for (const auto& [stem, files] : l) {
        const auto it = r.find(stem);
        if (files.size() == 1 && it != r.end() && it->second.size() == 1) {
            out.pairs.emplace_back(files.front(), it->second.front());
        } else {
            out.unpaired.insert(out.unpaired.end(), files.begin(), files.end());
        }
    }
    for (const auto& [stem, files] : r) {
        const auto it = l.find(stem);
        if (it == l.end() || files.size() != 1 || it->second.size() != 1) {
            out.unpaired.insert(out.unpaired.end(), files.begin(), files.end());
        }
    }
    return out;
}

int resolve_jobs(int jobs) {
    if (jobs > 0) {
        return jobs;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<std::optional<std::string>> parallel_for_items(std::size_t n, int jobs,
                                                           const std::function<void(std::size_t)>& fn) {
    std::vector<std::optional<std::string>> failures(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_jobs(jobs))
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        const auto item = static_cast<std::size_t>(i);
        try {
            fn(item);
        } catch (const std::exception& e) {
            failures[item] = e.what();
        }
    }
    return failures;
}

std::size_t report_failures(const std::vector<std::optional<std::string>>& failures,
                            const std::vector<fs::path>& items, std::string_view stage) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < failures.size(); ++i) {
        if (failures[i]) {
            ++n;
            log::error("item_failed", {{"stage", std::string(stage)}, {"item", items[i].string()}, {"error", *failures[i]}});
        }
    }
    return n;
}

void ensure_directory(const fs::path& dir) {
    if (dir.empty()) {
        throw IoError("output path is empty");
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
    }
}

Manifest::Manifest(std::string command, const CommonOptions& common)
    : command_(std::move(command)),
      argv_(common.argv),
      seed_(common.seed),
      jobs_(resolve_jobs(common.jobs)),
      start_(std::chrono::steady_clock::now()) {}

void Manifest::write(const fs::path& path) const {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
    nlohmann::json j;
    j["command"] = command_;
    j["argv"] = argv_;
    j["parameters"] = parameters_;
    j["seed"] = seed_;
    j["jobs"] = jobs_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    j["failures"] = failures_;
    j["tool_version"] = kToolVersion;
    j["duration_seconds"] = elapsed.count();
    write_text(path, j.dump(2) + "\n");
}

const char* mode_name(SegmentationMode mode) {
    return mode == SegmentationMode::FixedH ? "fixed-h" : "full-nmf";
}

const char* resize_mode_name(ResizeMode mode) {
    return mode == ResizeMode::NearestLabel ? "nearest" : "bilinear-w";
}

const char* solver_name(NmfSolver solver) { return solver == NmfSolver::Hals ? "hals" : "mu"; }

}  // namespace fseg::app::detail
