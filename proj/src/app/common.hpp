#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fseg/app.hpp"

namespace fseg::app::detail {

namespace fs = std::filesystem;

/// Regular files directly under `dir` whose extension is one of `extensions`,
/// sorted by file name.
std::vector<fs::path> list_files(const fs::path& dir, std::initializer_list<std::string_view> extensions);

struct StemPairs {
    std::vector<std::pair<fs::path, fs::path>> pairs;  // (left, right), sorted by stem
    std::vector<fs::path> unpaired;
};

/// Pairs files with equal stems; duplicates and leftovers land in `unpaired`.
StemPairs pair_by_stem(const std::vector<fs::path>& left, const std::vector<fs::path>& right);

int resolve_jobs(int jobs);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Exceptions derived from
/// std::exception are captured per item; the returned vector holds the
/// message for each failed item.
std::vector<std::optional<std::string>> parallel_for_items(std::size_t n, int jobs,
                                                           const std::function<void(std::size_t)>& fn);

/// Logs each failure and returns how many there were.
std::size_t report_failures(const std::vector<std::optional<std::string>>& failures,
                            const std::vector<fs::path>& items, std::string_view stage);

void ensure_directory(const fs::path& dir);

class Manifest {
public:
    Manifest(std::string command, const CommonOptions& common);

    nlohmann::json& parameters() { return parameters_; }
    void add_input(const fs::path& path) { inputs_.push_back(path.string()); }
    void add_output(const fs::path& path) { outputs_.push_back(path.filename().string()); }
    void set_failures(std::size_t n) { failures_ = n; }

    void write(const fs::path& path) const;

private:
    std::string command_;
    std::vector<std::string> argv_;
    std::uint64_t seed_;
    int jobs_;
    nlohmann::json parameters_ = nlohmann::json::object();
    std::vector<std::string> inputs_;
    std::vector<std::string> outputs_;
    std::size_t failures_ = 0;
    std::chrono::steady_clock::time_point start_;
};

const char* mode_name(SegmentationMode mode);
const char* resize_mode_name(ResizeMode mode);
const char* solver_name(NmfSolver solver);

}  // namespace fseg::app::detail
