#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fseg/evaluation.hpp"

namespace fseg {

/// Flat object: macro_f1, micro_f1, evaluated_pixels, then f1_<g>,
/// precision_<g>, recall_<g>, pixels_<g>, predicted_<g> per category.
/// Undefined values are null.
nlohmann::json f1_report_json(const F1Report& report, const std::vector<std::string>& category_names = {});

/// One row per category plus a trailing `macro` row; undefined values are empty.
std::string f1_report_csv(const F1Report& report, const std::vector<std::string>& category_names = {});

/// `cluster,<category...>` header, one row of counts per cluster.
std::string frequency_csv(const FrequencyMatrix& freq, const std::vector<std::string>& category_names = {});

nlohmann::json mapping_json(const ClusterMapping& mapping);

/// Writes `text` to `path`, throwing IoError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fseg
