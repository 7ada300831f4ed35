#include "fseg/report.hpp"

#include <fstream>

#include <fmt/format.h>

#include "fseg/error.hpp"

namespace fseg {

namespace {

std::string name_of(const std::vector<std::string>& names, std::size_t g) {
    return g < names.size() ? names[g] : std::to_string(g);
}

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string optional_csv(const std::optional<double>& v) { return v ? fmt::format("{:.6f}", *v) : std::string(); }

}  // namespace

nlohmann::json f1_report_json(const F1Report& report, const std::vector<std::string>& category_names) {
    nlohmann::json j = nlohmann::json::object();
    j["macro_f1"] = optional_json(report.macro_f1);
    j["micro_f1"] = optional_json(report.micro_f1);
    j["evaluated_pixels"] = report.evaluated_pixels;
    j["n_categories"] = report.per_class_f1.size();
    for (std::size_t g = 0; g < report.per_class_f1.size(); ++g) {
        const std::string name = name_of(category_names, g);
        j["f1_" + name] = optional_json(report.per_class_f1[g]);
        j["precision_" + name] = optional_json(report.per_class_precision[g]);
        j["recall_" + name] = optional_json(report.per_class_recall[g]);
        j["pixels_" + name] = report.pixel_counts[g];
        j["predicted_" + name] = report.predicted_counts[g];
    }
    return j;
}

std::string f1_report_csv(const F1Report& report, const std::vector<std::string>& category_names) {
    std::string out = "category,pixels,predicted,precision,recall,f1\n";
    for (std::size_t g = 0; g < report.per_class_f1.size(); ++g) {
        out += fmt::format("{},{},{},{},{},{}\n", name_of(category_names, g), report.pixel_counts[g],
                           report.predicted_counts[g], optional_csv(report.per_class_precision[g]),
                           optional_csv(report.per_class_recall[g]), optional_csv(report.per_class_f1[g]));
    }
    out += fmt::format("macro,{},,,,{}\n", report.evaluated_pixels, optional_csv(report.macro_f1));
    out += fmt::format("micro,{},,,,{}\n", report.evaluated_pixels, optional_csv(report.micro_f1));
    return out;
}

std::string frequency_csv(const FrequencyMatrix& freq, const std::vector<std::string>& category_names) {
    std::string out = "cluster";
    for (std::size_t g = 0; g < freq.n_categories(); ++g) {
        out += "," + name_of(category_names, g);
    }
    out += '\n';
    for (std::size_t c = 0; c < freq.n_clusters(); ++c) {
        out += std::to_string(c);
        for (std::size_t g = 0; g < freq.n_categories(); ++g) {
            out += "," + std::to_string(freq.at(c, g));
        }
        out += '\n';
    }
    return out;
}

nlohmann::json mapping_json(const ClusterMapping& mapping) {
    return {{"normalized", mapping.normalized}, {"n_categories", mapping.n_categories}, {"map", mapping.map}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(fmt::format("cannot open {} for writing", path.string()));
    }
    out << text;
    if (!out) {
        throw IoError(fmt::format("write failure on {}", path.string()));
    }
}

}  // namespace fseg
