#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string_view>
#include <vector>

#include "fseg/tensor.hpp"

namespace fseg {

/// 8-bit single-channel raster.
struct GrayImage {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> pixels;
};

/// Reads binary (P5) or ASCII (P2) PGM with maxval <= 255, or an 8-bit
/// grayscale / palette PNG. Palette PNGs yield raw palette indices.
GrayImage read_gray8(const std::filesystem::path& path);

/// Writes a binary P5 PGM with maxval 255.
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

/// Source-code to category mapping for ground-truth masks.
struct Palette {
    std::map<std::uint32_t, std::uint32_t> code_to_label;
    /// Reject palettes where two source codes share one target label.
    bool unique_targets = false;

    /// max(target) + 1; every value in 0..n_labels-1 is some code's target.
    [[nodiscard]] std::uint32_t n_labels() const;
};

/// Parses `source_code target_label` lines; `#` starts a comment. Targets must
/// cover 0..max contiguously and a source code may appear only once.
Palette parse_palette(std::string_view text);
Palette read_palette(const std::filesystem::path& path);

/// Remaps integer-coded mask pixels through the palette. Codes absent from the
/// palette become the ignore label (== n_labels).
LabelMask remap_codes(const GrayImage& image, const Palette& palette);
LabelMask read_gt_mask(const std::filesystem::path& path, const Palette& palette);

/// Writes labels as a P5 PGM plus a `<path>.txt` sidecar listing
/// `label value` pairs. Raw mode stores labels verbatim; scaled mode stretches
/// 0..n_labels-1 onto 0..255 and paints ignored pixels 255.
void write_mask_pgm(const std::filesystem::path& path, const LabelMask& mask, bool scale);

}  // namespace fseg
