#pragma once

// FST v1 binary container, little-endian throughout:
//
//   offset 0  magic "FSEG"
//          4  u16 version (= 1)
//          6  u8  dtype   (0 = f32, 1 = u32 labels)
//          7  u8  ndim    (1, 2 or 3)
//          8  ndim x u32 dimensions (rows, cols, channels | n_rows, n_cols | length)
//             payload, row-major, 4 bytes per element
//             dtype 1 only: trailing u32 n_labels
//
// ndim 3 / f32 is a FeatureTensor, ndim 1-2 / f32 a DenseMatrix (1-D reads as
// a single row), dtype 1 a LabelMask (1-D reads as a single row). Objects with
// a single row are written 1-D so that encoding stays a function of the object.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "fseg/tensor.hpp"

namespace fseg {

using FstObject = std::variant<FeatureTensor, DenseMatrix, LabelMask>;

enum class FstDtype : std::uint8_t { F32 = 0, U32Labels = 1 };

struct FstHeader {
    std::uint16_t version = 1;
    FstDtype dtype = FstDtype::F32;
    std::uint8_t ndim = 0;
    std::array<std::uint32_t, 3> dims{};
    std::uint32_t n_labels = 0;  // dtype U32Labels only
    std::uint64_t file_size = 0;
};

inline constexpr std::array<char, 4> kFstMagic{'F', 'S', 'E', 'G'};
inline constexpr std::uint16_t kFstVersion = 1;

std::vector<std::uint8_t> encode_fst(const FstObject& object);
FstObject decode_fst(std::span<const std::uint8_t> bytes);

void write_fst(const std::filesystem::path& path, const FstObject& object);
FstObject read_fst(const std::filesystem::path& path);

/// Parses only the header (and trailing n_labels for label files).
FstHeader read_fst_header(const std::filesystem::path& path);

/// Typed readers; throw FormatError naming the expected kind on mismatch.
FeatureTensor read_feature_tensor(const std::filesystem::path& path);
DenseMatrix read_matrix(const std::filesystem::path& path);
LabelMask read_label_mask(const std::filesystem::path& path);

}  // namespace fseg
