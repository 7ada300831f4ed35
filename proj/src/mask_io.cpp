#include "fseg/mask_io.hpp"

#include <charconv>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <png.h>

#include "fseg/error.hpp"

namespace fseg {

namespace {

bool has_png_signature(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::array<unsigned char, 8> sig{};
    in.read(reinterpret_cast<char*>(sig.data()), sig.size());
    return in.gcount() == 8 && png_sig_cmp(sig.data(), 0, 8) == 0;
}

// PNM header tokens, skipping whitespace and `#` comments.
std::string next_pnm_token(std::istream& in) {
    std::string token;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') {
                c = in.get();
            }
        } else if (std::isspace(c) != 0) {
            if (!token.empty()) {
                break;
            }
        } else {
            token.push_back(static_cast<char>(c));
        }
        c = in.get();
    }
    return token;
}

std::size_t parse_pnm_number(std::istream& in, const std::filesystem::path& path, const char* field) {
    const std::string token = next_pnm_token(in);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
        throw FormatError(fmt::format("{}: bad PGM {} '{}'", path.string(), field, token));
    }
    return value;
}

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(fmt::format("cannot open {} for reading", path.string()));
    }
    const std::string magic = next_pnm_token(in);
    if (magic != "P5" && magic != "P2") {
        throw FormatError(fmt::format("{}: unsupported image (expected PGM P5/P2 or PNG)", path.string()));
    }
    GrayImage img;
    img.cols = parse_pnm_number(in, path, "width");
    img.rows = parse_pnm_number(in, path, "height");
    const std::size_t maxval = parse_pnm_number(in, path, "maxval");
    if (img.cols == 0 || img.rows == 0) {
        throw FormatError(fmt::format("{}: empty PGM", path.string()));
    }
    if (maxval == 0 || maxval > 255) {
        throw UnsupportedError(fmt::format("{}: PGM maxval {} (only 8-bit supported)", path.string(), maxval));
    }
    img.pixels.resize(img.rows * img.cols);
    if (magic == "P5") {
        in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
        if (static_cast<std::size_t>(in.gcount()) != img.pixels.size()) {
            throw FormatError(fmt::format("{}: truncated PGM payload", path.string()));
        }
    } else {
        for (auto& p : img.pixels) {
            const std::size_t v = parse_pnm_number(in, path, "pixel");
            if (v > maxval) {
                throw FormatError(fmt::format("{}: PGM pixel {} exceeds maxval", path.string(), v));
            }
            p = static_cast<std::uint8_t>(v);
        }
    }
    return img;
}

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};

GrayImage read_png(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
    if (!file) {
        throw IoError(fmt::format("cannot open {} for reading", path.string()));
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialization failed");
    }
    GrayImage img;
    std::string failure;
    // No C++ objects with non-trivial destructors are created between setjmp
    // and the last libpng call.
    if (setjmp(png_jmpbuf(png)) != 0) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(fmt::format("{}: corrupt PNG", path.string()));
    }
    png_init_io(png, file.get());
    png_read_info(png, info);
    const auto color_type = png_get_color_type(png, info);
    const auto bit_depth = png_get_bit_depth(png, info);
    if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_PALETTE) {
        failure = "not a single-channel (grayscale or palette) PNG";
    } else if (bit_depth > 8) {
        failure = "16-bit PNG not supported";
    } else {
        if (bit_depth < 8) {
            png_set_packing(png);
        }
        png_read_update_info(png, info);
        img.cols = png_get_image_width(png, info);
        img.rows = png_get_image_height(png, info);
        img.pixels.resize(img.rows * img.cols);
        std::vector<png_bytep> row_ptrs(img.rows);
        for (std::size_t r = 0; r < img.rows; ++r) {
            row_ptrs[r] = img.pixels.data() + r * img.cols;
        }
        png_read_image(png, row_ptrs.data());
        png_read_end(png, nullptr);
    }
    png_destroy_read_struct(&png, &info, nullptr);
    if (!failure.empty()) {
        throw UnsupportedError(fmt::format("{}: {}", path.string(), failure));
    }
    return img;
}

std::uint32_t parse_u32(std::string_view token, std::size_t line_no, const char* what) {
    std::uint32_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw FormatError(fmt::format("palette line {}: bad {} '{}'", line_no, what, token));
    }
    return value;
}

}  // namespace

GrayImage read_gray8(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw IoError(fmt::format("{} does not exist", path.string()));
    }
    return has_png_signature(path) ? read_png(path) : read_pgm(path);
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
    if (path.empty()) {
        throw IoError("cannot write PGM: empty path");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(fmt::format("cannot open {} for writing", path.string()));
    }
    out << "P5\n" << image.cols << ' ' << image.rows << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) {
        throw IoError(fmt::format("write failure on {}", path.string()));
    }
}

std::uint32_t Palette::n_labels() const {
    std::uint32_t n = 0;
    for (const auto& [code, label] : code_to_label) {
        n = std::max(n, label + 1);
    }
    return n;
}

Palette parse_palette(std::string_view text) {
    Palette palette;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream fields(line);
        std::string source;
        std::string target;
        std::string extra;
        if (!(fields >> source)) {
            continue;
        }
        if (!(fields >> target) || (fields >> extra)) {
            throw FormatError(fmt::format("palette line {}: expected 'source_code target_label'", line_no));
        }
        const auto code = parse_u32(source, line_no, "source code");
        const auto label = parse_u32(target, line_no, "target label");
        if (!palette.code_to_label.emplace(code, label).second) {
            throw FormatError(fmt::format("palette line {}: source code {} listed twice", line_no, code));
        }
    }
    if (palette.code_to_label.empty()) {
        throw FormatError("palette is empty");
    }
    std::set<std::uint32_t> targets;
    for (const auto& [code, label] : palette.code_to_label) {
        targets.insert(label);
    }
    if (targets.size() != palette.n_labels()) {
        throw FormatError(fmt::format("palette targets must cover 0..{} contiguously", palette.n_labels() - 1));
    }
    return palette;
}

Palette read_palette(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(fmt::format("cannot open palette {}", path.string()));
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_palette(buffer.str());
    } catch (const FormatError& e) {
        throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

LabelMask remap_codes(const GrayImage& image, const Palette& palette) {
    const std::uint32_t n_labels = palette.n_labels();
    if (n_labels == 0) {
        throw FormatError("palette is empty");
    }
    if (palette.unique_targets) {
        std::map<std::uint32_t, std::uint32_t> first_source;
        for (const auto& [code, label] : palette.code_to_label) {
            if (const auto [it, inserted] = first_source.emplace(label, code); !inserted) {
                throw FormatError(fmt::format("palette collision: codes {} and {} both map to label {}",
                                              it->second, code, label));
            }
        }
    }
    // Dense lookup over the 8-bit code range.
    std::array<std::uint32_t, 256> lut{};
    lut.fill(n_labels);
    for (const auto& [code, label] : palette.code_to_label) {
        if (code < lut.size()) {
            lut[code] = label;
        }
    }
    std::vector<std::uint32_t> labels(image.pixels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        labels[i] = lut[image.pixels[i]];
    }
    return LabelMask(image.rows, image.cols, n_labels, std::move(labels));
}

LabelMask read_gt_mask(const std::filesystem::path& path, const Palette& palette) {
    return remap_codes(read_gray8(path), palette);
}

void write_mask_pgm(const std::filesystem::path& path, const LabelMask& mask, bool scale) {
    if (path.empty()) {
        throw IoError("cannot write PGM: empty path");
    }
    if (mask.n_labels() > 256) {
        throw UnsupportedError(fmt::format("PGM export supports at most 256 labels, mask has {}", mask.n_labels()));
    }
    std::array<std::uint8_t, 257> value{};
    const std::uint32_t top = mask.n_labels() > 1 ? mask.n_labels() - 1 : 1;
    for (std::uint32_t label = 0; label < mask.n_labels(); ++label) {
        value[label] = scale ? static_cast<std::uint8_t>(std::lround(255.0 * label / top))
                             : static_cast<std::uint8_t>(label);
    }
    const bool has_ignored = label_histogram(mask).back() > 0;
    if (has_ignored) {
        if (!scale && mask.n_labels() == 256) {
            throw UnsupportedError("raw PGM export cannot encode the ignore label of a 256-label mask");
        }
        value[mask.n_labels()] = scale ? 255 : static_cast<std::uint8_t>(mask.n_labels());
    }

    GrayImage img{mask.rows(), mask.cols(), std::vector<std::uint8_t>(mask.size())};
    for (std::size_t i = 0; i < mask.size(); ++i) {
        img.pixels[i] = value[mask[i]];
    }
    write_pgm(path, img);

    std::filesystem::path sidecar = path;
    sidecar += ".txt";
    std::ofstream out(sidecar, std::ios::trunc);
    if (!out) {
        throw IoError(fmt::format("cannot open {} for writing", sidecar.string()));
    }
    out << "# label value\n";
    for (std::uint32_t label = 0; label < mask.n_labels(); ++label) {
        out << label << ' ' << static_cast<unsigned>(value[label]) << '\n';
    }
    if (has_ignored) {
        out << "ignore " << static_cast<unsigned>(value[mask.n_labels()]) << '\n';
    }
}

}  // namespace fseg
