#include "fseg/fst.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "fseg/error.hpp"

namespace fseg {

namespace {

constexpr std::size_t kPrefixBytes = 8;

class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) {
        out_.push_back(static_cast<std::uint8_t>(v & 0xFFU));
        out_.push_back(static_cast<std::uint8_t>(v >> 8U));
    }
    void u32(std::uint32_t v) {
        for (int shift = 0; shift < 32; shift += 8) {
            out_.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFFU));
        }
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void reserve(std::size_t n) { out_.reserve(n); }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    [[nodiscard]] std::size_t remaining() const { return bytes_.size() - pos_; }
    [[nodiscard]] std::size_t position() const { return pos_; }

    std::uint8_t u8(const char* field) {
        need(1, field);
        return bytes_[pos_++];
    }
    std::uint16_t u16(const char* field) {
        need(2, field);
        const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8U));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32(const char* field) {
        need(4, field);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) {
            v = (v << 8U) | bytes_[pos_ + static_cast<std::size_t>(i)];
        }
        pos_ += 4;
        return v;
    }
    float f32(const char* field) { return std::bit_cast<float>(u32(field)); }

private:
    void need(std::size_t n, const char* field) const {
        if (remaining() < n) {
            throw FormatError(fmt::format("truncated file: missing {} at byte offset {}", field, pos_));
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::uint32_t checked_dim(std::size_t value, const char* what) {
    if (value > std::numeric_limits<std::uint32_t>::max()) {
        throw DimensionError(fmt::format("{} = {} does not fit the u32 FST dimension field", what, value));
    }
    return static_cast<std::uint32_t>(value);
}

void write_prefix(ByteWriter& w, FstDtype dtype, std::span<const std::uint32_t> dims) {
    for (const char c : kFstMagic) {
        w.u8(static_cast<std::uint8_t>(c));
    }
    w.u16(kFstVersion);
    w.u8(static_cast<std::uint8_t>(dtype));
    w.u8(static_cast<std::uint8_t>(dims.size()));
    for (const auto d : dims) {
        w.u32(d);
    }
}

std::vector<std::uint8_t> encode(const FeatureTensor& t) {
    ByteWriter w;
    w.reserve(kPrefixBytes + 12 + 4 * t.data().size());
    const std::array dims{checked_dim(t.rows(), "rows"), checked_dim(t.cols(), "cols"),
                          checked_dim(t.channels(), "channels")};
    write_prefix(w, FstDtype::F32, dims);
    for (const float v : t.data()) {
        w.f32(v);
    }
    return w.take();
}

std::vector<std::uint8_t> encode(const DenseMatrix& m) {
    ByteWriter w;
    w.reserve(kPrefixBytes + 8 + 4 * m.data().size());
    if (m.n_rows() == 1) {
        const std::array dims{checked_dim(m.n_cols(), "n_cols")};
        write_prefix(w, FstDtype::F32, dims);
    } else {
        const std::array dims{checked_dim(m.n_rows(), "n_rows"), checked_dim(m.n_cols(), "n_cols")};
        write_prefix(w, FstDtype::F32, dims);
    }
    for (const float v : m.data()) {
        w.f32(v);
    }
    return w.take();
}

std::vector<std::uint8_t> encode(const LabelMask& mask) {
    ByteWriter w;
    w.reserve(kPrefixBytes + 12 + 4 * mask.size());
    if (mask.rows() == 1) {
        const std::array dims{checked_dim(mask.cols(), "cols")};
        write_prefix(w, FstDtype::U32Labels, dims);
    } else {
        const std::array dims{checked_dim(mask.rows(), "rows"), checked_dim(mask.cols(), "cols")};
        write_prefix(w, FstDtype::U32Labels, dims);
    }
    for (const auto label : mask.labels()) {
        w.u32(label);
    }
    w.u32(mask.n_labels());
    return w.take();
}

FstHeader parse_header(ByteReader& r) {
    std::array<char, 4> magic{};
    for (auto& c : magic) {
        c = static_cast<char>(r.u8("magic"));
    }
    if (magic != kFstMagic) {
        throw FormatError("bad magic: expected \"FSEG\"");
    }
    FstHeader h;
    h.version = r.u16("version");
    if (h.version != kFstVersion) {
        throw FormatError(fmt::format("unsupported version {} (expected {})", h.version, kFstVersion));
    }
    const auto dtype = r.u8("dtype");
    if (dtype > 1) {
        throw FormatError(fmt::format("bad dtype {}", dtype));
    }
    h.dtype = static_cast<FstDtype>(dtype);
    h.ndim = r.u8("ndim");
    if (h.ndim < 1 || h.ndim > 3) {
        throw FormatError(fmt::format("bad ndim {}", h.ndim));
    }
    if (h.dtype == FstDtype::U32Labels && h.ndim == 3) {
        throw FormatError("bad ndim 3 for label dtype");
    }
    for (std::size_t i = 0; i < h.ndim; ++i) {
        h.dims[i] = r.u32("dims");
        if (h.dims[i] == 0) {
            throw FormatError(fmt::format("bad dims: dimension {} is zero", i));
        }
    }
    return h;
}

std::size_t element_count(const FstHeader& h) {
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < h.ndim; ++i) {
        if (count > std::numeric_limits<std::uint64_t>::max() / 4 / h.dims[i]) {
            throw FormatError("dimension overflow: element count exceeds addressable size");
        }
        count *= h.dims[i];
    }
    if (count > std::numeric_limits<std::size_t>::max() / 4) {
        throw FormatError("dimension overflow: element count exceeds addressable size");
    }
    return static_cast<std::size_t>(count);
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(fmt::format("cannot open {} for reading", path.string()));
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoError(fmt::format("read failure on {}", path.string()));
    }
    return bytes;
}

template <typename Fn>
auto with_path_context(const std::filesystem::path& path, Fn&& fn) {
    try {
        return fn();
    } catch (const FormatError& e) {
        throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

}  // namespace

std::vector<std::uint8_t> encode_fst(const FstObject& object) {
    return std::visit([](const auto& x) { return encode(x); }, object);
}

FstObject decode_fst(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    const FstHeader h = parse_header(r);
    const std::size_t count = element_count(h);
    const std::size_t trailer = h.dtype == FstDtype::U32Labels ? 4 : 0;
    if (r.remaining() < count * 4 + trailer) {
        throw FormatError(fmt::format("truncated payload: expected {} elements ({} bytes), found {} bytes",
                                      count, count * 4 + trailer, r.remaining()));
    }
    if (r.remaining() > count * 4 + trailer) {
        throw FormatError(
            fmt::format("trailing bytes: {} bytes after payload", r.remaining() - count * 4 - trailer));
    }

    if (h.dtype == FstDtype::F32) {
        std::vector<float> data(count);
        for (auto& v : data) {
            v = r.f32("payload");
        }
        if (h.ndim == 3) {
            for (std::size_t i = 0; i < count; ++i) {
                if (!std::isfinite(data[i]) || data[i] < 0.0F) {
                    throw FormatError(fmt::format(
                        "payload element {} is {} (feature tensors must be finite and non-negative)", i,
                        data[i]));
                }
            }
            return FeatureTensor(h.dims[0], h.dims[1], h.dims[2], std::move(data));
        }
        if (h.ndim == 2) {
            return DenseMatrix(h.dims[0], h.dims[1], std::move(data));
        }
        return DenseMatrix(1, h.dims[0], std::move(data));
    }

    std::vector<std::uint32_t> labels(count);
    for (auto& v : labels) {
        v = r.u32("payload");
    }
    const std::uint32_t n_labels = r.u32("n_labels");
    if (n_labels == 0) {
        throw FormatError("n_labels is zero");
    }
    for (std::size_t i = 0; i < count; ++i) {
        if (labels[i] > n_labels) {
            throw FormatError(fmt::format("payload label {} at index {} exceeds n_labels {}", labels[i], i, n_labels));
        }
    }
    if (h.ndim == 2) {
        return LabelMask(h.dims[0], h.dims[1], n_labels, std::move(labels));
    }
    return LabelMask(1, h.dims[0], n_labels, std::move(labels));
}

void write_fst(const std::filesystem::path& path, const FstObject& object) {
    if (path.empty()) {
        throw IoError("cannot write FST: empty path");
    }
    const auto bytes = encode_fst(object);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(fmt::format("cannot open {} for writing", path.string()));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError(fmt::format("write failure on {}", path.string()));
    }
}

FstObject read_fst(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    return with_path_context(path, [&] { return decode_fst(bytes); });
}

FstHeader read_fst_header(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    return with_path_context(path, [&] {
        ByteReader r(bytes);
        FstHeader h = parse_header(r);
        h.file_size = bytes.size();
        if (h.dtype == FstDtype::U32Labels && bytes.size() >= r.position() + 4) {
            ByteReader tail{std::span<const std::uint8_t>(bytes).subspan(bytes.size() - 4)};
            h.n_labels = tail.u32("n_labels");
        }
        return h;
    });
}

namespace {

template <typename T>
T expect_kind(const std::filesystem::path& path, FstObject object, const char* kind) {
    if (auto* value = std::get_if<T>(&object)) {
        return std::move(*value);
    }
    throw FormatError(fmt::format("{}: expected a {}", path.string(), kind));
}

}  // namespace

FeatureTensor read_feature_tensor(const std::filesystem::path& path) {
    return expect_kind<FeatureTensor>(path, read_fst(path), "3-D feature tensor");
}

DenseMatrix read_matrix(const std::filesystem::path& path) {
    return expect_kind<DenseMatrix>(path, read_fst(path), "1-D or 2-D f32 matrix");
}

LabelMask read_label_mask(const std::filesystem::path& path) {
    return expect_kind<LabelMask>(path, read_fst(path), "label mask");
}

}  // namespace fseg
