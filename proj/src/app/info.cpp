#include <ostream>

#include <fmt/format.h>

#include "common.hpp"
#include "fseg/fst.hpp"
#include "fseg/log.hpp"

namespace fseg::app {

int run_info(const std::vector<std::filesystem::path>& files, std::ostream& out) {
    int status = 0;
    for (const auto& path : files) {
        try {
            const FstHeader h = read_fst_header(path);
            std::string dims;
            for (std::size_t i = 0; i < h.ndim; ++i) {
                dims += fmt::format("{}{}", i == 0 ? "" : "x", h.dims[i]);
            }
            const char* kind = h.dtype == FstDtype::U32Labels ? "labels"
                               : h.ndim == 3                  ? "tensor"
                                                              : "matrix";
            out << fmt::format("{}: version={} kind={} dtype={} ndim={} dims={}", path.string(), h.version, kind,
                               h.dtype == FstDtype::F32 ? "f32" : "u32", h.ndim, dims);
            if (h.dtype == FstDtype::U32Labels) {
                out << fmt::format(" n_labels={}", h.n_labels);
            }
            out << fmt::format(" bytes={}\n", h.file_size);
        } catch (const std::exception& e) {
            log::error("info_failed", {{"item", path.string()}, {"error", e.what()}});
            status = 1;
        }
    }
    return status;
}

}  // namespace fseg::app
