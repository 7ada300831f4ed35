#pragma once

// Dense double-precision kernels behind the factorization and clustering
// solvers. Every kernel exists twice: `serial` is the reference, `omp`
// distributes independent outputs (rows, columns or elements) across OpenMP
// threads. Each output is still accumulated by one thread in a fixed order, so
// the two variants are bit-identical for any thread count.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fseg/tensor.hpp"

namespace fseg::kernels {

/// Owning row-major double matrix used as solver workspace.
struct MatrixF64 {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> data;

    MatrixF64() = default;
    MatrixF64(std::size_t rows, std::size_t cols, double fill = 0.0)
        : n_rows(rows), n_cols(cols), data(rows * cols, fill) {}

    [[nodiscard]] double& operator()(std::size_t r, std::size_t c) { return data[r * n_cols + c]; }
    [[nodiscard]] double operator()(std::size_t r, std::size_t c) const { return data[r * n_cols + c]; }
    [[nodiscard]] MatrixView<double> view() const { return {n_rows, n_cols, data}; }

    bool operator==(const MatrixF64&) const = default;
};

MatrixF64 to_f64(MatrixView<float> m);
DenseMatrix to_dense(const MatrixF64& m);

// Declared once per variant; the bodies live in kernels_impl.inc, compiled
// with and without OpenMP.
#define FSEG_DECLARE_KERNELS()                                                                     \
    void gemm_abt(MatrixView<double> a, MatrixView<double> b, MatrixF64& c);                        \
    void gemm_atb(MatrixView<double> a, MatrixView<double> b, MatrixF64& c);                        \
    double residual_sq_norm(MatrixView<double> a, MatrixView<double> w, MatrixView<double> h);      \
    void hals_update_rows(MatrixF64& w, MatrixView<double> aht, MatrixView<double> hht, double eps, \
                          int sweeps);                                                             \
    void hals_update_cols(MatrixF64& h, MatrixView<double> wta, MatrixView<double> wtw, double eps, \
                          int sweeps);                                                             \
    void mu_update_rows(MatrixF64& w, MatrixView<double> aht, MatrixView<double> hht, double eps);  \
    void mu_update_cols(MatrixF64& h, MatrixView<double> wta, MatrixView<double> wtw, double eps);  \
    std::vector<double> assign_nearest(MatrixView<double> points, MatrixView<double> centers,       \
                                       std::span<std::uint32_t> labels);                           \
    std::vector<double> column_means(MatrixView<float> m);

// gemm_abt          c = a * b^T            (a: m x p, b: n x p, c: m x n)
// gemm_atb          c = a^T * b            (a: m x p, b: m x n, c: p x n)
// residual_sq_norm  ||a - w h||_F^2, per-row partials summed in row order
// hals_update_rows  `sweeps` coordinate passes over the columns of w:
//                   w_ij <- max(0, w_ij + (aht_ij - sum_l w_il hht_lj) / (hht_jj + eps))
// hals_update_cols  the same for the rows of h, one column of h at a time:
//                   h_jc <- max(0, h_jc + (wta_jc - sum_l wtw_jl h_lc) / (wtw_jj + eps))
// mu_update_rows    w <- w * aht / (w hht + eps)
// mu_update_cols    h <- h * wta / (wtw h + eps)
// assign_nearest    nearest center per point by squared Euclidean distance,
//                   ties to the lowest index; returns the distances
// column_means      per-column mean over rows

namespace serial {
FSEG_DECLARE_KERNELS()
}  // namespace serial

namespace omp {
FSEG_DECLARE_KERNELS()
}  // namespace omp

#undef FSEG_DECLARE_KERNELS

using namespace omp;  // NOLINT(google-build-using-namespace): default dispatch

}  // namespace fseg::kernels
