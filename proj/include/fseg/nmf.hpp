#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fseg/tensor.hpp"

namespace fseg {

enum class NmfSolver {
    /// Hierarchical alternating least squares: exact coordinate minimization
    /// over one column of W (row of H) at a time, clamped at zero.
    Hals,
    /// Lee-Seung multiplicative updates.
    MultiplicativeUpdate,
};

struct NmfConfig {
    int max_iters = 200;
    /// Stop when |f_prev - f| < tol * f_prev for the squared Frobenius objective f.
    double tol = 1e-4;
    std::uint64_t seed = 17;
    /// Added to every update denominator.
    double epsilon = 1e-9;
    NmfSolver solver = NmfSolver::Hals;
    /// Coordinate passes per factor and iteration (HALS only).
    int inner_sweeps = 4;

    /// Throws InputError on max_iters < 1, tol < 0, epsilon <= 0 or inner_sweeps < 1.
    void validate() const;
};

/// A ~= W * H with W: pixels x k_c (per-pixel contributions) and
/// H: k_c x channels (concept features).
struct Factorization {
    DenseMatrix w;
    DenseMatrix h;
    std::size_t k_c = 0;
    /// ||A - W H||_F evaluated on the stored single-precision factors.
    double final_error = 0.0;
    int n_iters = 0;
    /// Squared objective after initialization (index 0) and after each full
    /// iteration, in working precision.
    std::vector<double> objective_trace;
};

/// Free factorization at rank k_c. Requires 1 <= k_c <= min(rows, cols) and a
/// finite non-negative input.
Factorization nmf_factorize(MatrixView<float> a, std::size_t k_c, const NmfConfig& cfg);
Factorization nmf_factorize(const FeatureTensor& a, std::size_t k_c, const NmfConfig& cfg);

/// Solves only for W with H pinned to `h_fixed` (returned bit-identical).
/// Every row of h_fixed must be non-negative with positive norm.
Factorization nmf_solve_w(MatrixView<float> a, const DenseMatrix& h_fixed, const NmfConfig& cfg);
Factorization nmf_solve_w(const FeatureTensor& a, const DenseMatrix& h_fixed, const NmfConfig& cfg);

/// ||A - W H||_F, accumulated in double.
double reconstruction_error(MatrixView<float> a, const DenseMatrix& w, const DenseMatrix& h);

}  // namespace fseg
