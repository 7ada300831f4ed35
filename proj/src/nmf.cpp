#include "fseg/nmf.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "fseg/error.hpp"
#include "fseg/kernels.hpp"
#include "fseg/random.hpp"

namespace fseg {

namespace {

using kernels::MatrixF64;

void check_input(MatrixView<float> a) {
    if (a.n_rows == 0 || a.n_cols == 0 || a.data.size() != a.n_rows * a.n_cols) {
        throw DimensionError(fmt::format("input matrix {} x {} with {} elements", a.n_rows, a.n_cols, a.data.size()));
    }
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        if (!std::isfinite(a.data[i])) {
            throw InputError(fmt::format("input element ({}, {}) is not finite", i / a.n_cols, i % a.n_cols));
        }
        if (a.data[i] < 0.0F) {
            throw InputError(fmt::format("input element ({}, {}) is negative", i / a.n_cols, i % a.n_cols));
        }
    }
}

double mean_of(const MatrixF64& a) {
    double s = 0.0;
    for (const double v : a.data) {
        s += v;
    }
    return s / static_cast<double>(a.data.size());
}

// |N(0,1)| * mean(A) / k, drawn row-major.
MatrixF64 random_factor(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
    MatrixF64 m(rows, cols);
    for (auto& v : m.data) {
        v = std::abs(rng.normal()) * scale;
    }
    return m;
}

bool converged(double previous, double current, double tol) {
    if (previous <= 0.0) {
        return true;
    }
    return std::abs(previous - current) < tol * previous;
}

Factorization finish(const MatrixF64& a, const MatrixF64& w, DenseMatrix h, std::vector<double> trace, int iters) {
    Factorization f;
    f.w = kernels::to_dense(w);
    f.h = std::move(h);
    f.k_c = f.h.n_rows();
    f.n_iters = iters;
    f.objective_trace = std::move(trace);
    const MatrixF64 w_stored = kernels::to_f64(f.w.view());
    const MatrixF64 h_stored = kernels::to_f64(f.h.view());
    f.final_error = std::sqrt(kernels::residual_sq_norm(a.view(), w_stored.view(), h_stored.view()));
    return f;
}

}  // namespace

void NmfConfig::validate() const {
    if (max_iters < 1) {
        throw InputError("nmf max_iters must be >= 1");
    }
    if (!(tol >= 0.0)) {
        throw InputError("nmf tol must be >= 0");
    }
    if (!(epsilon > 0.0)) {
        throw InputError("nmf epsilon must be > 0");
    }
    if (inner_sweeps < 1) {
        throw InputError("nmf inner_sweeps must be >= 1");
    }
}

Factorization nmf_factorize(MatrixView<float> a_in, std::size_t k_c, const NmfConfig& cfg) {
    cfg.validate();
    check_input(a_in);
    if (k_c == 0 || k_c > std::min(a_in.n_rows, a_in.n_cols)) {
        throw DimensionError(fmt::format("rank {} outside 1..min({}, {})", k_c, a_in.n_rows, a_in.n_cols));
    }

    const MatrixF64 a = kernels::to_f64(a_in);
    Rng rng(cfg.seed);
    const double scale = mean_of(a) / static_cast<double>(k_c);
    MatrixF64 w = random_factor(rng, a.n_rows, k_c, scale);
    MatrixF64 h = random_factor(rng, k_c, a.n_cols, scale);

    std::vector<double> trace{kernels::residual_sq_norm(a.view(), w.view(), h.view())};
    MatrixF64 aht;
    MatrixF64 hht;
    MatrixF64 wta;
    MatrixF64 wtw;
    int iters = 0;
    while (iters < cfg.max_iters && trace.back() > 0.0) {
        kernels::gemm_abt(a.view(), h.view(), aht);
        kernels::gemm_abt(h.view(), h.view(), hht);
        if (cfg.solver == NmfSolver::Hals) {
            kernels::hals_update_rows(w, aht.view(), hht.view(), cfg.epsilon, cfg.inner_sweeps);
        } else {
            kernels::mu_update_rows(w, aht.view(), hht.view(), cfg.epsilon);
        }
        kernels::gemm_atb(w.view(), a.view(), wta);
        kernels::gemm_atb(w.view(), w.view(), wtw);
        if (cfg.solver == NmfSolver::Hals) {
            kernels::hals_update_cols(h, wta.view(), wtw.view(), cfg.epsilon, cfg.inner_sweeps);
        } else {
            kernels::mu_update_cols(h, wta.view(), wtw.view(), cfg.epsilon);
        }
        ++iters;
        const double objective = kernels::residual_sq_norm(a.view(), w.view(), h.view());
        const double previous = trace.back();
        trace.push_back(objective);
        if (converged(previous, objective, cfg.tol)) {
            break;
        }
    }
    return finish(a, w, kernels::to_dense(h), std::move(trace), iters);
}

Factorization nmf_factorize(const FeatureTensor& a, std::size_t k_c, const NmfConfig& cfg) {
    return nmf_factorize(a.flat(), k_c, cfg);
}

Factorization nmf_solve_w(MatrixView<float> a_in, const DenseMatrix& h_fixed, const NmfConfig& cfg) {
    cfg.validate();
    check_input(a_in);
    if (h_fixed.n_cols() != a_in.n_cols) {
        throw DimensionError(
            fmt::format("fixed H has {} channels, input has {}", h_fixed.n_cols(), a_in.n_cols));
    }
    for (std::size_t r = 0; r < h_fixed.n_rows(); ++r) {
        double norm_sq = 0.0;
        for (const float v : h_fixed.row(r)) {
            if (!std::isfinite(v) || v < 0.0F) {
                throw InputError(fmt::format("fixed H row {} has a negative or non-finite entry", r));
            }
            norm_sq += static_cast<double>(v) * v;
        }
        if (norm_sq == 0.0) {
            throw DegenerateError(fmt::format("fixed H row {} is all-zero (degenerate center)", r));
        }
    }

    const std::size_t k = h_fixed.n_rows();
    const MatrixF64 a = kernels::to_f64(a_in);
    const MatrixF64 h = kernels::to_f64(h_fixed.view());
    Rng rng(cfg.seed);
    MatrixF64 w = random_factor(rng, a.n_rows, k, mean_of(a) / static_cast<double>(k));

    MatrixF64 aht;
    MatrixF64 hht;
    kernels::gemm_abt(a.view(), h.view(), aht);
    kernels::gemm_abt(h.view(), h.view(), hht);

    std::vector<double> trace{kernels::residual_sq_norm(a.view(), w.view(), h.view())};
    int iters = 0;
    while (iters < cfg.max_iters && trace.back() > 0.0) {
        if (cfg.solver == NmfSolver::Hals) {
            kernels::hals_update_rows(w, aht.view(), hht.view(), cfg.epsilon, cfg.inner_sweeps);
        } else {
            kernels::mu_update_rows(w, aht.view(), hht.view(), cfg.epsilon);
        }
        ++iters;
        const double objective = kernels::residual_sq_norm(a.view(), w.view(), h.view());
        const double previous = trace.back();
        trace.push_back(objective);
        if (converged(previous, objective, cfg.tol)) {
            break;
        }
    }
    return finish(a, w, h_fixed, std::move(trace), iters);
}

Factorization nmf_solve_w(const FeatureTensor& a, const DenseMatrix& h_fixed, const NmfConfig& cfg) {
    return nmf_solve_w(a.flat(), h_fixed, cfg);
}

double reconstruction_error(MatrixView<float> a, const DenseMatrix& w, const DenseMatrix& h) {
    if (w.n_rows() != a.n_rows || h.n_cols() != a.n_cols || w.n_cols() != h.n_rows()) {
        throw DimensionError(fmt::format("shapes do not conform: A {}x{}, W {}x{}, H {}x{}", a.n_rows, a.n_cols,
                                         w.n_rows(), w.n_cols(), h.n_rows(), h.n_cols()));
    }
    const MatrixF64 a64 = kernels::to_f64(a);
    const MatrixF64 w64 = kernels::to_f64(w.view());
    const MatrixF64 h64 = kernels::to_f64(h.view());
    return std::sqrt(kernels::residual_sq_norm(a64.view(), w64.view(), h64.view()));
}

}  // namespace fseg
