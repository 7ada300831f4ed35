#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests.
// The oracles deliberately avoid the library's solvers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fseg/random.hpp"
#include "fseg/tensor.hpp"

namespace fseg::test {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::string pattern = (fs::temp_directory_path() / "fseg_test_XXXXXX").string();
        if (::mkdtemp(pattern.data()) == nullptr) {
            throw std::runtime_error("mkdtemp failed");
        }
        path_ = pattern;
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    [[nodiscard]] const fs::path& path() const { return path_; }
    [[nodiscard]] fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

/// Uniform [0,1) entries; each entry is zeroed with probability 1 - density.
/// Rows and columns that end up all-zero get one positive entry.
inline DenseMatrix random_nonneg(Rng& rng, std::size_t rows, std::size_t cols, double density = 1.0) {
    DenseMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = rng.uniform01();
            m(r, c) = rng.uniform01() < density ? static_cast<float>(v) : 0.0F;
        }
    }
    for (std::size_t r = 0; r < rows; ++r) {
        const auto row = m.row(r);
        if (std::all_of(row.begin(), row.end(), [](float v) { return v == 0.0F; })) {
            m(r, rng.index(cols)) = static_cast<float>(0.5 + 0.5 * rng.uniform01());
        }
    }
    for (std::size_t c = 0; c < cols; ++c) {
        bool zero = true;
        for (std::size_t r = 0; r < rows; ++r) {
            zero = zero && m(r, c) == 0.0F;
        }
        if (zero) {
            m(rng.index(rows), c) = static_cast<float>(0.5 + 0.5 * rng.uniform01());
        }
    }
    return m;
}

/// Plain triple loop in double, rounded to float.
inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix c(a.n_rows(), b.n_cols());
    for (std::size_t i = 0; i < a.n_rows(); ++i) {
        for (std::size_t j = 0; j < b.n_cols(); ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < a.n_cols(); ++l) {
                s += static_cast<double>(a(i, l)) * b(l, j);
            }
            c(i, j) = static_cast<float>(s);
        }
    }
    return c;
}

inline double frobenius(const DenseMatrix& a) {
    double s = 0.0;
    for (const float v : a.data()) {
        s += static_cast<double>(v) * v;
    }
    return std::sqrt(s);
}

/// ||a - w h||_F^2 in double.
inline double residual_sq(MatrixView<float> a, const DenseMatrix& w, const DenseMatrix& h) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        for (std::size_t j = 0; j < a.n_cols; ++j) {
            double p = 0.0;
            for (std::size_t l = 0; l < w.n_cols(); ++l) {
                p += static_cast<double>(w(i, l)) * h(l, j);
            }
            const double d = static_cast<double>(a(i, j)) - p;
            s += d * d;
        }
    }
    return s;
}

inline FeatureTensor tensor_from(const DenseMatrix& flat, std::size_t rows, std::size_t cols) {
    return FeatureTensor(rows, cols, flat.n_cols(), std::vector<float>(flat.data().begin(), flat.data().end()));
}

// ---------------------------------------------------------------------------
// Lawson-Hanson active set NNLS: min ||M x - b||_2 s.t. x >= 0, M is m x n.
// ---------------------------------------------------------------------------

/// Least squares restricted to the columns in `passive` via normal equations
/// and Gaussian elimination with partial pivoting.
inline std::vector<double> ls_on_passive(const std::vector<double>& m, std::size_t rows, std::size_t cols,
                                         const std::vector<double>& b, const std::vector<bool>& passive) {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < cols; ++j) {
        if (passive[j]) {
            idx.push_back(j);
        }
    }
    const std::size_t p = idx.size();
    std::vector<double> g(p * (p + 1), 0.0);
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t c = 0; c < p; ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                s += m[r * cols + idx[a]] * m[r * cols + idx[c]];
            }
            g[a * (p + 1) + c] = s;
        }
        double s = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
            s += m[r * cols + idx[a]] * b[r];
        }
        g[a * (p + 1) + p] = s;
    }
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < p; ++r) {
            if (std::abs(g[r * (p + 1) + col]) > std::abs(g[piv * (p + 1) + col])) {
                piv = r;
            }
        }
        for (std::size_t c = 0; c <= p; ++c) {
            std::swap(g[col * (p + 1) + c], g[piv * (p + 1) + c]);
        }
        for (std::size_t r = 0; r < p; ++r) {
            if (r == col) {
                continue;
            }
            const double f = g[r * (p + 1) + col] / g[col * (p + 1) + col];
            for (std::size_t c = col; c <= p; ++c) {
                g[r * (p + 1) + c] -= f * g[col * (p + 1) + c];
            }
        }
    }
    std::vector<double> z(cols, 0.0);
    for (std::size_t a = 0; a < p; ++a) {
        z[idx[a]] = g[a * (p + 1) + p] / g[a * (p + 1) + a];
    }
    return z;
}

inline std::vector<double> nnls_active_set(const std::vector<double>& m, std::size_t rows, std::size_t cols,
                                           const std::vector<double>& b) {
    std::vector<double> x(cols, 0.0);
    std::vector<bool> passive(cols, false);
    const double tol = 1e-12;
    for (int outer = 0; outer < 3 * static_cast<int>(cols) + 10; ++outer) {
        // Dual vector w = M^T (b - M x).
        std::vector<double> resid(b);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < cols; ++j) {
                resid[r] -= m[r * cols + j] * x[j];
            }
        }
        std::optional<std::size_t> enter;
        double best = tol;
        for (std::size_t j = 0; j < cols; ++j) {
            double w = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                w += m[r * cols + j] * resid[r];
            }
            if (!passive[j] && w > best) {
                best = w;
                enter = j;
            }
        }
        if (!enter) {
            break;
        }
        passive[*enter] = true;
        for (int inner = 0; inner < 100; ++inner) {
            const auto z = ls_on_passive(m, rows, cols, b, passive);
            bool feasible = true;
            for (std::size_t j = 0; j < cols; ++j) {
                feasible = feasible && (!passive[j] || z[j] > 0.0);
            }
            if (feasible) {
                x = z;
                break;
            }
            double alpha = 1.0;
            for (std::size_t j = 0; j < cols; ++j) {
                if (passive[j] && z[j] <= 0.0) {
                    alpha = std::min(alpha, x[j] / (x[j] - z[j]));
                }
            }
            for (std::size_t j = 0; j < cols; ++j) {
                x[j] += alpha * (z[j] - x[j]);
                if (passive[j] && x[j] <= tol) {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
        }
    }
    return x;
}

/// Optimal ||A - W H||_F^2 over W >= 0 with H fixed: one NNLS per row of A.
inline double fixed_h_oracle(MatrixView<float> a, const DenseMatrix& h) {
    const std::size_t k = h.n_rows();
    const std::size_t d = h.n_cols();
    std::vector<double> m(d * k);  // H^T
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t j = 0; j < k; ++j) {
            m[c * k + j] = h(j, c);
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        std::vector<double> b(a.row(i).begin(), a.row(i).end());
        const auto x = nnls_active_set(m, d, k, b);
        for (std::size_t c = 0; c < d; ++c) {
            double p = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                p += m[c * k + j] * x[j];
            }
            total += (b[c] - p) * (b[c] - p);
        }
    }
    return total;
}

// ---------------------------------------------------------------------------
// Exhaustive k-means: minimum inertia over every assignment of n points to k
// labels (empty groups allowed; they never beat a full partition).
// ---------------------------------------------------------------------------

inline double kmeans_exhaustive(MatrixView<float> points, std::size_t k) {
    const std::size_t n = points.n_rows;
    const std::size_t d = points.n_cols;
    std::vector<std::size_t> assign(n, 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        std::vector<double> sum(k * d, 0.0);
        std::vector<double> count(k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            count[assign[i]] += 1.0;
            for (std::size_t c = 0; c < d; ++c) {
                sum[assign[i] * d + c] += points(i, c);
            }
        }
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < d; ++c) {
                const double mu = sum[assign[i] * d + c] / count[assign[i]];
                const double diff = points(i, c) - mu;
                cost += diff * diff;
            }
        }
        best = std::min(best, cost);
        std::size_t pos = 0;
        while (pos < n && ++assign[pos] == k) {
            assign[pos++] = 0;
        }
        if (pos == n) {
            break;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Synthetic mosaics: p prototype feature vectors laid out as blocks.
// ---------------------------------------------------------------------------

struct Mosaic {
    FeatureTensor tensor;
    DenseMatrix prototypes;
    /// True prototype index per pixel.
    std::vector<std::uint32_t> truth;
};

/// Blocks on a 1 x p (p < 4) or 2 x p/2 layout; each pixel is its prototype plus Gaussian noise whose norm is
/// about `noise` times the prototype norm, clamped at zero.
inline Mosaic make_mosaic(Rng& rng, std::size_t p, std::size_t rows, std::size_t cols, std::size_t channels,
                          double noise) {
    const std::size_t block_rows = p < 4 ? 1 : 2;
    const std::size_t block_cols = p / block_rows;
    Mosaic m;
    m.prototypes = random_nonneg(rng, p, channels, 0.5);
    std::vector<float> data(rows * cols * channels);
    m.truth.resize(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const auto label = static_cast<std::uint32_t>((r * block_rows / rows) * block_cols + c * block_cols / cols);
            m.truth[r * cols + c] = label;
            const auto proto = m.prototypes.row(label);
            const double norm = std::sqrt(std::inner_product(proto.begin(), proto.end(), proto.begin(), 0.0));
            const double sigma = noise * norm / std::sqrt(static_cast<double>(channels));
            for (std::size_t ch = 0; ch < channels; ++ch) {
                const double v = proto[ch] + sigma * rng.normal();
                data[(r * cols + c) * channels + ch] = static_cast<float>(std::max(0.0, v));
            }
        }
    }
    m.tensor = FeatureTensor(rows, cols, channels, std::move(data));
    return m;
}

// ---------------------------------------------------------------------------
// Brute-force per-pixel F1 (ignore label = n_categories).
// ---------------------------------------------------------------------------

struct BruteF1 {
    std::vector<std::optional<double>> f1;
    std::optional<double> macro;
};

inline BruteF1 brute_f1(const std::vector<std::uint32_t>& pred, const std::vector<std::uint32_t>& gt,
                        std::uint32_t n_categories) {
    BruteF1 out;
    double macro_sum = 0.0;
    int macro_n = 0;
    for (std::uint32_t g = 0; g < n_categories; ++g) {
        double tp = 0;
        double in_pred = 0;
        double in_gt = 0;
        for (std::size_t i = 0; i < gt.size(); ++i) {
            if (gt[i] == n_categories) {
                continue;
            }
            tp += (pred[i] == g && gt[i] == g) ? 1 : 0;
            in_pred += pred[i] == g ? 1 : 0;
            in_gt += gt[i] == g ? 1 : 0;
        }
        if (in_pred + in_gt == 0) {
            out.f1.emplace_back();
            continue;
        }
        const double precision = in_pred > 0 ? tp / in_pred : 0.0;
        const double recall = in_gt > 0 ? tp / in_gt : 0.0;
        const double f = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
        out.f1.emplace_back(f);
        if (in_gt > 0) {
            macro_sum += f;
            ++macro_n;
        }
    }
    if (macro_n > 0) {
        out.macro = macro_sum / macro_n;
    }
    return out;
}

}  // namespace fseg::test
