#include <utility>

#include "fseg/kernels.hpp"

namespace fseg::kernels {

MatrixF64 to_f64(MatrixView<float> m) {
    MatrixF64 out(m.n_rows, m.n_cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        out.data[i] = static_cast<double>(m.data[i]);
    }
    return out;
}

DenseMatrix to_dense(const MatrixF64& m) {
    std::vector<float> data(m.data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = static_cast<float>(m.data[i]);
    }
    return DenseMatrix(m.n_rows, m.n_cols, std::move(data));
}

}  // namespace fseg::kernels
