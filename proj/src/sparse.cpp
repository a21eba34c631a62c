#include "presslab/sparse.hpp"

#include <stdexcept>

namespace presslab {

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != rows || y.size() != rows)
        throw std::invalid_argument("SparseMatrix::multiply: size mismatch");
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (std::size_t q = row_ptr[r]; q < row_ptr[r + 1]; ++q) acc += val[q] * x[col[q]];
        y[r] = acc;
    }
}

SparseMatrix SparseMatrix::diagonal_block(std::size_t begin, std::size_t end) const {
    if (begin > end || end > rows)
        throw std::invalid_argument("SparseMatrix::diagonal_block: bad range");
    SparseMatrix b;
    b.rows = end - begin;
    b.row_ptr.assign(b.rows + 1, 0);
    for (std::size_t r = begin; r < end; ++r) {
        for (std::size_t q = row_ptr[r]; q < row_ptr[r + 1]; ++q) {
            const std::size_t c = static_cast<std::size_t>(col[q]);
            if (c >= begin && c < end) ++b.row_ptr[r - begin + 1];
        }
    }
    for (std::size_t r = 0; r < b.rows; ++r) b.row_ptr[r + 1] += b.row_ptr[r];
    b.col.resize(b.row_ptr.back());
    b.val.resize(b.row_ptr.back());
    std::size_t q2 = 0;
    for (std::size_t r = begin; r < end; ++r) {
        for (std::size_t q = row_ptr[r]; q < row_ptr[r + 1]; ++q) {
            const std::size_t c = static_cast<std::size_t>(col[q]);
            if (c >= begin && c < end) {
                b.col[q2] = static_cast<int>(c - begin);
                b.val[q2] = val[q];
                ++q2;
            }
        }
    }
    return b;
}

SparseMatrix assemble_sparse(const StencilOperator& op) {
    const Grid2D& g = op.grid();
    const int nx = g.nx(), ny = g.ny();
    SparseMatrix m;
    m.rows = g.interior_count();
    m.row_ptr.reserve(m.rows + 1);
    m.col.reserve(m.rows * 5);
    m.val.reserve(m.rows * 5);
    m.row_ptr.push_back(0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t p = static_cast<std::size_t>(j) * nx + i;
            if (j > 0) {
                m.col.push_back(static_cast<int>(p) - nx);
                m.val.push_back(-op.south()[p]);
            }
            if (i > 0) {
                m.col.push_back(static_cast<int>(p) - 1);
                m.val.push_back(-op.west()[p]);
            }
            m.col.push_back(static_cast<int>(p));
            m.val.push_back(op.center()[p]);
            if (i + 1 < nx) {
                m.col.push_back(static_cast<int>(p) + 1);
                m.val.push_back(-op.east()[p]);
            }
            if (j + 1 < ny) {
                m.col.push_back(static_cast<int>(p) + nx);
                m.val.push_back(-op.north()[p]);
            }
            m.row_ptr.push_back(m.col.size());
        }
    }
    return m;
}

}  // namespace presslab
