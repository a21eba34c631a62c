// Compressed sparse row storage for the assembled five-point systems.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "presslab/operators.hpp"

namespace presslab {

/// CSR matrix with rows in the canonical interior-node order and column
/// indices sorted within each row.
struct SparseMatrix {
    std::size_t rows = 0;
    std::vector<std::size_t> row_ptr;  // size rows + 1
    std::vector<int> col;
    std::vector<double> val;

    void multiply(std::span<const double> x, std::span<double> y) const;

    /// Principal submatrix on rows [begin, end); couplings outside the block
    /// are dropped.
    SparseMatrix diagonal_block(std::size_t begin, std::size_t end) const;
};

/// Explicit matrix form of a stencil operator: at most 5 entries per row,
/// entries toward the boundary are dropped.
SparseMatrix assemble_sparse(const StencilOperator& op);

}  // namespace presslab
