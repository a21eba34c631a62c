// The preconditioner suite: pointwise Jacobi, symmetric SOR sweeps,
// ILU(0) on the five-point pattern, geometric multigrid V-cycles, and
// block-Jacobi with per-block ILU(0).
#pragma once

#include <memory>
#include <vector>

#include "presslab/solver.hpp"

namespace presslab {

/// Pointwise division by the center coefficient.
std::unique_ptr<Preconditioner> make_jacobi(const StencilOperator& op);

/// One forward plus one backward SOR sweep from a zero start.
std::unique_ptr<Preconditioner> make_sor(const StencilOperator& op, double omega);

/// Zero-fill incomplete LU in canonical row order, no pivoting.
std::unique_ptr<Preconditioner> make_ilu0(const SparseMatrix& matrix);

/// Per-block ILU(0) on contiguous near-equal row strips; inter-block
/// couplings are ignored and blocks apply independently.
std::unique_ptr<Preconditioner> make_bjacobi(const SparseMatrix& matrix, int blocks);

/// Geometric multigrid V-cycle: coarse levels re-discretized from the
/// analytic coefficients with the same shift, full-weighting restriction,
/// bilinear prolongation, lexicographic Gauss-Seidel smoothing, dense
/// direct solve on the coarsest level.
std::unique_ptr<Preconditioner> make_mg(const Grid2D& grid,
                                        const std::vector<CoefficientField>& fields, double tau,
                                        const SolverConfig& config);

/// Builds the preconditioner selected by config for the shifted test
/// system; returns nullptr for PreconKind::none.
std::unique_ptr<Preconditioner> build_preconditioner(const StencilOperator& shifted_op,
                                                     const Grid2D& grid,
                                                     const std::vector<CoefficientField>& fields,
                                                     double tau, const SolverConfig& config);

}  // namespace presslab
