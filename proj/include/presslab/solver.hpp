// Restarted GMRES with left preconditioning, and the dense direct solver
// used as the small-instance oracle.
#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "presslab/grid.hpp"
#include "presslab/operators.hpp"
#include "presslab/parallel.hpp"
#include "presslab/sparse.hpp"

namespace presslab {

enum class PreconKind { none, jacobi, sor, ilu0, mg, bjacobi };

std::string_view precon_name(PreconKind kind);
PreconKind precon_from_name(std::string_view name);  // accepts "ilu" for ilu0

struct SolverConfig {
    double rtol = 1e-5;
    double atol = 1e-50;
    int max_iterations = 10000;
    int restart = 30;
    PreconKind preconditioner = PreconKind::none;
    double sor_omega = 1.0;
    int mg_presmooth = 2;
    int mg_postsmooth = 2;
    int mg_coarsest = 3;    // stop coarsening at <= this many interior nodes per axis
    int bjacobi_blocks = 0; // 0: one block per worker
    int workers = 1;

    void validate() const;  // throws std::invalid_argument
};

struct SolveReport {
    int iterations = 0;
    bool converged = false;
    bool breakdown = false;
    std::vector<double> residual_history;  // preconditioned residual norms
    double final_true_residual = 0.0;      // ||b - A x|| at exit
    double wall_time = 0.0;                // seconds
};

/// A fixed linear map from residual to correction.
class Preconditioner {
public:
    virtual ~Preconditioner() = default;
    virtual void apply(std::span<const double> r, std::span<double> z, WorkerPool& pool) const = 0;
    virtual std::string_view name() const = 0;
};

/// Left-preconditioned GMRES(m) with modified Gram-Schmidt and Givens
/// rotations. Stops when the preconditioned residual norm drops below
/// max(rtol * initial, atol). pc == nullptr means no preconditioning.
std::pair<GridFunction, SolveReport> gmres_solve(const StencilOperator& op,
                                                 const GridFunction& rhs,
                                                 const SolverConfig& config,
                                                 const GridFunction& x0,
                                                 const Preconditioner* pc = nullptr);

/// Same, with a caller-owned worker pool (config.workers is ignored).
SolveReport gmres_solve_into(const StencilOperator& op, std::span<const double> rhs,
                             const SolverConfig& config, std::span<double> x,
                             const Preconditioner* pc, WorkerPool& pool);

/// Dense Gaussian elimination with partial pivoting; interior must be at
/// most 32x32 nodes. Oracle for the iterative paths.
GridFunction dense_solve(const SparseMatrix& matrix, const GridFunction& rhs);

/// Row-major dense LU solve used by dense_solve and the multigrid coarse
/// level. a is overwritten; throws on singular pivots.
void dense_lu_factor(std::vector<double>& a, std::vector<int>& perm, std::size_t n);
void dense_lu_solve(const std::vector<double>& lu, const std::vector<int>& perm, std::size_t n,
                    std::span<double> b);

constexpr int kDenseMaxPerAxis = 32;

}  // namespace presslab
