// The two-phase unit-square test problem, the benchmark sweep and scaling
// harness, diagnostics, and machine-readable reporting.
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "presslab/preconditioners.hpp"
#include "presslab/solver.hpp"

namespace presslab {

/// Two-phase medium on the unit square: an incompressible first phase
/// (a1 = k1 = 1) and a second phase with a2 = exp(-xi*r2), k2 = eta*exp(xi*r2),
/// r2 = (x1-0.5)^2 + (x2-0.5)^2, so that a2*k2 = eta everywhere. Right-hand
/// side is 1. xi may have either sign; eta must be positive.
struct TestProblem {
    double xi = 0.0;
    double eta = 1.0;
    Grid2D grid{1.0, 1.0, 64, 64};
    double tau = 1.0;

    CoefficientField phase1() const;
    CoefficientField phase2() const;
    std::vector<CoefficientField> fields() const;

    /// Analytic energy constant 2*eta*|xi| of the second phase.
    double energy_constant_analytic() const;
    /// Analytic subordination constant 2*eta*xi^2 of the second phase.
    double subordination_constant_analytic() const;
};

/// Implicit single-step system: shifted composite operator and rhs = 1.
std::pair<StencilOperator, GridFunction> build_test_system(const TestProblem& p);

struct BenchmarkRecord {
    int grid = 0;
    double xi = 0.0;
    double eta = 1.0;
    double tau = 1.0;
    std::string pc = "none";
    int workers = 1;
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;
    double time_ms = 0.0;
};

struct SweepAxes {
    std::vector<int> grid{256};
    std::vector<double> xi{0.0};
    std::vector<double> eta{1.0};
    std::vector<double> tau{1.0};
    std::vector<PreconKind> pc{PreconKind::none};
    std::vector<int> workers{1};
};

/// Axes of the paper-style benchmark tables 1-4 (table 2 restricted to the
/// given grid list if nonempty).
SweepAxes table_axes(int table);

/// Cartesian product of the axes in nested order (grid, xi, eta, tau, pc,
/// workers), each point solved with x0 = 0; wall time is the median over
/// `repetitions` runs. Per-point failures are recorded, not thrown.
std::vector<BenchmarkRecord> run_sweep(const SweepAxes& axes, const SolverConfig& solver,
                                       int repetitions = 1,
                                       std::ostream* progress = nullptr);

/// Solves the same system at each worker count; block-Jacobi uses one block
/// per worker unless the config pins the block count.
std::vector<BenchmarkRecord> run_scaling(const TestProblem& p, const SolverConfig& solver,
                                         const std::vector<int>& worker_counts,
                                         int repetitions = 1);

/// One benchmark point (x0 = 0), preconditioner built from the config.
BenchmarkRecord run_point(const TestProblem& p, const SolverConfig& solver, int repetitions = 1);

struct DiagnosticsReport {
    // splitting A = sum(D + C), relative max-norm defect over random inputs
    double splitting_defect = 0.0;
    // |(Cbar y, z) + (y, Cbar z)| / (||y|| ||z||), worst over random pairs
    double skew_defect = 0.0;
    // worst |(C2 y, y)| / ||y||^2 against the grid and analytic constants
    double energy_ratio = 0.0;
    double energy_constant_grid = 0.0;
    double energy_constant_analytic = 0.0;
    bool energy_bound_holds = false;
    // worst ||C2 y||^2 / (D2 y, y) against the printed and scaled constants
    double subordination_ratio = 0.0;
    double subordination_constant_grid = 0.0;
    double subordination_constant_analytic = 0.0;
    double subordination_bound_scaled = 0.0;  // (2 / (rho2 * kappa2)) * grid constant
    bool subordination_scaled_holds = false;
    // Rayleigh quotients of the phase-2 flux-form operator
    double rayleigh_min = 0.0, rayleigh_max = 0.0;
    double bracket_lo = 0.0, bracket_hi = 0.0;  // kappa*delta, kappa_bar*Delta
    bool spectral_bracket_holds = false;
    // dominance of the shifted system
    DominanceReport max_principle;
    double expected_slack = 0.0;  // 1/tau
    // divergence of the phase-2 velocity vs the analytic constant
    double divh_target = 0.0;  // -4*eta*xi
    std::vector<int> refine_grids;
    std::vector<double> divh_errors;   // per refinement level
    std::vector<double> divh_orders;   // log2 of successive error ratios
};

/// Runs the algebraic diagnostics on the problem's operators; `refine`
/// extra grid halvings feed the divergence convergence estimate.
DiagnosticsReport run_diagnostics(const TestProblem& p, int refine = 2, int samples = 100);

/// CSV columns: grid,xi,eta,tau,pc,workers,iterations,converged,residual,time_ms.
/// JSON: array of objects with the same keys. Floats carry 17 significant
/// digits.
void export_records(const std::vector<BenchmarkRecord>& records, const std::string& format,
                    const std::string& path);
std::string records_to_csv(const std::vector<BenchmarkRecord>& records);
std::string records_to_json(const std::vector<BenchmarkRecord>& records);

/// Flat key = value file; list values are comma-separated. Keys mirror the
/// CLI flags (grid, xi, eta, tau, pc, workers).
SweepAxes parse_axes_file(const std::string& path);

}  // namespace presslab
