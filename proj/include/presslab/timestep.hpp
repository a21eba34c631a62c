// Weighted two-level scheme for the semi-discrete pressure equation.
#pragma once

#include <functional>
#include <vector>

#include "presslab/solver.hpp"

namespace presslab {

struct TimeSchemeConfig {
    double sigma = 1.0;  // implicitness weight in [0, 1]
    double tau = 1.0;    // time step > 0
    double T = 1.0;      // final time > 0
    std::function<double(double, double, double)> source;  // f(x1, x2, t)

    int steps() const;   // round(T / tau), >= 1
    void validate() const;
};

/// One step of (E/tau + sigma*A) y_next = (E/tau - (1-sigma)*A) y + phi,
/// with phi sampled at the blended time sigma*t_next + (1-sigma)*t.
/// sigma = 0 is the explicit update (no solve, empty report).
std::pair<GridFunction, SolveReport> step_weighted(const StencilOperator& op_a,
                                                   const GridFunction& y_n,
                                                   const TimeSchemeConfig& cfg, double t_n,
                                                   const SolverConfig& solver,
                                                   const Preconditioner* pc = nullptr);

/// Runs the scheme from y0 at t = 0 to t = T; the implicit system is
/// assembled once and each step warm-starts from the previous level.
std::pair<GridFunction, std::vector<SolveReport>> evolve(const StencilOperator& op_a,
                                                         const GridFunction& y0,
                                                         const TimeSchemeConfig& cfg,
                                                         const SolverConfig& solver,
                                                         const Preconditioner* pc = nullptr);

/// Samples f(., t) on the interior nodes.
GridFunction sample_source(const Grid2D& grid,
                           const std::function<double(double, double, double)>& f, double t);

}  // namespace presslab
