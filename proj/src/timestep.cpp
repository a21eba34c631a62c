#include "presslab/timestep.hpp"

#include <cmath>
#include <stdexcept>

namespace presslab {

int TimeSchemeConfig::steps() const { return std::max(1, static_cast<int>(std::lround(T / tau))); }

void TimeSchemeConfig::validate() const {
    if (!(sigma >= 0.0 && sigma <= 1.0)) throw std::invalid_argument("sigma must lie in [0, 1]");
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
    if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
    if (!source) throw std::invalid_argument("source function is required");
}

GridFunction sample_source(const Grid2D& g,
                           const std::function<double(double, double, double)>& f, double t) {
    GridFunction phi(g);
    for (int i2 = 1; i2 < g.n2; ++i2)
        for (int i1 = 1; i1 < g.n1; ++i1) phi.ref(i1, i2) = f(g.x1(i1), g.x2(i2), t);
    return phi;
}

namespace {

// rhs = y/tau - (1-sigma) * A y + phi, evaluated matrix-free
GridFunction explicit_rhs(const StencilOperator& op_a, const GridFunction& y,
                          const TimeSchemeConfig& cfg, double t_n) {
    const Grid2D& g = y.grid();
    const double t_blend = cfg.sigma * (t_n + cfg.tau) + (1.0 - cfg.sigma) * t_n;
    GridFunction phi = sample_source(g, cfg.source, t_blend);
    GridFunction ay = op_a.apply(y);
    GridFunction rhs(g);
    const double inv_tau = 1.0 / cfg.tau, expl = 1.0 - cfg.sigma;
    for (std::size_t p = 0; p < rhs.size(); ++p)
        rhs[p] = y[p] * inv_tau - expl * ay[p] + phi[p];
    return rhs;
}

}  // namespace

std::pair<GridFunction, SolveReport> step_weighted(const StencilOperator& op_a,
                                                   const GridFunction& y_n,
                                                   const TimeSchemeConfig& cfg, double t_n,
                                                   const SolverConfig& solver,
                                                   const Preconditioner* pc) {
    cfg.validate();
    if (!(y_n.grid() == op_a.grid())) throw std::invalid_argument("step_weighted: grid mismatch");
    if (cfg.sigma == 0.0) {
        // explicit update y + tau*(phi - A y)
        GridFunction phi = sample_source(y_n.grid(), cfg.source, t_n);
        GridFunction ay = op_a.apply(y_n);
        GridFunction y_next = y_n;
        for (std::size_t p = 0; p < y_next.size(); ++p)
            y_next[p] += cfg.tau * (phi[p] - ay[p]);
        return {std::move(y_next), SolveReport{}};
    }
    const StencilOperator lhs = assemble_weighted_lhs(op_a, cfg.tau, cfg.sigma);
    const GridFunction rhs = explicit_rhs(op_a, y_n, cfg, t_n);
    auto [y_next, rep] = gmres_solve(lhs, rhs, solver, y_n, pc);
    return {std::move(y_next), std::move(rep)};
}

std::pair<GridFunction, std::vector<SolveReport>> evolve(const StencilOperator& op_a,
                                                         const GridFunction& y0,
                                                         const TimeSchemeConfig& cfg,
                                                         const SolverConfig& solver,
                                                         const Preconditioner* pc) {
    cfg.validate();
    if (!(y0.grid() == op_a.grid())) throw std::invalid_argument("evolve: grid mismatch");
    const int nsteps = cfg.steps();
    std::vector<SolveReport> reports;
    reports.reserve(nsteps);
    GridFunction y = y0;
    if (cfg.sigma == 0.0) {
        for (int n = 0; n < nsteps; ++n) {
            auto [y_next, rep] = step_weighted(op_a, y, cfg, n * cfg.tau, solver, pc);
            y = std::move(y_next);
            reports.push_back(std::move(rep));
        }
        return {std::move(y), std::move(reports)};
    }
    const StencilOperator lhs = assemble_weighted_lhs(op_a, cfg.tau, cfg.sigma);
    WorkerPool pool(solver.workers);
    for (int n = 0; n < nsteps; ++n) {
        const GridFunction rhs = explicit_rhs(op_a, y, cfg, n * cfg.tau);
        // warm start from the previous level; failures surface in the report
        SolveReport rep = gmres_solve_into(lhs, rhs.values(), solver, y.values(), pc, pool);
        reports.push_back(std::move(rep));
    }
    return {std::move(y), std::move(reports)};
}

}  // namespace presslab
