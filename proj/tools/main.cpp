// Command-line driver: single solves, benchmark sweeps, diagnostics and
// worker-scaling runs on the two-phase unit-square test problem.
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "presslab/testbench.hpp"
#include "presslab/timestep.hpp"

namespace {

using namespace presslab;

struct CommonOpts {
    int grid = 256;
    double xi = 0.0;
    double eta = 1.0;
    double tau = 1.0;
};

void add_problem_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--grid", o.grid, "cells per axis (N, unit square)")->check(CLI::Range(2, 1 << 16));
    cmd->add_option("--xi", o.xi, "compressibility inhomogeneity parameter");
    cmd->add_option("--eta", o.eta, "second-phase permeability scale (> 0)");
    cmd->add_option("--tau", o.tau, "time step of the implicit system");
}

TestProblem make_problem(const CommonOpts& o) {
    TestProblem p;
    p.grid = Grid2D(1.0, 1.0, o.grid, o.grid);
    p.xi = o.xi;
    p.eta = o.eta;
    p.tau = o.tau;
    return p;
}

int cmd_solve(const CommonOpts& o, SolverConfig cfg, double sigma, int steps) {
    const TestProblem p = make_problem(o);
    if (steps > 0) {
        // time-dependent run of the weighted scheme with the unit source
        const StencilOperator a = assemble_composite(p.grid, p.fields());
        TimeSchemeConfig ts;
        ts.sigma = sigma;
        ts.tau = p.tau;
        ts.T = steps * p.tau;
        ts.source = [](double, double, double) { return 1.0; };
        const auto pc = build_preconditioner(assemble_weighted_lhs(a, ts.tau, ts.sigma), p.grid,
                                             p.fields(), p.tau, cfg);
        GridFunction y0(p.grid);
        auto [y, reports] = evolve(a, y0, ts, cfg, pc.get());
        bool all_ok = true;
        double total_ms = 0.0;
        int total_iters = 0;
        for (std::size_t n = 0; n < reports.size(); ++n) {
            const auto& r = reports[n];
            std::printf("step %3zu: iterations=%d converged=%s residual=%.3e time_ms=%.2f\n",
                        n + 1, r.iterations, r.converged ? "yes" : "no", r.final_true_residual,
                        r.wall_time * 1000.0);
            all_ok = all_ok && r.converged;
            total_ms += r.wall_time * 1000.0;
            total_iters += r.iterations;
        }
        std::printf("total: steps=%zu iterations=%d time_ms=%.2f max|y|=%.6e\n", reports.size(),
                    total_iters, total_ms, max_norm(y));
        return all_ok ? 0 : 1;
    }
    const BenchmarkRecord rec = run_point(p, cfg, 1);
    std::printf("grid=%d xi=%g eta=%g tau=%g pc=%s workers=%d\n", rec.grid, rec.xi, rec.eta,
                rec.tau, rec.pc.c_str(), rec.workers);
    std::printf("iterations=%d converged=%s residual=%.6e time_ms=%.2f\n", rec.iterations,
                rec.converged ? "yes" : "no", rec.residual, rec.time_ms);
    return rec.converged ? 0 : 1;
}

int cmd_sweep(int table, const std::string& axes_file, const std::string& out,
              const std::string& format, int reps, const SolverConfig& cfg) {
    SweepAxes axes;
    if (!axes_file.empty())
        axes = parse_axes_file(axes_file);
    else
        axes = table_axes(table);
    const auto records = run_sweep(axes, cfg, reps, &std::cout);
    export_records(records, format, out);
    std::cout << records.size() << " records written to " << out << "\n";
    for (const auto& r : records)
        if (!r.converged) return 1;
    return 0;
}

int cmd_check(const CommonOpts& o, int refine) {
    const TestProblem p = make_problem(o);
    const DiagnosticsReport d = run_diagnostics(p, refine);
    std::printf("problem: grid=%d xi=%g eta=%g tau=%g\n", o.grid, p.xi, p.eta, p.tau);
    std::printf("splitting defect (rel max-norm):      %.3e\n", d.splitting_defect);
    std::printf("skew-symmetry defect:                 %.3e\n", d.skew_defect);
    std::printf("energy ratio |(Cy,y)|/||y||^2:        %.6g  (grid bound %.6g, analytic %.6g) %s\n",
                d.energy_ratio, d.energy_constant_grid, d.energy_constant_analytic,
                d.energy_bound_holds ? "ok" : "VIOLATED");
    std::printf("subordination ratio ||Cy||^2/(Dy,y):  %.6g\n", d.subordination_ratio);
    std::printf("  printed constant:                   %.6g  (analytic %.6g)\n",
                d.subordination_constant_grid, d.subordination_constant_analytic);
    std::printf("  scaled bound 2/(rho*kappa)*const:   %.6g  %s\n", d.subordination_bound_scaled,
                d.subordination_scaled_holds ? "ok" : "VIOLATED");
    std::printf("Rayleigh quotients of phase-2 flux:   [%.6g, %.6g] in [%.6g, %.6g] %s\n",
                d.rayleigh_min, d.rayleigh_max, d.bracket_lo, d.bracket_hi,
                d.spectral_bracket_holds ? "ok" : "VIOLATED");
    std::printf("max principle (shifted system):       signs %s, min slack %.6g (expected %.6g)\n",
                d.max_principle.signs_positive ? "ok" : "VIOLATED", d.max_principle.min_slack,
                d.expected_slack);
    std::printf("div_h of phase-2 velocity -> %.6g:\n", d.divh_target);
    for (std::size_t i = 0; i < d.divh_errors.size(); ++i) {
        std::printf("  grid %4d: max error %.6e", d.refine_grids[i], d.divh_errors[i]);
        if (i > 0 && i - 1 < d.divh_orders.size())
            std::printf("  (order %.2f)", d.divh_orders[i - 1]);
        std::printf("\n");
    }
    const bool ok = d.energy_bound_holds && d.subordination_scaled_holds &&
                    d.spectral_bracket_holds && d.max_principle.holds;
    return ok ? 0 : 1;
}

int cmd_scale(const CommonOpts& o, const SolverConfig& cfg, const std::vector<int>& workers,
              const std::string& out, const std::string& format, int reps) {
    const TestProblem p = make_problem(o);
    const auto records = run_scaling(p, cfg, workers, reps);
    for (const auto& r : records)
        std::printf("workers=%d iterations=%d converged=%s time_ms=%.2f\n", r.workers,
                    r.iterations, r.converged ? "yes" : "no", r.time_ms);
    if (!out.empty()) {
        export_records(records, format, out);
        std::cout << records.size() << " records written to " << out << "\n";
    }
    for (const auto& r : records)
        if (!r.converged) return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"solver laboratory for the multiphase filtration pressure problem"};
    app.require_subcommand(1);

    CommonOpts opts;
    SolverConfig cfg;
    std::string pc_name = "none";
    double sigma = 1.0;
    int steps = 0;

    auto add_solver_flags = [&](CLI::App* cmd, bool with_workers = true) {
        cmd->add_option("--pc", pc_name, "preconditioner: none|jacobi|sor|ilu|mg|bjacobi");
        cmd->add_option("--rtol", cfg.rtol, "relative residual tolerance");
        cmd->add_option("--restart", cfg.restart, "Krylov restart length");
        cmd->add_option("--maxiter", cfg.max_iterations, "iteration cap");
        if (with_workers)
            cmd->add_option("--workers", cfg.workers, "worker threads")->check(CLI::Range(1, 256));
        cmd->add_option("--sor-omega", cfg.sor_omega, "SOR relaxation factor");
        cmd->add_option("--blocks", cfg.bjacobi_blocks, "block count for bjacobi (0: per worker)");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve one implicit-step system");
    add_problem_flags(solve, opts);
    add_solver_flags(solve);
    solve->add_option("--sigma", sigma, "scheme weight for --steps runs");
    solve->add_option("--steps", steps, "run this many time steps instead of one solve");

    CLI::App* sweep = app.add_subcommand("sweep", "run a benchmark sweep");
    int table = 0;
    std::string axes_file, out_path = "records.csv", format = "csv";
    int reps = 1;
    sweep->add_option("--table", table, "paper-style table axes (1..4)")->check(CLI::Range(1, 4));
    sweep->add_option("--axes", axes_file, "axes config file (key = v1,v2,... per line)");
    sweep->add_option("--out", out_path, "output path");
    sweep->add_option("--format", format, "csv|json");
    sweep->add_option("--reps", reps, "wall-time repetitions per point")->check(CLI::Range(1, 99));
    add_solver_flags(sweep);

    CLI::App* check = app.add_subcommand("check", "operator diagnostics");
    int refine = 2;
    add_problem_flags(check, opts);
    check->add_option("--refine", refine, "extra grid halvings for convergence orders")
        ->check(CLI::Range(0, 8));

    CLI::App* scale = app.add_subcommand("scale", "worker-count scaling study");
    add_problem_flags(scale, opts);
    add_solver_flags(scale, /*with_workers=*/false);
    std::string workers_list = "1,2,4";
    std::string scale_out, scale_format = "csv";
    int scale_reps = 3;
    scale->add_option("--workers", workers_list, "comma-separated worker counts");
    scale->add_option("--out", scale_out, "output path");
    scale->add_option("--format", scale_format, "csv|json");
    scale->add_option("--reps", scale_reps, "wall-time repetitions")->check(CLI::Range(1, 99));

    try {
        app.parse(argc, argv);
        cfg.preconditioner = precon_from_name(pc_name);
        cfg.validate();
        if (solve->parsed()) return cmd_solve(opts, cfg, sigma, steps);
        if (sweep->parsed()) {
            if (table == 0 && axes_file.empty())
                throw std::invalid_argument("sweep: need --table or --axes");
            return cmd_sweep(table, axes_file, out_path, format, reps, cfg);
        }
        if (check->parsed()) return cmd_check(opts, refine);
        if (scale->parsed()) {
            std::vector<int> workers;
            std::stringstream ss(workers_list);
            std::string item;
            while (std::getline(ss, item, ',')) workers.push_back(std::stoi(item));
            return cmd_scale(opts, cfg, workers, scale_out, scale_format, scale_reps);
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
