#include "presslab/testbench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace presslab {

namespace {

double r2_center(double x1, double x2) {
    return (x1 - 0.5) * (x1 - 0.5) + (x2 - 0.5) * (x2 - 0.5);
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

CoefficientField TestProblem::phase1() const {
    return {[](double, double) { return 1.0; }, [](double, double) { return 1.0; }, 1};
}

CoefficientField TestProblem::phase2() const {
    const double x = xi, e = eta;
    return {[x](double x1, double x2) { return std::exp(-x * r2_center(x1, x2)); },
            [x, e](double x1, double x2) { return e * std::exp(x * r2_center(x1, x2)); }, 2};
}

std::vector<CoefficientField> TestProblem::fields() const { return {phase1(), phase2()}; }

double TestProblem::energy_constant_analytic() const { return 2.0 * eta * std::abs(xi); }

double TestProblem::subordination_constant_analytic() const { return 2.0 * eta * xi * xi; }

std::pair<StencilOperator, GridFunction> build_test_system(const TestProblem& p) {
    if (!(p.eta > 0.0)) throw std::invalid_argument("build_test_system: eta must be positive");
    if (p.grid.n1 != p.grid.n2 || p.grid.l1 != 1.0 || p.grid.l2 != 1.0)
        throw std::invalid_argument("build_test_system: expected a square grid on the unit square");
    StencilOperator shifted = assemble_shifted(assemble_composite(p.grid, p.fields()), p.tau);
    GridFunction rhs(p.grid, 1.0);
    return {std::move(shifted), std::move(rhs)};
}

BenchmarkRecord run_point(const TestProblem& p, const SolverConfig& solver, int repetitions) {
    BenchmarkRecord rec;
    rec.grid = p.grid.n1;
    rec.xi = p.xi;
    rec.eta = p.eta;
    rec.tau = p.tau;
    rec.pc = std::string(precon_name(solver.preconditioner));
    rec.workers = solver.workers;
    try {
        auto [op, rhs] = build_test_system(p);
        const auto pc = build_preconditioner(op, p.grid, p.fields(), p.tau, solver);
        std::vector<double> times;
        for (int r = 0; r < std::max(1, repetitions); ++r) {
            GridFunction x0(p.grid);
            auto [x, rep] = gmres_solve(op, rhs, solver, x0, pc.get());
            times.push_back(rep.wall_time * 1000.0);
            rec.iterations = rep.iterations;
            rec.converged = rep.converged;
            rec.residual = rep.final_true_residual;
        }
        rec.time_ms = median(std::move(times));
    } catch (const std::exception&) {
        rec.converged = false;
        rec.iterations = 0;
        rec.residual = std::numeric_limits<double>::quiet_NaN();
        rec.time_ms = 0.0;
    }
    return rec;
}

SweepAxes table_axes(int table) {
    SweepAxes a;
    a.xi = {-10.0, -1.0, 0.0, 1.0, 10.0};
    switch (table) {
        case 1:
            a.grid = {256};
            a.eta = {0.01, 0.1, 1.0, 10.0, 100.0};
            break;
        case 2:
            a.grid = {128, 256, 512};
            a.pc = {PreconKind::none, PreconKind::jacobi, PreconKind::sor, PreconKind::ilu0,
                    PreconKind::mg};
            break;
        case 3:
            a.grid = {256};
            a.eta = {0.01, 0.1, 1.0};
            a.tau = {0.01, 0.1, 1.0, 10.0, 100.0};
            break;
        case 4:
            a.grid = {512};
            a.pc = {PreconKind::none, PreconKind::bjacobi, PreconKind::mg};
            a.workers = {1, 2, 4, 8, 16};
            break;
        default:
            throw std::invalid_argument("table_axes: table must be 1..4");
    }
    return a;
}

std::vector<BenchmarkRecord> run_sweep(const SweepAxes& axes, const SolverConfig& solver,
                                       int repetitions, std::ostream* progress) {
    if (axes.grid.empty() || axes.xi.empty() || axes.eta.empty() || axes.tau.empty() ||
        axes.pc.empty() || axes.workers.empty())
        throw std::invalid_argument("run_sweep: empty axis");
    std::vector<BenchmarkRecord> out;
    for (int grid : axes.grid)
        for (double xi : axes.xi)
            for (double eta : axes.eta)
                for (double tau : axes.tau)
                    for (PreconKind pc : axes.pc)
                        for (int workers : axes.workers) {
                            TestProblem p;
                            p.grid = Grid2D(1.0, 1.0, grid, grid);
                            p.xi = xi;
                            p.eta = eta;
                            p.tau = tau;
                            SolverConfig cfg = solver;
                            cfg.preconditioner = pc;
                            cfg.workers = workers;
                            out.push_back(run_point(p, cfg, repetitions));
                            if (progress) {
                                const auto& r = out.back();
                                *progress << "grid=" << r.grid << " xi=" << r.xi
                                          << " eta=" << r.eta << " tau=" << r.tau
                                          << " pc=" << r.pc << " workers=" << r.workers
                                          << " iters=" << r.iterations
                                          << (r.converged ? "" : " (not converged)")
                                          << " time_ms=" << r.time_ms << "\n";
                            }
                        }
    return out;
}

std::vector<BenchmarkRecord> run_scaling(const TestProblem& p, const SolverConfig& solver,
                                         const std::vector<int>& worker_counts, int repetitions) {
    if (worker_counts.empty()) throw std::invalid_argument("run_scaling: no worker counts");
    std::vector<BenchmarkRecord> out;
    for (int w : worker_counts) {
        if (w < 1) throw std::invalid_argument("run_scaling: worker counts must be >= 1");
        SolverConfig cfg = solver;
        cfg.workers = w;
        out.push_back(run_point(p, cfg, repetitions));
    }
    return out;
}

DiagnosticsReport run_diagnostics(const TestProblem& p, int refine, int samples) {
    DiagnosticsReport d;
    const Grid2D& g = p.grid;
    const auto fields = p.fields();
    const StencilOperator a = assemble_composite(g, fields);
    const StencilOperator shifted = assemble_shifted(a, p.tau);
    const CoefficientField f2 = p.phase2();
    const GridVelocity v2 = grid_velocity(g, f2);
    const StencilOperator d2 = assemble_diffusion(g, f2);
    const StencilOperator c2 = assemble_convection(g, v2);
    const StencilOperator cbar2 = assemble_skew(g, v2);
    const StencilOperator lam2 = assemble_lambda(g, f2);

    std::vector<StencilOperator> split_parts;
    for (const auto& f : fields) {
        split_parts.push_back(assemble_diffusion(g, f));
        split_parts.push_back(assemble_convection(g, grid_velocity(g, f)));
    }

    std::mt19937_64 rng(20110727);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    auto random_fn = [&] {
        GridFunction y(g);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = uni(rng);
        return y;
    };

    d.energy_constant_grid = energy_constant(g, v2);
    d.energy_constant_analytic = p.energy_constant_analytic();
    d.subordination_constant_grid = subordination_constant(g, v2);
    d.subordination_constant_analytic = p.subordination_constant_analytic();

    // extrema of the phase-2 coefficients over the sampled points
    double a2_min = std::numeric_limits<double>::infinity();
    for (int i2 = 0; i2 <= g.n2; ++i2)
        for (int i1 = 0; i1 <= g.n1; ++i1) a2_min = std::min(a2_min, f2.a(g.x1(i1), g.x2(i2)));
    double k2_min = std::numeric_limits<double>::infinity(), k2_max = 0.0;
    for (int i2 = 1; i2 < g.n2; ++i2)
        for (int i1 = 0; i1 < g.n1; ++i1) {
            const double k = f2.k(g.x1(i1) + 0.5 * g.h1, g.x2(i2));
            k2_min = std::min(k2_min, k);
            k2_max = std::max(k2_max, k);
        }
    for (int i2 = 0; i2 < g.n2; ++i2)
        for (int i1 = 1; i1 < g.n1; ++i1) {
            const double k = f2.k(g.x1(i1), g.x2(i2) + 0.5 * g.h2);
            k2_min = std::min(k2_min, k);
            k2_max = std::max(k2_max, k);
        }
    d.subordination_bound_scaled = 2.0 / (a2_min * k2_min) * d.subordination_constant_grid;

    const SpectralBounds sb = grid_spectral_bounds(g);
    d.bracket_lo = k2_min * sb.delta;
    d.bracket_hi = k2_max * sb.Delta;

    d.rayleigh_min = std::numeric_limits<double>::infinity();
    d.rayleigh_max = 0.0;
    for (int s = 0; s < samples; ++s) {
        const GridFunction y = random_fn();
        const GridFunction z = random_fn();
        const double ynorm2 = inner_product(y, y);
        const double ynorm = std::sqrt(ynorm2), znorm = l2_norm(z);

        GridFunction ay = a.apply(y);
        GridFunction sum(g);
        for (const auto& part : split_parts) {
            GridFunction py = part.apply(y);
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += py[i];
        }
        double defect = 0.0;
        for (std::size_t i = 0; i < sum.size(); ++i)
            defect = std::max(defect, std::abs(ay[i] - sum[i]));
        d.splitting_defect = std::max(d.splitting_defect, defect / std::max(1e-300, max_norm(ay)));

        const GridFunction cby = cbar2.apply(y), cbz = cbar2.apply(z);
        d.skew_defect = std::max(d.skew_defect, std::abs(inner_product(cby, z) +
                                                         inner_product(y, cbz)) /
                                                    std::max(1e-300, ynorm * znorm));

        const GridFunction cy = c2.apply(y);
        d.energy_ratio = std::max(d.energy_ratio, std::abs(inner_product(cy, y)) / ynorm2);

        const double cnorm2 = inner_product(cy, cy);
        const GridFunction dy = d2.apply(y);
        const double dyy = inner_product(dy, y);
        if (dyy > 0.0) d.subordination_ratio = std::max(d.subordination_ratio, cnorm2 / dyy);

        const GridFunction ly = lam2.apply(y);
        const double rq = inner_product(ly, y) / ynorm2;
        d.rayleigh_min = std::min(d.rayleigh_min, rq);
        d.rayleigh_max = std::max(d.rayleigh_max, rq);
    }
    d.energy_bound_holds = d.energy_ratio <= d.energy_constant_grid * (1.0 + 1e-10) + 1e-300;
    d.subordination_scaled_holds =
        d.subordination_ratio <= d.subordination_bound_scaled * (1.0 + 1e-10) + 1e-300;
    d.spectral_bracket_holds = d.rayleigh_min >= d.bracket_lo * (1.0 - 1e-10) &&
                               d.rayleigh_max <= d.bracket_hi * (1.0 + 1e-10);

    d.max_principle = check_max_principle(shifted);
    d.expected_slack = 1.0 / p.tau;

    d.divh_target = -4.0 * p.eta * p.xi;
    int n = g.n1;
    for (int level = 0; level <= std::max(0, refine); ++level) {
        const Grid2D rg(1.0, 1.0, n, n);
        const GridFunction dv = div_h(rg, grid_velocity(rg, f2));
        double err = 0.0;
        for (std::size_t i = 0; i < dv.size(); ++i)
            err = std::max(err, std::abs(dv[i] - d.divh_target));
        d.refine_grids.push_back(n);
        d.divh_errors.push_back(err);
        n *= 2;
    }
    for (std::size_t i = 0; i + 1 < d.divh_errors.size(); ++i) {
        if (d.divh_errors[i] > 0.0 && d.divh_errors[i + 1] > 0.0)
            d.divh_orders.push_back(std::log2(d.divh_errors[i] / d.divh_errors[i + 1]));
    }
    return d;
}

std::string records_to_csv(const std::vector<BenchmarkRecord>& recs) {
    std::ostringstream os;
    os << "grid,xi,eta,tau,pc,workers,iterations,converged,residual,time_ms\n";
    for (const auto& r : recs) {
        os << r.grid << ',' << fmt17(r.xi) << ',' << fmt17(r.eta) << ',' << fmt17(r.tau) << ','
           << r.pc << ',' << r.workers << ',' << r.iterations << ','
           << (r.converged ? "true" : "false") << ',' << fmt17(r.residual) << ','
           << fmt17(r.time_ms) << '\n';
    }
    return os.str();
}

std::string records_to_json(const std::vector<BenchmarkRecord>& recs) {
    std::ostringstream os;
    os << "[\n";
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        os << "  {\"grid\": " << r.grid << ", \"xi\": " << fmt17(r.xi)
           << ", \"eta\": " << fmt17(r.eta) << ", \"tau\": " << fmt17(r.tau) << ", \"pc\": \""
           << r.pc << "\", \"workers\": " << r.workers << ", \"iterations\": " << r.iterations
           << ", \"converged\": " << (r.converged ? "true" : "false")
           << ", \"residual\": " << fmt17(r.residual) << ", \"time_ms\": " << fmt17(r.time_ms)
           << "}" << (i + 1 < recs.size() ? "," : "") << "\n";
    }
    os << "]\n";
    return os.str();
}

void export_records(const std::vector<BenchmarkRecord>& recs, const std::string& format,
                    const std::string& path) {
    std::string body;
    if (format == "csv")
        body = records_to_csv(recs);
    else if (format == "json")
        body = records_to_json(recs);
    else
        throw std::invalid_argument("export_records: format must be csv or json");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_records: cannot open " + path);
    out << body;
    if (!out.good()) throw std::runtime_error("export_records: write failed for " + path);
}

SweepAxes parse_axes_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("axes file not found: " + path);
    SweepAxes a;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("axes file: missing '=' on line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const auto items = split_list(line.substr(eq + 1));
        if (items.empty())
            throw std::invalid_argument("axes file: empty value on line " + std::to_string(lineno));
        if (key == "grid") {
            a.grid.clear();
            for (const auto& s : items) a.grid.push_back(std::stoi(s));
        } else if (key == "xi") {
            a.xi.clear();
            for (const auto& s : items) a.xi.push_back(std::stod(s));
        } else if (key == "eta") {
            a.eta.clear();
            for (const auto& s : items) a.eta.push_back(std::stod(s));
        } else if (key == "tau") {
            a.tau.clear();
            for (const auto& s : items) a.tau.push_back(std::stod(s));
        } else if (key == "pc") {
            a.pc.clear();
            for (const auto& s : items) a.pc.push_back(precon_from_name(s));
        } else if (key == "workers") {
            a.workers.clear();
            for (const auto& s : items) a.workers.push_back(std::stoi(s));
        } else {
            throw std::invalid_argument("axes file: unknown key '" + key + "' on line " +
                                        std::to_string(lineno));
        }
    }
    return a;
}

}  // namespace presslab
