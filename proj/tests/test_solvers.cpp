#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "presslab/preconditioners.hpp"
#include "presslab/solver.hpp"
#include "presslab/testbench.hpp"

using namespace presslab;

namespace {

StencilOperator identity_operator(const Grid2D& g) {
    const std::size_t n = g.interior_count();
    return {g, StencilKind::custom, std::vector<double>(n, 1.0), std::vector<double>(n, 0.0),
            std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
}

TestProblem make_problem(int n, double xi, double eta, double tau) {
    TestProblem p;
    p.grid = Grid2D(1.0, 1.0, n, n);
    p.xi = xi;
    p.eta = eta;
    p.tau = tau;
    return p;
}

// worst relative defect of P(alpha r + beta s) vs alpha P r + beta P s
double linearity_defect(const Preconditioner& pc, const Grid2D& g, std::mt19937_64& rng) {
    WorkerPool pool(1);
    const std::size_t n = g.interior_count();
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
        std::vector<double> r(n), s(n), mix(n), pr(n), ps(n), pmix(n);
        const double alpha = uni(rng), beta = uni(rng);
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = uni(rng);
            s[i] = uni(rng);
            mix[i] = alpha * r[i] + beta * s[i];
        }
        pc.apply(r, pr, pool);
        pc.apply(s, ps, pool);
        pc.apply(mix, pmix, pool);
        double defect = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            defect = std::max(defect, std::abs(pmix[i] - alpha * pr[i] - beta * ps[i]));
            scale = std::max(scale, std::abs(pmix[i]));
        }
        worst = std::max(worst, defect / std::max(scale, 1e-300));
    }
    return worst;
}

}  // namespace

TEST_CASE("gmres: identity system converges in one iteration") {
    Grid2D g(1.0, 1.0, 8, 8);
    std::mt19937_64 rng(3);
    const GridFunction b = oracle::random_function(g, rng);
    SolverConfig cfg;
    auto [x, rep] = gmres_solve(identity_operator(g), b, cfg, GridFunction(g));
    CHECK(rep.converged);
    CHECK(rep.iterations == 1);
    CHECK(oracle::rel_maxnorm_diff(x, b) <= 1e-12);
}

TEST_CASE("gmres: exact initial guess needs no iterations") {
    TestProblem p = make_problem(8, 1.0, 1.0, 1.0);
    auto [op, rhs] = build_test_system(p);
    const GridFunction exact = dense_solve(assemble_sparse(op), rhs);
    SolverConfig cfg;
    auto [x, rep] = gmres_solve(op, op.apply(exact), cfg, exact);
    CHECK(rep.converged);
    CHECK(rep.iterations <= 1);
}

TEST_CASE("gmres matches the dense oracle on the 16x16 test system") {
    TestProblem p = make_problem(16, 1.0, 1.0, 1.0);
    auto [op, rhs] = build_test_system(p);
    const GridFunction ref = dense_solve(assemble_sparse(op), rhs);
    SolverConfig cfg;
    cfg.rtol = 1e-10;
    auto [x, rep] = gmres_solve(op, rhs, cfg, GridFunction(p.grid));
    CHECK(rep.converged);
    CHECK(oracle::rel_maxnorm_diff(ref, x) <= 1e-6);
}

TEST_CASE("gmres residual history is monotone within cycles") {
    TestProblem p = make_problem(32, 1.0, 1.0, 1.0);
    auto [op, rhs] = build_test_system(p);
    SolverConfig cfg;
    cfg.restart = 10;
    auto [x, rep] = gmres_solve(op, rhs, cfg, GridFunction(p.grid));
    CHECK(rep.converged);
    REQUIRE(rep.residual_history.size() >= 2);
    for (std::size_t i = 1; i < rep.residual_history.size(); ++i)
        CHECK(rep.residual_history[i] <= rep.residual_history[i - 1] * (1.0 + 1e-9));
    CHECK(rep.residual_history.back() / rep.residual_history.front() <= cfg.rtol);
    CHECK(rep.iterations + 1 == static_cast<int>(rep.residual_history.size()));
}

TEST_CASE("gmres: iteration cap reports non-convergence honestly") {
    TestProblem p = make_problem(32, 0.0, 1.0, 1.0);
    auto [op, rhs] = build_test_system(p);
    SolverConfig cfg;
    cfg.max_iterations = 5;
    auto [x, rep] = gmres_solve(op, rhs, cfg, GridFunction(p.grid));
    CHECK_FALSE(rep.converged);
    CHECK(rep.iterations == 5);
}

TEST_CASE("gmres: exact invariant subspace triggers the breakdown path") {
    // 32x32 interior of ones: every norm and projection is a power of two,
    // so the Arnoldi residual cancels exactly
    Grid2D g(1.0, 1.0, 33, 33);
    GridFunction b(g, 1.0);
    SolverConfig cfg;
    auto [x, rep] = gmres_solve(identity_operator(g), b, cfg, GridFunction(g));
    CHECK(rep.converged);
    CHECK(rep.breakdown);
    CHECK(rep.iterations == 1);
    CHECK(oracle::rel_maxnorm_diff(x, b) == 0.0);
}

TEST_CASE("gmres: non-finite data raises a numerical failure") {
    Grid2D g(1.0, 1.0, 6, 6);
    const std::size_t n = g.interior_count();
    std::vector<double> c(n, 1.0);
    c[3] = std::numeric_limits<double>::quiet_NaN();
    const StencilOperator op(g, StencilKind::custom, std::move(c), std::vector<double>(n, 0.0),
                             std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                             std::vector<double>(n, 0.0));
    SolverConfig cfg;
    CHECK_THROWS_AS(gmres_solve(op, GridFunction(g, 1.0), cfg, GridFunction(g)),
                    std::runtime_error);
}

TEST_CASE("solver config validation") {
    SolverConfig cfg;
    cfg.rtol = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.restart = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.sor_omega = 2.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("jacobi: halves the residual for a constant diagonal of two") {
    Grid2D g(1.0, 1.0, 6, 6);
    const std::size_t n = g.interior_count();
    const StencilOperator two(g, StencilKind::custom, std::vector<double>(n, 2.0),
                              std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                              std::vector<double>(n, 0.0), std::vector<double>(n, 0.0));
    const auto pc = make_jacobi(two);
    WorkerPool pool(1);
    std::vector<double> r(n, 3.0), z(n);
    pc->apply(r, z, pool);
    for (double v : z) CHECK(v == 1.5);

    std::mt19937_64 rng(5);
    CHECK(linearity_defect(*pc, g, rng) <= 1e-14);
}

TEST_CASE("jacobi: zero center is a singular preconditioner") {
    Grid2D g(1.0, 1.0, 6, 6);
    const std::size_t n = g.interior_count();
    std::vector<double> c(n, 1.0);
    c[7] = 0.0;
    const StencilOperator op(g, StencilKind::custom, std::move(c), std::vector<double>(n, 0.0),
                             std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                             std::vector<double>(n, 0.0));
    CHECK_THROWS_AS(make_jacobi(op), std::runtime_error);
}

TEST_CASE("jacobi on the shifted system converges (no count guarantee)") {
    TestProblem p = make_problem(32, 1.0, 1.0, 1.0);
    auto [op, rhs] = build_test_system(p);
    SolverConfig cfg;
    const auto pc = make_jacobi(op);
    auto [x, rep] = gmres_solve(op, rhs, cfg, GridFunction(p.grid), pc.get());
    CHECK(rep.converged);
}

TEST_CASE("sor: reduces to jacobi on a diagonal operator") {
    Grid2D g(1.0, 1.0, 6, 6);
    const std::size_t n = g.interior_count();
    std::vector<double> diag(n);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.5, 3.0);
    for (auto& v : diag) v = uni(rng);
    std::vector<double> dcopy = diag;
    const StencilOperator op(g, StencilKind::custom, std::move(dcopy),
                             std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                             std::vector<double>(n, 0.0), std::vector<double>(n, 0.0));
    const auto sor = make_sor(op, 1.0);
    const auto jac = make_jacobi(op);
    WorkerPool pool(1);
    std::vector<double> r(n), zs(n), zj(n);
    for (auto& v : r) v = uni(rng);
    sor->apply(r, zs, pool);
    jac->apply(r, zj, pool);
    for (std::size_t i = 0; i < n; ++i) CHECK(zs[i] == zj[i]);

    CHECK(linearity_defect(*sor, g, rng) <= 1e-14);
    CHECK_THROWS_AS(make_sor(op, 2.5), std::invalid_argument);
}

TEST_CASE("sor beats no preconditioning on the test system") {
    TestProblem p = make_problem(64, 0.0, 1.0, 1.0);
    auto [op, rhs] = build_test_system(p);
    SolverConfig cfg;
    auto [x0, rep_none] = gmres_solve(op, rhs, cfg, GridFunction(p.grid));
    const auto pc = make_sor(op, 1.0);
    auto [x1, rep_sor] = gmres_solve(op, rhs, cfg, GridFunction(p.grid), pc.get());
    CHECK(rep_none.converged);
    CHECK(rep_sor.converged);
    CHECK(rep_sor.iterations < rep_none.iterations);
}

TEST_CASE("ilu0: diagonal matrix factors to the jacobi application") {
    Grid2D g(1.0, 1.0, 6, 6);
    const std::size_t n = g.interior_count();
    std::vector<double> diag(n);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(0.5, 3.0);
    for (auto& v : diag) v = uni(rng);
    std::vector<double> dcopy = diag;
    const StencilOperator op(g, StencilKind::custom, std::move(dcopy),
                             std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                             std::vector<double>(n, 0.0), std::vector<double>(n, 0.0));
    const auto ilu = make_ilu0(assemble_sparse(op));
    const auto jac = make_jacobi(op);
    WorkerPool pool(1);
    std::vector<double> r(n), zi(n), zj(n);
    for (auto& v : r) v = uni(rng);
    ilu->apply(r, zi, pool);
    jac->apply(r, zj, pool);
    for (std::size_t i = 0; i < n; ++i) CHECK(zi[i] == zj[i]);
}

TEST_CASE("ilu0: exact on a tridiagonal (one interior row) system") {
    // a 1D chain has no fill outside the pattern, so ILU(0) is an exact LU
    Grid2D g(1.0, 1.0, 32, 2);
    const StencilOperator lam = assemble_shifted(
        assemble_lambda(g, CoefficientField{[](double, double) { return 1.0; },
                                            [](double x1, double) { return 1.0 + 0.5 * x1; }, 0}),
        1.0);
    const auto ilu = make_ilu0(assemble_sparse(lam));
    SolverConfig cfg;
    cfg.rtol = 1e-8;
    std::mt19937_64 rng(13);
    const GridFunction b = oracle::random_function(g, rng);
    auto [x, rep] = gmres_solve(lam, b, cfg, GridFunction(g), ilu.get());
    CHECK(rep.converged);
    CHECK(rep.iterations == 1);
}

TEST_CASE("ilu0: linearity and a zero-pivot failure") {
    TestProblem p = make_problem(16, 1.0, 1.0, 1.0);
    auto [op, rhs] = build_test_system(p);
    const auto ilu = make_ilu0(assemble_sparse(op));
    std::mt19937_64 rng(17);
    CHECK(linearity_defect(*ilu, p.grid, rng) <= 1e-12);

    Grid2D g(1.0, 1.0, 6, 6);
    const std::size_t n = g.interior_count();
    const StencilOperator zero(g, StencilKind::custom, std::vector<double>(n, 0.0),
                               std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                               std::vector<double>(n, 0.0), std::vector<double>(n, 0.0));
    CHECK_THROWS_WITH_AS(make_ilu0(assemble_sparse(zero)), doctest::Contains("zero pivot"),
                         std::runtime_error);
}

TEST_CASE("ilu0 beats sor on the test system") {
    TestProblem p = make_problem(64, 0.0, 1.0, 1.0);
    auto [op, rhs] = build_test_system(p);
    SolverConfig cfg;
    const auto sor = make_sor(op, 1.0);
    const auto ilu = make_ilu0(assemble_sparse(op));
    auto [xs, rep_sor] = gmres_solve(op, rhs, cfg, GridFunction(p.grid), sor.get());
    auto [xi, rep_ilu] = gmres_solve(op, rhs, cfg, GridFunction(p.grid), ilu.get());
    CHECK(rep_ilu.converged);
    CHECK(rep_ilu.iterations < rep_sor.iterations);
}

TEST_CASE("multigrid: one-level hierarchy is a direct solve") {
    TestProblem p = make_problem(16, 1.0, 1.0, 1.0);
    auto [op, rhs] = build_test_system(p);
    SolverConfig cfg;
    cfg.mg_coarsest = 15;  // finest interior already at the threshold
    const auto mg = make_mg(p.grid, p.fields(), p.tau, cfg);
    auto [x, rep] = gmres_solve(op, rhs, cfg, GridFunction(p.grid), mg.get());
    CHECK(rep.converged);
    CHECK(rep.iterations == 1);
}

TEST_CASE("multigrid: V-cycle is a linear map") {
    TestProblem p = make_problem(32, 1.0, 1.0, 1.0);
    SolverConfig cfg;
    const auto mg = make_mg(p.grid, p.fields(), p.tau, cfg);
    std::mt19937_64 rng(19);
    CHECK(linearity_defect(*mg, p.grid, rng) <= 1e-12);
}

TEST_CASE("multigrid: grid-independent few-iteration convergence") {
    for (int n : {32, 64, 128}) {
        for (double xi : {-10.0, 0.0, 10.0}) {
            TestProblem p = make_problem(n, xi, 1.0, 1.0);
            auto [op, rhs] = build_test_system(p);
            SolverConfig cfg;
            const auto mg = make_mg(p.grid, p.fields(), p.tau, cfg);
            auto [x, rep] = gmres_solve(op, rhs, cfg, GridFunction(p.grid), mg.get());
            CHECK(rep.converged);
            CHECK(rep.iterations <= 10);
        }
    }
}

TEST_CASE("multigrid: grids that cannot reach a small coarse level are rejected") {
    TestProblem p = make_problem(254, 1.0, 1.0, 1.0);  // 254 -> 127 (odd, interior 126)
    SolverConfig cfg;
    CHECK_THROWS_AS(make_mg(p.grid, p.fields(), p.tau, cfg), std::invalid_argument);
}

TEST_CASE("block-jacobi: one block reproduces the global factorization") {
    TestProblem p = make_problem(32, 1.0, 1.0, 1.0);
    auto [op, rhs] = build_test_system(p);
    const SparseMatrix m = assemble_sparse(op);
    const auto one = make_bjacobi(m, 1);
    const auto ilu = make_ilu0(m);
    WorkerPool pool(1);
    std::mt19937_64 rng(23);
    const std::size_t n = m.rows;
    std::vector<double> r(n), za(n), zb(n);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (auto& v : r) v = uni(rng);
    one->apply(r, za, pool);
    ilu->apply(r, zb, pool);
    for (std::size_t i = 0; i < n; ++i) CHECK(za[i] == zb[i]);

    SolverConfig cfg;
    auto [x1, rep1] = gmres_solve(op, rhs, cfg, GridFunction(p.grid), one.get());
    auto [x2, rep2] = gmres_solve(op, rhs, cfg, GridFunction(p.grid), ilu.get());
    CHECK(rep1.iterations == rep2.iterations);
}

TEST_CASE("block-jacobi: one block per row reduces to jacobi") {
    TestProblem p = make_problem(12, 2.0, 1.0, 1.0);
    auto [op, rhs] = build_test_system(p);
    const auto blocks =
        make_bjacobi(assemble_sparse(op), static_cast<int>(op.grid().interior_count()));
    const auto jac = make_jacobi(op);
    WorkerPool pool(1);
    std::mt19937_64 rng(29);
    const std::size_t n = op.grid().interior_count();
    std::vector<double> r(n), za(n), zb(n);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (auto& v : r) v = uni(rng);
    blocks->apply(r, za, pool);
    jac->apply(r, zb, pool);
    for (std::size_t i = 0; i < n; ++i) CHECK(za[i] == doctest::Approx(zb[i]).epsilon(1e-14));
}

TEST_CASE("block-jacobi: dropping couplings weakens the preconditioner") {
    TestProblem p = make_problem(64, 0.0, 1.0, 1.0);
    auto [op, rhs] = build_test_system(p);
    const SparseMatrix m = assemble_sparse(op);
    SolverConfig cfg;
    const auto pc1 = make_bjacobi(m, 1);
    const auto pc4 = make_bjacobi(m, 4);
    auto [x1, rep1] = gmres_solve(op, rhs, cfg, GridFunction(p.grid), pc1.get());
    auto [x4, rep4] = gmres_solve(op, rhs, cfg, GridFunction(p.grid), pc4.get());
    CHECK(rep1.converged);
    CHECK(rep4.converged);
    CHECK(rep4.iterations >= rep1.iterations);
}

TEST_CASE("dense solve: identity, hand-checked system, residual oracle") {
    SUBCASE("identity returns the right-hand side") {
        Grid2D g(1.0, 1.0, 6, 6);
        std::mt19937_64 rng(31);
        const GridFunction b = oracle::random_function(g, rng);
        const GridFunction x = dense_solve(assemble_sparse(identity_operator(g)), b);
        CHECK(oracle::rel_maxnorm_diff(x, b) == 0.0);
    }

    SUBCASE("2x2 interior Laplacian with unit source: all nodes 1/18") {
        Grid2D g(1.0, 1.0, 3, 3);
        const StencilOperator lam = assemble_lambda(
            g, CoefficientField{[](double, double) { return 1.0; },
                                [](double, double) { return 1.0; }, 0});
        const GridFunction x = dense_solve(assemble_sparse(lam), GridFunction(g, 1.0));
        for (std::size_t q = 0; q < x.size(); ++q)
            CHECK(x[q] == doctest::Approx(1.0 / 18.0).epsilon(1e-14));
    }

    SUBCASE("random nonsingular system: small residual") {
        TestProblem p = make_problem(16, -3.0, 0.5, 0.7);
        auto [op, rhs] = build_test_system(p);
        const SparseMatrix m = assemble_sparse(op);
        const GridFunction x = dense_solve(m, rhs);
        GridFunction ax(p.grid);
        m.multiply(x.values(), ax.values());
        double rnorm = 0.0, bnorm = 0.0;
        for (std::size_t q = 0; q < x.size(); ++q) {
            rnorm += (ax[q] - rhs[q]) * (ax[q] - rhs[q]);
            bnorm += rhs[q] * rhs[q];
        }
        CHECK(std::sqrt(rnorm / bnorm) <= 1e-12);
    }

    SUBCASE("oversize and singular inputs are rejected") {
        Grid2D big(1.0, 1.0, 34, 34);
        CHECK_THROWS_AS(dense_solve(assemble_sparse(identity_operator(big)), GridFunction(big)),
                        std::invalid_argument);
        Grid2D g(1.0, 1.0, 4, 4);
        const std::size_t n = g.interior_count();
        const StencilOperator zero(g, StencilKind::custom, std::vector<double>(n, 0.0),
                                   std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                                   std::vector<double>(n, 0.0), std::vector<double>(n, 0.0));
        CHECK_THROWS_AS(dense_solve(assemble_sparse(zero), GridFunction(g)), std::runtime_error);
    }
}

TEST_CASE("every preconditioner agrees with the dense oracle at tight tolerance") {
    for (double xi : {-10.0, 0.0, 10.0}) {
        TestProblem p = make_problem(16, xi, 1.0, 1.0);
        auto [op, rhs] = build_test_system(p);
        const GridFunction ref = dense_solve(assemble_sparse(op), rhs);
        for (PreconKind kind : {PreconKind::none, PreconKind::jacobi, PreconKind::sor,
                                PreconKind::ilu0, PreconKind::mg, PreconKind::bjacobi}) {
            SolverConfig cfg;
            cfg.rtol = 1e-12;
            cfg.preconditioner = kind;
            cfg.bjacobi_blocks = 3;
            const auto pc = build_preconditioner(op, p.grid, p.fields(), p.tau, cfg);
            auto [x, rep] = gmres_solve(op, rhs, cfg, GridFunction(p.grid), pc.get());
            CHECK(rep.converged);
            CHECK(oracle::rel_maxnorm_diff(ref, x) <= 1e-8);
        }
    }
}

TEST_CASE("solves are deterministic and worker-count independent") {
    TestProblem p = make_problem(48, 1.0, 1.0, 1.0);
    auto [op, rhs] = build_test_system(p);
    for (PreconKind kind : {PreconKind::none, PreconKind::mg}) {
        SolverConfig cfg;
        cfg.preconditioner = kind;
        std::vector<int> iters;
        std::vector<double> probe;
        for (int workers : {1, 2, 4, 1}) {
            cfg.workers = workers;
            const auto pc = build_preconditioner(op, p.grid, p.fields(), p.tau, cfg);
            auto [x, rep] = gmres_solve(op, rhs, cfg, GridFunction(p.grid), pc.get());
            CHECK(rep.converged);
            iters.push_back(rep.iterations);
            probe.push_back(x[x.size() / 2]);
        }
        for (std::size_t i = 1; i < iters.size(); ++i) {
            CHECK(iters[i] == iters[0]);
            CHECK(probe[i] == probe[0]);  // bit-identical across worker counts
        }
    }
}

TEST_CASE("positivity transfer: nonnegative source gives a nonnegative solution") {
    TestProblem p = make_problem(32, 1.0, 1.0, 1.0);
    auto [op, rhs] = build_test_system(p);
    SolverConfig cfg;
    cfg.rtol = 1e-10;
    cfg.preconditioner = PreconKind::ilu0;
    const auto pc = build_preconditioner(op, p.grid, p.fields(), p.tau, cfg);
    auto [x, rep] = gmres_solve(op, rhs, cfg, GridFunction(p.grid), pc.get());
    CHECK(rep.converged);
    double min_v = 1e300, max_v = 0.0;
    for (std::size_t q = 0; q < x.size(); ++q) {
        min_v = std::min(min_v, x[q]);
        max_v = std::max(max_v, std::abs(x[q]));
    }
    CHECK(min_v >= -1e-12 * max_v);
}
