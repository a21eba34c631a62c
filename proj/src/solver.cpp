#include "presslab/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace presslab {

std::string_view precon_name(PreconKind kind) {
    switch (kind) {
        case PreconKind::none: return "none";
        case PreconKind::jacobi: return "jacobi";
        case PreconKind::sor: return "sor";
        case PreconKind::ilu0: return "ilu";
        case PreconKind::mg: return "mg";
        case PreconKind::bjacobi: return "bjacobi";
    }
    return "?";
}

PreconKind precon_from_name(std::string_view name) {
    if (name == "none") return PreconKind::none;
    if (name == "jacobi") return PreconKind::jacobi;
    if (name == "sor") return PreconKind::sor;
    if (name == "ilu" || name == "ilu0") return PreconKind::ilu0;
    if (name == "mg") return PreconKind::mg;
    if (name == "bjacobi") return PreconKind::bjacobi;
    throw std::invalid_argument("unknown preconditioner: " + std::string(name));
}

void SolverConfig::validate() const {
    if (!(rtol > 0.0)) throw std::invalid_argument("rtol must be positive");
    if (restart < 1) throw std::invalid_argument("restart must be >= 1");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (!(sor_omega > 0.0 && sor_omega < 2.0))
        throw std::invalid_argument("sor_omega must lie in (0, 2)");
    if (mg_presmooth < 0 || mg_postsmooth < 0)
        throw std::invalid_argument("smoothing sweep counts must be >= 0");
    if (mg_coarsest < 1) throw std::invalid_argument("mg_coarsest must be >= 1");
    if (bjacobi_blocks < 0) throw std::invalid_argument("bjacobi_blocks must be >= 0");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

namespace {

void check_finite(double v) {
    if (!std::isfinite(v))
        throw std::runtime_error("gmres: non-finite residual norm (numerical failure)");
}

inline void rotate(double c, double s, double& a, double& b) {
    const double t = c * a + s * b;
    b = -s * a + c * b;
    a = t;
}

}  // namespace

SolveReport gmres_solve_into(const StencilOperator& op, std::span<const double> rhs,
                             const SolverConfig& cfg, std::span<double> x,
                             const Preconditioner* pc, WorkerPool& pool) {
    cfg.validate();
    const std::size_t n = rhs.size();
    if (x.size() != n || op.grid().interior_count() != n)
        throw std::invalid_argument("gmres: size mismatch");
    const auto t_start = std::chrono::steady_clock::now();

    const int m = cfg.restart;
    std::vector<std::vector<double>> basis(m + 1, std::vector<double>(n));
    std::vector<double> hess((m + 1) * m, 0.0);  // column-major, leading dim m+1
    std::vector<double> givens_c(m), givens_s(m), g(m + 1);
    std::vector<double> work(n), pwork(n);
    auto H = [&](int i, int j) -> double& { return hess[j * (m + 1) + i]; };

    SolveReport rep;
    auto precondition = [&](std::span<const double> r, std::span<double> z) {
        if (pc)
            pc->apply(r, z, pool);
        else
            pool.parallel_for(n, [&](std::size_t b, std::size_t e) {
                for (std::size_t i = b; i < e; ++i) z[i] = r[i];
            });
    };
    auto residual = [&](std::span<double> r) {
        op.apply_into(x, work, pool);
        pool.parallel_for(n, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) work[i] = rhs[i] - work[i];
        });
        precondition(work, r);
    };

    residual(basis[0]);
    double rnorm = pool.norm2(basis[0]);
    check_finite(rnorm);
    rep.residual_history.push_back(rnorm);
    const double r0norm = rnorm;
    const double stop = std::max(cfg.rtol * r0norm, cfg.atol);

    if (rnorm <= stop) {
        rep.converged = true;
    } else {
        bool done = false;
        while (!done && rep.iterations < cfg.max_iterations) {
            // start a cycle: basis[0] holds the current preconditioned residual
            const double beta = rnorm;
            const double cycle_start = rnorm;
            {
                const double inv = 1.0 / beta;
                pool.parallel_for(n, [&](std::size_t b, std::size_t e) {
                    for (std::size_t i = b; i < e; ++i) basis[0][i] *= inv;
                });
            }
            std::fill(g.begin(), g.end(), 0.0);
            g[0] = beta;
            int j = 0;
            bool breakdown = false;
            while (j < m && rep.iterations < cfg.max_iterations) {
                op.apply_into(basis[j], work, pool);
                precondition(work, basis[j + 1]);
                auto& w = basis[j + 1];
                for (int i = 0; i <= j; ++i) {
                    const double hij = pool.dot(basis[i], w);
                    H(i, j) = hij;
                    pool.parallel_for(n, [&](std::size_t b, std::size_t e) {
                        for (std::size_t q = b; q < e; ++q) w[q] -= hij * basis[i][q];
                    });
                }
                double hnext = pool.norm2(w);
                check_finite(hnext);
                H(j + 1, j) = hnext;
                if (hnext > 0.0) {
                    const double inv = 1.0 / hnext;
                    pool.parallel_for(n, [&](std::size_t b, std::size_t e) {
                        for (std::size_t q = b; q < e; ++q) w[q] *= inv;
                    });
                } else {
                    breakdown = true;  // invariant subspace: solution is exact
                }
                for (int i = 0; i < j; ++i) rotate(givens_c[i], givens_s[i], H(i, j), H(i + 1, j));
                const double denom = std::hypot(H(j, j), H(j + 1, j));
                if (denom == 0.0) {
                    givens_c[j] = 1.0;
                    givens_s[j] = 0.0;
                } else {
                    givens_c[j] = H(j, j) / denom;
                    givens_s[j] = H(j + 1, j) / denom;
                }
                rotate(givens_c[j], givens_s[j], H(j, j), H(j + 1, j));
                rotate(givens_c[j], givens_s[j], g[j], g[j + 1]);
                ++j;
                ++rep.iterations;
                rnorm = std::abs(g[j]);
                check_finite(rnorm);
                rep.residual_history.push_back(rnorm);
                if (rnorm <= stop || breakdown) break;
            }
            // least-squares solution of the cycle, then update x
            for (int i = j - 1; i >= 0; --i) {
                double s = g[i];
                for (int k = i + 1; k < j; ++k) s -= H(i, k) * g[k];
                if (H(i, i) == 0.0) throw std::runtime_error("gmres: singular Hessenberg diagonal");
                g[i] = s / H(i, i);
            }
            pool.parallel_for(n, [&](std::size_t b, std::size_t e) {
                for (std::size_t q = b; q < e; ++q) {
                    double acc = x[q];
                    for (int i = 0; i < j; ++i) acc += g[i] * basis[i][q];
                    x[q] = acc;
                }
            });
            residual(basis[0]);
            rnorm = pool.norm2(basis[0]);
            check_finite(rnorm);
            if (!rep.residual_history.empty()) rep.residual_history.back() = rnorm;
            if (breakdown) {
                rep.converged = true;
                rep.breakdown = true;
                done = true;
            } else if (rnorm <= stop) {
                rep.converged = true;
                done = true;
            } else if (rnorm > (1.0 - 1e-9) * cycle_start) {
                done = true;  // full cycle without progress: stalled at the attainable floor
            }
        }
    }

    op.apply_into(x, work, pool);
    pool.parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) work[i] = rhs[i] - work[i];
    });
    rep.final_true_residual = pool.norm2(work);
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rep;
}

std::pair<GridFunction, SolveReport> gmres_solve(const StencilOperator& op,
                                                 const GridFunction& rhs,
                                                 const SolverConfig& cfg,
                                                 const GridFunction& x0,
                                                 const Preconditioner* pc) {
    if (!(rhs.grid() == op.grid()) || !(x0.grid() == op.grid()))
        throw std::invalid_argument("gmres_solve: grid mismatch");
    WorkerPool pool(cfg.workers);
    GridFunction x = x0;
    SolveReport rep = gmres_solve_into(op, rhs.values(), cfg, x.values(), pc, pool);
    return {std::move(x), std::move(rep)};
}

void dense_lu_factor(std::vector<double>& a, std::vector<int>& perm, std::size_t n) {
    perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a[k * n + k]);
        for (std::size_t r = k + 1; r < n; ++r) {
            const double v = std::abs(a[r * n + k]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) throw std::runtime_error("dense_lu_factor: singular matrix");
        if (piv != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[k * n + c], a[piv * n + c]);
            std::swap(perm[k], perm[piv]);
        }
        const double inv = 1.0 / a[k * n + k];
        for (std::size_t r = k + 1; r < n; ++r) {
            const double l = a[r * n + k] * inv;
            a[r * n + k] = l;
            for (std::size_t c = k + 1; c < n; ++c) a[r * n + c] -= l * a[k * n + c];
        }
    }
}

void dense_lu_solve(const std::vector<double>& lu, const std::vector<int>& perm, std::size_t n,
                    std::span<double> b) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = b[perm[i]];
    for (std::size_t i = 0; i < n; ++i) {
        double s = y[i];
        for (std::size_t k = 0; k < i; ++k) s -= lu[i * n + k] * y[k];
        y[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= lu[ii * n + k] * y[k];
        b[ii] = s / lu[ii * n + ii];
        y[ii] = b[ii];
    }
}

GridFunction dense_solve(const SparseMatrix& m, const GridFunction& rhs) {
    const Grid2D& g = rhs.grid();
    if (g.nx() > kDenseMaxPerAxis || g.ny() > kDenseMaxPerAxis)
        throw std::invalid_argument("dense_solve: interior larger than the dense cap");
    const std::size_t n = m.rows;
    if (rhs.size() != n) throw std::invalid_argument("dense_solve: size mismatch");
    std::vector<double> a(n * n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t q = m.row_ptr[r]; q < m.row_ptr[r + 1]; ++q)
            a[r * n + m.col[q]] = m.val[q];
    std::vector<int> perm;
    dense_lu_factor(a, perm, n);
    GridFunction x = rhs;
    dense_lu_solve(a, perm, n, x.values());
    return x;
}

}  // namespace presslab
