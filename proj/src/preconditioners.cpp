#include "presslab/preconditioners.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace presslab {

namespace {

class JacobiPrecond final : public Preconditioner {
public:
    explicit JacobiPrecond(const StencilOperator& op)
        : diag_(op.center().begin(), op.center().end()) {
        for (std::size_t p = 0; p < diag_.size(); ++p)
            if (diag_[p] == 0.0)
                throw std::runtime_error("jacobi: zero center coefficient at node " +
                                         std::to_string(p));
    }
    void apply(std::span<const double> r, std::span<double> z, WorkerPool& pool) const override {
        pool.parallel_for(r.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) z[i] = r[i] / diag_[i];
        });
    }
    std::string_view name() const override { return "jacobi"; }

private:
    std::vector<double> diag_;
};

class SorPrecond final : public Preconditioner {
public:
    SorPrecond(const StencilOperator& op, double omega) : op_(op), omega_(omega) {
        if (!(omega > 0.0 && omega < 2.0))
            throw std::invalid_argument("sor: omega must lie in (0, 2)");
        for (std::size_t p = 0; p < op_.center().size(); ++p)
            if (op_.center()[p] == 0.0)
                throw std::runtime_error("sor: zero center coefficient at node " +
                                         std::to_string(p));
    }

    void apply(std::span<const double> r, std::span<double> z, WorkerPool&) const override {
        // Sweeps are sequential by data dependence; one forward then one
        // backward pass from a zero start (a fixed linear map).
        const int nx = op_.grid().nx();
        const auto c = op_.center(), w = op_.west(), e = op_.east(), s = op_.south(),
                   n = op_.north();
        const std::size_t sz = r.size();
        std::fill(z.begin(), z.end(), 0.0);
        auto gather = [&](std::size_t p) {
            double acc = r[p];
            const int i = static_cast<int>(p % nx);
            if (i > 0) acc += w[p] * z[p - 1];
            if (i + 1 < nx) acc += e[p] * z[p + 1];
            if (p >= static_cast<std::size_t>(nx)) acc += s[p] * z[p - nx];
            if (p + nx < sz) acc += n[p] * z[p + nx];
            return acc;
        };
        for (std::size_t p = 0; p < sz; ++p) z[p] = (1.0 - omega_) * z[p] + omega_ * gather(p) / c[p];
        for (std::size_t p = sz; p-- > 0;) z[p] = (1.0 - omega_) * z[p] + omega_ * gather(p) / c[p];
    }
    std::string_view name() const override { return "sor"; }

private:
    StencilOperator op_;
    double omega_;
};

// ILU(0) factors of contiguous diagonal blocks; a single block is the
// global factorization.
class BlockIluPrecond final : public Preconditioner {
public:
    BlockIluPrecond(const SparseMatrix& matrix, int blocks) {
        const std::size_t n = matrix.rows;
        if (blocks < 1) throw std::invalid_argument("bjacobi: blocks must be >= 1");
        const int nb = static_cast<int>(std::min<std::size_t>(blocks, n));
        blocks_.reserve(nb);
        for (int b = 0; b < nb; ++b) {
            auto [lo, hi] = WorkerPool::slice(n, nb, b);
            Block blk;
            blk.begin = lo;
            blk.m = matrix.diagonal_block(lo, hi);
            factor(blk.m, b, lo, nb > 1);
            blk.diag.resize(blk.m.rows);
            for (std::size_t rr = 0; rr < blk.m.rows; ++rr)
                for (std::size_t q = blk.m.row_ptr[rr]; q < blk.m.row_ptr[rr + 1]; ++q)
                    if (blk.m.col[q] == static_cast<int>(rr)) blk.diag[rr] = q;
            blocks_.push_back(std::move(blk));
        }
    }

    void apply(std::span<const double> r, std::span<double> z, WorkerPool& pool) const override {
        pool.parallel_for(blocks_.size(), [&](std::size_t bb, std::size_t be) {
            for (std::size_t b = bb; b < be; ++b) {
                const Block& blk = blocks_[b];
                const SparseMatrix& m = blk.m;
                double* zb = z.data() + blk.begin;
                const double* rb = r.data() + blk.begin;
                // L y = r (unit lower), then U z = y
                for (std::size_t i = 0; i < m.rows; ++i) {
                    double acc = rb[i];
                    for (std::size_t q = m.row_ptr[i]; q < blk.diag[i]; ++q)
                        acc -= m.val[q] * zb[m.col[q]];
                    zb[i] = acc;
                }
                for (std::size_t i = m.rows; i-- > 0;) {
                    double acc = zb[i];
                    for (std::size_t q = blk.diag[i] + 1; q < m.row_ptr[i + 1]; ++q)
                        acc -= m.val[q] * zb[m.col[q]];
                    zb[i] = acc / m.val[blk.diag[i]];
                }
            }
        });
    }

    std::string_view name() const override { return blocks_.size() == 1 ? "ilu" : "bjacobi"; }

private:
    struct Block {
        std::size_t begin = 0;
        SparseMatrix m;                  // holds the ILU factors in place
        std::vector<std::size_t> diag;   // position of the diagonal entry per row
    };

    // In-place ILU(0) on the block's pattern, canonical order, no pivoting.
    static void factor(SparseMatrix& m, int block_id, std::size_t row_offset, bool in_blocks) {
        const std::size_t n = m.rows;
        std::vector<std::size_t> diag(n);
        for (std::size_t i = 0; i < n; ++i) {
            bool found = false;
            for (std::size_t q = m.row_ptr[i]; q < m.row_ptr[i + 1]; ++q)
                if (m.col[q] == static_cast<int>(i)) {
                    diag[i] = q;
                    found = true;
                }
            if (!found) fail(block_id, row_offset + i, in_blocks, "missing diagonal entry");
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t q = m.row_ptr[i]; q < m.row_ptr[i + 1] && m.col[q] < static_cast<int>(i);
                 ++q) {
                const std::size_t k = static_cast<std::size_t>(m.col[q]);
                const double piv = m.val[diag[k]];
                if (piv == 0.0) fail(block_id, row_offset + k, in_blocks, "zero pivot");
                const double lik = m.val[q] / piv;
                m.val[q] = lik;
                // row_i(j) -= lik * row_k(j) on the shared pattern, j > k
                for (std::size_t q2 = q + 1; q2 < m.row_ptr[i + 1]; ++q2) {
                    const int j = m.col[q2];
                    for (std::size_t q3 = diag[k] + 1; q3 < m.row_ptr[k + 1]; ++q3) {
                        if (m.col[q3] == j) {
                            m.val[q2] -= lik * m.val[q3];
                            break;
                        }
                    }
                }
            }
            if (m.val[diag[i]] == 0.0) fail(block_id, row_offset + i, in_blocks, "zero pivot");
        }
    }

    [[noreturn]] static void fail(int block_id, std::size_t row, bool in_blocks, const char* what) {
        std::ostringstream os;
        os << "ilu0: " << what;
        if (in_blocks) os << " in block " << block_id;
        os << " at row " << row;
        throw std::runtime_error(os.str());
    }

    std::vector<Block> blocks_;
};

// Geometric V-cycle on re-discretized shifted operators.
class MultigridPrecond final : public Preconditioner {
public:
    MultigridPrecond(const Grid2D& fine, const std::vector<CoefficientField>& fields, double tau,
                     const SolverConfig& cfg)
        : presmooth_(cfg.mg_presmooth), postsmooth_(cfg.mg_postsmooth) {
        Grid2D g = fine;
        for (;;) {
            levels_.push_back(Level{g, assemble_shifted(assemble_composite(g, fields), tau)});
            const bool can_halve = g.n1 % 2 == 0 && g.n2 % 2 == 0 &&
                                   std::min(g.nx(), g.ny()) > cfg.mg_coarsest;
            if (!can_halve) break;
            g = Grid2D(g.l1, g.l2, g.n1 / 2, g.n2 / 2);
        }
        Level& last = levels_.back();
        if (last.grid.nx() > kDenseMaxPerAxis || last.grid.ny() > kDenseMaxPerAxis)
            throw std::invalid_argument(
                "mg: grid cannot be coarsened to a directly solvable level");
        const SparseMatrix cm = assemble_sparse(last.op);
        const std::size_t cn = cm.rows;
        coarse_lu_.assign(cn * cn, 0.0);
        for (std::size_t r = 0; r < cn; ++r)
            for (std::size_t q = cm.row_ptr[r]; q < cm.row_ptr[r + 1]; ++q)
                coarse_lu_[r * cn + cm.col[q]] = cm.val[q];
        dense_lu_factor(coarse_lu_, coarse_perm_, cn);
        for (auto& lv : levels_) {
            const std::size_t ln = lv.grid.interior_count();
            lv.z.resize(ln);
            lv.r.resize(ln);
            lv.t.resize(ln);
        }
    }

    void apply(std::span<const double> r, std::span<double> z, WorkerPool& pool) const override {
        auto& l0 = levels_[0];
        std::copy(r.begin(), r.end(), l0.r.begin());
        cycle(0, pool);
        std::copy(l0.z.begin(), l0.z.end(), z.begin());
    }

    std::string_view name() const override { return "mg"; }

    std::size_t level_count() const noexcept { return levels_.size(); }

private:
    struct Level {
        Grid2D grid;
        StencilOperator op;
        mutable std::vector<double> z, r, t;
    };

    void cycle(std::size_t l, WorkerPool& pool) const {
        const Level& lv = levels_[l];
        if (l + 1 == levels_.size()) {
            std::copy(lv.r.begin(), lv.r.end(), lv.z.begin());
            dense_lu_solve(coarse_lu_, coarse_perm_, lv.z.size(), lv.z);
            return;
        }
        std::fill(lv.z.begin(), lv.z.end(), 0.0);
        for (int sweep = 0; sweep < presmooth_; ++sweep) gauss_seidel(lv);
        // defect and its restriction to the next level
        lv.op.apply_into(lv.z, lv.t, pool);
        pool.parallel_for(lv.t.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) lv.t[i] = lv.r[i] - lv.t[i];
        });
        restrict_full_weighting(lv, levels_[l + 1], pool);
        cycle(l + 1, pool);
        prolong_add(levels_[l + 1], lv, pool);
        for (int sweep = 0; sweep < postsmooth_; ++sweep) gauss_seidel(lv);
    }

    // one forward lexicographic sweep of z on (op) z = r
    static void gauss_seidel(const Level& lv) {
        const int nx = lv.grid.nx();
        const auto c = lv.op.center(), w = lv.op.west(), e = lv.op.east(), s = lv.op.south(),
                   n = lv.op.north();
        auto& z = lv.z;
        const auto& r = lv.r;
        const std::size_t sz = z.size();
        for (std::size_t p = 0; p < sz; ++p) {
            double acc = r[p];
            const int i = static_cast<int>(p % nx);
            if (i > 0) acc += w[p] * z[p - 1];
            if (i + 1 < nx) acc += e[p] * z[p + 1];
            if (p >= static_cast<std::size_t>(nx)) acc += s[p] * z[p - nx];
            if (p + nx < sz) acc += n[p] * z[p + nx];
            z[p] = acc / c[p];
        }
    }

    // fine.t -> coarse.r
    static void restrict_full_weighting(const Level& fine, const Level& coarse, WorkerPool& pool) {
        const int cnx = coarse.grid.nx(), fnx = fine.grid.nx();
        const std::size_t fsz = fine.t.size();
        auto fval = [&](int fi, int fj) -> double {
            const std::size_t p = static_cast<std::size_t>(fj - 1) * fnx + (fi - 1);
            return (fi >= 1 && fi <= fnx && fj >= 1 && p < fsz) ? fine.t[p] : 0.0;
        };
        pool.parallel_for(coarse.r.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t p = b; p < e; ++p) {
                const int ci = static_cast<int>(p % cnx) + 1, cj = static_cast<int>(p / cnx) + 1;
                const int fi = 2 * ci, fj = 2 * cj;
                coarse.r[p] =
                    0.25 * fval(fi, fj) +
                    0.125 * (fval(fi - 1, fj) + fval(fi + 1, fj) + fval(fi, fj - 1) +
                             fval(fi, fj + 1)) +
                    0.0625 * (fval(fi - 1, fj - 1) + fval(fi + 1, fj - 1) + fval(fi - 1, fj + 1) +
                              fval(fi + 1, fj + 1));
            }
        });
    }

    // fine.z += bilinear interpolation of coarse.z
    static void prolong_add(const Level& coarse, const Level& fine, WorkerPool& pool) {
        const int cnx = coarse.grid.nx(), cny = coarse.grid.ny(), fnx = fine.grid.nx();
        auto cval = [&](int ci, int cj) -> double {
            if (ci < 1 || ci > cnx || cj < 1 || cj > cny) return 0.0;
            return coarse.z[static_cast<std::size_t>(cj - 1) * cnx + (ci - 1)];
        };
        pool.parallel_for(fine.z.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t p = b; p < e; ++p) {
                const int fi = static_cast<int>(p % fnx) + 1, fj = static_cast<int>(p / fnx) + 1;
                double v;
                if (fi % 2 == 0 && fj % 2 == 0)
                    v = cval(fi / 2, fj / 2);
                else if (fi % 2 == 1 && fj % 2 == 0)
                    v = 0.5 * (cval((fi - 1) / 2, fj / 2) + cval((fi + 1) / 2, fj / 2));
                else if (fi % 2 == 0)
                    v = 0.5 * (cval(fi / 2, (fj - 1) / 2) + cval(fi / 2, (fj + 1) / 2));
                else
                    v = 0.25 * (cval((fi - 1) / 2, (fj - 1) / 2) + cval((fi + 1) / 2, (fj - 1) / 2) +
                                cval((fi - 1) / 2, (fj + 1) / 2) + cval((fi + 1) / 2, (fj + 1) / 2));
                fine.z[p] += v;
            }
        });
    }

    std::vector<Level> levels_;
    std::vector<double> coarse_lu_;
    std::vector<int> coarse_perm_;
    int presmooth_, postsmooth_;
};

}  // namespace

std::unique_ptr<Preconditioner> make_jacobi(const StencilOperator& op) {
    return std::make_unique<JacobiPrecond>(op);
}

std::unique_ptr<Preconditioner> make_sor(const StencilOperator& op, double omega) {
    return std::make_unique<SorPrecond>(op, omega);
}

std::unique_ptr<Preconditioner> make_ilu0(const SparseMatrix& matrix) {
    return std::make_unique<BlockIluPrecond>(matrix, 1);
}

std::unique_ptr<Preconditioner> make_bjacobi(const SparseMatrix& matrix, int blocks) {
    return std::make_unique<BlockIluPrecond>(matrix, blocks);
}

std::unique_ptr<Preconditioner> make_mg(const Grid2D& grid,
                                        const std::vector<CoefficientField>& fields, double tau,
                                        const SolverConfig& cfg) {
    return std::make_unique<MultigridPrecond>(grid, fields, tau, cfg);
}

std::unique_ptr<Preconditioner> build_preconditioner(const StencilOperator& shifted_op,
                                                     const Grid2D& grid,
                                                     const std::vector<CoefficientField>& fields,
                                                     double tau, const SolverConfig& cfg) {
    switch (cfg.preconditioner) {
        case PreconKind::none: return nullptr;
        case PreconKind::jacobi: return make_jacobi(shifted_op);
        case PreconKind::sor: return make_sor(shifted_op, cfg.sor_omega);
        case PreconKind::ilu0: return make_ilu0(assemble_sparse(shifted_op));
        case PreconKind::mg: return make_mg(grid, fields, tau, cfg);
        case PreconKind::bjacobi:
            return make_bjacobi(assemble_sparse(shifted_op),
                                cfg.bjacobi_blocks > 0 ? cfg.bjacobi_blocks : cfg.workers);
    }
    return nullptr;
}

}  // namespace presslab
