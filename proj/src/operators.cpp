#include "presslab/operators.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "presslab/parallel.hpp"

namespace presslab {

namespace {

double need_positive(double v, const char* what, double x1, double x2) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << what << " must be positive, got " << v << " at (" << x1 << ", " << x2 << ")";
        throw std::domain_error(os.str());
    }
    return v;
}

// Center as the re-summed neighbor total, in this fixed grouping. The
// dominance check uses the identical grouping, so the slack of an
// unshifted operator is exactly zero.
inline double neighbor_sum(double w, double e, double s, double n) {
    return (w + e) + (s + n);
}

}  // namespace

StencilOperator::StencilOperator(const Grid2D& grid, StencilKind kind,
                                 std::vector<double> center, std::vector<double> west,
                                 std::vector<double> east, std::vector<double> south,
                                 std::vector<double> north)
    : grid_(grid), kind_(kind), c_(std::move(center)), w_(std::move(west)),
      e_(std::move(east)), s_(std::move(south)), n_(std::move(north)) {
    const std::size_t n = grid_.interior_count();
    if (c_.size() != n || w_.size() != n || e_.size() != n || s_.size() != n || n_.size() != n)
        throw std::invalid_argument("StencilOperator: coefficient array size mismatch");
}

GridFunction StencilOperator::apply(const GridFunction& y) const {
    if (!(y.grid() == grid_)) throw std::invalid_argument("StencilOperator::apply: grid mismatch");
    GridFunction z(grid_);
    WorkerPool serial(1);
    apply_into(y.values(), z.values(), serial);
    return z;
}

void StencilOperator::apply_into(std::span<const double> y, std::span<double> z,
                                 WorkerPool& pool) const {
    if (y.size() != c_.size() || z.size() != c_.size())
        throw std::invalid_argument("StencilOperator::apply_into: size mismatch");
    const int nx = grid_.nx(), ny = grid_.ny();
    pool.parallel_for(static_cast<std::size_t>(ny), [&](std::size_t jb, std::size_t je) {
        for (std::size_t j = jb; j < je; ++j) {
            const std::size_t base = j * nx;
            const double* ys = (j > 0) ? &y[base - nx] : nullptr;
            const double* yn = (j + 1 < static_cast<std::size_t>(ny)) ? &y[base + nx] : nullptr;
            for (int i = 0; i < nx; ++i) {
                const std::size_t p = base + i;
                double acc = c_[p] * y[p];
                if (i > 0) acc -= w_[p] * y[p - 1];
                if (i + 1 < nx) acc -= e_[p] * y[p + 1];
                if (ys) acc -= s_[p] * ys[i];
                if (yn) acc -= n_[p] * yn[i];
                z[p] = acc;
            }
        }
    });
}

StencilOperator assemble_lambda(const Grid2D& g, const CoefficientField& f) {
    const std::size_t n = g.interior_count();
    std::vector<double> c(n), w(n), e(n), s(n), nn(n);
    const double ih1 = 1.0 / (g.h1 * g.h1), ih2 = 1.0 / (g.h2 * g.h2);
    for (int i2 = 1; i2 < g.n2; ++i2) {
        for (int i1 = 1; i1 < g.n1; ++i1) {
            const double x = g.x1(i1), y = g.x2(i2);
            const std::size_t p = g.index(i1, i2);
            e[p] = need_positive(f.k(x + 0.5 * g.h1, y), "k", x + 0.5 * g.h1, y) * ih1;
            w[p] = need_positive(f.k(x - 0.5 * g.h1, y), "k", x - 0.5 * g.h1, y) * ih1;
            nn[p] = need_positive(f.k(x, y + 0.5 * g.h2), "k", x, y + 0.5 * g.h2) * ih2;
            s[p] = need_positive(f.k(x, y - 0.5 * g.h2), "k", x, y - 0.5 * g.h2) * ih2;
            c[p] = neighbor_sum(w[p], e[p], s[p], nn[p]);
        }
    }
    return {g, StencilKind::diffusion, std::move(c), std::move(w), std::move(e), std::move(s),
            std::move(nn)};
}

StencilOperator assemble_composite(const Grid2D& g, const std::vector<CoefficientField>& fields) {
    if (fields.empty()) throw std::invalid_argument("assemble_composite: no coefficient fields");
    const std::size_t n = g.interior_count();
    std::vector<double> c(n, 0.0), w(n, 0.0), e(n, 0.0), s(n, 0.0), nn(n, 0.0);
    for (const auto& f : fields) {
        const StencilOperator lam = assemble_lambda(g, f);
        for (int i2 = 1; i2 < g.n2; ++i2) {
            for (int i1 = 1; i1 < g.n1; ++i1) {
                const std::size_t p = g.index(i1, i2);
                const double ax = need_positive(f.a(g.x1(i1), g.x2(i2)), "a", g.x1(i1), g.x2(i2));
                w[p] += ax * lam.west()[p];
                e[p] += ax * lam.east()[p];
                s[p] += ax * lam.south()[p];
                nn[p] += ax * lam.north()[p];
            }
        }
    }
    for (std::size_t p = 0; p < n; ++p) c[p] = neighbor_sum(w[p], e[p], s[p], nn[p]);
    return {g, StencilKind::composite, std::move(c), std::move(w), std::move(e), std::move(s),
            std::move(nn)};
}

StencilOperator assemble_shifted(const StencilOperator& a, double tau) {
    return assemble_weighted_lhs(a, tau, 1.0);
}

StencilOperator assemble_weighted_lhs(const StencilOperator& a, double tau, double sigma) {
    if (!(tau > 0.0)) throw std::invalid_argument("time step must be positive");
    if (!(sigma >= 0.0 && sigma <= 1.0)) throw std::invalid_argument("weight must lie in [0,1]");
    const std::size_t n = a.grid().interior_count();
    const double inv_tau = 1.0 / tau;
    std::vector<double> c(n), w(n), e(n), s(n), nn(n);
    for (std::size_t p = 0; p < n; ++p) {
        w[p] = sigma * a.west()[p];
        e[p] = sigma * a.east()[p];
        s[p] = sigma * a.south()[p];
        nn[p] = sigma * a.north()[p];
        c[p] = sigma * a.center()[p] + inv_tau;
    }
    return {a.grid(), StencilKind::shifted, std::move(c), std::move(w), std::move(e),
            std::move(s), std::move(nn)};
}

StencilOperator assemble_diffusion(const Grid2D& g, const CoefficientField& f) {
    const std::size_t n = g.interior_count();
    std::vector<double> c(n), w(n), e(n), s(n), nn(n);
    const double ih1 = 1.0 / (2.0 * g.h1 * g.h1), ih2 = 1.0 / (2.0 * g.h2 * g.h2);
    auto a_at = [&](int i1, int i2) {
        return need_positive(f.a(g.x1(i1), g.x2(i2)), "a", g.x1(i1), g.x2(i2));
    };
    for (int i2 = 1; i2 < g.n2; ++i2) {
        for (int i1 = 1; i1 < g.n1; ++i1) {
            const double x = g.x1(i1), y = g.x2(i2);
            const std::size_t p = g.index(i1, i2);
            const double ac = a_at(i1, i2);
            e[p] = (a_at(i1 + 1, i2) + ac) * ih1 *
                   need_positive(f.k(x + 0.5 * g.h1, y), "k", x + 0.5 * g.h1, y);
            w[p] = (ac + a_at(i1 - 1, i2)) * ih1 *
                   need_positive(f.k(x - 0.5 * g.h1, y), "k", x - 0.5 * g.h1, y);
            nn[p] = (a_at(i1, i2 + 1) + ac) * ih2 *
                    need_positive(f.k(x, y + 0.5 * g.h2), "k", x, y + 0.5 * g.h2);
            s[p] = (ac + a_at(i1, i2 - 1)) * ih2 *
                   need_positive(f.k(x, y - 0.5 * g.h2), "k", x, y - 0.5 * g.h2);
            c[p] = neighbor_sum(w[p], e[p], s[p], nn[p]);
        }
    }
    return {g, StencilKind::weighted_diffusion, std::move(c), std::move(w), std::move(e),
            std::move(s), std::move(nn)};
}

GridVelocity::GridVelocity(const Grid2D& g)
    : grid(g),
      w1(static_cast<std::size_t>(g.n1) * (g.n2 - 1), 0.0),
      w2(static_cast<std::size_t>(g.n1 - 1) * g.n2, 0.0) {}

GridVelocity grid_velocity(const Grid2D& g, const CoefficientField& f) {
    GridVelocity v(g);
    for (int i2 = 1; i2 < g.n2; ++i2) {
        const double y = g.x2(i2);
        for (int i1 = 0; i1 < g.n1; ++i1) {
            const double x = g.x1(i1);
            v.w1_ref(i1, i2) =
                (f.a(x + g.h1, y) - f.a(x, y)) / g.h1 * f.k(x + 0.5 * g.h1, y);
        }
    }
    for (int i2 = 0; i2 < g.n2; ++i2) {
        const double y = g.x2(i2);
        for (int i1 = 1; i1 < g.n1; ++i1) {
            const double x = g.x1(i1);
            v.w2_ref(i1, i2) =
                (f.a(x, y + g.h2) - f.a(x, y)) / g.h2 * f.k(x, y + 0.5 * g.h2);
        }
    }
    return v;
}

StencilOperator assemble_convection(const Grid2D& g, const GridVelocity& v) {
    if (!(v.grid == g)) throw std::invalid_argument("assemble_convection: grid mismatch");
    const std::size_t n = g.interior_count();
    std::vector<double> c(n), w(n), e(n), s(n), nn(n);
    const double ih1 = 1.0 / (2.0 * g.h1), ih2 = 1.0 / (2.0 * g.h2);
    for (int i2 = 1; i2 < g.n2; ++i2) {
        for (int i1 = 1; i1 < g.n1; ++i1) {
            const std::size_t p = g.index(i1, i2);
            const double w1p = v.w1_at(i1, i2), w1m = v.w1_at(i1 - 1, i2);
            const double w2p = v.w2_at(i1, i2), w2m = v.w2_at(i1, i2 - 1);
            e[p] = -w1p * ih1;
            w[p] = w1m * ih1;
            nn[p] = -w2p * ih2;
            s[p] = w2m * ih2;
            c[p] = (w1m - w1p) * ih1 + (w2m - w2p) * ih2;
        }
    }
    return {g, StencilKind::convection, std::move(c), std::move(w), std::move(e), std::move(s),
            std::move(nn)};
}

StencilOperator assemble_skew(const Grid2D& g, const GridVelocity& v) {
    if (!(v.grid == g)) throw std::invalid_argument("assemble_skew: grid mismatch");
    const std::size_t n = g.interior_count();
    std::vector<double> c(n, 0.0), w(n), e(n), s(n), nn(n);
    const double ih1 = 1.0 / (2.0 * g.h1), ih2 = 1.0 / (2.0 * g.h2);
    for (int i2 = 1; i2 < g.n2; ++i2) {
        for (int i1 = 1; i1 < g.n1; ++i1) {
            const std::size_t p = g.index(i1, i2);
            e[p] = -v.w1_at(i1, i2) * ih1;
            w[p] = v.w1_at(i1 - 1, i2) * ih1;
            nn[p] = -v.w2_at(i1, i2) * ih2;
            s[p] = v.w2_at(i1, i2 - 1) * ih2;
        }
    }
    return {g, StencilKind::skew, std::move(c), std::move(w), std::move(e), std::move(s),
            std::move(nn)};
}

GridFunction div_h(const Grid2D& g, const GridVelocity& v) {
    if (!(v.grid == g)) throw std::invalid_argument("div_h: grid mismatch");
    GridFunction d(g);
    for (int i2 = 1; i2 < g.n2; ++i2)
        for (int i1 = 1; i1 < g.n1; ++i1)
            d.ref(i1, i2) = (v.w1_at(i1, i2) - v.w1_at(i1 - 1, i2)) / g.h1 +
                            (v.w2_at(i1, i2) - v.w2_at(i1, i2 - 1)) / g.h2;
    return d;
}

double energy_constant(const Grid2D& g, const GridVelocity& v) {
    return 0.5 * max_norm(div_h(g, v));
}

double subordination_constant(const Grid2D& g, const GridVelocity& v) {
    (void)g;
    double m1 = 0.0, m2 = 0.0;
    for (double x : v.w1) m1 = std::max(m1, x * x);
    for (double x : v.w2) m2 = std::max(m2, x * x);
    return std::max(m1, m2);
}

SpectralBounds grid_spectral_bounds(const Grid2D& g) {
    auto lo = [](double h, double l) {
        const double s = std::sin(0.5 * M_PI * h / l);
        return 4.0 / (h * h) * s * s;
    };
    auto hi = [](double h, double l) {
        const double c = std::cos(0.5 * M_PI * h / l);
        return 4.0 / (h * h) * c * c;
    };
    return {lo(g.h1, g.l1) + lo(g.h2, g.l2), hi(g.h1, g.l1) + hi(g.h2, g.l2)};
}

DominanceReport check_max_principle(const StencilOperator& op) {
    DominanceReport r;
    const std::size_t n = op.grid().interior_count();
    bool first = true;
    for (std::size_t p = 0; p < n; ++p) {
        const double c = op.center()[p], w = op.west()[p], e = op.east()[p];
        const double s = op.south()[p], nn = op.north()[p];
        if (r.signs_positive && !(c > 0.0 && w > 0.0 && e > 0.0 && s > 0.0 && nn > 0.0)) {
            r.signs_positive = false;
            r.first_bad_sign = static_cast<long>(p);
        }
        // Same grouping as assembly, so unshifted operators report exactly 0.
        const double slack = c - neighbor_sum(w, e, s, nn);
        if (first || slack < r.min_slack) {
            r.min_slack = slack;
            r.slack_argmin = static_cast<long>(p);
            first = false;
        }
    }
    r.holds = r.signs_positive && r.min_slack >= 0.0;
    return r;
}

}  // namespace presslab
