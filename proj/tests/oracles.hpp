// Independent reference paths for the tests: brute-force sums, a dense
// matrix view of stencil operators built directly from the coefficient
// arrays, and random smooth coefficient fields.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "presslab/grid.hpp"
#include "presslab/operators.hpp"

namespace oracle {

using presslab::CoefficientField;
using presslab::Grid2D;
using presslab::GridFunction;
using presslab::StencilOperator;

// plain double loop over interior nodes
inline double brute_inner_product(const GridFunction& y, const GridFunction& w) {
    const Grid2D& g = y.grid();
    double s = 0.0;
    for (int i2 = 1; i2 < g.n2; ++i2)
        for (int i1 = 1; i1 < g.n1; ++i1) s += y.at(i1, i2) * w.at(i1, i2) * g.h1 * g.h2;
    return s;
}

// dense row-major matrix of the operator, assembled node by node from the
// stencil coefficients (independent of the CSR path)
inline std::vector<double> dense_from_stencil(const StencilOperator& op) {
    const Grid2D& g = op.grid();
    const int nx = g.nx(), ny = g.ny();
    const std::size_t n = g.interior_count();
    std::vector<double> a(n * n, 0.0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const std::size_t p = static_cast<std::size_t>(j) * nx + i;
            a[p * n + p] = op.center()[p];
            if (i > 0) a[p * n + (p - 1)] = -op.west()[p];
            if (i + 1 < nx) a[p * n + (p + 1)] = -op.east()[p];
            if (j > 0) a[p * n + (p - nx)] = -op.south()[p];
            if (j + 1 < ny) a[p * n + (p + nx)] = -op.north()[p];
        }
    return a;
}

inline GridFunction dense_apply(const std::vector<double>& a, const GridFunction& y) {
    const std::size_t n = y.size();
    GridFunction z(y.grid());
    for (std::size_t r = 0; r < n; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) acc += a[r * n + c] * y[c];
        z[r] = acc;
    }
    return z;
}

inline double max_asymmetry(const std::vector<double>& a, std::size_t n) {
    double m = 0.0;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = r + 1; c < n; ++c)
            m = std::max(m, std::abs(a[r * n + c] - a[c * n + r]));
    return m;
}

inline GridFunction random_function(const Grid2D& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    GridFunction y(g);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = uni(rng);
    return y;
}

// positive trigonometric coefficient pair, smooth on the closed square
inline CoefficientField random_smooth_field(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> amp(-0.4, 0.4);
    std::uniform_int_distribution<int> freq(1, 3);
    const double a0 = amp(rng), a1 = amp(rng);
    const double k0 = amp(rng), k1 = amp(rng);
    const int fa = freq(rng), fk = freq(rng);
    CoefficientField f;
    f.a = [=](double x1, double x2) {
        return 1.2 + a0 * std::sin(fa * M_PI * x1) + a1 * std::cos(fa * M_PI * x2);
    };
    f.k = [=](double x1, double x2) {
        return 1.0 + k0 * std::cos(fk * M_PI * x1) * std::sin(fk * M_PI * x2) + k1 * 0.5;
    };
    return f;
}

inline double rel_maxnorm_diff(const GridFunction& a, const GridFunction& b) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(a[i]));
    }
    return scale > 0.0 ? diff / scale : diff;
}

}  // namespace oracle
