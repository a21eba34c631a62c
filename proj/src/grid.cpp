#include "presslab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "presslab/parallel.hpp"

namespace presslab {

Grid2D::Grid2D(double l1_, double l2_, int n1_, int n2_)
    : l1(l1_), l2(l2_), n1(n1_), n2(n2_) {
    if (!(l1 > 0.0) || !(l2 > 0.0)) throw std::invalid_argument("Grid2D: side lengths must be positive");
    if (n1 < 2 || n2 < 2) throw std::invalid_argument("Grid2D: need at least 2 cells per axis");
    h1 = l1 / n1;
    h2 = l2 / n2;
}

double inner_product(const GridFunction& y, const GridFunction& w) {
    if (!(y.grid() == w.grid())) throw std::invalid_argument("inner_product: grid mismatch");
    const auto a = y.values(), b = w.values();
    const std::size_t n = a.size();
    double total = 0.0;
    for (std::size_t c = 0; c < n; c += WorkerPool::kChunk) {
        const std::size_t hi = std::min(n, c + WorkerPool::kChunk);
        double s = 0.0;
        for (std::size_t i = c; i < hi; ++i) s += a[i] * b[i];
        total += s;
    }
    return total * (y.grid().h1 * y.grid().h2);
}

double l2_norm(const GridFunction& y) { return std::sqrt(inner_product(y, y)); }

double max_norm(const GridFunction& y) {
    double m = 0.0;
    for (double v : y.values()) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace presslab
