// Uniform rectangular grids and grid functions vanishing on the boundary.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace presslab {

/// Uniform rectangular grid on (0,l1) x (0,l2) with N1 x N2 cells.
/// Nodes are x = (i1*h1, i2*h2); the interior (i1 in 1..N1-1, i2 in 1..N2-1)
/// carries the unknowns, the boundary ring is fixed at zero.
struct Grid2D {
    double l1 = 1.0, l2 = 1.0;
    int n1 = 2, n2 = 2;
    double h1 = 0.5, h2 = 0.5;

    Grid2D() = default;
    Grid2D(double l1_, double l2_, int n1_, int n2_);

    int nx() const noexcept { return n1 - 1; }  ///< interior nodes along x1
    int ny() const noexcept { return n2 - 1; }  ///< interior nodes along x2
    std::size_t interior_count() const noexcept {
        return static_cast<std::size_t>(nx()) * static_cast<std::size_t>(ny());
    }

    double x1(int i1) const noexcept { return i1 * h1; }
    double x2(int i2) const noexcept { return i2 * h2; }

    /// Flat index of interior node (i1, i2), row-major with i1 fastest.
    std::size_t index(int i1, int i2) const noexcept {
        return static_cast<std::size_t>(i2 - 1) * nx() + static_cast<std::size_t>(i1 - 1);
    }

    bool operator==(const Grid2D& o) const noexcept {
        return l1 == o.l1 && l2 == o.l2 && n1 == o.n1 && n2 == o.n2;
    }
};

/// Values on interior nodes; any boundary access reads as zero.
class GridFunction {
public:
    explicit GridFunction(const Grid2D& grid) : grid_(grid), v_(grid.interior_count(), 0.0) {}
    GridFunction(const Grid2D& grid, double fill)
        : grid_(grid), v_(grid.interior_count(), fill) {}

    const Grid2D& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return v_.size(); }

    double operator[](std::size_t i) const noexcept { return v_[i]; }
    double& operator[](std::size_t i) noexcept { return v_[i]; }

    /// Value at node (i1, i2); zero on or outside the boundary.
    double at(int i1, int i2) const noexcept {
        if (i1 <= 0 || i1 >= grid_.n1 || i2 <= 0 || i2 >= grid_.n2) return 0.0;
        return v_[grid_.index(i1, i2)];
    }
    double& ref(int i1, int i2) noexcept { return v_[grid_.index(i1, i2)]; }

    std::span<const double> values() const noexcept { return v_; }
    std::span<double> values() noexcept { return v_; }

private:
    Grid2D grid_;
    std::vector<double> v_;
};

/// L2(omega) inner product: sum of y*w*h1*h2 over interior nodes.
/// Summed over fixed-size chunks in row-major order, so the result is
/// reproducible and independent of any parallel partition.
double inner_product(const GridFunction& y, const GridFunction& w);

double l2_norm(const GridFunction& y);

/// C(omega) norm: max |y| over interior nodes.
double max_norm(const GridFunction& y);

}  // namespace presslab
