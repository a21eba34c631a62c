// Five-point operators for the multiphase pressure problem: per-phase
// flux-form diffusion, the composite non-selfadjoint operator, its
// diffusion/convection splitting, and the algebraic diagnostics.
#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "presslab/grid.hpp"

namespace presslab {

class WorkerPool;

/// Analytic coefficient pair of one phase: weight a (a >= rho > 0) sampled at
/// nodes, permeability-like k (kappa <= k <= kappa_bar) sampled at half-integer
/// midpoints. Both must be evaluable on the closed domain.
struct CoefficientField {
    std::function<double(double, double)> a;
    std::function<double(double, double)> k;
    int phase = 0;
};

enum class StencilKind {
    diffusion,           // flux-form k-diffusion (selfadjoint)
    composite,           // weighted sum of per-phase diffusion operators
    weighted_diffusion,  // neighbor-averaged a times k (selfadjoint split part)
    convection,          // central convective transport
    skew,                // skew-symmetric convective part (zero center)
    shifted,             // identity/tau + composite
    custom
};

/// Immutable five-point operator. Application at an interior node is
///   (Op y)(x) = c*y(x) - w*y(W) - e*y(E) - s*y(S) - n*y(N)
/// with zero substituted for neighbors on the boundary.
class StencilOperator {
public:
    StencilOperator(const Grid2D& grid, StencilKind kind, std::vector<double> center,
                    std::vector<double> west, std::vector<double> east,
                    std::vector<double> south, std::vector<double> north);

    const Grid2D& grid() const noexcept { return grid_; }
    StencilKind kind() const noexcept { return kind_; }

    std::span<const double> center() const noexcept { return c_; }
    std::span<const double> west() const noexcept { return w_; }
    std::span<const double> east() const noexcept { return e_; }
    std::span<const double> south() const noexcept { return s_; }
    std::span<const double> north() const noexcept { return n_; }

    GridFunction apply(const GridFunction& y) const;

    /// Matrix-free application on raw node vectors; rows are split across the
    /// pool's workers (disjoint writes, no reduction).
    void apply_into(std::span<const double> y, std::span<double> z, WorkerPool& pool) const;

private:
    Grid2D grid_;
    StencilKind kind_;
    std::vector<double> c_, w_, e_, s_, n_;
};

/// Velocity samples on half-edges: w1 at (x1 + 0.5h1, x2) for i1 = 0..N1-1,
/// interior x2; w2 at (x1, x2 + 0.5h2) for i2 = 0..N2-1, interior x1.
struct GridVelocity {
    Grid2D grid;
    std::vector<double> w1;  // size N1 * (N2-1), i1-fastest
    std::vector<double> w2;  // size (N1-1) * N2, i1-fastest

    explicit GridVelocity(const Grid2D& g);

    /// w1 at half-edge (i1 + 0.5, i2); i1 in 0..N1-1, i2 in 1..N2-1.
    double w1_at(int i1, int i2) const noexcept {
        return w1[static_cast<std::size_t>(i2 - 1) * grid.n1 + i1];
    }
    double& w1_ref(int i1, int i2) noexcept {
        return w1[static_cast<std::size_t>(i2 - 1) * grid.n1 + i1];
    }
    /// w2 at half-edge (i1, i2 + 0.5); i1 in 1..N1-1, i2 in 0..N2-1.
    double w2_at(int i1, int i2) const noexcept {
        return w2[static_cast<std::size_t>(i2) * (grid.n1 - 1) + (i1 - 1)];
    }
    double& w2_ref(int i1, int i2) noexcept {
        return w2[static_cast<std::size_t>(i2) * (grid.n1 - 1) + (i1 - 1)];
    }
};

/// Sharp spectral bracket of the unit-coefficient diffusion operator:
/// delta*E <= Lambda <= Delta*E.
struct SpectralBounds {
    double delta;
    double Delta;
};

/// Outcome of the sign/dominance test for the grid maximum principle.
struct DominanceReport {
    bool signs_positive = true;   ///< all center and neighbor coefficients > 0
    long first_bad_sign = -1;     ///< flat node index of the first violation
    double min_slack = 0.0;       ///< min over nodes of c - (w+e+s+n)
    long slack_argmin = -1;
    bool holds = false;           ///< signs_positive && min_slack >= 0
};

/// Flux-form diffusion of one phase: k sampled at half-integer midpoints,
/// center equals the sum of the four neighbor coefficients.
StencilOperator assemble_lambda(const Grid2D& grid, const CoefficientField& field);

/// Composite pressure operator: each phase's flux-form rows scaled by a(x)
/// at the row's node and summed. Non-selfadjoint for non-constant a.
StencilOperator assemble_composite(const Grid2D& grid,
                                   const std::vector<CoefficientField>& fields);

/// Adds 1/tau to every center coefficient (implicit time-level system).
StencilOperator assemble_shifted(const StencilOperator& op_a, double tau);

/// (1/tau)E + sigma*A, the left-hand operator of the weighted two-level
/// scheme. sigma = 1 reproduces assemble_shifted bit for bit.
StencilOperator assemble_weighted_lhs(const StencilOperator& op_a, double tau, double sigma);

/// Split-off diffusion part: neighbor-averaged a times midpoint k.
StencilOperator assemble_diffusion(const Grid2D& grid, const CoefficientField& field);

/// Half-edge velocity w = (difference quotient of a) * (midpoint k).
GridVelocity grid_velocity(const Grid2D& grid, const CoefficientField& field);

/// Central convective transport with half-edge velocities.
StencilOperator assemble_convection(const Grid2D& grid, const GridVelocity& w);

/// Skew-symmetric convective part: zero center, +-w/(2h) neighbors.
StencilOperator assemble_skew(const Grid2D& grid, const GridVelocity& w);

/// Discrete divergence of a half-edge velocity field.
GridFunction div_h(const Grid2D& grid, const GridVelocity& w);

/// Energy constant M = 0.5 * max |div_h w| controlling |(Cy,y)| <= M*||y||^2.
double energy_constant(const Grid2D& grid, const GridVelocity& w);

/// Subordination constant: max over half-edges of the squared velocity
/// components, reported for the bound ||Cy||^2 <= const * (Dy,y).
double subordination_constant(const Grid2D& grid, const GridVelocity& w);

/// Exact extreme eigenvalues of the unit-coefficient five-point diffusion
/// operator on this grid.
SpectralBounds grid_spectral_bounds(const Grid2D& grid);

/// Sign and diagonal-dominance test of the five-point coefficients.
DominanceReport check_max_principle(const StencilOperator& op);

}  // namespace presslab
