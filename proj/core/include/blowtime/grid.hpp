#pragma once

#include "blowtime/geometry.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

namespace blowtime::sim {

using geometry::BoundaryPartition;
using geometry::ConvexDomain;

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

// Boundary-flux coupling: d u_node / dt gains coef * (du/dn) from the ghost
// elimination. A corner node carries one entry per adjacent edge.
struct FluxEntry {
    std::size_t node;
    double coef;
    bool on_gamma1;
};

// Finite-difference discretisation of the Laplacian with Neumann ghost rows.
// The semi-discrete system is du/dt = A u + sum_flux coef * g(u_node), and
// W A is symmetric for the diagonal weight matrix W, so sum_i w_i u_i is
// conserved when no flux is applied.
class Grid {
public:
    virtual ~Grid() = default;

    std::size_t size() const { return nodes_.size(); }
    const std::vector<Vec3>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }
    // Boundary nodes in increasing arc parameter, with their parameters
    // and trapezoid arc-length weights.
    const std::vector<std::size_t>& boundary_ring() const { return ring_; }
    const std::vector<double>& ring_parameters() const { return ring_s_; }
    const std::vector<double>& ring_weights() const { return ring_w_; }
    const std::vector<FluxEntry>& flux() const { return flux_; }
    const std::vector<Triplet>& laplacian() const { return laplacian_; }
    const ConvexDomain& domain() const { return domain_; }

    double spacing() const { return spacing_; }
    // Largest forward-Euler step that keeps every diagonal coefficient of
    // I + dt A nonnegative (positivity and the discrete maximum principle).
    double explicit_dt_limit() const;
    // Whether the ring node at index k lies on the open Gamma_1.
    bool ring_on_gamma1(std::size_t k) const { return ring_gamma1_[k]; }

    virtual double interpolate(const std::vector<double>& u, Vec3 p) const = 0;
    virtual std::vector<int> resolution() const = 0;

protected:
    Grid(const ConvexDomain& domain, const std::optional<BoundaryPartition>& gamma1);

    bool in_gamma1(double s) const { return gamma1_ && gamma1_->interior_contains(s); }

    ConvexDomain domain_;
    std::optional<BoundaryPartition> gamma1_;
    std::vector<Vec3> nodes_;
    std::vector<double> weights_;
    std::vector<std::size_t> ring_;
    std::vector<double> ring_s_;
    std::vector<double> ring_w_;
    std::vector<bool> ring_gamma1_;
    std::vector<FluxEntry> flux_;
    std::vector<Triplet> laplacian_;
    double spacing_ = 0.0;
};

// Disk of radius R: rings r_i = (i + 1/2) dr with the last ring on r = R,
// nodes theta_j = j dtheta. The innermost cell has a zero-area face at the
// origin.
class PolarGrid final : public Grid {
public:
    PolarGrid(const ConvexDomain& disk, const std::optional<BoundaryPartition>& gamma1, int n_radial,
              int n_angular);

    double interpolate(const std::vector<double>& u, Vec3 p) const override;
    std::vector<int> resolution() const override { return {nr_, nt_}; }

    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * nt_ + j; }
    double radius(int i) const { return (i + 0.5) * dr_; }

private:
    int nr_;
    int nt_;
    double dr_;
    double dtheta_;
};

// Rectangle [0, w] x [0, h] with nodes on the boundary, trapezoid weights.
class CartesianGrid final : public Grid {
public:
    CartesianGrid(const ConvexDomain& rect, const std::optional<BoundaryPartition>& gamma1, int nx, int ny);

    double interpolate(const std::vector<double>& u, Vec3 p) const override;
    std::vector<int> resolution() const override { return {nx_, ny_}; }

    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }

private:
    int nx_;
    int ny_;
    double hx_;
    double hy_;
};

// Polar grid for disks, Cartesian grid for rectangles; other domains are
// rejected with InvalidInput.
std::shared_ptr<const Grid> make_grid(const ConvexDomain& domain,
                                      const std::optional<BoundaryPartition>& gamma1, int n1, int n2);

}  // namespace blowtime::sim
