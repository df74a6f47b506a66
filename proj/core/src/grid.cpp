#include "blowtime/grid.hpp"

#include "blowtime/errors.hpp"

#include <algorithm>
#include <cmath>

namespace blowtime::sim {

Grid::Grid(const ConvexDomain& domain, const std::optional<BoundaryPartition>& gamma1)
    : domain_(domain), gamma1_(gamma1) {}

double Grid::explicit_dt_limit() const {
    double diag = 0.0;
    for (const auto& t : laplacian_)
        if (t.row == t.col) diag = std::max(diag, -t.value);
    return diag > 0.0 ? 1.0 / diag : 1.0;
}

// ------------------------------------------------------------------ polar

PolarGrid::PolarGrid(const ConvexDomain& disk, const std::optional<BoundaryPartition>& gamma1,
                     int n_radial, int n_angular)
    : Grid(disk, gamma1), nr_(n_radial), nt_(n_angular) {
    if (disk.kind() != geometry::DomainKind::disk) throw InvalidInput("PolarGrid needs a disk");
    if (nr_ < 4 || nt_ < 8) throw InvalidInput("polar grid resolution too small");
    const double R = disk.shape()[0];
    dr_ = R / (nr_ - 0.5);
    dtheta_ = 2.0 * kPi / nt_;
    spacing_ = dr_;

    nodes_.resize(static_cast<std::size_t>(nr_) * nt_);
    weights_.resize(nodes_.size());
    const int b = nr_ - 1;
    for (int i = 0; i < nr_; ++i) {
        const double r = i == b ? R : radius(i);
        const double w = i == b ? (R - 0.5 * dr_) * 0.5 * dr_ * dtheta_ : r * dr_ * dtheta_;
        for (int j = 0; j < nt_; ++j) {
            const double th = j * dtheta_;
            nodes_[index(i, j)] = {r * std::cos(th), r * std::sin(th), 0.0};
            weights_[index(i, j)] = w;
        }
    }

    const double idr2 = 1.0 / (dr_ * dr_);
    for (int i = 0; i < nr_; ++i) {
        const double r = i == b ? R : radius(i);
        const double ang = 1.0 / (r * r * dtheta_ * dtheta_);
        for (int j = 0; j < nt_; ++j) {
            const std::size_t k = index(i, j);
            const std::size_t kp = index(i, (j + 1) % nt_);
            const std::size_t km = index(i, (j + nt_ - 1) % nt_);
            double diag = -2.0 * ang;
            laplacian_.push_back({k, kp, ang});
            laplacian_.push_back({k, km, ang});
            if (i < b) {
                const double out = (r + 0.5 * dr_) / r * idr2;
                laplacian_.push_back({k, index(i + 1, j), out});
                diag -= out;
                if (i > 0) {
                    const double in = (r - 0.5 * dr_) / r * idr2;
                    laplacian_.push_back({k, index(i - 1, j), in});
                    diag -= in;
                }
            } else {
                // ghost u_{b+1} = u_{b-1} + 2 dr g eliminated
                laplacian_.push_back({k, index(b - 1, j), 2.0 * idr2});
                diag -= 2.0 * idr2;
            }
            laplacian_.push_back({k, k, diag});
        }
    }

    for (int j = 0; j < nt_; ++j) {
        const std::size_t k = index(b, j);
        const double s = R * j * dtheta_;
        ring_.push_back(k);
        ring_s_.push_back(s);
        ring_w_.push_back(R * dtheta_);
        ring_gamma1_.push_back(in_gamma1(s));
        flux_.push_back({k, 2.0 / dr_ + 1.0 / R, ring_gamma1_.back()});
    }
}

double PolarGrid::interpolate(const std::vector<double>& u, Vec3 p) const {
    const double R = domain_.shape()[0];
    const double r = std::min(std::hypot(p.x, p.y), R);
    double th = std::atan2(p.y, p.x);
    if (th < 0.0) th += 2.0 * kPi;
    const double fj = th / dtheta_;
    const int j0 = static_cast<int>(std::floor(fj)) % nt_;
    const int j1 = (j0 + 1) % nt_;
    const double wt = fj - std::floor(fj);
    const auto ring_value = [&](int i) {
        return (1.0 - wt) * u[index(i, j0)] + wt * u[index(i, j1)];
    };
    const double r0 = radius(0);
    if (r <= r0) {
        double centre = 0.0;
        for (int j = 0; j < nt_; ++j) centre += u[index(0, j)];
        centre /= nt_;
        const double f = r / r0;
        return (1.0 - f) * centre + f * ring_value(0);
    }
    const int b = nr_ - 1;
    // ring radii: radius(i) for i < b, R for the boundary ring
    int i = std::min(static_cast<int>(std::floor(r / dr_ - 0.5)), b - 1);
    const double ra = radius(i);
    const double rb = i + 1 == b ? R : radius(i + 1);
    const double f = std::clamp((r - ra) / (rb - ra), 0.0, 1.0);
    return (1.0 - f) * ring_value(i) + f * ring_value(i + 1);
}

// -------------------------------------------------------------- cartesian

CartesianGrid::CartesianGrid(const ConvexDomain& rect, const std::optional<BoundaryPartition>& gamma1,
                             int nx, int ny)
    : Grid(rect, gamma1), nx_(nx), ny_(ny) {
    if (rect.kind() != geometry::DomainKind::rectangle) throw InvalidInput("CartesianGrid needs a rectangle");
    if (nx_ < 4 || ny_ < 4) throw InvalidInput("Cartesian grid resolution too small");
    const double w = rect.shape()[0], h = rect.shape()[1];
    hx_ = w / (nx_ - 1);
    hy_ = h / (ny_ - 1);
    spacing_ = std::max(hx_, hy_);

    nodes_.resize(static_cast<std::size_t>(nx_) * ny_);
    weights_.resize(nodes_.size());
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            const double fx = (i == 0 || i == nx_ - 1) ? 0.5 : 1.0;
            const double fy = (j == 0 || j == ny_ - 1) ? 0.5 : 1.0;
            nodes_[index(i, j)] = {i * hx_, j * hy_, 0.0};
            weights_[index(i, j)] = fx * fy * hx_ * hy_;
        }
    }

    const double ix2 = 1.0 / (hx_ * hx_), iy2 = 1.0 / (hy_ * hy_);
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            const std::size_t k = index(i, j);
            double diag = 0.0;
            // x direction; a missing neighbour is a reflected ghost
            if (i == 0) {
                laplacian_.push_back({k, index(1, j), 2.0 * ix2});
            } else if (i == nx_ - 1) {
                laplacian_.push_back({k, index(nx_ - 2, j), 2.0 * ix2});
            } else {
                laplacian_.push_back({k, index(i - 1, j), ix2});
                laplacian_.push_back({k, index(i + 1, j), ix2});
            }
            diag -= 2.0 * ix2;
            if (j == 0) {
                laplacian_.push_back({k, index(i, 1), 2.0 * iy2});
            } else if (j == ny_ - 1) {
                laplacian_.push_back({k, index(i, ny_ - 2), 2.0 * iy2});
            } else {
                laplacian_.push_back({k, index(i, j - 1), iy2});
                laplacian_.push_back({k, index(i, j + 1), iy2});
            }
            diag -= 2.0 * iy2;
            laplacian_.push_back({k, k, diag});
        }
    }

    // Ring in arc order: bottom, right, top, left.
    const auto push_ring = [&](int i, int j, double s, double weight) {
        ring_.push_back(index(i, j));
        ring_s_.push_back(s);
        ring_w_.push_back(weight);
        ring_gamma1_.push_back(in_gamma1(s));
    };
    for (int i = 0; i < nx_ - 1; ++i) push_ring(i, 0, i * hx_, i == 0 ? 0.5 * (hx_ + hy_) : hx_);
    for (int j = 0; j < ny_ - 1; ++j) push_ring(nx_ - 1, j, w + j * hy_, j == 0 ? 0.5 * (hx_ + hy_) : hy_);
    for (int i = nx_ - 1; i > 0; --i)
        push_ring(i, ny_ - 1, w + h + (nx_ - 1 - i) * hx_, i == nx_ - 1 ? 0.5 * (hx_ + hy_) : hx_);
    for (int j = ny_ - 1; j > 0; --j)
        push_ring(0, j, 2.0 * w + h + (ny_ - 1 - j) * hy_, j == ny_ - 1 ? 0.5 * (hx_ + hy_) : hy_);

    // Flux entries per edge; corners get one entry from each adjacent edge.
    // Corner parameters are taken exactly so interface tests are not
    // perturbed by rounding in k * h.
    const auto along = [](int k, int n, double step, double len) { return k == n - 1 ? len : k * step; };
    for (int i = 0; i < nx_; ++i) {
        flux_.push_back({index(i, 0), 2.0 / hy_, in_gamma1(along(i, nx_, hx_, w))});
        flux_.push_back({index(i, ny_ - 1), 2.0 / hy_, in_gamma1(w + h + along(nx_ - 1 - i, nx_, hx_, w))});
    }
    for (int j = 0; j < ny_; ++j) {
        flux_.push_back({index(nx_ - 1, j), 2.0 / hx_, in_gamma1(w + along(j, ny_, hy_, h))});
        flux_.push_back({index(0, j), 2.0 / hx_, in_gamma1(j == 0 ? 0.0 : 2.0 * w + h + along(ny_ - 1 - j, ny_, hy_, h))});
    }
}

double CartesianGrid::interpolate(const std::vector<double>& u, Vec3 p) const {
    const double fx = std::clamp(p.x / hx_, 0.0, nx_ - 1.0);
    const double fy = std::clamp(p.y / hy_, 0.0, ny_ - 1.0);
    const int i = std::min(static_cast<int>(fx), nx_ - 2);
    const int j = std::min(static_cast<int>(fy), ny_ - 2);
    const double a = fx - i, b = fy - j;
    return (1 - a) * (1 - b) * u[index(i, j)] + a * (1 - b) * u[index(i + 1, j)] +
           (1 - a) * b * u[index(i, j + 1)] + a * b * u[index(i + 1, j + 1)];
}

std::shared_ptr<const Grid> make_grid(const ConvexDomain& domain,
                                      const std::optional<BoundaryPartition>& gamma1, int n1, int n2) {
    switch (domain.kind()) {
        case geometry::DomainKind::disk: return std::make_shared<PolarGrid>(domain, gamma1, n1, n2);
        case geometry::DomainKind::rectangle: return std::make_shared<CartesianGrid>(domain, gamma1, n1, n2);
        default:
            throw InvalidInput("the simulator supports disk (polar grid) and rect (Cartesian grid) domains, not " +
                               domain.to_string());
    }
}

}  // namespace blowtime::sim
