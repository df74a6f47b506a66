#include "blowtime/errors.hpp"
#include "blowtime/heat_kernel.hpp"
#include "blowtime/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace blowtime::sim {

namespace {

using geometry::DomainKind;

struct BoundaryWeight {
    std::size_t ring;  // index into the boundary ring
    double weight;
    Vec3 normal;
    double s;
};

// Trapezoid rule on the recorded boundary ring. Rectangle edges are handled
// separately so each corner contributes once per edge with that edge's
// normal.
std::vector<BoundaryWeight> ring_rule(const Grid& grid) {
    const auto& dom = grid.domain();
    const auto& s = grid.ring_parameters();
    const std::size_t n = s.size();
    std::vector<BoundaryWeight> out;
    if (dom.kind() != DomainKind::rectangle) {
        for (std::size_t k = 0; k < n; ++k) {
            const auto bp = geometry::boundary_point(dom, s[k]);
            out.push_back({k, grid.ring_weights()[k], bp.normal, s[k]});
        }
        return out;
    }
    const auto corners = geometry::corner_parameters(dom);
    const double len = dom.parameter_length();
    const std::array<Vec3, 4> normals{Vec3{0, -1, 0}, Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{-1, 0, 0}};
    for (int e = 0; e < 4; ++e) {
        const double a = corners[e];
        const double b = e == 3 ? len : corners[e + 1];
        std::vector<std::size_t> idx;
        for (std::size_t k = 0; k < n; ++k)
            if (s[k] >= a - 1e-12 && s[k] <= b + 1e-12) idx.push_back(k);
        if (e == 3) idx.push_back(0);  // closing corner (0, 0)
        for (std::size_t m = 0; m < idx.size(); ++m) {
            const double left = m > 0 ? (m == idx.size() - 1 && e == 3 ? len : s[idx[m]]) - s[idx[m - 1]] : 0.0;
            const double sm = (m == idx.size() - 1 && e == 3) ? len : s[idx[m]];
            const double right = m + 1 < idx.size()
                                      ? ((m + 1 == idx.size() - 1 && e == 3) ? len : s[idx[m + 1]]) - sm
                                      : 0.0;
            out.push_back({idx[m], 0.5 * (left + right), normals[e], sm});
        }
    }
    return out;
}

class RingHistory {
public:
    explicit RingHistory(const RunRecord& r) : r_(r) {}

    std::vector<double> at(double time) const {
        const auto& ts = r_.ring_times;
        auto it = std::lower_bound(ts.begin(), ts.end(), time);
        if (it == ts.end()) return r_.ring_values.back();
        const std::size_t j = static_cast<std::size_t>(it - ts.begin());
        if (*it == time || j == 0) return r_.ring_values[j];
        const double f = (time - ts[j - 1]) / (ts[j] - ts[j - 1]);
        std::vector<double> out(r_.ring_values[j].size());
        for (std::size_t k = 0; k < out.size(); ++k)
            out[k] = (1.0 - f) * r_.ring_values[j - 1][k] + f * r_.ring_values[j][k];
        return out;
    }

private:
    const RunRecord& r_;
};

double gamma1_factor(const std::optional<BoundaryPartition>& g1, double s) {
    if (!g1) return 0.0;
    if (g1->interior_contains(s)) return 1.0;
    return g1->distance_to_interface(s) < 1e-12 ? 0.5 : 0.0;
}

}  // namespace

RepresentationResult representation_residual(const RunRecord& record, double s, double T, double t,
                                             const geometry::QuadratureSpec& spec) {
    spec.validate();
    if (!record.grid) throw InvalidInput("representation_residual: empty run record");
    const Grid& grid = *record.grid;
    const auto& dom = grid.domain();
    if (!(T >= 0.0) || !(t > 0.0)) throw RangeError("representation_residual: need T >= 0 and t > 0");

    const std::vector<double>* snapshot = nullptr;
    for (const auto& [time, field] : record.snapshots)
        if (std::abs(time - T) <= 1e-12 * std::max(1.0, T)) snapshot = &field;
    if (!snapshot) throw RangeError("representation_residual: no field snapshot recorded at T");
    if (record.ring_times.empty() || record.ring_times.front() > T + 1e-12 ||
        record.ring_times.back() < (T + t) * (1.0 - 1e-12))
        throw RangeError("representation_residual: boundary history does not cover [T, T + t]");

    // nearest ring node
    const auto& ring_s = grid.ring_parameters();
    std::size_t kx = 0;
    for (std::size_t k = 1; k < ring_s.size(); ++k)
        if (geometry::parameter_distance(dom, ring_s[k], s) < geometry::parameter_distance(dom, ring_s[kx], s)) kx = k;
    const double sx = ring_s[kx];
    if (record.gamma1 && record.gamma1->distance_to_interface(sx) < 2.0 * grid.spacing())
        throw RangeError("representation_residual: x lies within two node spacings of the Gamma_1 interface");

    const RingHistory history(record);
    const double q = record.q;
    const Vec3 x = grid.nodes()[grid.boundary_ring()[kx]];
    const auto bx = geometry::boundary_point(dom, sx);
    const auto ring_end = history.at(T + t);

    RepresentationResult out;
    out.x = x;
    out.s = sx;
    out.lhs = ring_end[kx];

    // 2 int_Omega Phi(x - y, t) u(y, T) dy in polar coordinates about x.
    {
        const double th_n = std::atan2(bx.normal.y, bx.normal.x);
        const double lo = th_n + 0.5 * kPi, hi = th_n + 1.5 * kPi;
        std::vector<double> breaks{lo, hi};
        if (dom.kind() == DomainKind::rectangle) {
            const double w = dom.shape()[0], h = dom.shape()[1];
            for (Vec3 c : {Vec3{0, 0, 0}, Vec3{w, 0, 0}, Vec3{w, h, 0}, Vec3{0, h, 0}}) {
                const Vec3 d = c - x;
                if (norm(d) < 1e-12) continue;
                double a = std::atan2(d.y, d.x);
                while (a < lo) a += 2.0 * kPi;
                while (a > hi) a -= 2.0 * kPi;
                if (a > lo && a < hi) breaks.push_back(a);
            }
        }
        std::sort(breaks.begin(), breaks.end());
        const double cutoff = 12.0 * std::sqrt(t);
        const int order = spec.volume_nodes;
        const auto radial = [&](double th) {
            const Vec3 e{std::cos(th), std::sin(th), 0.0};
            const double rmax = std::min(geometry::chord_length(dom, x, e), cutoff);
            if (rmax <= 0.0) return 0.0;
            const auto f = [&](double r) {
                return std::exp(-r * r / (4.0 * t)) * r * grid.interpolate(*snapshot, x + r * e);
            };
            return integrate_gl(f, 0.0, rmax, order, 2) / (4.0 * kPi * t);
        };
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) sum += integrate_gl(radial, breaks[i], breaks[i + 1], order, 2);
        out.volume = 2.0 * sum;
    }

    const auto rule = ring_rule(grid);
    const double kappa = geometry::curvature(dom, sx);
    const double sqrt_t = std::sqrt(t);
    const int tn = spec.time_nodes;

    // -2 int int D_y Phi . n u: time-integrated kernel against u(., T + t)
    // plus the remainder in sigma = sqrt(t - tau).
    {
        std::vector<double> terms;
        for (const auto& bw : rule) {
            if (bw.ring == kx) {
                // smooth diagonal limit of the integrated kernel
                terms.push_back(-kappa / (4.0 * kPi) * bw.weight * ring_end[bw.ring]);
                continue;
            }
            const Vec3 y = geometry::boundary_point(dom, bw.s).point;
            terms.push_back(kernel::double_layer_time_integral(x - y, bw.normal, t, 2) * bw.weight * ring_end[bw.ring]);
        }
        const double analytic = pairwise_sum(terms);
        const auto rem = [&](double sigma) {
            if (sigma <= 0.0) return 0.0;
            const double s2 = sigma * sigma;
            const auto ring = history.at(T + t - s2);
            std::vector<double> acc;
            acc.reserve(rule.size());
            for (const auto& bw : rule) {
                if (bw.ring == kx) continue;
                const Vec3 y = geometry::boundary_point(dom, bw.s).point;
                acc.push_back(kernel::phi_normal_derivative(x - y, bw.normal, s2, 2) * bw.weight *
                              (ring[bw.ring] - ring_end[bw.ring]));
            }
            return 2.0 * sigma * pairwise_sum(acc);
        };
        const double remainder = integrate_gl(rem, 0.0, sqrt_t, tn, 2);
        out.layer = -2.0 * (analytic + remainder);
    }

    // 2 int int_{Gamma_1} Phi u^q: E1 kernel against u^q(., T + t) plus the
    // sigma remainder.
    if (record.gamma1) {
        const double len = dom.parameter_length();
        const auto uq_end = [&](double sp) {
            // linear interpolation of u^q between ring nodes along the arc
            auto it = std::upper_bound(ring_s.begin(), ring_s.end(), sp);
            const std::size_t j1 = it == ring_s.end() ? 0 : static_cast<std::size_t>(it - ring_s.begin());
            const std::size_t j0 = j1 == 0 ? ring_s.size() - 1 : j1 - 1;
            double a = ring_s[j0], b = j1 == 0 ? len : ring_s[j1];
            if (j1 == 0 && sp < ring_s.front()) a -= len;
            const double f = b > a ? (sp - a) / (b - a) : 0.0;
            return (1.0 - f) * std::pow(ring_end[j0], q) + f * std::pow(ring_end[j1], q);
        };
        AdaptiveOptions opts;
        opts.rel_tol = std::max(spec.tolerance, 1e-9);
        opts.abs_tol = 1e-14;
        opts.max_subdivisions = std::max(spec.refinement_limit, 8 * static_cast<int>(ring_s.size()));
        const auto f = [&](double sp) {
            const Vec3 y = geometry::boundary_point(dom, std::clamp(sp, 0.0, len)).point;
            const double d2 = norm2(x - y);
            return upper_gamma(0.0, d2 / (4.0 * t)) / (4.0 * kPi) * uq_end(sp);
        };
        double analytic = 0.0;
        for (const auto& iv : record.gamma1->intervals()) {
            std::vector<double> breaks{iv.begin, iv.end};
            for (double r : ring_s)
                if (r > iv.begin && r < iv.end) breaks.push_back(r);
            if (sx > iv.begin && sx < iv.end) breaks.push_back(sx);
            std::sort(breaks.begin(), breaks.end());
            breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
            analytic += integrate_adaptive(f, breaks, opts).value;
        }
        std::vector<double> fac(rule.size());
        for (std::size_t i = 0; i < rule.size(); ++i) fac[i] = gamma1_factor(record.gamma1, rule[i].s);
        const auto rem = [&](double sigma) {
            if (sigma <= 0.0) return 0.0;
            const double s2 = sigma * sigma;
            const auto ring = history.at(T + t - s2);
            std::vector<double> acc;
            for (std::size_t i = 0; i < rule.size(); ++i) {
                if (fac[i] == 0.0) continue;
                const auto& bw = rule[i];
                const Vec3 y = geometry::boundary_point(dom, bw.s).point;
                acc.push_back(fac[i] * kernel::phi(x - y, s2, 2) * bw.weight *
                              (std::pow(ring[bw.ring], q) - std::pow(ring_end[bw.ring], q)));
            }
            return 2.0 * sigma * pairwise_sum(acc);
        };
        const double remainder = integrate_gl(rem, 0.0, sqrt_t, tn, 2);
        out.single = 2.0 * (analytic + remainder);
    }

    out.rhs = out.volume + out.layer + out.single;
    out.residual = std::abs(out.rhs - out.lhs);
    out.relative = out.residual / std::abs(out.lhs);
    return out;
}

}  // namespace blowtime::sim
