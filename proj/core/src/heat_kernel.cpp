#include "blowtime/heat_kernel.hpp"

#include "blowtime/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace blowtime::kernel {

using geometry::boundary_point;
using geometry::DomainKind;

namespace {

AdaptiveOptions options_from(const QuadratureSpec& spec, double scale) {
    AdaptiveOptions o;
    o.rel_tol = spec.tolerance;
    o.abs_tol = 0.1 * spec.tolerance * scale;
    o.max_subdivisions = spec.refinement_limit;
    return o;
}

double wrap(double s, double period) {
    s = std::fmod(s, period);
    return s < 0.0 ? s + period : s;
}

// Directions (angles) from x to each rectangle corner, used as breakpoints
// where the chord length has a kink.
std::vector<double> corner_angles(const ConvexDomain& domain, Vec3 x) {
    std::vector<double> out;
    if (domain.kind() != DomainKind::rectangle) return out;
    const double w = domain.shape()[0], h = domain.shape()[1];
    for (Vec3 c : {Vec3{0, 0, 0}, Vec3{w, 0, 0}, Vec3{w, h, 0}, Vec3{0, h, 0}}) {
        const Vec3 d = c - x;
        if (norm(d) > 1e-14 * (w + h)) out.push_back(std::atan2(d.y, d.x));
    }
    return out;
}

IntegralResult mass_2d(const ConvexDomain& domain, double s, double t, const QuadratureSpec& spec) {
    const auto bp = boundary_point(domain, s);
    const Vec3 x = bp.point;
    const double th_n = std::atan2(bp.normal.y, bp.normal.x);
    const double lo = th_n + 0.5 * kPi;
    const double hi = th_n + 1.5 * kPi;
    std::vector<double> breaks{lo, hi};
    for (double a : corner_angles(domain, x)) {
        while (a < lo) a += 2.0 * kPi;
        while (a > hi) a -= 2.0 * kPi;
        if (a > lo && a < hi) breaks.push_back(a);
    }
    std::sort(breaks.begin(), breaks.end());
    const double inv4t = 0.25 / t;
    const auto f = [&](double th) {
        const double rho = geometry::chord_length(domain, x, {std::cos(th), std::sin(th), 0.0});
        return -std::expm1(-rho * rho * inv4t) / (2.0 * kPi);
    };
    return integrate_adaptive(f, breaks, options_from(spec, 0.5));
}

IntegralResult mass_ball(const ConvexDomain& domain, double t, const QuadratureSpec& spec) {
    const double R = domain.shape()[0];
    const auto f = [&](double mu) { return 0.5 * lower_gamma_regularized(1.5, R * R * mu * mu / t); };
    return integrate_adaptive(f, 0.0, 1.0, options_from(spec, 0.5));
}

double scaled_gaussian(const ConvexDomain& domain, double s, double tau, const QuadratureSpec& spec,
                       double* err = nullptr) {
    const auto r = boundary_gaussian(domain, s, tau, spec);
    const double scale = domain.dimension() == 3 ? 1.0 / tau : 1.0 / std::sqrt(tau);
    if (err) *err = r.error * scale;
    return r.value * scale;
}

// Small-tau limit of the scaled Gaussian: the half-line pair through a
// smooth point, the worst point near a right-angle corner, or the sphere.
double small_tau_limit(const ConvexDomain& domain) {
    if (domain.kind() == DomainKind::ball3d) return 4.0 * kPi;
    const double sp = std::sqrt(kPi);
    if (domain.kind() != DomainKind::rectangle) return 2.0 * sp;
    // x at distance 2 a sqrt(tau) from a corner: own edge gives
    // sqrt(pi)(1 + erf a), the perpendicular edge sqrt(pi) exp(-a^2).
    const auto g = [sp](double a) { return sp * (1.0 + std::erf(a) + std::exp(-a * a)); };
    return golden_maximize(g, 0.0, 3.0, 80).second;
}

}  // namespace

double phi(Vec3 x, double t, int dim) {
    if (!(t > 0.0)) throw DomainError("phi: t must be positive");
    return std::pow(4.0 * kPi * t, -0.5 * dim) * std::exp(-norm2(x) / (4.0 * t));
}

double phi_normal_derivative(Vec3 xy, Vec3 n, double s, int dim) {
    return phi(xy, s, dim) * dot(xy, n) / (2.0 * s);
}

double double_layer_time_integral(Vec3 xy, Vec3 n, double t, int dim) {
    if (!(t > 0.0)) throw DomainError("double_layer_time_integral: t must be positive");
    const double d2 = norm2(xy);
    if (d2 == 0.0) return 0.0;
    const double z = d2 / (4.0 * t);
    if (dim == 2) return dot(xy, n) * std::exp(-z) / (2.0 * kPi * d2);
    const double d = std::sqrt(d2);
    return dot(xy, n) * upper_gamma(1.5, z) / (2.0 * std::pow(kPi, 1.5) * d2 * d);
}

IntegralResult domain_mass_any_time(const ConvexDomain& domain, double s, double t,
                                    const QuadratureSpec& spec) {
    if (!(t > 0.0)) throw DomainError("domain_mass: t must be positive");
    spec.validate();
    if (domain.kind() == DomainKind::ball3d) return mass_ball(domain, t, spec);
    return mass_2d(domain, s, t, spec);
}

IntegralResult domain_mass(const ConvexDomain& domain, double s, double t, const QuadratureSpec& spec) {
    if (!(t > 0.0 && t <= 1.0)) throw DomainError("domain_mass: t must lie in (0, 1]");
    return domain_mass_any_time(domain, s, t, spec);
}

IntegralResult boundary_gaussian(const ConvexDomain& domain, double s, double tau,
                                 const QuadratureSpec& spec) {
    if (!(tau > 0.0)) throw DomainError("boundary_gaussian: tau must be positive");
    spec.validate();
    const auto& p = domain.shape();
    if (domain.kind() == DomainKind::ball3d) {
        const double R = p[0];
        return {-4.0 * kPi * tau * std::expm1(-R * R / tau), 0.0, 0};
    }
    const double inv4t = 0.25 / tau;
    const double width = 2.0 * std::sqrt(tau);
    const auto opts = options_from(spec, std::sqrt(tau));

    if (domain.kind() == DomainKind::ellipse) {
        // integrate in the eccentric angle; dS = |x'(phi)| dphi
        const double phx = domain.ellipse_arc()->angle_from_arc(s);
        const Vec3 x{p[0] * std::cos(phx), p[1] * std::sin(phx), 0.0};
        const auto f = [&](double u) {
            const double ph = phx + u;
            const Vec3 y{p[0] * std::cos(ph), p[1] * std::sin(ph), 0.0};
            const double sp = std::hypot(p[0] * std::sin(ph), p[1] * std::cos(ph));
            return std::exp(-norm2(x - y) * inv4t) * sp;
        };
        std::vector<double> breaks{-kPi, 0.0, kPi};
        for (double k : {1.0, 4.0, 16.0}) {
            const double u = k * width / std::min(p[0], p[1]);
            if (u < kPi) {
                breaks.push_back(u);
                breaks.push_back(-u);
            }
        }
        std::sort(breaks.begin(), breaks.end());
        return integrate_adaptive(f, breaks, opts);
    }

    const double len = domain.parameter_length();
    const Vec3 x = boundary_point(domain, s).point;
    const auto f = [&](double u) {
        const Vec3 y = boundary_point(domain, wrap(s + u, len)).point;
        return std::exp(-norm2(x - y) * inv4t);
    };
    std::vector<double> breaks{-0.5 * len, 0.0, 0.5 * len};
    for (double k : {1.0, 4.0, 16.0}) {
        if (k * width < 0.5 * len) {
            breaks.push_back(k * width);
            breaks.push_back(-k * width);
        }
    }
    for (double c : geometry::corner_parameters(domain)) {
        double u = wrap(c - s, len);
        if (u > 0.5 * len) u -= len;
        if (std::abs(u) > 1e-15 * len && std::abs(u) < 0.5 * len) breaks.push_back(u);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    return integrate_adaptive(f, breaks, opts);
}

MassEstimate estimate_b1(const ConvexDomain& domain, const QuadratureSpec& spec, const MassGrid& grid) {
    spec.validate();
    if (grid.x_samples < 1 || grid.t_count < 2 || !(grid.t_min > 0.0 && grid.t_min < 1.0))
        throw InvalidInput("b1 grid: need x_samples >= 1, t_count >= 2, 0 < t_min < 1");
    const double len = domain.parameter_length();
    std::vector<double> xs;
    for (int i = 0; i < grid.x_samples; ++i) xs.push_back(len * i / grid.x_samples);
    for (double c : geometry::corner_parameters(domain)) xs.push_back(c);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    const auto ts = log_spaced(grid.t_min, 1.0, grid.t_count);

    const std::size_t nt = ts.size();
    std::vector<double> values(xs.size() * nt), errors(xs.size() * nt);
    parallel_for(xs.size(), [&](std::size_t i) {
        for (std::size_t j = 0; j < nt; ++j) {
            const auto r = domain_mass(domain, xs[i], ts[j], spec);
            values[i * nt + j] = r.value;
            errors[i * nt + j] = r.error;
        }
    });

    MassEstimate out;
    out.grid = grid;
    out.t0_value = 0.5;
    out.grid_min = out.t0_value;
    out.argmin_t = 0.0;
    double quad_err = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < nt; ++j) {
            quad_err = std::max(quad_err, errors[i * nt + j]);
            if (values[i * nt + j] < out.grid_min) {
                out.grid_min = values[i * nt + j];
                out.argmin_s = xs[i];
                out.argmin_t = ts[j];
            }
        }
    }

    // Local refinement in s around the grid minimiser.
    double refined = out.grid_min;
    if (out.argmin_t > 0.0 && domain.kind() != DomainKind::ball3d) {
        const double ds = len / grid.x_samples;
        const double t = out.argmin_t;
        const auto neg_f = [&](double s) {
            return -domain_mass(domain, wrap(s, len), t, spec).value;
        };
        const auto [s_best, f_best] = golden_maximize(neg_f, out.argmin_s - ds, out.argmin_s + ds, 50);
        if (-f_best < refined) {
            refined = -f_best;
            out.argmin_s = wrap(s_best, len);
        }
    }
    const double gap = out.grid_min - refined;
    out.error = quad_err + gap;
    out.value = refined - out.error;
    return out;
}

GaussianEstimate estimate_B1(const ConvexDomain& domain, const QuadratureSpec& spec,
                             const GaussianGrid& grid) {
    spec.validate();
    if (grid.x_samples < 1 || grid.tau_count < 2 || !(grid.tau_min > 0.0 && grid.tau_max > grid.tau_min))
        throw InvalidInput("B1 grid: need x_samples >= 1, tau_count >= 2, 0 < tau_min < tau_max");
    GaussianEstimate out;
    out.grid = grid;
    out.tail_limit = small_tau_limit(domain);
    const auto taus = log_spaced(grid.tau_min, grid.tau_max, grid.tau_count);

    if (domain.kind() == DomainKind::ball3d) {
        // closed form 4 pi (1 - exp(-R^2/tau)), increasing towards tau -> 0
        for (double tau : taus) {
            const double v = scaled_gaussian(domain, 0.0, tau, spec);
            if (v > out.grid_sup) {
                out.grid_sup = v;
                out.argmax_tau = tau;
            }
        }
        out.value = std::max(out.grid_sup, out.tail_limit);
        out.error = out.value - out.grid_sup;
        return out;
    }

    const double len = domain.parameter_length();
    std::vector<double> xs;
    for (int i = 0; i < grid.x_samples; ++i) xs.push_back(len * i / grid.x_samples);
    const std::size_t nt = taus.size();
    std::vector<double> values(xs.size() * nt), rel_err(xs.size() * nt);
    parallel_for(xs.size(), [&](std::size_t i) {
        for (std::size_t j = 0; j < nt; ++j) {
            double e = 0.0;
            const double v = scaled_gaussian(domain, xs[i], taus[j], spec, &e);
            values[i * nt + j] = v;
            rel_err[i * nt + j] = e / v;
        }
    });
    double quad_rel = 0.0;
    std::size_t best = 0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        quad_rel = std::max(quad_rel, rel_err[k]);
        if (values[k] > values[best]) best = k;
    }
    out.grid_sup = values[best];
    out.argmax_s = xs[best / nt];
    out.argmax_tau = taus[best % nt];

    // Golden refinement in log tau, then s, then log tau again.
    const double dlog = std::log(taus[1] / taus[0]);
    const double ds = len / grid.x_samples;
    double s_best = out.argmax_s;
    double lt_best = std::log(out.argmax_tau);
    double refined = out.grid_sup;
    for (int pass = 0; pass < 3; ++pass) {
        if (pass % 2 == 0) {
            const auto f = [&](double lt) { return scaled_gaussian(domain, s_best, std::exp(lt), spec); };
            const auto [lt, v] = golden_maximize(f, lt_best - dlog, lt_best + dlog, 40);
            if (v > refined) {
                refined = v;
                lt_best = lt;
            }
        } else {
            const double tau = std::exp(lt_best);
            const auto f = [&](double s) { return scaled_gaussian(domain, wrap(s, len), tau, spec); };
            const auto [sv, v] = golden_maximize(f, s_best - ds, s_best + ds, 40);
            if (v > refined) {
                refined = v;
                s_best = wrap(sv, len);
            }
        }
    }
    out.argmax_s = s_best;
    out.argmax_tau = std::exp(lt_best);
    const double gap_rel = (refined - out.grid_sup) / out.grid_sup;
    out.value = std::max(refined * (1.0 + 2.0 * gap_rel + quad_rel), out.tail_limit);
    out.error = out.value - out.grid_sup;
    return out;
}

KernelConstants estimate_constants(const ConvexDomain& domain, const QuadratureSpec& spec,
                                   const MassGrid& b1_grid, const GaussianGrid& B1_grid) {
    KernelConstants k;
    k.dim = domain.dimension();
    k.spec = spec;
    k.b1_detail = estimate_b1(domain, spec, b1_grid);
    k.B1_detail = estimate_B1(domain, spec, B1_grid);
    k.b1 = k.b1_detail.value;
    k.b1_err = k.b1_detail.error;
    k.B1 = k.B1_detail.value;
    k.B1_err = k.B1_detail.error;
    return k;
}

double holder_constant(double B1, int dim) {
    if (!(B1 > 0.0)) throw DomainError("B1 must be positive");
    return (B1 + 1.0) / std::pow(4.0 * kPi, 0.5 * dim);
}

double n_alpha(int dim, double alpha) {
    if (dim < 2) throw DomainError("dimension must be at least 2");
    if (!(alpha >= 0.0 && alpha < 1.0 / (dim - 1)))
        throw DomainError("alpha must lie in [0, 1/(N-1))");
    return 0.5 * (1.0 - (dim - 1) * alpha);
}

double holder_bound(double t, double gamma1_area, double alpha, double B1, int dim) {
    const double na = n_alpha(dim, alpha);
    if (!(t > 0.0)) throw DomainError("holder_bound: t must be positive");
    if (!(gamma1_area > 0.0)) throw DomainError("holder_bound: |Gamma_1| must be positive");
    return holder_constant(B1, dim) * std::pow(gamma1_area, alpha) * std::pow(t, na) / na;
}

IdentityTerms convex_identity(const ConvexDomain& domain, double s, double t, const QuadratureSpec& spec) {
    if (!(t > 0.0)) throw DomainError("convex_identity: t must be positive");
    spec.validate();
    const int dim = domain.dimension();
    IdentityTerms out;
    out.volume = domain_mass_any_time(domain, s, t, spec).value;

    std::vector<double> abs_terms, signed_terms;
    const auto add = [&](Vec3 x, Vec3 y, Vec3 n, double w) {
        const Vec3 xy = x - y;
        if (dot(xy, n) > 1e-12 * norm(xy))
            throw Error("convex identity: D_y Phi . n > 0 at a boundary node; domain is not convex");
        const double k = double_layer_time_integral(xy, n, t, dim) * w;
        abs_terms.push_back(std::abs(k));
        signed_terms.push_back(k);
    };

    const int n = spec.boundary_nodes;
    switch (domain.kind()) {
        case DomainKind::disk:
        case DomainKind::ellipse: {
            // Trapezoid nodes centred on the target, diagonal omitted.
            const double len = domain.parameter_length();
            const double h = len / n;
            const Vec3 x = boundary_point(domain, s).point;
            for (int j = 1; j < n; ++j) {
                const auto bp = boundary_point(domain, wrap(s + j * h, len));
                add(x, bp.point, bp.normal, h);
            }
            break;
        }
        case DomainKind::rectangle: {
            const Vec3 x = boundary_point(domain, s).point;
            for (const auto& nd : geometry::boundary_quadrature(domain, spec)) {
                if (norm(x - nd.point) > 0.0) add(x, nd.point, nd.normal, nd.weight);
            }
            break;
        }
        case DomainKind::ball3d: {
            // By symmetry put x at the north pole; midpoint rule in the polar angle.
            const double R = domain.shape()[0];
            const Vec3 x{0.0, 0.0, R};
            const double dg = kPi / n;
            for (int j = 0; j < n; ++j) {
                const double g = (j + 0.5) * dg;
                const Vec3 nrm{std::sin(g), 0.0, std::cos(g)};
                add(x, R * nrm, nrm, 2.0 * kPi * R * R * std::sin(g) * dg);
            }
            break;
        }
    }
    out.layer = pairwise_sum(abs_terms);
    out.signed_layer = pairwise_sum(signed_terms);
    out.residual = std::abs(out.volume + out.layer - 0.5);
    out.signed_residual = std::abs(out.volume - out.signed_layer - 0.5);
    out.boundary_nodes = static_cast<int>(abs_terms.size());
    return out;
}

double convex_identity_residual(const ConvexDomain& domain, double s, double t, const QuadratureSpec& spec) {
    return convex_identity(domain, s, t, spec).residual;
}

}  // namespace blowtime::kernel
