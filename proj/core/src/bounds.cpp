#include "blowtime/bounds.hpp"

#include "blowtime/heat_kernel.hpp"
#include "blowtime/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace blowtime::bounds {

namespace {

void check_q(double q) {
    if (!(q > 1.0) || !std::isfinite(q)) throw DomainError("q must be greater than 1");
}

// g as a function of mu = lambda - 1; keeps full precision for lambda near 1.
double g_mu(double q, double mu) { return mu * std::exp(-q * std::log1p(mu)); }

// Root of g(mu) = y for 0 < y <= eq = E_q, q > 1 already checked.
double solve_mu_unchecked(double q, double y, double eq) {
    double lo = 0.0;
    double hi = 1.0 / (q - 1.0);
    // g is flat at its maximum, so bisection would only get within sqrt(eps)
    if (y == eq) return hi;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (q * y < 0.25) {
        // mu = y (1 + mu)^q contracts by about q y here and climbs to the
        // root from below. Long sequences with small M^{q-1} delta1 spend
        // nearly all their steps on this path.
        double mu = y;
        for (int it = 0; it < 200; ++it) {
            const double next = y * std::exp(q * std::log1p(mu));
            if (!(next > mu)) break;
            mu = next;
        }
        const double a = mu * (1.0 - 4.0 * eps), b = mu * (1.0 + 4.0 * eps);
        // the root is pinned to within 4 ulps of mu: nothing left to bisect
        if (b < hi && g_mu(q, a) <= y && g_mu(q, b) >= y) return mu;
    }
    // g(mu) <= mu, so the root is at least y; when g(2y) >= y it is at most 2y.
    if (y < hi) {
        lo = y;
        if (2.0 * y < hi && g_mu(q, 2.0 * y) >= y) hi = 2.0 * y;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (g_mu(q, mid) < y)
            lo = mid;
        else
            hi = mid;
    }
    return std::abs(g_mu(q, lo) - y) < std::abs(g_mu(q, hi) - y) ? lo : hi;
}

double solve_mu(double q, double y) {
    check_q(q);
    if (!(y > 0.0)) throw DomainError("solve_lambda: y must be positive");
    const double eq = e_q(q);
    if (y > eq)
        throw NoRootError("solve_lambda: y = " + std::to_string(y) + " exceeds E_q = " +
                          std::to_string(eq) + "; no lambda > 1 solves g(lambda) = y");
    return solve_mu_unchecked(q, y, eq);
}

double pow_qm1(double q, double M) { return std::exp((q - 1.0) * std::log(M)); }

}  // namespace

double e_q(double q) {
    check_q(q);
    return std::exp((q - 1.0) * std::log(q - 1.0) - q * std::log(q));
}

double g_lambda(double q, double lambda) {
    check_q(q);
    return (lambda - 1.0) / std::pow(lambda, q);
}

double solve_lambda(double q, double y) { return 1.0 + solve_mu(q, y); }

SequenceTrace build_sequence(double q, double M0, double delta1, std::int64_t cap, bool record) {
    check_q(q);
    if (!(M0 > 0.0)) throw DomainError("build_sequence: M0 must be positive");
    if (!(delta1 > 0.0)) throw DomainError("build_sequence: delta1 must be positive");
    if (cap < 1) throw DomainError("build_sequence: cap must be at least 1");

    const double eq = e_q(q);
    SequenceTrace tr;
    tr.q = q;
    tr.M0 = M0;
    tr.delta1 = delta1;
    tr.recorded = record;

    // log M avoids overflow when q - 1 is tiny and the chain is long
    double log_m = std::log(M0);
    double x = std::exp((q - 1.0) * log_m) * delta1;
    double x_prev = 0.0;
    std::int64_t k = 0;
    if (record) tr.entries.push_back({0, M0, 1.0, x});
    while (x <= eq) {
        if (k >= cap) {
            tr.L = k;
            tr.M_last = std::exp(log_m);
            tr.x_last = x;
            tr.x_before_last = x_prev;
            throw CapExceeded("build_sequence: cap of " + std::to_string(cap) +
                                  " steps reached before termination",
                              std::move(tr));
        }
        const double mu = solve_mu_unchecked(q, x, eq);
        log_m += std::log1p(mu);
        x_prev = x;
        x = std::exp((q - 1.0) * log_m) * delta1;
        ++k;
        if (record) tr.entries.push_back({k, std::exp(log_m), 1.0 + mu, x});
    }
    tr.L = k;
    tr.M_last = std::exp(log_m);
    tr.x_last = x;
    tr.x_before_last = x_prev;
    return tr;
}

double step_count_lower_bound(double q, double M0, double delta1) {
    check_q(q);
    if (!(M0 > 0.0) || !(delta1 > 0.0)) throw DomainError("step bound: M0 and delta1 must be positive");
    const double v = (1.0 / (10.0 * (q - 1.0))) * (1.0 / (pow_qm1(q, M0) * delta1) - 9.0 * q);
    return std::max(0.0, v);
}

double step_count_upper_bound(double q, double M0, double delta1) {
    check_q(q);
    if (!(M0 > 0.0) || !(delta1 > 0.0)) throw DomainError("step bound: M0 and delta1 must be positive");
    return 1.0 / ((q - 1.0) * pow_qm1(q, M0) * delta1);
}

AffineMax maximize_affine_power(double A, double beta) {
    if (!(A > 0.0)) throw DomainError("maximize_affine_power: A must be positive");
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("maximize_affine_power: beta must lie in (0, 1)");
    const double t = std::pow(std::min(1.0, beta * A), 1.0 / (1.0 - beta));
    return {t, A * std::pow(t, beta) - t};
}

void BoundsInput::validate() const {
    check_q(q);
    if (!(M0 > 0.0) || !std::isfinite(M0)) throw DomainError("M0 must be positive");
    if (!(gamma1_area > 0.0)) throw DomainError("|Gamma_1| must be positive");
    if (dim != 2 && dim != 3) throw DomainError("dimension must be 2 or 3");
    kernel::n_alpha(dim, alpha);
    if (!(b1 > 0.0 && b1 <= 0.5)) throw DomainError("b1 must lie in (0, 1/2]");
    if (!(B1 > 0.0)) throw DomainError("B1 must be positive");
}

DerivedConstants derive_constants(const BoundsInput& in) {
    in.validate();
    DerivedConstants d;
    d.b1 = in.b1;
    d.B1 = in.B1;
    d.C = kernel::holder_constant(in.B1, in.dim);
    d.N_alpha = kernel::n_alpha(in.dim, in.alpha);
    d.C1 = in.b1 / (9.0 * d.C);
    const double na = d.N_alpha;
    d.C2 = (9.0 * d.C1 * na * na / 10.0) * std::pow(std::min(1.0, d.C1 * na / 2.0), 1.0 / na - 1.0);
    d.E_q = e_q(in.q);
    return d;
}

double delta1(double t_star, const BoundsInput& in) {
    if (!(t_star > 0.0 && t_star <= 1.0)) throw DomainError("delta1: t* must lie in (0, 1]");
    in.validate();
    const double C = kernel::holder_constant(in.B1, in.dim);
    const double na = kernel::n_alpha(in.dim, in.alpha);
    return C * std::pow(in.gamma1_area, in.alpha) * std::pow(t_star, na) / (in.b1 * na);
}

double min_clause_argument(const BoundsInput& in) {
    return 1.0 / (in.q * pow_qm1(in.q, in.M0) * std::pow(in.gamma1_area, in.alpha));
}

double lower_bound_closed(const BoundsInput& in) {
    const auto d = derive_constants(in);
    const double scale = pow_qm1(in.q, in.M0) * std::pow(in.gamma1_area, in.alpha);
    return d.C2 / ((in.q - 1.0) * scale) *
           std::pow(std::min(1.0, min_clause_argument(in)), 1.0 / d.N_alpha - 1.0);
}

double lower_bound_closed_alpha0(const BoundsInput& in) {
    in.validate();
    const double C = kernel::holder_constant(in.B1, in.dim);
    const double C1 = in.b1 / (9.0 * C);
    const double C3 = (9.0 * C1 / 40.0) * std::min(1.0, C1 / 4.0);
    const double m = pow_qm1(in.q, in.M0);
    return C3 / ((in.q - 1.0) * m) * std::min(1.0, 1.0 / (in.q * m));
}

double analytic_t_opt(const BoundsInput& in) {
    const auto d = derive_constants(in);
    const double A = in.b1 * d.N_alpha /
                     (9.0 * in.q * d.C * std::pow(in.gamma1_area, in.alpha) * pow_qm1(in.q, in.M0));
    return maximize_affine_power(A, 1.0 - d.N_alpha).t_opt;
}

std::vector<double> default_t_grid() { return log_spaced(1e-8, 1.0, 200); }

ConstructiveResult lower_bound_constructive(const BoundsInput& in, std::vector<double> t_grid,
                                            std::int64_t cap) {
    const auto dc = derive_constants(in);
    if (t_grid.empty()) t_grid = default_t_grid();
    for (double t : t_grid)
        if (!(t > 0.0 && t <= 1.0)) throw DomainError("t* grid must lie in (0, 1]");
    const double t_opt = analytic_t_opt(in);
    std::sort(t_grid.begin(), t_grid.end(), std::greater<>());
    t_grid.erase(std::unique(t_grid.begin(), t_grid.end()), t_grid.end());

    std::vector<double> order{t_opt};
    for (double t : t_grid)
        if (t != t_opt) order.push_back(t);

    const double m = pow_qm1(in.q, in.M0);
    ConstructiveResult best;
    bool first = true;
    for (double t : order) {
        const double d1 = delta1(t, in);
        const double x0 = m * d1;
        const bool is_opt = first;
        first = false;
        if (x0 > dc.E_q) continue;  // L = 0
        const double l_max = 1.0 + step_count_upper_bound(in.q, in.M0, d1);
        // L_max t* increases with t*, and the grid is descending.
        if (!is_opt && l_max * t <= best.value) break;

        std::int64_t L = 0;
        bool from_bound = false;
        SequenceTrace tr;
        if (l_max <= static_cast<double>(cap)) {
            try {
                tr = build_sequence(in.q, in.M0, d1, cap, false);
                L = tr.L;
            } catch (const CapExceeded&) {
                from_bound = true;
            }
        } else {
            from_bound = true;
        }
        if (from_bound) {
            // L > step bound and L is an integer
            const double lb = step_count_lower_bound(in.q, in.M0, d1);
            L = static_cast<std::int64_t>(std::min(std::floor(lb) + 1.0, 9.0e18));
        }
        ++best.evaluated;
        const double value = static_cast<double>(L) * t;
        if (value > best.value) {
            best.value = value;
            best.t_star = t;
            best.L = L;
            best.from_step_bound = from_bound;
            best.trace = std::move(tr);
        }
    }

    if (best.t_star > 0.0) {
        const double d1 = delta1(best.t_star, in);
        if (best.from_step_bound) {
            best.trace.q = in.q;
            best.trace.M0 = in.M0;
            best.trace.delta1 = d1;
            best.trace.L = best.L;
            best.trace.recorded = false;
        } else if (best.L <= 100'000) {
            best.trace = build_sequence(in.q, in.M0, d1, cap, true);
        }
        best.trace.t_star = best.t_star;
    }
    return best;
}

double upper_bound(double q, double gamma1_area, double u0_integral) {
    check_q(q);
    if (!(gamma1_area > 0.0)) throw DomainError("upper_bound: |Gamma_1| must be positive");
    if (!(u0_integral > 0.0) || !std::isfinite(u0_integral))
        throw DomainError("upper_bound: int u0^{1-q} must be positive and finite");
    return u0_integral / ((q - 1.0) * gamma1_area);
}

LogBound lower_bound_log(double q, double M0, double gamma1_area, int dim, double C_free) {
    check_q(q);
    if (!(M0 > 0.0) || !(gamma1_area > 0.0)) throw DomainError("lower_bound_log: M0 and |Gamma_1| must be positive");
    if (!(C_free > 0.0)) throw DomainError("lower_bound_log: the free constant must be positive");
    LogBound out;
    out.C_free = C_free;
    out.bracket = -std::log(gamma1_area) - (dim + 2) * (q - 1.0) * std::log(M0) - std::log(q - 1.0) -
                  std::log(C_free);
    out.applicable = out.bracket > 0.0;
    if (out.applicable) {
        const double e = 2.0 / (dim + 2);
        out.value = std::pow(C_free, -e) * std::pow(out.bracket, e);
    }
    return out;
}

BoundsReport compute_bounds(const BoundsInput& in, std::optional<double> u0_integral, double C_free,
                            std::int64_t cap) {
    BoundsReport r;
    r.input = in;
    r.constants_used = derive_constants(in);
    r.lower_new_closed = lower_bound_closed(in);
    const auto c = lower_bound_constructive(in, {}, cap);
    r.lower_new_constructive = c.value;
    r.constructive_t_star = c.t_star;
    r.constructive_L = c.L;
    r.constructive_from_step_bound = c.from_step_bound;
    r.lower_log = lower_bound_log(in.q, in.M0, in.gamma1_area, in.dim, C_free);
    r.u0_integral = u0_integral;
    if (u0_integral) r.upper = upper_bound(in.q, in.gamma1_area, *u0_integral);
    return r;
}

}  // namespace blowtime::bounds
