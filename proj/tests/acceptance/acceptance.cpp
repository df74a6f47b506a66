// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "blowtime/bounds.hpp"
#include "blowtime/errors.hpp"
#include "blowtime/heat_kernel.hpp"
#include "blowtime/simulator.hpp"
#include "blowtime/study.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace blowtime;
using geometry::BoundaryPartition;
using geometry::ConvexDomain;
using geometry::QuadratureSpec;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Records the first failure; later checks still run so the detail is useful.
struct Checker {
    Outcome out;
    void require(bool ok, const std::string& what) {
        if (!ok && out.pass) {
            out.pass = false;
            out.detail = what;
        }
    }
};

const kernel::KernelConstants& disk_constants() {
    static const auto k = kernel::estimate_constants(ConvexDomain::disk(1.0), {});
    return k;
}

bounds::BoundsInput disk_input(double q, double M0, double area, double alpha) {
    bounds::BoundsInput in;
    in.q = q;
    in.M0 = M0;
    in.gamma1_area = area;
    in.alpha = alpha;
    in.dim = 2;
    in.b1 = disk_constants().b1;
    in.B1 = disk_constants().B1;
    return in;
}

Outcome convex_identity() {
    Checker c;
    const auto d = ConvexDomain::disk(1.0);
    const double s_values[] = {0.0, 0.7, 1.9, 2.8, 4.1, 5.5};
    const double t_values[] = {0.05, 0.1, 0.2, 0.5, 0.75, 1.0};
    double worst = 0.0, lo = HUGE_VAL, hi = 0.0;
    for (int i = 0; i < 6; ++i) {
        const double r0 = kernel::convex_identity_residual(d, s_values[i], t_values[i], QuadratureSpec{});
        const double r1 = kernel::convex_identity_residual(d, s_values[i], t_values[i], QuadratureSpec{}.doubled());
        const double ratio = r1 / r0;
        worst = std::max(worst, r0);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        c.require(r0 < 1e-3, fmt::format("residual {:.3e} at t = {}", r0, t_values[i]));
        c.require(ratio >= 0.4 && ratio <= 0.6, fmt::format("refinement ratio {:.3f} at t = {}", ratio, t_values[i]));
    }
    if (c.out.pass) c.out.detail = fmt::format("max residual {:.3e}, refinement ratio in [{:.3f}, {:.3f}]", worst, lo, hi);
    return c.out;
}

Outcome b1_disk() {
    Checker c;
    const auto d = ConvexDomain::disk(1.0);
    const auto a = kernel::estimate_b1(d, QuadratureSpec{}, {32, 32, 1e-4});
    const auto b = kernel::estimate_b1(d, QuadratureSpec{}.doubled(), {64, 64, 1e-4});
    c.require(a.value > 0.0 && a.value <= 0.5, fmt::format("b1 = {} outside (0, 1/2]", a.value));
    c.require(b.value > 0.0 && b.value <= 0.5, fmt::format("b1 = {} outside (0, 1/2]", b.value));
    c.require(a.t0_value == 0.5 && b.t0_value == 0.5, "t -> 0 value not pinned at 1/2");
    // also check the pinned value against F at a tiny time
    const double f_small = kernel::domain_mass(d, 0.0, 1e-8, QuadratureSpec{}).value;
    c.require(std::abs(f_small - 0.5) < 1e-3, fmt::format("F(x, 1e-8) = {}", f_small));
    const double gap = std::abs(a.value - b.value);
    c.require(gap <= a.error + b.error + 1e-15,
              fmt::format("resolutions disagree: {} vs {} (bars {:.2e}, {:.2e})", a.value, b.value, a.error, b.error));
    if (c.out.pass)
        c.out.detail = fmt::format("b1 = {:.10f} / {:.10f}, gap {:.1e} within bars {:.1e}", a.value, b.value, gap,
                                   a.error + b.error);
    return c.out;
}

// int_0^t int_{Gamma_1} Phi(x - y, tau) dS dtau for x = (1, 0) and the arc of
// length `arc` centred on x, by nested adaptive quadrature in (theta, tau).
double holder_lhs(double t, double arc) {
    const AdaptiveOptions inner_opt{1e-15, 1e-11, 4000};
    auto inner = [&](double th) {
        const double d2 = 2.0 - 2.0 * std::cos(th);
        if (d2 == 0.0) return 0.0;
        auto f = [&](double tau) { return tau > 0.0 ? std::exp(-d2 / (4 * tau)) / (4 * kPi * tau) : 0.0; };
        std::vector<double> br{0.0};
        for (double b : {d2 / 40.0, d2 / 4.0})
            if (b < t) br.push_back(b);
        br.push_back(t);
        return integrate_adaptive(f, br, inner_opt).value;
    };
    const double br[] = {-arc / 2, 0.0, arc / 2};
    return integrate_adaptive(inner, br, {1e-13, 1e-9, 4000}).value;
}

Outcome holder() {
    Checker c;
    struct Case {
        double t, area, alpha;
    };
    const Case cases[] = {{0.01, 0.1, 0.5}, {0.1, 1.0, 0.0}, {0.5, 3.0, 0.9}, {1.0, 2 * kPi, 0.3}, {0.05, 0.01, 0.99}};
    double margin = HUGE_VAL;
    for (const auto& k : cases) {
        const double lhs = holder_lhs(k.t, k.area);
        const double rhs = kernel::holder_bound(k.t, k.area, k.alpha, disk_constants().B1, 2);
        margin = std::min(margin, rhs - lhs);
        c.require(lhs > 0.0 && lhs < rhs,
                  fmt::format("t={} |G1|={} alpha={}: {} !< {}", k.t, k.area, k.alpha, lhs, rhs));
    }
    c.require(margin > 0.0, "no margin");
    if (c.out.pass) c.out.detail = fmt::format("5 samples, smallest margin {:.3e}", margin);
    return c.out;
}

Outcome lambda_roots() {
    Checker c;
    std::mt19937_64 rng(20240501);
    std::uniform_real_distribution<double> uq(1.001, 20.0), uf(0.0, 1.0);
    double worst = 0.0;
    int no_root = 0;
    for (int i = 0; i < 1000; ++i) {
        const double q = uq(rng);
        const double eq = bounds::e_q(q);
        const double y = std::max(1e-300, uf(rng)) * eq;
        const double lam = bounds::solve_lambda(q, y);
        const double r = std::abs(bounds::g_lambda(q, lam) - y) / std::max(1.0, y);
        worst = std::max(worst, r);
        c.require(r <= 1e-14, fmt::format("residual {:.2e} at q={} y={}", r, q, y));
        c.require(lam > 1.0 && lam <= q / (q - 1.0) * (1 + 1e-15), "lambda outside its bracket");
        try {
            bounds::solve_lambda(q, eq * (1.0 + 1e-9 + uf(rng)));
        } catch (const NoRootError&) {
            ++no_root;
        }
    }
    c.require(no_root == 1000, fmt::format("no-root error raised {} / 1000 times", no_root));
    std::uniform_real_distribution<double> us(1.001, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const double q = us(rng);
        const double eq = bounds::e_q(q);
        c.require(1.0 / (3 * q) < eq && eq < std::min(1.0 / q, 1.0 / ((q - 1.0) * std::exp(1.0))),
                  fmt::format("sandwich fails at q = {}", q));
    }
    if (c.out.pass) c.out.detail = fmt::format("worst root residual {:.1e}, 1000 no-root, 1000 sandwich", worst);
    return c.out;
}

Outcome sequences() {
    Checker c;
    int checked = 0, bounded = 0;
    for (double qm1 : log_spaced(0.05, 4.0, 10)) {
        const double q = 1.0 + qm1;
        const double eq = bounds::e_q(q);
        for (double M0 : log_spaced(0.25, 4.0, 10)) {
            for (double x0 : log_spaced(1e-3, 0.5, 10)) {
                const double d1 = x0 / std::pow(M0, q - 1.0);
                const auto tr = bounds::build_sequence(q, M0, d1);
                ++checked;
                c.require(static_cast<std::int64_t>(tr.entries.size()) == tr.L + 1, "trace length");
                for (std::size_t k = 1; k < tr.entries.size(); ++k) {
                    const auto& p = tr.entries[k - 1];
                    const auto& e = tr.entries[k];
                    c.require(e.M > p.M, "M_k not increasing");
                    c.require(e.lambda > 1.0 && e.lambda <= q / (q - 1.0) * (1 + 1e-15), "lambda bracket");
                    c.require(std::abs(e.M - e.lambda * p.M) <= 1e-12 * e.M, "M_k = lambda_k M_{k-1}");
                    c.require(std::abs(bounds::g_lambda(q, e.lambda) - p.x) <= 1e-12 * std::max(1.0, p.x),
                              "g(lambda_k) = M_{k-1}^{q-1} delta1");
                    c.require(p.x <= eq, "continued past E_q");
                }
                c.require(tr.x_last > eq, "stopped before E_q");
                const double lb = bounds::step_count_lower_bound(q, M0, d1);
                if (lb > 0.0) {
                    ++bounded;
                    c.require(static_cast<double>(tr.L) > lb, fmt::format("L = {} <= {} at q={} M0={}", tr.L, lb, q, M0));
                }
            }
        }
    }
    const auto w = bounds::build_sequence(2.0, 1.0, 0.01);
    const double wb = bounds::step_count_lower_bound(2.0, 1.0, 0.01);
    c.require(w.L >= 9 && std::abs(wb - 8.2) < 1e-12, fmt::format("worked instance L = {}, bound {}", w.L, wb));
    if (c.out.pass)
        c.out.detail = fmt::format("{} traces, {} with a positive step bound; worked instance L = {} > {}", checked,
                                   bounded, w.L, wb);
    return c.out;
}

Outcome affine_power() {
    Checker c;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ua(-2.0, 1.0), ub(0.05, 0.9);
    // t_opt >= 1e-21 for these ranges; a log grid reaches it
    const auto grid = log_spaced(1e-30, 1.0, 100000);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double A = std::pow(10.0, ua(rng)), beta = ub(rng);
        const auto m = bounds::maximize_affine_power(A, beta);
        double best = -HUGE_VAL;
        for (double t : grid) best = std::max(best, A * std::pow(t, beta) - t);
        const double rel = std::abs(m.f_max - best) / std::abs(m.f_max);
        worst = std::max(worst, rel);
        c.require(rel <= 1e-6, fmt::format("A={} beta={}: {} vs grid {}", A, beta, m.f_max, best));
        c.require(m.f_max >= best * (1 - 1e-12), "grid beats the analytic maximiser");
    }
    if (c.out.pass) c.out.detail = fmt::format("100 draws, worst relative gap {:.1e}", worst);
    return c.out;
}

Outcome lower_bound_pipeline() {
    Checker c;
    int n = 0;
    double worst_a0 = 0.0, min_ratio = HUGE_VAL;
    for (double q : {1.05, 1.5, 2.0, 3.0, 5.0}) {
        for (double M0 : {0.01, 0.3, 1.0, 4.0}) {
            for (double area : {0.05, 1.0, 2 * kPi}) {
                for (double alpha : {0.0, 0.3, 0.6, 0.95}) {
                    const auto in = disk_input(q, M0, area, alpha);
                    const double closed = bounds::lower_bound_closed(in);
                    const auto cons = bounds::lower_bound_constructive(in);
                    ++n;
                    min_ratio = std::min(min_ratio, cons.value / closed);
                    c.require(cons.value >= closed - 1e-12,
                              fmt::format("constructive {} < closed {} (q={} M0={} |G1|={} a={})", cons.value, closed,
                                          q, M0, area, alpha));
                    if (alpha == 0.0) {
                        const double a0 = bounds::lower_bound_closed_alpha0(in);
                        const double rel = std::abs(closed - a0) / a0;
                        worst_a0 = std::max(worst_a0, rel);
                        c.require(rel <= 1e-12, fmt::format("alpha = 0 form off by {:.1e}", rel));
                    }
                }
            }
        }
    }
    if (c.out.pass)
        c.out.detail = fmt::format("{} instances, min constructive/closed {:.3f}, alpha=0 match {:.1e}", n, min_ratio,
                                   worst_a0);
    return c.out;
}

Outcome simulation_sandwich() {
    Checker c;
    const double qs[] = {1.5, 2.0, 3.0};
    struct Job {
        double q;
        int n1, n2;
        std::optional<double> t_star;
        std::string status;
    };
    std::vector<Job> jobs;
    for (double q : qs)
        for (int n : {64, 128}) jobs.push_back({q, n, n / 2, std::nullopt, ""});
    parallel_for(jobs.size(), [&](std::size_t i) {
        sim::SimConfig cfg;
        cfg.domain = ConvexDomain::disk(1.0);
        cfg.gamma1 = BoundaryPartition::full(cfg.domain);
        cfg.q = jobs[i].q;
        cfg.initial = sim::InitialData::constant(1.0);
        cfg.n1 = jobs[i].n1;
        cfg.n2 = jobs[i].n2;
        cfg.estimate_error = false;
        const auto est = sim::run_to_blowup(cfg);
        jobs[i].t_star = est.t_star;
        jobs[i].status = est.status;
    });
    std::string summary;
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& coarse = jobs[2 * k];
        const auto& fine = jobs[2 * k + 1];
        const double q = coarse.q;
        if (!coarse.t_star || !fine.t_star) {
            c.require(false, fmt::format("q = {}: no blow-up ({}, {})", q, coarse.status, fine.status));
            continue;
        }
        const double ts = *fine.t_star;
        const double lower = bounds::lower_bound_closed(disk_input(q, 1.0, 2 * kPi, 0.0));
        const double upper = bounds::upper_bound(q, 2 * kPi, kPi);
        const double agree = std::abs(*fine.t_star - *coarse.t_star) / ts;
        c.require(lower <= ts * 1.05, fmt::format("q = {}: lower {} > T* {}", q, lower, ts));
        c.require(ts <= upper * 1.05, fmt::format("q = {}: T* {} > upper {}", q, ts, upper));
        c.require(*coarse.t_star <= upper * 1.05 && lower <= *coarse.t_star * 1.05, "coarse run outside the bounds");
        c.require(agree <= 0.02, fmt::format("q = {}: mesh pair differs by {:.2f}%", q, 100 * agree));
        summary += fmt::format("{}q={} T*={:.4f} [{:.2e}, {:.3f}] pair {:.2f}%", summary.empty() ? "" : "; ", q, ts,
                               lower, upper, 100 * agree);
    }
    if (c.out.pass) c.out.detail = summary;
    return c.out;
}

Outcome scaling() {
    Checker c;
    auto spec_for = [](study::Axis axis, std::vector<double> values) {
        study::SweepSpec s;
        s.axis = axis;
        s.values = std::move(values);
        s.base = disk_input(2.0, 1.0, 2 * kPi, 0.0);
        return s;
    };
    std::string summary;
    auto check = [&](const std::string& name, const study::SweepSpec& spec, const char* x, const char* regime,
                     double expect) {
        const auto table = study::run_sweep(spec);
        for (const auto& r : table.rows) c.require(r.status == "ok", name + ": " + r.status);
        const auto fits = study::fit_slope_by_regime(table, x, "closed");
        const auto it = std::find_if(fits.begin(), fits.end(), [&](const auto& f) { return f.regime == regime; });
        if (it == fits.end()) {
            c.require(false, name + ": no " + regime + " rows to fit");
            return;
        }
        c.require(std::abs(it->slope - expect) <= 1e-3,
                  fmt::format("{}: slope {:.6f}, expected {:.6f}", name, it->slope, expect));
        summary += fmt::format("{}{} {:.6f}", summary.empty() ? "" : ", ", name, it->slope);
    };

    std::vector<double> areas;
    for (int j = 0; j <= 5; ++j) areas.push_back(2 * kPi * std::pow(2.0, -j));
    auto g = spec_for(study::Axis::gamma1, areas);
    g.base.alpha = 0.9;
    g.base.M0 = 0.05;  // min-clause inactive across the sweep
    check("|G1|", g, "gamma1", "inactive", -0.9);

    std::vector<double> qv;
    for (double v : log_spaced(1e-6, 1e-4, 6)) qv.push_back(1.0 + v);
    auto q = spec_for(study::Axis::q, qv);
    q.base.M0 = 0.1;
    check("q-1", q, "q_minus_1", "inactive", -1.0);

    auto small = spec_for(study::Axis::m0, log_spaced(1e-6, 1e-2, 6));
    small.base.q = 2.5;
    check("M0->0", small, "m0", "inactive", -1.5);

    auto large = spec_for(study::Axis::m0, log_spaced(1e2, 1e6, 6));
    large.base.q = 2.5;
    check("M0->inf", large, "m0", "active", -3.0);

    if (c.out.pass) c.out.detail = summary;
    return c.out;
}

Outcome representation() {
    Checker c;
    auto recorded = [](std::optional<BoundaryPartition> g1, int n1, int n2, double T, double t) {
        sim::SimConfig cfg;
        cfg.domain = ConvexDomain::disk(1.0);
        cfg.gamma1 = std::move(g1);
        cfg.q = 2.0;
        cfg.n1 = n1;
        cfg.n2 = n2;
        cfg.snapshot_times = {T};
        cfg.record_boundary = true;
        cfg.horizon = T + t;
        cfg.estimate_error = false;
        sim::Simulator s(cfg);
        s.run();
        return s;
    };
    const auto flat = recorded(std::nullopt, 64, 32, 0.05, 0.05);
    double worst_flat = 0.0;
    for (double s : {0.0, 1.5, 4.0})
        for (double t : {0.01, 0.05}) {
            const auto r = sim::representation_residual(flat.record(), s, 0.05, t);
            worst_flat = std::max(worst_flat, r.residual);
        }
    c.require(worst_flat < 1e-3, fmt::format("u = 1 residual {:.2e}", worst_flat));

    const auto d = ConvexDomain::disk(1.0);
    const auto coarse = recorded(BoundaryPartition::full(d), 64, 32, 0.05, 0.01);
    const auto fine = recorded(BoundaryPartition::full(d), 128, 64, 0.05, 0.01);
    const auto a = sim::representation_residual(coarse.record(), 0.0, 0.05, 0.01);
    const auto b = sim::representation_residual(fine.record(), 0.0, 0.05, 0.01, QuadratureSpec{}.doubled());
    c.require(a.relative < 0.05, fmt::format("canonical relative residual {:.3e}", a.relative));
    c.require(b.residual < a.residual, fmt::format("no decrease under refinement: {:.2e} -> {:.2e}", a.residual,
                                                   b.residual));
    if (c.out.pass)
        c.out.detail = fmt::format("u = 1: {:.1e}; canonical {:.2e} -> {:.2e} (relative {:.2e})", worst_flat,
                                   a.residual, b.residual, a.relative);
    return c.out;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {"convex identity on the unit disk", 30, convex_identity},
        {"b1 for the disk", 60, b1_disk},
        {"Hoelder bound against brute force", 60, holder},
        {"lambda roots and E_q", 5, lambda_roots},
        {"sequence construction and step bound", 10, sequences},
        {"affine-power maximiser", 5, affine_power},
        {"closed and constructive lower bounds", 10, lower_bound_pipeline},
        {"bound sandwich with simulation", 600, simulation_sandwich},
        {"scaling slopes", 30, scaling},
        {"representation formula residual", 300, representation},
    };
    int failures = 0;
    int index = 0;
    for (const auto& cr : criteria) {
        ++index;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = cr.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > cr.budget_s) {
            o.detail += fmt::format(" (over the {:.0f} s budget)", cr.budget_s);
            o.pass = false;
        }
        if (!o.pass) ++failures;
        fmt::print("{} {:2d}. {} [{:.1f} s]: {}\n", o.pass ? "PASS" : "FAIL", index, cr.name, secs, o.detail);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", index - failures, index);
    return failures == 0 ? 0 : 1;
}
