#include "blowtime/errors.hpp"
#include "blowtime/heat_kernel.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace blowtime;
using namespace blowtime::kernel;
using geometry::BoundaryPartition;
using geometry::ConvexDomain;
using geometry::QuadratureSpec;

TEST(Phi, ClosedFormValues) {
    EXPECT_NEAR(phi({0, 0, 0}, 0.3, 2), 1.0 / (4 * kPi * 0.3), 1e-15);
    EXPECT_NEAR(phi({0, 0, 0}, 0.3, 3), std::pow(4 * kPi * 0.3, -1.5), 1e-15);
    EXPECT_NEAR(phi({0, 0, 0}, 1.0 / (4 * kPi), 2), 1.0, 1e-14);
    EXPECT_GT(phi({3, 4, 0}, 0.01, 2), 0.0 - 1e-300);
    EXPECT_THROW(phi({0, 0, 0}, 0.0, 2), DomainError);
    EXPECT_THROW(phi({0, 0, 0}, -1.0, 2), DomainError);
}

// Radial Gauss-Legendre over a ball of radius 10 sqrt(t).
TEST(Phi, NormalisationOverTruncatedBall) {
    for (int dim : {2, 3}) {
        for (double t : {0.01, 1.0, 100.0}) {
            const double R = 10.0 * std::sqrt(t);
            const double shell = dim == 2 ? 2 * kPi : 4 * kPi;
            const double mass = integrate_gl(
                [&](double r) { return shell * std::pow(r, dim - 1) * phi({r, 0, 0}, t, dim); }, 0.0, R, 20, 16);
            EXPECT_LE(mass, 1.0 + 1e-12);
            EXPECT_GE(mass, 1.0 - 1e-6) << dim << " " << t;
        }
    }
}

TEST(Phi, NormalDerivativeMatchesFiniteDifference) {
    const Vec3 x{0.3, -0.2, 0}, y{1.0, 0.4, 0}, n{0.6, 0.8, 0};
    const double s = 0.07, h = 1e-6;
    // D_y Phi(x - y) . n
    const double fd = (phi(x - (y + h * n), s, 2) - phi(x - (y - h * n), s, 2)) / (2 * h);
    EXPECT_NEAR(phi_normal_derivative(x - y, n, s, 2), fd, 1e-7 * std::abs(fd) + 1e-12);
}

TEST(Phi, DoubleLayerTimeIntegralMatchesQuadrature) {
    for (int dim : {2, 3}) {
        const Vec3 xy{-0.4, 0.3, dim == 3 ? 0.2 : 0.0}, n{0.0, -1.0, 0.0};
        const double t = 0.6;
        const double breaks[] = {0.0, 0.01, 0.1, t};
        const double num =
            integrate_adaptive([&](double s) { return s > 0 ? phi_normal_derivative(xy, n, s, dim) : 0.0; }, breaks,
                               {1e-15, 1e-13, 4000})
                .value;
        EXPECT_NEAR(double_layer_time_integral(xy, n, t, dim), num, 1e-11) << dim;
    }
}

TEST(DomainMass, UnitDiskMatchesBruteForcePolarOracle) {
    // 10^6 midpoint nodes in polar coordinates about the disk centre.
    const auto d = ConvexDomain::disk(1.0);
    const double t = 0.25;
    const int nr = 1000, nt = 1000;
    double sum = 0.0;
    for (int i = 0; i < nr; ++i) {
        const double r = (i + 0.5) / nr;
        double ring = 0.0;
        for (int j = 0; j < nt; ++j) {
            const double th = 2 * kPi * (j + 0.5) / nt;
            ring += phi(Vec3{1.0 - r * std::cos(th), -r * std::sin(th), 0.0}, t, 2);
        }
        sum += ring * r;
    }
    sum *= (1.0 / nr) * (2 * kPi / nt);
    const auto F = domain_mass(d, 0.0, t, QuadratureSpec{});
    EXPECT_NEAR(F.value, sum, 1e-4);
}

TEST(DomainMass, HalfSpaceSurrogateIsOneHalf) {
    const auto r = ConvexDomain::rectangle(200.0, 100.0);
    for (double t : {1e-3, 0.05, 1.0}) EXPECT_NEAR(domain_mass(r, 100.0, t, QuadratureSpec{}).value, 0.5, 1e-8);
}

TEST(DomainMass, SmallTimeLimitAndRange) {
    const auto e = ConvexDomain::ellipse(2.0, 0.7);
    EXPECT_NEAR(domain_mass(e, 1.0, 1e-7, QuadratureSpec{}).value, 0.5, 1e-3);
    for (const auto& d : {ConvexDomain::disk(1.0), e, ConvexDomain::rectangle(2.0, 1.0), ConvexDomain::ball(1.0)}) {
        for (double s : {0.1, 0.9, 2.2}) {
            for (double t : {1e-3, 0.1, 1.0}) {
                const double v = domain_mass(d, s, t, QuadratureSpec{}).value;
                EXPECT_GT(v, 0.0);
                EXPECT_LE(v, 0.5 + 1e-12) << d.to_string() << " " << s << " " << t;
            }
        }
    }
    EXPECT_THROW(domain_mass(e, 1.0, 1.5, QuadratureSpec{}), DomainError);
    EXPECT_THROW(domain_mass(e, 1.0, 0.0, QuadratureSpec{}), DomainError);
}

TEST(DomainMass, RefinementLimitRaisesQuadratureFailure) {
    QuadratureSpec spec;
    spec.refinement_limit = 4;
    spec.tolerance = 1e-14;
    const auto e = ConvexDomain::ellipse(2.0, 0.7);
    try {
        domain_mass(e, 1.0, 1e-3, spec);
        FAIL() << "expected QuadratureFailure";
    } catch (const QuadratureFailure& f) {
        EXPECT_GT(f.achieved_error(), 1e-14);
    }
    EXPECT_THROW(boundary_gaussian(e, 1.0, 1e-3, spec), QuadratureFailure);
}

TEST(DomainMass, DiskIsRotationInvariant) {
    const auto d = ConvexDomain::disk(1.0);
    const double ref = domain_mass(d, 0.0, 0.4, QuadratureSpec{}).value;
    for (double s : {0.3, 1.1, 2.9, 5.0}) EXPECT_NEAR(domain_mass(d, s, 0.4, QuadratureSpec{}).value, ref, 1e-8);
}

TEST(EstimateB1, DiskWithinRangeAndResolutionStable) {
    const auto d = ConvexDomain::disk(1.0);
    const auto coarse = estimate_b1(d, QuadratureSpec{}, {16, 16, 1e-4});
    const auto fine = estimate_b1(d, QuadratureSpec{}, {48, 64, 1e-4});
    EXPECT_GT(coarse.value, 0.0);
    EXPECT_LE(coarse.value, 0.5);
    EXPECT_EQ(coarse.t0_value, 0.5);
    EXPECT_NEAR(coarse.value, fine.value, 0.01 * fine.value);
    EXPECT_NEAR(fine.value, fine.grid_min, fine.error + 1e-12);
    // the disk minimum sits at t = 1 (F decreases in t)
    EXPECT_NEAR(fine.value, 0.17748236, 1e-6);
}

TEST(EstimateB1, OtherDomainsBelowOneHalf) {
    for (const auto& d : {ConvexDomain::ellipse(2.0, 1.0), ConvexDomain::rectangle(2.0, 1.0), ConvexDomain::ball(1.0)}) {
        const auto b = estimate_b1(d, QuadratureSpec{});
        EXPECT_GT(b.value, 0.0) << d.to_string();
        EXPECT_LE(b.value, 0.5) << d.to_string();
    }
}

TEST(BoundaryGaussian, FlatSegmentSurrogate) {
    // long bottom edge through x: tau^{-1/2} int e^{-s^2/4tau} ds = 2 sqrt(pi)
    const auto r = ConvexDomain::rectangle(200.0, 100.0);
    for (double tau : {1e-4, 1e-2, 1.0}) {
        const double v = boundary_gaussian(r, 100.0, tau, QuadratureSpec{}).value / std::sqrt(tau);
        EXPECT_NEAR(v, 2 * std::sqrt(kPi), 1e-8) << tau;
    }
}

TEST(BoundaryGaussian, LargeTauDecay) {
    const auto d = ConvexDomain::disk(1.0);
    double prev = HUGE_VAL;
    for (double tau : {1e2, 1e4, 1e6}) {
        const double scaled = boundary_gaussian(d, 0.0, tau, QuadratureSpec{}).value / std::sqrt(tau);
        EXPECT_LE(scaled, 2 * kPi / std::sqrt(tau) + 1e-14);
        EXPECT_NEAR(scaled * std::sqrt(tau), 2 * kPi, 2 * kPi * 1.0 / tau);
        EXPECT_LT(scaled, prev);
        prev = scaled;
    }
}

TEST(EstimateBigB1, DiskStableAcrossGridsAndAboveFlatValue) {
    const auto d = ConvexDomain::disk(1.0);
    const auto a = estimate_B1(d, QuadratureSpec{}, {16, 100, 1e-6, 1e3});
    const auto b = estimate_B1(d, QuadratureSpec{}, {48, 400, 1e-6, 1e3});
    EXPECT_NEAR(a.value, b.value, 0.02 * b.value);
    EXPECT_GE(b.value, 2 * std::sqrt(kPi));
    EXPECT_GE(b.value, b.grid_sup);
    EXPECT_NEAR(b.tail_limit, 2 * std::sqrt(kPi), 1e-12);
}

TEST(EstimateBigB1, BallTailIsFourPi) {
    const auto b = estimate_B1(ConvexDomain::ball(1.0), QuadratureSpec{});
    EXPECT_NEAR(b.tail_limit, 4 * kPi, 1e-12);
    EXPECT_GE(b.value, 4 * kPi);
}

TEST(Constants, ErrorBarsOverlapAcrossResolutions) {
    const auto d = ConvexDomain::disk(1.0);
    const auto lo = estimate_constants(d, QuadratureSpec{}, {16, 16, 1e-4}, {16, 100, 1e-6, 1e3});
    const auto hi = estimate_constants(d, QuadratureSpec{}.doubled(), {32, 48, 1e-4}, {32, 200, 1e-6, 1e3});
    EXPECT_LE(std::abs(lo.b1 - hi.b1), lo.b1_err + hi.b1_err + 1e-12);
    EXPECT_LE(std::abs(lo.B1 - hi.B1), lo.B1_err + hi.B1_err + 1e-12);
}

TEST(Holder, ClosedFormPieces) {
    const double B1 = 4.2, t = 0.3, area = 1.7;
    const double C = holder_constant(B1, 2);
    EXPECT_NEAR(C, (B1 + 1) / (4 * kPi), 1e-15);
    EXPECT_NEAR(holder_bound(t, area, 0.0, B1, 2), 2 * C * std::sqrt(t), 1e-15);
    EXPECT_NEAR(n_alpha(3, 0.25), 0.25, 1e-15);
    EXPECT_NEAR(n_alpha(2, 0.0), 0.5, 1e-15);
    EXPECT_THROW(n_alpha(2, 1.0), DomainError);
    EXPECT_THROW(n_alpha(3, 0.5), DomainError);
    EXPECT_THROW(n_alpha(2, -0.1), DomainError);
}

// int_0^t Phi(x - y, tau) dtau = E1(d^2 / 4t) / (4 pi) in 2-D; the arc
// integral is done by adaptive quadrature in the angle with a break at x.
double holder_lhs_oracle(double t, double arc) {
    auto f = [&](double th) {
        const double d2 = 2.0 - 2.0 * std::cos(th);
        if (d2 == 0.0) return 0.0;
        return std::expint(-d2 / (4 * t)) * -1.0 / (4 * kPi);
    };
    const double breaks[] = {-arc / 2, 0.0, arc / 2};
    return integrate_adaptive(f, breaks, {1e-13, 1e-9, 20000}).value;
}

TEST(Holder, BruteForceLhsBelowBoundOnDisk) {
    const auto d = ConvexDomain::disk(1.0);
    const auto k = estimate_constants(d, QuadratureSpec{});
    struct Case {
        double t, area, alpha;
    };
    for (const auto& c : {Case{0.01, 0.1, 0.5}, Case{0.1, 1.0, 0.0}, Case{0.5, 3.0, 0.9}, Case{1.0, 2 * kPi, 0.3},
                          Case{0.05, 0.01, 0.99}}) {
        const double lhs = holder_lhs_oracle(c.t, c.area);
        const double rhs = holder_bound(c.t, c.area, c.alpha, k.B1, 2);
        EXPECT_GT(lhs, 0.0);
        EXPECT_LT(lhs, rhs) << c.t << " " << c.area << " " << c.alpha;
    }
}

TEST(ConvexIdentity, UnitDiskDefaultSpec) {
    const auto d = ConvexDomain::disk(1.0);
    const auto terms = convex_identity(d, 0.0, 0.5, QuadratureSpec{});
    EXPECT_LT(terms.residual, 1e-3);
    // on the disk the signed and unsigned identities coincide
    EXPECT_NEAR(terms.signed_layer, -terms.layer, 1e-15);
    EXPECT_LT(terms.signed_residual, 1e-3);
}

TEST(ConvexIdentity, SmallTimeLimit) {
    const auto terms = convex_identity(ConvexDomain::disk(1.0), 0.0, 1e-6, QuadratureSpec{});
    EXPECT_NEAR(terms.volume, 0.5, 1e-3);
    EXPECT_LT(terms.layer, 1e-3);
}

TEST(ConvexIdentity, ResidualShrinksUnderRefinement) {
    const auto d = ConvexDomain::disk(1.0);
    QuadratureSpec spec;
    double prev = HUGE_VAL;
    for (int level = 0; level < 3; ++level) {
        const double r = convex_identity_residual(d, 0.0, 0.5, spec);
        EXPECT_LT(r, prev);
        prev = r;
        spec = spec.doubled();
    }
}

TEST(ConvexIdentity, HoldsOnEveryCatalogDomain) {
    for (const auto& d : {ConvexDomain::ellipse(2.0, 0.7), ConvexDomain::rectangle(2.0, 1.0), ConvexDomain::ball(1.0)}) {
        for (double t : {0.05, 0.5, 1.0}) {
            const double s = d.parameter_length() * 0.3;
            EXPECT_LT(convex_identity_residual(d, s, t, QuadratureSpec{}), 5e-3) << d.to_string() << " t=" << t;
        }
    }
}

TEST(ConvexIdentity, NormalDerivativeIsNonPositiveOnConvexBoundary) {
    const auto d = ConvexDomain::ellipse(2.0, 0.7);
    for (double sx : {0.0, 1.0, 3.3}) {
        const Vec3 x = geometry::boundary_point(d, sx).point;
        for (const auto& node : geometry::boundary_quadrature(d, QuadratureSpec{})) {
            EXPECT_LE(phi_normal_derivative(x - node.point, node.normal, 0.1, 2), 1e-300);
        }
    }
}
