#include "blowtime/errors.hpp"
#include "blowtime/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace blowtime;
using namespace blowtime::geometry;

namespace {

void expect_vec(Vec3 a, Vec3 b, double tol = 1e-14) {
    EXPECT_NEAR(a.x, b.x, tol);
    EXPECT_NEAR(a.y, b.y, tol);
    EXPECT_NEAR(a.z, b.z, tol);
}

double weight_sum(const std::vector<VolumeNode>& nodes) {
    double s = 0.0;
    for (const auto& n : nodes) s += n.weight;
    return s;
}

double weight_sum(const std::vector<SurfaceNode>& nodes) {
    double s = 0.0;
    for (const auto& n : nodes) s += n.weight;
    return s;
}

}  // namespace

TEST(BoundaryPoint, UnitDiskExamples) {
    const auto d = ConvexDomain::disk(1.0);
    auto p = boundary_point(d, 0.0);
    expect_vec(p.point, {1, 0, 0});
    expect_vec(p.normal, {1, 0, 0});
    p = boundary_point(d, kPi);
    expect_vec(p.point, {-1, 0, 0});
    expect_vec(p.normal, {-1, 0, 0});
}

TEST(BoundaryPoint, RectangleBottomMidpoint) {
    const auto r = ConvexDomain::rectangle(2.0, 1.0);
    const auto p = boundary_point(r, 1.0);
    expect_vec(p.point, {1, 0, 0});
    expect_vec(p.normal, {0, -1, 0});
    // right edge, then top edge running right to left
    expect_vec(boundary_point(r, 2.5).normal, {1, 0, 0});
    expect_vec(boundary_point(r, 4.0).point, {1, 1, 0});
    expect_vec(boundary_point(r, 5.5).normal, {-1, 0, 0});
}

TEST(BoundaryPoint, OutOfRangeIsRangeError) {
    const auto d = ConvexDomain::disk(1.0);
    EXPECT_THROW(boundary_point(d, -0.1), RangeError);
    EXPECT_THROW(boundary_point(d, 2 * kPi + 0.1), RangeError);
    EXPECT_THROW(boundary_point(ConvexDomain::ball(1.0), 4.0), RangeError);
}

TEST(BoundaryPoint, BallMeridian) {
    const auto b = ConvexDomain::ball(2.0);
    auto p = boundary_point(b, 0.0);
    expect_vec(p.point, {0, 0, 2});
    expect_vec(p.normal, {0, 0, 1});
    p = boundary_point(b, kPi);  // quarter of the meridian: equator
    expect_vec(p.point, {2, 0, 0}, 1e-14);
}

TEST(BoundaryPoint, NormalsOutwardAndUnitEverywhere) {
    for (const auto& d : {ConvexDomain::disk(1.3), ConvexDomain::ellipse(2.0, 0.7), ConvexDomain::rectangle(2.0, 1.0),
                          ConvexDomain::ball(1.0)}) {
        const int n = 97;
        for (int i = 0; i <= n; ++i) {
            const double s = d.parameter_length() * (i + 0.5) / (n + 1);
            const auto p = boundary_point(d, s);
            EXPECT_NEAR(norm(p.normal), 1.0, 1e-13);
            EXPECT_GT(dot(p.normal, p.point - d.center()), 0.0) << d.to_string() << " s=" << s;
        }
        for (const auto& node : boundary_quadrature(d, QuadratureSpec{}))
            EXPECT_GT(dot(node.normal, node.point - d.center()), 0.0);
    }
}

TEST(Ellipse, ArcLengthParameterMatchesChordsAndPerimeterOracle) {
    const double a = 2.0, b = 0.7;
    const auto e = ConvexDomain::ellipse(a, b);
    // perimeter oracle: trapezoid on the periodic speed, spectrally accurate
    const int m = 20000;
    double per = 0.0;
    for (int i = 0; i < m; ++i) {
        const double t = 2 * kPi * i / m;
        per += std::sqrt(a * a * std::sin(t) * std::sin(t) + b * b * std::cos(t) * std::cos(t));
    }
    per *= 2 * kPi / m;
    EXPECT_NEAR(e.boundary_measure(), per, 1e-10);
    // short chords have length close to the parameter step
    const double ds = 1e-4;
    for (double s : {0.0, 0.5, 1.7, 3.0, 4.4}) {
        const auto p = boundary_point(e, s).point;
        const auto q = boundary_point(e, s + ds).point;
        EXPECT_NEAR(norm(q - p), ds, 1e-8 * ds + 1e-11);
        EXPECT_NEAR(p.x * p.x / (a * a) + p.y * p.y / (b * b), 1.0, 1e-12);
    }
}

TEST(Gamma1Measure, Examples) {
    const auto d = ConvexDomain::disk(1.0);
    EXPECT_NEAR(gamma1_measure(d, BoundaryPartition::full(d)), 2 * kPi, 1e-14);
    EXPECT_NEAR(gamma1_measure(d, BoundaryPartition::arcs(d, {{0.0, 0.1}})), 0.1, 1e-14);
    const auto r = ConvexDomain::rectangle(2.0, 1.0);
    EXPECT_NEAR(gamma1_measure(r, parse_partition("arcs:0-2", r)), 2.0, 1e-14);
}

TEST(Gamma1Measure, DiskArcsMatchClosedFormAndAreAdditive) {
    const double R = 1.7;
    const auto d = ConvexDomain::disk(R);
    const double th1 = 0.4, th2 = 1.3, th3 = 2.0, th4 = 3.9;
    const auto a = BoundaryPartition::arcs(d, {{R * th1, R * th2}});
    const auto b = BoundaryPartition::arcs(d, {{R * th3, R * th4}});
    const auto ab = BoundaryPartition::arcs(d, {{R * th3, R * th4}, {R * th1, R * th2}});
    EXPECT_NEAR(gamma1_measure(d, a), R * (th2 - th1), 1e-12 * R);
    EXPECT_NEAR(gamma1_measure(d, ab), gamma1_measure(d, a) + gamma1_measure(d, b), 1e-12 * gamma1_measure(d, ab));
}

TEST(Gamma1Measure, EmptyIsInvalid) {
    const auto d = ConvexDomain::disk(1.0);
    EXPECT_THROW(BoundaryPartition::arcs(d, {}), InvalidInput);
    EXPECT_THROW(BoundaryPartition::arcs(d, {{0.5, 0.5}}), InvalidInput);
}

TEST(Gamma1Measure, BallBandsAreSphericalZones) {
    const auto b = ConvexDomain::ball(1.0);
    // polar cap s in [0, pi/3): area 2 pi R^2 (1 - cos(pi/3)) = pi
    EXPECT_NEAR(gamma1_measure(b, BoundaryPartition::arcs(b, {{0.0, kPi / 3}})), kPi, 1e-12);
    EXPECT_NEAR(gamma1_measure(b, BoundaryPartition::full(b)), 4 * kPi, 1e-12);
}

TEST(Partition, HalfOpenIntervalsAndInterfaces) {
    const auto d = ConvexDomain::disk(1.0);
    const auto p = parse_partition("arcs:1-2", d);
    EXPECT_TRUE(p.contains(1.0));
    EXPECT_FALSE(p.contains(2.0));
    EXPECT_FALSE(p.interior_contains(1.0));
    EXPECT_TRUE(p.interior_contains(1.5));
    EXPECT_NEAR(p.distance_to_interface(1.2), 0.2, 1e-14);
    EXPECT_NEAR(p.distance_to_interface(0.1), 0.9, 1e-14);
    EXPECT_TRUE(std::isinf(BoundaryPartition::full(d).distance_to_interface(0.3)));
    // a single arc covering the whole circle counts as the full boundary
    EXPECT_TRUE(BoundaryPartition::arcs(d, {{0.0, 2 * kPi}}).is_full());
}

TEST(Partition, RejectsOverlapsAndBadText) {
    const auto d = ConvexDomain::disk(1.0);
    EXPECT_THROW(parse_partition("arcs:0-1,0.5-2", d), InvalidInput);
    EXPECT_THROW(parse_partition("arcs:2-1", d), InvalidInput);
    EXPECT_THROW(parse_partition("arcs:0-7", d), InvalidInput);
    EXPECT_THROW(parse_partition("bogus", d), InvalidInput);
    EXPECT_NO_THROW(parse_partition("arcs:1e-3-2.5e-1", d));
}

TEST(ParseDomain, Grammar) {
    EXPECT_EQ(parse_domain("disk:1.5").to_string(), "disk:1.5");
    EXPECT_EQ(parse_domain("ellipse:2,1").kind(), DomainKind::ellipse);
    EXPECT_TRUE(parse_domain("rect:2,1").has_corners());
    EXPECT_FALSE(parse_domain("disk:1").has_corners());
    EXPECT_EQ(parse_domain("ball:1").dimension(), 3);
    EXPECT_THROW(parse_domain("disk:-1"), InvalidInput);
    EXPECT_THROW(parse_domain("disk:1,2"), InvalidInput);
    EXPECT_THROW(parse_domain("square:1"), InvalidInput);
    EXPECT_THROW(parse_domain("disk:"), InvalidInput);
}

TEST(Quadrature, WeightSumsReproduceMeasures) {
    const QuadratureSpec spec;
    const auto d = ConvexDomain::disk(1.0);
    EXPECT_NEAR(weight_sum(volume_quadrature(d, spec)), kPi, 1e-10 * kPi);
    EXPECT_NEAR(weight_sum(boundary_quadrature(d, spec)), 2 * kPi, 1e-10 * 2 * kPi);
    const auto b = ConvexDomain::ball(1.0);
    EXPECT_NEAR(weight_sum(volume_quadrature(b, spec)), 4 * kPi / 3, 1e-10 * 4 * kPi / 3);
    EXPECT_NEAR(weight_sum(boundary_quadrature(b, spec)), 4 * kPi, 1e-10 * 4 * kPi);
    const auto e = ConvexDomain::ellipse(2.0, 0.7);
    EXPECT_NEAR(weight_sum(volume_quadrature(e, spec)), kPi * 1.4, 1e-10 * kPi * 1.4);
    EXPECT_NEAR(weight_sum(boundary_quadrature(e, spec)), e.boundary_measure(), 1e-10 * e.boundary_measure());
    const auto r = ConvexDomain::rectangle(2.0, 1.0);
    EXPECT_NEAR(weight_sum(volume_quadrature(r, spec)), 2.0, 1e-12);
    EXPECT_NEAR(weight_sum(boundary_quadrature(r, spec)), 6.0, 1e-12);
    for (const auto& n : volume_quadrature(e, spec)) EXPECT_GT(n.weight, 0.0);
}

TEST(Quadrature, PartitionNodesStayInsideGamma1) {
    const auto r = ConvexDomain::rectangle(2.0, 1.0);
    const auto part = parse_partition("arcs:1.5-3.5", r);
    const auto nodes = boundary_quadrature(r, part, QuadratureSpec{});
    for (const auto& n : nodes) EXPECT_TRUE(part.contains(n.s));
    EXPECT_NEAR(weight_sum(nodes), 2.0, 1e-12);
    // no node sits on the corner at s = 2
    for (const auto& n : nodes) EXPECT_GT(std::abs(n.s - 2.0), 0.0);
}

TEST(Quadrature, RefinementDoesNotIncreaseError) {
    // Loose tolerance so the base counts are used as given.
    for (const auto& d : {ConvexDomain::disk(1.0), ConvexDomain::ellipse(2.0, 0.7), ConvexDomain::ball(1.0)}) {
        QuadratureSpec spec;
        spec.boundary_nodes = 8;
        spec.volume_nodes = 4;
        spec.tolerance = 1e-2;
        double prev_v = HUGE_VAL, prev_b = HUGE_VAL;
        for (int level = 0; level < 3; ++level) {
            const double ev = std::abs(weight_sum(volume_quadrature(d, spec)) - d.volume());
            const double eb = std::abs(weight_sum(boundary_quadrature(d, spec)) - d.boundary_measure());
            EXPECT_LE(ev, prev_v + 1e-13) << d.to_string() << " level " << level;
            EXPECT_LE(eb, prev_b + 1e-13) << d.to_string() << " level " << level;
            prev_v = ev;
            prev_b = eb;
            spec = spec.doubled();
        }
    }
}

TEST(Quadrature, CatalogRulesAreExactAtCoarseCounts) {
    QuadratureSpec spec;
    spec.boundary_nodes = 4;
    spec.volume_nodes = 4;
    spec.refinement_limit = 4;
    spec.tolerance = 1e-13;
    for (const auto& d : {ConvexDomain::disk(1.0), ConvexDomain::ellipse(2.0, 0.7), ConvexDomain::rectangle(2.0, 1.0),
                          ConvexDomain::ball(1.0)}) {
        EXPECT_NO_THROW(volume_quadrature(d, spec)) << d.to_string();
        EXPECT_NO_THROW(boundary_quadrature(d, spec)) << d.to_string();
    }
}

TEST(QuadratureSpec, Validation) {
    QuadratureSpec s;
    EXPECT_NO_THROW(s.validate());
    s.boundary_nodes = 3;
    EXPECT_THROW(s.validate(), InvalidInput);
    s = {};
    s.tolerance = 0.5;
    EXPECT_THROW(s.validate(), InvalidInput);
    s = {};
    EXPECT_EQ(s.doubled().boundary_nodes, 2 * s.boundary_nodes);
}

TEST(Geometry, CurvatureAndChords) {
    EXPECT_NEAR(curvature(ConvexDomain::disk(2.0), 1.0), 0.5, 1e-14);
    EXPECT_NEAR(curvature(ConvexDomain::rectangle(2.0, 1.0), 1.0), 0.0, 1e-14);
    EXPECT_NEAR(chord_length(ConvexDomain::disk(1.0), {1, 0, 0}, {-1, 0, 0}), 2.0, 1e-12);
    EXPECT_NEAR(chord_length(ConvexDomain::rectangle(2.0, 1.0), {1, 0, 0}, {0, 1, 0}), 1.0, 1e-12);
    const auto corners = corner_parameters(ConvexDomain::rectangle(2.0, 1.0));
    ASSERT_EQ(corners.size(), 4u);
    EXPECT_NEAR(corners[1], 2.0, 1e-14);
}
