#pragma once

#include "blowtime/numeric.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace blowtime::geometry {

enum class DomainKind { disk, ellipse, rectangle, ball3d };

struct BoundaryPoint {
    Vec3 point;
    Vec3 normal;  // unit exterior normal
};

class EllipseArc;

// A convex domain from a fixed catalog. Disk, ellipse and ball are centred
// at the origin; the rectangle is [0, w] x [0, h].
//
// Boundary points are addressed by a scalar arc parameter s:
//   disk, ellipse, rectangle  arc length from the point of largest x on the
//                             positive x axis (rectangle: from the corner
//                             (0, 0) along the bottom edge), counter-clockwise;
//   ball3d                    arc length along the meridian in the xz-plane,
//                             measured from the north pole, s in [0, pi R].
class ConvexDomain {
public:
    static ConvexDomain disk(double radius);
    static ConvexDomain ellipse(double semi_a, double semi_b);
    static ConvexDomain rectangle(double width, double height);
    static ConvexDomain ball(double radius);

    DomainKind kind() const { return kind_; }
    int dimension() const { return kind_ == DomainKind::ball3d ? 3 : 2; }
    bool has_corners() const { return kind_ == DomainKind::rectangle; }
    Vec3 center() const;
    const std::vector<double>& shape() const { return shape_; }

    double volume() const;            // |Omega|
    double boundary_measure() const;  // |dOmega|
    double parameter_length() const;  // range of the arc parameter
    bool periodic_parameter() const { return kind_ != DomainKind::ball3d; }
    double diameter() const;

    std::string to_string() const;

    const EllipseArc* ellipse_arc() const { return arc_.get(); }

private:
    ConvexDomain(DomainKind kind, std::vector<double> shape);

    DomainKind kind_;
    std::vector<double> shape_;
    std::shared_ptr<const EllipseArc> arc_;
};

// Grammar: disk:R | ellipse:a,b | rect:w,h | ball:R
ConvexDomain parse_domain(std::string_view text);

struct ArcInterval {
    double begin = 0.0;  // inclusive
    double end = 0.0;    // exclusive
};

// Gamma_1 as a union of disjoint half-open arc-parameter intervals; the
// complement is Gamma_2. For ball3d the intervals select polar bands.
class BoundaryPartition {
public:
    static BoundaryPartition full(const ConvexDomain& domain);
    static BoundaryPartition arcs(const ConvexDomain& domain, std::vector<ArcInterval> intervals);

    const std::vector<ArcInterval>& intervals() const { return intervals_; }
    bool is_full() const { return full_; }

    // Membership in the half-open intervals.
    bool contains(double s) const;
    // Membership in the open interior; interface points belong to Gamma_2.
    bool interior_contains(double s) const;
    // Arc-parameter distance from s to the nearest interface point
    // (+infinity when Gamma_1 is the whole boundary).
    double distance_to_interface(double s) const;

    std::string to_string() const;

private:
    BoundaryPartition(std::vector<ArcInterval> intervals, double period, bool periodic, bool full);

    std::vector<ArcInterval> intervals_;
    double period_;
    bool periodic_;
    bool full_;
};

// Grammar: full | arcs:s0-s1[,s2-s3...]
BoundaryPartition parse_partition(std::string_view text, const ConvexDomain& domain);

struct QuadratureSpec {
    int boundary_nodes = 1024;
    int volume_nodes = 64;
    int time_nodes = 32;
    int refinement_limit = 4096;
    double tolerance = 1e-10;

    void validate() const;
    QuadratureSpec doubled() const;
};

BoundaryPoint boundary_point(const ConvexDomain& domain, double s);

// Signed curvature of the boundary at s (positive for convex arcs, zero on
// flat rectangle edges). Only meaningful for 2-D domains.
double curvature(const ConvexDomain& domain, double s);

// Periodic (or, for ball3d, plain) distance between two arc parameters.
double parameter_distance(const ConvexDomain& domain, double s1, double s2);

// Arc parameters of the rectangle corners; empty for smooth domains.
std::vector<double> corner_parameters(const ConvexDomain& domain);

double gamma1_measure(const ConvexDomain& domain, const BoundaryPartition& part);

// Largest r >= 0 with from + r * direction in the closed domain (direction
// need not be normalised; r is in units of |direction|).
double chord_length(const ConvexDomain& domain, Vec3 from, Vec3 direction);

struct VolumeNode {
    Vec3 point;
    double weight = 0.0;
};

struct SurfaceNode {
    Vec3 point;
    double weight = 0.0;
    Vec3 normal;
    double s = 0.0;  // arc parameter (polar arc for ball3d)
};

std::vector<VolumeNode> volume_quadrature(const ConvexDomain& domain, const QuadratureSpec& spec);
std::vector<SurfaceNode> boundary_quadrature(const ConvexDomain& domain, const QuadratureSpec& spec);
std::vector<SurfaceNode> boundary_quadrature(const ConvexDomain& domain,
                                             const BoundaryPartition& part,
                                             const QuadratureSpec& spec);

// Arc-length parametrisation of an ellipse, tabulated once per domain.
class EllipseArc {
public:
    EllipseArc(double semi_a, double semi_b);

    double perimeter() const { return cumulative_.back(); }
    double arc_from_angle(double phi) const;
    double angle_from_arc(double s) const;

private:
    double speed(double phi) const;

    double a_;
    double b_;
    double panel_;
    std::vector<double> cumulative_;
};

}  // namespace blowtime::geometry
