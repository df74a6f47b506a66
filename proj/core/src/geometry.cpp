#include "blowtime/geometry.hpp"

#include "blowtime/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

namespace blowtime::geometry {

namespace {

std::string fmt_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_number(std::string_view text, std::string_view what) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw InvalidInput("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw InvalidInput(std::string(name) + " must be positive and finite");
}

constexpr int kArcPanels = 2048;
constexpr int kArcOrder = 10;

}  // namespace

// ---------------------------------------------------------------- EllipseArc

EllipseArc::EllipseArc(double semi_a, double semi_b)
    : a_(semi_a), b_(semi_b), panel_(2.0 * kPi / kArcPanels), cumulative_(kArcPanels + 1, 0.0) {
    const auto f = [this](double phi) { return speed(phi); };
    for (int k = 0; k < kArcPanels; ++k) {
        cumulative_[k + 1] =
            cumulative_[k] + integrate_gl(f, k * panel_, (k + 1) * panel_, kArcOrder);
    }
}

double EllipseArc::speed(double phi) const {
    const double sp = std::sin(phi);
    const double cp = std::cos(phi);
    return std::sqrt(a_ * a_ * sp * sp + b_ * b_ * cp * cp);
}

double EllipseArc::arc_from_angle(double phi) const {
    const int k = std::clamp(static_cast<int>(phi / panel_), 0, kArcPanels - 1);
    return cumulative_[k] +
           integrate_gl([this](double p) { return speed(p); }, k * panel_, phi, kArcOrder);
}

double EllipseArc::angle_from_arc(double s) const {
    if (s <= 0.0) return 0.0;
    if (s >= perimeter()) return 2.0 * kPi;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    const int k = std::clamp(static_cast<int>(it - cumulative_.begin()) - 1, 0, kArcPanels - 1);
    double phi = k * panel_ + panel_ * (s - cumulative_[k]) / (cumulative_[k + 1] - cumulative_[k]);
    for (int it2 = 0; it2 < 6; ++it2) {
        const double step = (arc_from_angle(phi) - s) / speed(phi);
        phi -= step;
        if (std::abs(step) < 1e-15) break;
    }
    return phi;
}

// -------------------------------------------------------------- ConvexDomain

ConvexDomain::ConvexDomain(DomainKind kind, std::vector<double> shape)
    : kind_(kind), shape_(std::move(shape)) {
    for (double v : shape_) require_positive(v, "shape parameter");
    if (kind_ == DomainKind::ellipse) arc_ = std::make_shared<const EllipseArc>(shape_[0], shape_[1]);
}

ConvexDomain ConvexDomain::disk(double radius) { return {DomainKind::disk, {radius}}; }
ConvexDomain ConvexDomain::ellipse(double a, double b) { return {DomainKind::ellipse, {a, b}}; }
ConvexDomain ConvexDomain::rectangle(double w, double h) { return {DomainKind::rectangle, {w, h}}; }
ConvexDomain ConvexDomain::ball(double radius) { return {DomainKind::ball3d, {radius}}; }

Vec3 ConvexDomain::center() const {
    if (kind_ == DomainKind::rectangle) return {0.5 * shape_[0], 0.5 * shape_[1], 0.0};
    return {};
}

double ConvexDomain::volume() const {
    switch (kind_) {
        case DomainKind::disk: return kPi * shape_[0] * shape_[0];
        case DomainKind::ellipse: return kPi * shape_[0] * shape_[1];
        case DomainKind::rectangle: return shape_[0] * shape_[1];
        case DomainKind::ball3d: return 4.0 * kPi * std::pow(shape_[0], 3) / 3.0;
    }
    return 0.0;
}

double ConvexDomain::boundary_measure() const {
    switch (kind_) {
        case DomainKind::disk: return 2.0 * kPi * shape_[0];
        case DomainKind::ellipse: return arc_->perimeter();
        case DomainKind::rectangle: return 2.0 * (shape_[0] + shape_[1]);
        case DomainKind::ball3d: return 4.0 * kPi * shape_[0] * shape_[0];
    }
    return 0.0;
}

double ConvexDomain::parameter_length() const {
    if (kind_ == DomainKind::ball3d) return kPi * shape_[0];
    return boundary_measure();
}

double ConvexDomain::diameter() const {
    switch (kind_) {
        case DomainKind::disk:
        case DomainKind::ball3d: return 2.0 * shape_[0];
        case DomainKind::ellipse: return 2.0 * std::max(shape_[0], shape_[1]);
        case DomainKind::rectangle: return std::hypot(shape_[0], shape_[1]);
    }
    return 0.0;
}

std::string ConvexDomain::to_string() const {
    switch (kind_) {
        case DomainKind::disk: return "disk:" + fmt_number(shape_[0]);
        case DomainKind::ellipse: return "ellipse:" + fmt_number(shape_[0]) + "," + fmt_number(shape_[1]);
        case DomainKind::rectangle: return "rect:" + fmt_number(shape_[0]) + "," + fmt_number(shape_[1]);
        case DomainKind::ball3d: return "ball:" + fmt_number(shape_[0]);
    }
    return {};
}

ConvexDomain parse_domain(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw InvalidInput("domain must look like disk:R, ellipse:a,b, rect:w,h or ball:R");
    const auto kind = text.substr(0, colon);
    const auto args = split(text.substr(colon + 1), ',');
    auto expect = [&](std::size_t n) {
        if (args.size() != n)
            throw InvalidInput("domain '" + std::string(kind) + "' takes " + std::to_string(n) +
                               " parameter(s)");
    };
    if (kind == "disk") {
        expect(1);
        return ConvexDomain::disk(parse_number(args[0], "radius"));
    }
    if (kind == "ellipse") {
        expect(2);
        return ConvexDomain::ellipse(parse_number(args[0], "semi-axis"), parse_number(args[1], "semi-axis"));
    }
    if (kind == "rect") {
        expect(2);
        return ConvexDomain::rectangle(parse_number(args[0], "width"), parse_number(args[1], "height"));
    }
    if (kind == "ball") {
        expect(1);
        return ConvexDomain::ball(parse_number(args[0], "radius"));
    }
    throw InvalidInput("unknown domain kind '" + std::string(kind) + "'");
}

// --------------------------------------------------------- BoundaryPartition

BoundaryPartition::BoundaryPartition(std::vector<ArcInterval> intervals, double period,
                                     bool periodic, bool full)
    : intervals_(std::move(intervals)), period_(period), periodic_(periodic), full_(full) {}

BoundaryPartition BoundaryPartition::full(const ConvexDomain& domain) {
    const double len = domain.parameter_length();
    return {{{0.0, len}}, len, domain.periodic_parameter(), true};
}

BoundaryPartition BoundaryPartition::arcs(const ConvexDomain& domain,
                                          std::vector<ArcInterval> intervals) {
    if (intervals.empty()) throw InvalidInput("Gamma_1 must contain at least one interval");
    const double len = domain.parameter_length();
    std::sort(intervals.begin(), intervals.end(),
              [](const ArcInterval& a, const ArcInterval& b) { return a.begin < b.begin; });
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto& iv = intervals[i];
        if (!std::isfinite(iv.begin) || !std::isfinite(iv.end) || !(iv.begin < iv.end))
            throw InvalidInput("arc interval must satisfy s0 < s1");
        if (iv.begin < 0.0 || iv.end > len * (1.0 + 1e-14))
            throw InvalidInput("arc interval [" + fmt_number(iv.begin) + ", " + fmt_number(iv.end) +
                               ") leaves the parameter range [0, " + fmt_number(len) + "]");
        if (i > 0 && iv.begin < intervals[i - 1].end)
            throw InvalidInput("arc intervals overlap");
    }
    const bool whole = intervals.size() == 1 && intervals[0].begin == 0.0 &&
                       intervals[0].end >= len * (1.0 - 1e-14);
    if (whole) intervals[0].end = len;
    return {std::move(intervals), len, domain.periodic_parameter(), whole};
}

bool BoundaryPartition::contains(double s) const {
    if (periodic_) {
        s = std::fmod(s, period_);
        if (s < 0.0) s += period_;
    }
    if (full_) return true;
    return std::any_of(intervals_.begin(), intervals_.end(),
                       [s](const ArcInterval& iv) { return s >= iv.begin && s < iv.end; });
}

bool BoundaryPartition::interior_contains(double s) const {
    if (full_) return true;
    if (periodic_) {
        s = std::fmod(s, period_);
        if (s < 0.0) s += period_;
    }
    return std::any_of(intervals_.begin(), intervals_.end(),
                       [s](const ArcInterval& iv) { return s > iv.begin && s < iv.end; });
}

double BoundaryPartition::distance_to_interface(double s) const {
    double best = std::numeric_limits<double>::infinity();
    if (full_) return best;
    for (const auto& iv : intervals_) {
        for (double e : {iv.begin, iv.end}) {
            double d;
            if (periodic_) {
                d = std::fmod(std::abs(s - e), period_);
                d = std::min(d, period_ - d);
            } else {
                // the poles of the ball are not interface points
                if (e <= 0.0 || e >= period_) continue;
                d = std::abs(s - e);
            }
            best = std::min(best, d);
        }
    }
    return best;
}

std::string BoundaryPartition::to_string() const {
    if (full_) return "full";
    std::string out = "arcs:";
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        if (i) out += ',';
        out += fmt_number(intervals_[i].begin) + "-" + fmt_number(intervals_[i].end);
    }
    return out;
}

BoundaryPartition parse_partition(std::string_view text, const ConvexDomain& domain) {
    if (text == "full") return BoundaryPartition::full(domain);
    if (text.substr(0, 5) != "arcs:")
        throw InvalidInput("partition must be 'full' or 'arcs:s0-s1[,s2-s3...]'");
    std::vector<ArcInterval> intervals;
    for (auto piece : split(text.substr(5), ',')) {
        // the separating dash is the first '-' that is not an exponent sign
        std::size_t dash = std::string_view::npos;
        for (std::size_t i = 1; i < piece.size(); ++i) {
            if (piece[i] == '-' && piece[i - 1] != 'e' && piece[i - 1] != 'E') {
                dash = i;
                break;
            }
        }
        if (dash == std::string_view::npos)
            throw InvalidInput("arc '" + std::string(piece) + "' must look like s0-s1");
        intervals.push_back({parse_number(piece.substr(0, dash), "arc start"),
                             parse_number(piece.substr(dash + 1), "arc end")});
    }
    return BoundaryPartition::arcs(domain, std::move(intervals));
}

// ----------------------------------------------------------- QuadratureSpec

void QuadratureSpec::validate() const {
    if (boundary_nodes < 4 || volume_nodes < 4 || time_nodes < 4 || refinement_limit < 4)
        throw InvalidInput("quadrature node counts must be at least 4");
    if (!(tolerance > 0.0 && tolerance <= 1e-2))
        throw InvalidInput("quadrature tolerance must lie in (0, 1e-2]");
}

QuadratureSpec QuadratureSpec::doubled() const {
    QuadratureSpec out = *this;
    out.boundary_nodes *= 2;
    out.volume_nodes *= 2;
    out.time_nodes *= 2;
    out.refinement_limit = std::max(refinement_limit, 2 * out.volume_nodes);
    return out;
}

// -------------------------------------------------------------- boundary

BoundaryPoint boundary_point(const ConvexDomain& domain, double s) {
    const double len = domain.parameter_length();
    if (!(s >= 0.0 && s <= len))
        throw RangeError("arc parameter " + fmt_number(s) + " outside [0, " + fmt_number(len) + "]");
    const auto& p = domain.shape();
    switch (domain.kind()) {
        case DomainKind::disk: {
            const double th = s / p[0];
            const Vec3 n{std::cos(th), std::sin(th), 0.0};
            return {p[0] * n, n};
        }
        case DomainKind::ellipse: {
            const double phi = domain.ellipse_arc()->angle_from_arc(s);
            const Vec3 pt{p[0] * std::cos(phi), p[1] * std::sin(phi), 0.0};
            const Vec3 g{pt.x / (p[0] * p[0]), pt.y / (p[1] * p[1]), 0.0};
            return {pt, (1.0 / norm(g)) * g};
        }
        case DomainKind::rectangle: {
            const double w = p[0], h = p[1];
            if (s < w) return {{s, 0.0, 0.0}, {0.0, -1.0, 0.0}};
            if (s < w + h) return {{w, s - w, 0.0}, {1.0, 0.0, 0.0}};
            if (s < 2.0 * w + h) return {{w - (s - w - h), h, 0.0}, {0.0, 1.0, 0.0}};
            const double y = std::max(0.0, h - (s - 2.0 * w - h));
            return {{0.0, y, 0.0}, {-1.0, 0.0, 0.0}};
        }
        case DomainKind::ball3d: {
            const double th = s / p[0];
            const Vec3 n{std::sin(th), 0.0, std::cos(th)};
            return {p[0] * n, n};
        }
    }
    return {};
}

double curvature(const ConvexDomain& domain, double s) {
    const auto& p = domain.shape();
    switch (domain.kind()) {
        case DomainKind::disk: return 1.0 / p[0];
        case DomainKind::ball3d: return 1.0 / p[0];
        case DomainKind::rectangle: return 0.0;
        case DomainKind::ellipse: {
            const double phi = domain.ellipse_arc()->angle_from_arc(s);
            const double sp = std::sin(phi), cp = std::cos(phi);
            return p[0] * p[1] / std::pow(p[0] * p[0] * sp * sp + p[1] * p[1] * cp * cp, 1.5);
        }
    }
    return 0.0;
}

double parameter_distance(const ConvexDomain& domain, double s1, double s2) {
    double d = std::abs(s1 - s2);
    if (domain.periodic_parameter()) {
        const double len = domain.parameter_length();
        d = std::fmod(d, len);
        d = std::min(d, len - d);
    }
    return d;
}

std::vector<double> corner_parameters(const ConvexDomain& domain) {
    if (domain.kind() != DomainKind::rectangle) return {};
    const double w = domain.shape()[0], h = domain.shape()[1];
    return {0.0, w, w + h, 2.0 * w + h};
}

double gamma1_measure(const ConvexDomain& domain, const BoundaryPartition& part) {
    if (part.intervals().empty()) throw InvalidInput("Gamma_1 is empty");
    if (part.is_full()) return domain.boundary_measure();
    std::vector<double> pieces;
    for (const auto& iv : part.intervals()) {
        if (domain.kind() == DomainKind::ball3d) {
            const double r = domain.shape()[0];
            pieces.push_back(2.0 * kPi * r * r * (std::cos(iv.begin / r) - std::cos(iv.end / r)));
        } else {
            pieces.push_back(iv.end - iv.begin);
        }
    }
    const double total = pairwise_sum(pieces);
    if (!(total > 0.0)) throw InvalidInput("Gamma_1 has zero measure");
    return total;
}

double chord_length(const ConvexDomain& domain, Vec3 from, Vec3 dir) {
    const auto& p = domain.shape();
    auto quadric = [](Vec3 x, Vec3 d) {
        // largest root of |x + r d|^2 = 1
        const double a = norm2(d);
        const double b = dot(x, d);
        const double c = norm2(x) - 1.0;
        const double disc = std::max(0.0, b * b - a * c);
        const double sq = std::sqrt(disc);
        // numerically stable form of (-b + sq)/a
        const double r = b <= 0.0 ? (-b + sq) / a : (-c) / (b + sq);
        return std::max(0.0, r);
    };
    switch (domain.kind()) {
        case DomainKind::disk:
        case DomainKind::ball3d: {
            const double r = p[0];
            return quadric((1.0 / r) * from, (1.0 / r) * dir);
        }
        case DomainKind::ellipse: {
            const Vec3 x{from.x / p[0], from.y / p[1], 0.0};
            const Vec3 d{dir.x / p[0], dir.y / p[1], 0.0};
            return quadric(x, d);
        }
        case DomainKind::rectangle: {
            double r = std::numeric_limits<double>::infinity();
            if (dir.x > 0.0) r = std::min(r, (p[0] - from.x) / dir.x);
            if (dir.x < 0.0) r = std::min(r, -from.x / dir.x);
            if (dir.y > 0.0) r = std::min(r, (p[1] - from.y) / dir.y);
            if (dir.y < 0.0) r = std::min(r, -from.y / dir.y);
            return std::max(0.0, r);
        }
    }
    return 0.0;
}

// ------------------------------------------------------------ quadrature

namespace {

std::vector<VolumeNode> volume_nodes_at(const ConvexDomain& domain, int n) {
    const auto& p = domain.shape();
    const auto& gl = gauss_legendre(n);
    std::vector<VolumeNode> out;
    switch (domain.kind()) {
        case DomainKind::disk:
        case DomainKind::ellipse: {
            const double ax = p[0];
            const double ay = domain.kind() == DomainKind::disk ? p[0] : p[1];
            const int m = 2 * n;
            const double dth = 2.0 * kPi / m;
            out.reserve(static_cast<std::size_t>(n) * m);
            for (int i = 0; i < n; ++i) {
                const double r = 0.5 * (gl.nodes[i] + 1.0);
                const double wr = 0.5 * gl.weights[i] * r * ax * ay * dth;
                for (int j = 0; j < m; ++j) {
                    const double th = (j + 0.5) * dth;
                    out.push_back({{ax * r * std::cos(th), ay * r * std::sin(th), 0.0}, wr});
                }
            }
            break;
        }
        case DomainKind::rectangle: {
            out.reserve(static_cast<std::size_t>(n) * n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    out.push_back({{0.5 * p[0] * (gl.nodes[i] + 1.0), 0.5 * p[1] * (gl.nodes[j] + 1.0), 0.0},
                                   0.25 * p[0] * p[1] * gl.weights[i] * gl.weights[j]});
                }
            }
            break;
        }
        case DomainKind::ball3d: {
            const double R = p[0];
            const int m = 2 * n;
            const double dph = 2.0 * kPi / m;
            out.reserve(static_cast<std::size_t>(n) * n * m);
            for (int i = 0; i < n; ++i) {
                const double r = 0.5 * R * (gl.nodes[i] + 1.0);
                const double wr = 0.5 * R * gl.weights[i] * r * r;
                for (int j = 0; j < n; ++j) {
                    const double mu = gl.nodes[j];
                    const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
                    for (int k = 0; k < m; ++k) {
                        const double ph = (k + 0.5) * dph;
                        out.push_back({{r * st * std::cos(ph), r * st * std::sin(ph), r * mu},
                                       wr * gl.weights[j] * dph});
                    }
                }
            }
            break;
        }
    }
    return out;
}

// Midpoint nodes on [a, b) of a 2-D boundary, never touching the endpoints.
void arc_nodes(const ConvexDomain& domain, double a, double b, int count,
               std::vector<SurfaceNode>& out) {
    const double h = (b - a) / count;
    for (int j = 0; j < count; ++j) {
        const double s = a + (j + 0.5) * h;
        const auto bp = boundary_point(domain, s);
        out.push_back({bp.point, h, bp.normal, s});
    }
}

void band_nodes(const ConvexDomain& domain, double s0, double s1, int n_polar,
                std::vector<SurfaceNode>& out) {
    const double R = domain.shape()[0];
    const double mu_lo = std::cos(s1 / R), mu_hi = std::cos(s0 / R);
    const auto& gl = gauss_legendre(n_polar);
    const int m = 2 * n_polar;
    const double dph = 2.0 * kPi / m;
    for (int i = 0; i < n_polar; ++i) {
        const double mu = 0.5 * (mu_hi - mu_lo) * gl.nodes[i] + 0.5 * (mu_hi + mu_lo);
        const double w = 0.5 * (mu_hi - mu_lo) * gl.weights[i] * R * R * dph;
        const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        for (int k = 0; k < m; ++k) {
            const double ph = (k + 0.5) * dph;
            const Vec3 nrm{st * std::cos(ph), st * std::sin(ph), mu};
            out.push_back({R * nrm, w, nrm, R * std::acos(mu)});
        }
    }
}

std::vector<SurfaceNode> surface_nodes_at(const ConvexDomain& domain, const BoundaryPartition& part,
                                          int n) {
    std::vector<SurfaceNode> out;
    const double len = domain.parameter_length();
    if (domain.kind() == DomainKind::ball3d) {
        const int base = std::max(4, static_cast<int>(std::ceil(std::sqrt(0.5 * n))));
        for (const auto& iv : part.intervals()) {
            const int np = std::max(4, static_cast<int>(std::ceil(base * (iv.end - iv.begin) / len)));
            band_nodes(domain, iv.begin, iv.end, np, out);
        }
        return out;
    }
    const auto corners = corner_parameters(domain);
    for (const auto& iv : part.intervals()) {
        std::vector<double> cuts{iv.begin};
        for (double c : corners)
            if (c > iv.begin && c < iv.end) cuts.push_back(c);
        cuts.push_back(iv.end);
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double piece = cuts[k + 1] - cuts[k];
            const int count = std::max(2, static_cast<int>(std::ceil(n * piece / len - 1e-9)));
            arc_nodes(domain, cuts[k], cuts[k + 1], count, out);
        }
    }
    return out;
}

double weight_sum(const auto& nodes) {
    std::vector<double> w;
    w.reserve(nodes.size());
    for (const auto& nd : nodes) w.push_back(nd.weight);
    return pairwise_sum(w);
}

template <typename Build>
auto refine_until(const QuadratureSpec& spec, int start, double exact, Build build) {
    spec.validate();
    int n = start;
    while (true) {
        auto nodes = build(n);
        const double err = std::abs(weight_sum(nodes) - exact) / exact;
        if (err <= spec.tolerance) return nodes;
        if (2 * n > spec.refinement_limit)
            throw QuadratureFailure("quadrature refinement limit reached", err);
        n *= 2;
    }
}

}  // namespace

std::vector<VolumeNode> volume_quadrature(const ConvexDomain& domain, const QuadratureSpec& spec) {
    return refine_until(spec, spec.volume_nodes, domain.volume(),
                        [&](int n) { return volume_nodes_at(domain, n); });
}

std::vector<SurfaceNode> boundary_quadrature(const ConvexDomain& domain, const QuadratureSpec& spec) {
    return boundary_quadrature(domain, BoundaryPartition::full(domain), spec);
}

std::vector<SurfaceNode> boundary_quadrature(const ConvexDomain& domain,
                                             const BoundaryPartition& part,
                                             const QuadratureSpec& spec) {
    return refine_until(spec, spec.boundary_nodes, gamma1_measure(domain, part),
                        [&](int n) { return surface_nodes_at(domain, part, n); });
}

}  // namespace blowtime::geometry
