#include "pipeflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

namespace pipeflow {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

double angle_between(const Vec2& a, const Vec2& b)
{
    return std::atan2(std::abs(cross(a, b)), a.dot(b));
}

// Proper intersection test for closed segments [p1,p2] and [q1,q2].
bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2)
{
    const auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
        const double v = cross(b - a, c - a);
        const double scale = (b - a).norm() * (c - a).norm();
        if (std::abs(v) <= 1e-14 * std::max(scale, 1e-300)) return 0;
        return v > 0 ? 1 : -1;
    };
    const auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& c) {
        return std::min(a[0], b[0]) - 1e-14 <= c[0] && c[0] <= std::max(a[0], b[0]) + 1e-14 &&
               std::min(a[1], b[1]) - 1e-14 <= c[1] && c[1] <= std::max(a[1], b[1]) + 1e-14;
    };
    const int o1 = orient(p1, p2, q1);
    const int o2 = orient(p1, p2, q2);
    const int o3 = orient(q1, q2, p1);
    const int o4 = orient(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment(p1, p2, q2)) return true;
    if (o3 == 0 && on_segment(q1, q2, p1)) return true;
    if (o4 == 0 && on_segment(q1, q2, p2)) return true;
    return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// WallCurve

WallCurve WallCurve::hermite(std::vector<Vec2> points, std::vector<Vec2> tangents)
{
    if (points.size() < 2 || points.size() != tangents.size())
        throw GeometryError("hermite wall curve needs at least two knots with one tangent each");
    WallCurve c;
    c.points_ = std::move(points);
    c.tangents_ = std::move(tangents);
    return c;
}

WallCurve WallCurve::closed_form(std::function<Vec2(double)> point,
                                 std::function<Vec2(double)> derivative)
{
    if (!point || !derivative) throw GeometryError("closed-form wall curve needs point and derivative");
    WallCurve c;
    c.point_fn_ = std::move(point);
    c.derivative_fn_ = std::move(derivative);
    return c;
}

Vec2 WallCurve::point(double s) const
{
    if (point_fn_) return point_fn_(s);
    const auto segments = static_cast<double>(points_.size() - 1);
    const double u = std::clamp(s, 0.0, 1.0) * segments;
    const auto i = std::min(static_cast<std::size_t>(u), points_.size() - 2);
    const double t = u - static_cast<double>(i);
    const double delta = 1.0 / segments;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * points_[i] + h10 * delta * tangents_[i] + h01 * points_[i + 1] +
           h11 * delta * tangents_[i + 1];
}

Vec2 WallCurve::derivative(double s) const
{
    if (derivative_fn_) return derivative_fn_(s);
    const auto segments = static_cast<double>(points_.size() - 1);
    const double u = std::clamp(s, 0.0, 1.0) * segments;
    const auto i = std::min(static_cast<std::size_t>(u), points_.size() - 2);
    const double t = u - static_cast<double>(i);
    const double delta = 1.0 / segments;
    const double t2 = t * t;
    const double d00 = 6 * t2 - 6 * t;
    const double d10 = 3 * t2 - 4 * t + 1;
    const double d01 = -6 * t2 + 6 * t;
    const double d11 = 3 * t2 - 2 * t;
    return (d00 * points_[i] + d10 * delta * tangents_[i] + d01 * points_[i + 1] +
            d11 * delta * tangents_[i + 1]) /
           delta;
}

double WallCurve::arc_length(int samples) const
{
    double len = 0.0;
    Vec2 prev = point(0.0);
    for (int k = 1; k <= samples; ++k) {
        const Vec2 p = point(static_cast<double>(k) / samples);
        len += (p - prev).norm();
        prev = p;
    }
    return len;
}

// ---------------------------------------------------------------------------
// DomainSpec

bool DomainSpec::junction_is_degenerate() const
{
    const double scale = std::max(inlet.half_height, outlet.half_height);
    const Vec2 a = inlet.to_global({inlet.length, -inlet.half_height});
    const Vec2 b = outlet.to_global({0.0, -outlet.half_height});
    const Vec2 c = inlet.to_global({inlet.length, inlet.half_height});
    const Vec2 d = outlet.to_global({0.0, outlet.half_height});
    return (a - b).norm() <= 1e-12 * scale && (c - d).norm() <= 1e-12 * scale;
}

DomainSpec make_domain(const StraightSection& inlet, const StraightSection& outlet,
                       double tangent_scale)
{
    DomainSpec spec;
    spec.inlet = inlet;
    spec.outlet = outlet;
    const Vec2 a_lo = inlet.to_global({inlet.length, -inlet.half_height});
    const Vec2 a_hi = inlet.to_global({inlet.length, inlet.half_height});
    const Vec2 b_lo = outlet.to_global({0.0, -outlet.half_height});
    const Vec2 b_hi = outlet.to_global({0.0, outlet.half_height});
    const double chord_lo = (b_lo - a_lo).norm() * tangent_scale;
    const double chord_hi = (b_hi - a_hi).norm() * tangent_scale;
    spec.lower_wall = WallCurve::hermite({a_lo, b_lo}, {chord_lo * inlet.axis(), chord_lo * outlet.axis()});
    spec.upper_wall = WallCurve::hermite({a_hi, b_hi}, {chord_hi * inlet.axis(), chord_hi * outlet.axis()});
    return spec;
}

DomainSpec straight_channel(double length, double half_height)
{
    StraightSection inlet{0.5 * length, half_height, RigidTransformd{}};
    StraightSection outlet{0.5 * length, half_height,
                           RigidTransformd::section_frame(Vec2(0.5 * length, 0.0), 0.0)};
    return build_domain(make_domain(inlet, outlet));
}

DomainSpec build_domain(DomainSpec spec)
{
    for (const StraightSection* s : {&spec.inlet, &spec.outlet}) {
        if (!(s->length > 0.0) || !(s->half_height > 0.0))
            throw GeometryError("section lengths and half-heights must be positive");
        if (!s->transform.is_proper_rotation(1e-12))
            throw GeometryError("section transform is not a proper rigid motion");
    }
    const double scale = std::max({spec.inlet.length, spec.outlet.length, spec.inlet.half_height,
                                   spec.outlet.half_height});
    const double pos_tol = 1e-10 * scale;

    const Vec2 a_lo = spec.inlet.to_global({spec.inlet.length, -spec.inlet.half_height});
    const Vec2 a_hi = spec.inlet.to_global({spec.inlet.length, spec.inlet.half_height});
    const Vec2 b_lo = spec.outlet.to_global({0.0, -spec.outlet.half_height});
    const Vec2 b_hi = spec.outlet.to_global({0.0, spec.outlet.half_height});

    const auto check_ends = [&](const WallCurve& w, const Vec2& start, const Vec2& end, const char* name) {
        if ((w.point(0.0) - start).norm() > pos_tol || (w.point(1.0) - end).norm() > pos_tol)
            throw GeometryError(std::string(name) + " wall does not connect the section corners");
    };
    check_ends(spec.lower_wall, a_lo, b_lo, "lower");
    check_ends(spec.upper_wall, a_hi, b_hi, "upper");

    const bool degenerate = spec.junction_is_degenerate();
    if (degenerate) {
        if (angle_between(spec.inlet.axis(), spec.outlet.axis()) > 1e-8)
            throw GeometryError("abutting sections must share their axis");
    } else {
        constexpr double kTangencyTol = 1e-8;
        for (const WallCurve* w : {&spec.lower_wall, &spec.upper_wall}) {
            const Vec2 d0 = w->derivative(0.0);
            const Vec2 d1 = w->derivative(1.0);
            if (d0.norm() == 0.0 || d1.norm() == 0.0)
                throw GeometryError("wall curve has a vanishing derivative at a junction");
            if (angle_between(d0, spec.inlet.axis()) > kTangencyTol ||
                angle_between(d1, spec.outlet.axis()) > kTangencyTol)
                throw GeometryError("wall curve is not tangent to the section axis at a junction");
        }
    }

    // Boundary polygon, counterclockwise: lower side downstream, outlet, upper
    // side upstream, inlet.
    constexpr int kSamples = 200;
    std::vector<Vec2> poly;
    poly.push_back(spec.inlet.to_global({0.0, -spec.inlet.half_height}));
    if (!degenerate)
        for (int k = 0; k < kSamples; ++k) poly.push_back(spec.lower_wall.point(double(k) / kSamples));
    else
        poly.push_back(a_lo);
    poly.push_back(b_lo);
    poly.push_back(spec.outlet.to_global({spec.outlet.length, -spec.outlet.half_height}));
    poly.push_back(spec.outlet.to_global({spec.outlet.length, spec.outlet.half_height}));
    poly.push_back(b_hi);
    if (!degenerate)
        for (int k = kSamples; k > 0; --k) poly.push_back(spec.upper_wall.point(double(k) / kSamples));
    else
        poly.push_back(a_hi);
    poly.push_back(spec.inlet.to_global({0.0, spec.inlet.half_height}));
    // Collapse repeated points (junction samples duplicate section corners).
    std::vector<Vec2> loop;
    for (const Vec2& p : poly)
        if (loop.empty() || (p - loop.back()).norm() > pos_tol) loop.push_back(p);
    if ((loop.front() - loop.back()).norm() <= pos_tol) loop.pop_back();

    const std::size_t n = loop.size();
    double area2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) area2 += cross(loop[i], loop[(i + 1) % n]);
    if (!(area2 > 0.0))
        throw GeometryError("boundary is not counterclockwise; lower and upper walls are swapped");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // adjacent through the closing vertex
            if (segments_intersect(loop[i], loop[(i + 1) % n], loop[j], loop[(j + 1) % n]))
                throw GeometryError("domain boundary self-intersects");
        }
    }

    spec.outlet_normal = spec.outlet.axis();
    spec.validated = true;
    return spec;
}

// ---------------------------------------------------------------------------
// Tags

char tag_letter(BoundaryTag tag)
{
    switch (tag) {
    case BoundaryTag::Inlet: return 'I';
    case BoundaryTag::Wall: return 'W';
    case BoundaryTag::Outlet: return 'O';
    }
    return '?';
}

BoundaryTag tag_from_letter(char c)
{
    switch (c) {
    case 'I': return BoundaryTag::Inlet;
    case 'W': return BoundaryTag::Wall;
    case 'O': return BoundaryTag::Outlet;
    default: throw MeshError(std::string("unknown boundary tag '") + c + "'");
    }
}

const char* region_name(Region r)
{
    switch (r) {
    case Region::Omega0: return "OMEGA0";
    case Region::Omega1: return "OMEGA1";
    case Region::Omega2: return "OMEGA2";
    case Region::OmegaSharp: return "OMEGA_SHARP";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Mesh measures

double Mesh::signed_area(std::size_t t) const
{
    const auto& tri = triangles[t];
    return 0.5 * cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]);
}

Vec2 Mesh::centroid(std::size_t t) const
{
    const auto& tri = triangles[t];
    return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
}

double Mesh::total_area() const
{
    double a = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) a += signed_area(t);
    return a;
}

double Mesh::max_edge_length() const
{
    double m = 0.0;
    for (const auto& tri : triangles)
        for (int k = 0; k < 3; ++k)
            m = std::max(m, (vertices[tri[(k + 1) % 3]] - vertices[tri[k]]).norm());
    return m;
}

double Mesh::min_angle_degrees() const
{
    double m = 180.0;
    for (const auto& tri : triangles) {
        for (int k = 0; k < 3; ++k) {
            const Vec2 a = vertices[tri[(k + 1) % 3]] - vertices[tri[k]];
            const Vec2 b = vertices[tri[(k + 2) % 3]] - vertices[tri[k]];
            m = std::min(m, angle_between(a, b) * 180.0 / std::numbers::pi);
        }
    }
    return m;
}

double Mesh::tag_length(BoundaryTag tag) const
{
    double len = 0.0;
    for (const auto& e : boundary_edges)
        if (e.tag == tag) len += (vertices[e.v[1]] - vertices[e.v[0]]).norm();
    return len;
}

void check_mesh(const Mesh& mesh)
{
    const auto nv = static_cast<int>(mesh.vertices.size());
    if (mesh.regions.size() != mesh.triangles.size())
        throw MeshError("region label count differs from triangle count");
    std::map<std::pair<int, int>, int> edge_count;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int v : tri)
            if (v < 0 || v >= nv) throw MeshError("triangle vertex index out of range");
        if (!(mesh.signed_area(t) > 0.0))
            throw MeshError("triangle " + std::to_string(t) + " is not counterclockwise");
        for (int k = 0; k < 3; ++k) {
            const int a = tri[k];
            const int b = tri[(k + 1) % 3];
            ++edge_count[{std::min(a, b), std::max(a, b)}];
        }
    }
    std::map<std::pair<int, int>, int> boundary;
    for (const auto& e : mesh.boundary_edges) {
        const auto key = std::make_pair(std::min(e.v[0], e.v[1]), std::max(e.v[0], e.v[1]));
        ++boundary[key];
        const auto it = edge_count.find(key);
        if (it == edge_count.end() || it->second != 1)
            throw MeshError("boundary edge does not belong to exactly one triangle");
    }
    for (const auto& [key, count] : edge_count) {
        if (count > 2) throw MeshError("edge shared by more than two triangles");
        if (count == 1 && boundary.count(key) != 1)
            throw MeshError("untagged boundary edge");
    }
}

}  // namespace pipeflow
