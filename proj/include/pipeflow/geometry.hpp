#pragma once

#include "pipeflow/core.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace pipeflow {

/// Rigid motion y = translation + rotation * x, rotation in SO(2).
///
/// For a straight pipe section the transform maps global coordinates to the
/// section's local frame, where the section is (0, length) x (-h, h) and the
/// flow runs along +x.
template <typename Scalar>
struct RigidTransform {
    Matrix2<Scalar> rotation = Matrix2<Scalar>::Identity();
    Vector2<Scalar> translation = Vector2<Scalar>::Zero();

    static RigidTransform rotation_by(Scalar angle, const Vector2<Scalar>& shift = Vector2<Scalar>::Zero())
    {
        using std::cos;
        using std::sin;
        RigidTransform t;
        t.rotation << cos(angle), -sin(angle), sin(angle), cos(angle);
        t.translation = shift;
        return t;
    }

    /// Global-to-local frame of a section whose local origin sits at `origin`
    /// and whose local +x axis points along `angle` in global coordinates.
    static RigidTransform section_frame(const Vector2<Scalar>& origin, Scalar angle)
    {
        RigidTransform t = rotation_by(-angle);
        t.translation = -(t.rotation * origin);
        return t;
    }

    Vector2<Scalar> apply(const Vector2<Scalar>& x) const { return translation + rotation * x; }
    Vector2<Scalar> inverse(const Vector2<Scalar>& y) const
    {
        return rotation.transpose() * (y - translation);
    }

    /// (*this) o other
    RigidTransform compose(const RigidTransform& other) const
    {
        RigidTransform t;
        t.rotation = rotation * other.rotation;
        t.translation = translation + rotation * other.translation;
        return t;
    }

    RigidTransform inverted() const
    {
        RigidTransform t;
        t.rotation = rotation.transpose();
        t.translation = -(t.rotation * translation);
        return t;
    }

    bool is_proper_rotation(Scalar tol = Scalar(1e-12)) const
    {
        using std::abs;
        const Matrix2<Scalar> gram = rotation.transpose() * rotation;
        return (gram - Matrix2<Scalar>::Identity()).cwiseAbs().maxCoeff() <= tol &&
               abs(rotation.determinant() - Scalar(1)) <= tol;
    }
};

using RigidTransformd = RigidTransform<double>;

template <typename Scalar>
Vector2<Scalar> rigid_apply(const RigidTransform<Scalar>& t, const Vector2<Scalar>& x)
{
    return t.apply(x);
}

template <typename Scalar>
Vector2<Scalar> rigid_inverse(const RigidTransform<Scalar>& t, const Vector2<Scalar>& y)
{
    return t.inverse(y);
}

/// Straight inlet or outlet part of the pipe: (0, length) x (-half_height, half_height)
/// in the local frame given by `transform`.
struct StraightSection {
    double length = 1.0;
    double half_height = 1.0;
    RigidTransformd transform;

    Vec2 to_local(const Vec2& x) const { return transform.apply(x); }
    Vec2 to_global(const Vec2& local) const { return transform.inverse(local); }
    /// Global direction of the local +x axis.
    Vec2 axis() const { return transform.rotation.transpose().col(0); }
};

/// Parametric wall curve on s in [0, 1].
class WallCurve {
public:
    WallCurve() = default;

    /// Piecewise cubic Hermite curve through `points` with end-point derivatives
    /// `tangents` (derivatives with respect to the global parameter s).
    static WallCurve hermite(std::vector<Vec2> points, std::vector<Vec2> tangents);
    static WallCurve closed_form(std::function<Vec2(double)> point,
                                 std::function<Vec2(double)> derivative);

    Vec2 point(double s) const;
    Vec2 derivative(double s) const;
    bool is_hermite() const { return !point_fn_; }
    const std::vector<Vec2>& knots() const { return points_; }
    const std::vector<Vec2>& knot_tangents() const { return tangents_; }

    /// Polyline length estimate from `samples` uniform chords.
    double arc_length(int samples = 256) const;

private:
    std::vector<Vec2> points_;
    std::vector<Vec2> tangents_;
    std::function<Vec2(double)> point_fn_;
    std::function<Vec2(double)> derivative_fn_;
};

/// Admissible 2D channel: straight inlet section, straight outlet section and
/// a curved middle part bounded by two wall curves. The lower wall joins the
/// local (l1, -h1) corner of the inlet section to the local (0, -h2) corner of
/// the outlet section; the upper wall joins the +h corners.
struct DomainSpec {
    StraightSection inlet;
    StraightSection outlet;
    WallCurve lower_wall;
    WallCurve upper_wall;

    /// Outward unit normal on the outlet segment, set by build_domain.
    Vec2 outlet_normal = Vec2::Zero();
    bool validated = false;

    /// True when the middle part is empty (inlet section abuts outlet section).
    bool junction_is_degenerate() const;

    Vec2 inlet_corner_lower() const { return inlet.to_global({0.0, -inlet.half_height}); }
    Vec2 inlet_corner_upper() const { return inlet.to_global({0.0, inlet.half_height}); }
    Vec2 outlet_corner_lower() const { return outlet.to_global({outlet.length, -outlet.half_height}); }
    Vec2 outlet_corner_upper() const { return outlet.to_global({outlet.length, outlet.half_height}); }
};

/// Domain with Hermite walls tangent to the section axes, tangent magnitude
/// equal to the corner-to-corner chord times `tangent_scale`.
DomainSpec make_domain(const StraightSection& inlet, const StraightSection& outlet,
                       double tangent_scale = 1.0);

/// Straight channel (0, length) x (-half_height, half_height); the inlet and
/// outlet sections each take half of the length.
DomainSpec straight_channel(double length, double half_height);

/// Validates every DomainSpec invariant and records the outlet normal.
/// Throws GeometryError.
DomainSpec build_domain(DomainSpec spec);

enum class BoundaryTag : std::uint8_t { Inlet, Wall, Outlet };
enum class Region : std::uint8_t { Omega0, Omega1, Omega2, OmegaSharp };

char tag_letter(BoundaryTag tag);
BoundaryTag tag_from_letter(char c);
const char* region_name(Region r);

struct BoundaryEdge {
    std::array<int, 2> v{};
    BoundaryTag tag = BoundaryTag::Wall;
};

struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  // counterclockwise
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<Region> regions;  // one per triangle

    std::size_t num_vertices() const { return vertices.size(); }
    std::size_t num_triangles() const { return triangles.size(); }

    double signed_area(std::size_t t) const;
    Vec2 centroid(std::size_t t) const;
    double total_area() const;
    double max_edge_length() const;
    /// Smallest interior angle over all triangles, in degrees.
    double min_angle_degrees() const;
    double tag_length(BoundaryTag tag) const;
};

/// Checks orientation, index ranges and that each boundary edge belongs to
/// exactly one triangle while every other triangle edge is shared by two.
/// Throws MeshError.
void check_mesh(const Mesh& mesh);

struct MeshOptions {
    double target_h = 0.1;
    int refinement = 0;  // column and row counts are multiplied by 2^refinement
    double min_angle_degrees = 15.0;
    int max_smoothing_passes = 50;
};

/// Structured transfinite mesh of a validated domain, with column lines
/// snapped to the section junctions and to the outlet stations x2 = 0 and
/// x2 = l2 / 3. Throws MeshError.
Mesh generate_mesh(const DomainSpec& spec, const MeshOptions& options);
inline Mesh generate_mesh(const DomainSpec& spec, double target_h)
{
    return generate_mesh(spec, MeshOptions{target_h});
}

/// Structured rectangle split into right triangles. Boundary tags per side.
struct RectangleTags {
    BoundaryTag left = BoundaryTag::Wall;
    BoundaryTag right = BoundaryTag::Wall;
    BoundaryTag bottom = BoundaryTag::Wall;
    BoundaryTag top = BoundaryTag::Wall;
};
Mesh rectangle_mesh(const Vec2& lo, const Vec2& hi, int nx, int ny, RectangleTags tags = {});

/// Polygonal unit-disk mesh made of `rings` concentric rings (ring k has 6k
/// vertices), scaled by `radius`. Boundary tagged Wall.
Mesh disk_mesh(int rings, double radius = 1.0);

/// ASCII mesh format: "nv nt nb", then vertices, triangles with region
/// label, boundary edges with tag letter I/W/O. 17 significant digits.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

}  // namespace pipeflow
