#include "pipeflow/fem.hpp"

#include <cmath>

namespace pipeflow {

namespace {

template <typename F>
double integrate(const FESpace& space, F&& integrand)
{
    const TriangleRule& rule = dunavant6();
    const Mesh& mesh = space.mesh();
    double total = 0.0;
    for (Index t = 0; t < space.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        const double area = space.geometry(t).area;
        for (std::size_t q = 0; q < rule.bary.size(); ++q) {
            const Eigen::Vector3d& l = rule.bary[q];
            const Vec2 x = l[0] * mesh.vertices[tri[0]] + l[1] * mesh.vertices[tri[1]] + l[2] * mesh.vertices[tri[2]];
            total += area * rule.weights[q] * integrand(t, l, x);
        }
    }
    return total;
}

double pressure_at(const FESpace& space, const VectorX& p, Index t, const Eigen::Vector3d& l)
{
    const auto& nodes = space.element_nodes(t);
    return l[0] * p[nodes[0]] + l[1] * p[nodes[1]] + l[2] * p[nodes[2]];
}

}  // namespace

ErrorNorms error_norms(const FESpace& space, const VectorX& u, const VectorX& p, const ExactSolution& exact)
{
    ErrorNorms e;
    e.l2_velocity = std::sqrt(integrate(space, [&](Index t, const Eigen::Vector3d& l, const Vec2& x) {
        return (velocity_at(space, u, t, l) - exact.velocity(x)).squaredNorm();
    }));
    e.h1_velocity = std::sqrt(integrate(space, [&](Index t, const Eigen::Vector3d& l, const Vec2& x) {
        return (velocity_gradient_at(space, u, t, l) - exact.velocity_gradient(x)).squaredNorm();
    }));
    if (exact.pressure)
        e.l2_pressure = std::sqrt(integrate(space, [&](Index t, const Eigen::Vector3d& l, const Vec2& x) {
            const double d = pressure_at(space, p, t, l) - exact.pressure(x);
            return d * d;
        }));
    return e;
}

double l2_norm_velocity(const FESpace& space, const VectorX& u)
{
    return std::sqrt(integrate(space, [&](Index t, const Eigen::Vector3d& l, const Vec2&) {
        return velocity_at(space, u, t, l).squaredNorm();
    }));
}

double h1_seminorm_velocity(const FESpace& space, const VectorX& u)
{
    return std::sqrt(integrate(space, [&](Index t, const Eigen::Vector3d& l, const Vec2&) {
        return velocity_gradient_at(space, u, t, l).squaredNorm();
    }));
}

double h1_norm_velocity(const FESpace& space, const VectorX& u)
{
    return std::hypot(l2_norm_velocity(space, u), h1_seminorm_velocity(space, u));
}

double l2_norm_pressure(const FESpace& space, const VectorX& p)
{
    return std::sqrt(integrate(space, [&](Index t, const Eigen::Vector3d& l, const Vec2&) {
        const double v = pressure_at(space, p, t, l);
        return v * v;
    }));
}

double l4_norm_velocity(const FESpace& space, const VectorX& u)
{
    return std::pow(integrate(space,
                              [&](Index t, const Eigen::Vector3d& l, const Vec2&) {
                                  const double s = velocity_at(space, u, t, l).squaredNorm();
                                  return s * s;
                              }),
                    0.25);
}

VectorX l4_quartic_gradient(const FESpace& space, const VectorX& u)
{
    const TriangleRule& rule = dunavant6();
    VectorX g = VectorX::Zero(space.velocity_size());
    for (Index t = 0; t < space.num_triangles(); ++t) {
        const auto& nodes = space.element_nodes(t);
        const double area = space.geometry(t).area;
        for (std::size_t q = 0; q < rule.bary.size(); ++q) {
            const auto phi = p2_values(rule.bary[q]);
            const Vec2 v = velocity_at(space, u, t, rule.bary[q]);
            const Vec2 w = (4.0 * area * rule.weights[q] * v.squaredNorm()) * v;
            for (int i = 0; i < 6; ++i)
                for (int c = 0; c < 2; ++c) g[space.velocity_dof(c, nodes[i])] += w[c] * phi[i];
        }
    }
    return g;
}

double boundary_l2_norm(const FESpace& space, const ScalarField& s, BoundaryTag tag)
{
    const LineRule& rule = gauss4();
    double total = 0.0;
    for (const BoundaryFace& f : space.boundary_faces()) {
        if (f.tag != tag) continue;
        const Vec2& a = space.node_point(f.nodes[0]);
        const Vec2& b = space.node_point(f.nodes[2]);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double v = s(a + rule.points[q] * (b - a));
            total += f.length * rule.weights[q] * v * v;
        }
    }
    return std::sqrt(total);
}

}  // namespace pipeflow
