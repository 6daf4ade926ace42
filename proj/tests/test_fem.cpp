#include "doctest.h"
#include "support.hpp"

#include "pipeflow/fem.hpp"
#include "pipeflow/reference_flow.hpp"

#include <numbers>

using namespace pipeflow;
using pipeflow::testing::random_vector;

namespace {

constexpr double pi = std::numbers::pi;

Vec2 physical(const Mesh& m, std::size_t t, const Eigen::Vector3d& l)
{
    const auto& tri = m.triangles[t];
    return l[0] * m.vertices[static_cast<std::size_t>(tri[0])] + l[1] * m.vertices[static_cast<std::size_t>(tri[1])] +
           l[2] * m.vertices[static_cast<std::size_t>(tri[2])];
}

// High-order volume quadrature, independent of the rule used by assembly.
template <typename F>
double integrate(const Mesh& m, F f)
{
    static const TriangleRule rule = duffy_rule(8);
    double s = 0.0;
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
        double local = 0.0;
        for (std::size_t q = 0; q < rule.weights.size(); ++q) local += rule.weights[q] * f(physical(m, t, rule.bary[q]));
        s += m.signed_area(t) * local;
    }
    return s;
}

Vec2 trace_value(const VectorX& u, Index nn, const BoundaryFace& f, double t)
{
    const auto b = p2_edge_values(t);
    Vec2 v = Vec2::Zero();
    for (int k = 0; k < 3; ++k)
        for (int c = 0; c < 2; ++c) v[c] += b[static_cast<std::size_t>(k)] * u[c * nn + f.nodes[static_cast<std::size_t>(k)]];
    return v;
}

// int over faces with `tag` of g(x, normal, trace of u), 8-point Gauss per face.
template <typename G>
double boundary_integral(const FESpace& s, const VectorX& u, BoundaryTag tag, G g)
{
    static const LineRule rule = gauss_legendre(8);
    double total = 0.0;
    for (const auto& f : s.boundary_faces()) {
        if (f.tag != tag) continue;
        const Vec2& a = s.node_point(f.nodes[0]);
        const Vec2& b = s.node_point(f.nodes[2]);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double t = rule.points[q];
            total += f.length * rule.weights[q] * g((1 - t) * a + t * b, f.normal, trace_value(u, s.num_nodes(), f, t));
        }
    }
    return total;
}

Mesh unit_square(int n)
{
    return rectangle_mesh({0.0, 0.0}, {1.0, 1.0}, n, n,
                          {BoundaryTag::Inlet, BoundaryTag::Outlet, BoundaryTag::Wall, BoundaryTag::Wall});
}

Mesh tall_outlet(int n)
{
    return rectangle_mesh({0.0, -1.0}, {1.0, 1.0}, n, 2 * n,
                          {BoundaryTag::Inlet, BoundaryTag::Outlet, BoundaryTag::Wall, BoundaryTag::Wall});
}

// Random field on the space, nonzero everywhere including the boundary.
VectorX random_field(const FESpace& s, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    return random_vector(s.velocity_size(), rng);
}

}  // namespace

TEST_CASE("space layout")
{
    const FESpace s(unit_square(3));
    // Euler: e = v + t - 1 for a disk-like mesh.
    CHECK(s.num_edges() == s.num_vertices() + s.num_triangles() - 1);
    CHECK(s.velocity_size() == 2 * (s.num_vertices() + s.num_edges()));
    CHECK(s.pressure_size() == s.num_vertices());
    CHECK(s.velocity_dof(1, 5) == s.num_nodes() + 5);
    for (Index e = 0; e < s.num_edges(); ++e) {
        const auto& ab = s.edge(e);
        CHECK(s.edge_index(ab[0], ab[1]) == e);
        CHECK(s.edge_index(ab[1], ab[0]) == e);
        const Vec2 mid = 0.5 * (s.node_point(ab[0]) + s.node_point(ab[1]));
        CHECK((s.node_point(s.num_vertices() + e) - mid).norm() < 1e-15);
    }
    // Inlet corners resolve to the wall; the outlet keeps only its interior nodes.
    int inlet = 0, outlet = 0;
    for (Index n = 0; n < s.num_nodes(); ++n) {
        const Vec2& x = s.node_point(n);
        const bool on_y_side = std::abs(x.y()) < 1e-14 || std::abs(x.y() - 1.0) < 1e-14;
        if (s.node_class(n) == NodeClass::Inlet) {
            ++inlet;
            CHECK(std::abs(x.x()) < 1e-14);
            CHECK_FALSE(on_y_side);
        }
        if (s.node_class(n) == NodeClass::Outlet) {
            ++outlet;
            CHECK_FALSE(on_y_side);
        }
    }
    CHECK(inlet == 5);
    CHECK(outlet == 5);
    const auto mask = s.dirichlet_mask();
    CHECK(mask.size() == static_cast<std::size_t>(s.velocity_size()));
    CHECK((s.outlet_normal() - Vec2(1.0, 0.0)).norm() < 1e-15);
}

TEST_CASE("stiffness")
{
    SUBCASE("single triangle has constants in its kernel")
    {
        Mesh m;
        m.vertices = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
        m.triangles = {{0, 1, 2}};
        m.regions = {Region::Omega0};
        m.boundary_edges = {{{0, 1}, BoundaryTag::Wall}, {{1, 2}, BoundaryTag::Wall}, {{2, 0}, BoundaryTag::Wall}};
        const FESpace s(m);
        const MatrixX k = to_dense(assemble_stiffness(s));
        CHECK(k.rows() == 12);
        CHECK(k.rowwise().sum().cwiseAbs().maxCoeff() < 1e-13);
        CHECK((k - k.transpose()).cwiseAbs().maxCoeff() < 1e-14);
        Eigen::SelfAdjointEigenSolver<MatrixX> eig(k);
        CHECK(eig.eigenvalues().minCoeff() > -1e-12);
        // Exactly two zero modes, one constant per component.
        int zero = 0;
        for (Index i = 0; i < 12; ++i) zero += std::abs(eig.eigenvalues()[i]) < 1e-10;
        CHECK(zero == 2);
    }
    SUBCASE("energy of (x, 0) is the area")
    {
        const FESpace s(unit_square(4));
        const VectorX u = interpolate_velocity(s, [](const Vec2& x) { return Vec2(x.x(), 0.0); });
        CHECK(std::abs(u.dot(assemble_stiffness(s) * u) - 1.0) < 1e-12);
    }
    SUBCASE("energy of a smooth field converges")
    {
        // int |grad (sin(pi x) sin(pi y), 0)|^2 over the unit square.
        const double exact = pi * pi / 2;
        double previous = 0.0;
        for (int n : {2, 4, 8, 16}) {
            const FESpace s(unit_square(n));
            const VectorX u = interpolate_velocity(
                s, [](const Vec2& x) { return Vec2(std::sin(pi * x.x()) * std::sin(pi * x.y()), 0.0); });
            const double err = std::abs(u.dot(assemble_stiffness(s) * u) - exact);
            if (previous > 0.0) CHECK(std::log2(previous / err) >= 1.9);
            previous = err;
        }
        CHECK(previous < 1e-3);
    }
    SUBCASE("scalar blocks")
    {
        const FESpace s(unit_square(3));
        const SparseMatrix k = assemble_stiffness(s);
        const SparseMatrix ks = assemble_scalar_stiffness(s);
        const Index n = s.num_nodes();
        const MatrixX kd = to_dense(k);
        CHECK((kd.topLeftCorner(n, n) - to_dense(ks)).cwiseAbs().maxCoeff() < 1e-15);
        CHECK((kd.bottomRightCorner(n, n) - to_dense(ks)).cwiseAbs().maxCoeff() < 1e-15);
        CHECK(kd.topRightCorner(n, n).cwiseAbs().maxCoeff() == 0.0);

        const VectorX one = VectorX::Ones(n);
        CHECK(std::abs(one.dot(assemble_scalar_mass(s) * one) - 1.0) < 1e-14);
        const VectorX p1 = VectorX::Ones(s.pressure_size());
        CHECK(std::abs(p1.dot(assemble_pressure_mass(s) * p1) - 1.0) < 1e-14);
        const VectorX px = interpolate_pressure(s, [](const Vec2& x) { return x.x() + 2 * x.y(); });
        CHECK(std::abs(px.dot(assemble_pressure_stiffness(s) * px) - 5.0) < 1e-13);
        // Mass of (x, y^2): int x^2 + y^4 = 1/3 + 1/5.
        const VectorX u = interpolate_velocity(s, [](const Vec2& x) { return Vec2(x.x(), x.y() * x.y()); });
        CHECK(std::abs(u.dot(assemble_velocity_mass(s) * u) - (1.0 / 3 + 1.0 / 5)) < 1e-14);
    }
}

TEST_CASE("divergence")
{
    const Mesh m = unit_square(3);
    const FESpace s(m);
    const SparseMatrix b = assemble_divergence(s);
    CHECK(b.rows() == s.pressure_size());
    CHECK(b.cols() == s.velocity_size());
    const VectorX one = VectorX::Ones(s.pressure_size());

    const VectorX xy = interpolate_velocity(s, [](const Vec2& x) { return x; });
    CHECK(std::abs(one.dot(b * xy) - 2.0) < 1e-12);
    const VectorX c = interpolate_velocity(s, [](const Vec2&) { return Vec2(1.0, 0.0); });
    CHECK((b * c).cwiseAbs().maxCoeff() < 1e-14);
    const VectorX x0 = interpolate_velocity(s, [](const Vec2& x) { return Vec2(x.x(), 0.0); });
    CHECK(std::abs(one.dot(b * x0) - 1.0) < 1e-12);

    // Polynomial pairing against the quadrature oracle.
    const auto q = [](const Vec2& x) { return 1.0 - 2 * x.x() + 0.5 * x.y(); };
    const auto v = [](const Vec2& x) { return Vec2(x.x() * x.y() + x.y() * x.y(), 3 * x.x() * x.x() - x.y()); };
    const auto div = [](const Vec2& x) { return x.y() - 1.0; };
    const double oracle = integrate(m, [&](const Vec2& x) { return q(x) * div(x); });
    const double computed = interpolate_pressure(s, q).dot(b * interpolate_velocity(s, v));
    CHECK(std::abs(computed - oracle) < 1e-12);
}

TEST_CASE("convection")
{
    const Mesh m = unit_square(3);
    const FESpace s(m);
    SUBCASE("zero transport")
    {
        for (auto form : {ConvectionForm::Skew, ConvectionForm::Convective})
            CHECK(assemble_convection(s, VectorX::Zero(s.velocity_size()), form).norm() == 0.0);
    }
    SUBCASE("skew identity holds for random fields")
    {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const VectorX a = random_field(s, seed);
            const VectorX v = random_field(s, 100 + seed);
            const double lhs = v.dot(assemble_convection(s, a, ConvectionForm::Skew) * v);
            // The boundary term needs the traces of both a and v.
            double rhs = 0.0;
            for (auto tag : {BoundaryTag::Inlet, BoundaryTag::Wall, BoundaryTag::Outlet}) {
                static const LineRule rule = gauss_legendre(8);
                for (const auto& f : s.boundary_faces()) {
                    if (f.tag != tag) continue;
                    for (std::size_t q = 0; q < rule.points.size(); ++q) {
                        const double t = rule.points[q];
                        const Vec2 at = trace_value(a, s.num_nodes(), f, t);
                        const Vec2 vt = trace_value(v, s.num_nodes(), f, t);
                        rhs += 0.5 * f.length * rule.weights[q] * at.dot(f.normal) * vt.squaredNorm();
                    }
                }
            }
            CHECK(std::abs(lhs - rhs) < 1e-13 * std::max(1.0, std::abs(rhs)));
            CHECK(std::abs(convection_form(s, a, v, v, ConvectionForm::Skew) - lhs) < 1e-12);
        }
    }
    SUBCASE("convective form against a quadrature oracle")
    {
        // a = (x^2, -2 x y) is divergence free and reproduced exactly by P2.
        const auto a = [](const Vec2& x) { return Vec2(x.x() * x.x(), -2 * x.x() * x.y()); };
        const auto w = [](const Vec2& x) { return Vec2(x.x() * x.y(), x.x() - x.y() * x.y()); };
        const auto grad_w = [](const Vec2& x) {
            Mat2 g;
            g << x.y(), x.x(), 1.0, -2 * x.y();
            return g;
        };
        const auto v = [](const Vec2& x) { return Vec2(1.0 + x.x(), x.y() * x.y()); };
        const double oracle = integrate(m, [&](const Vec2& x) { return (grad_w(x) * a(x)).dot(v(x)); });
        const VectorX ah = interpolate_velocity(s, a);
        const VectorX wh = interpolate_velocity(s, w);
        const VectorX vh = interpolate_velocity(s, v);
        const double computed = vh.dot(assemble_convection(s, ah, ConvectionForm::Convective) * wh);
        CHECK(std::abs(computed - oracle) < 1e-10);
        CHECK(std::abs(convection_form(s, ah, wh, vh, ConvectionForm::Convective) - oracle) < 1e-10);
    }
    SUBCASE("derivative in the transporting slot")
    {
        const VectorX a = random_field(s, 7);
        const VectorX u = random_field(s, 8);
        for (auto form : {ConvectionForm::Skew, ConvectionForm::Convective}) {
            const VectorX lhs = assemble_convection_derivative(s, u, form) * a;
            const VectorX rhs = assemble_convection(s, a, form) * u;
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("directional do-nothing boundary term")
{
    CHECK(negative_part(-2.0) == 2.0);
    CHECK(negative_part(3.0) == 0.0);
    CHECK(negative_part(0.0) == 0.0);
    CHECK(negative_part_slope(-1.0) == -1.0);
    CHECK(negative_part_slope(0.0) == 0.0);

    const FESpace s(tall_outlet(3));
    const Index nv = s.velocity_size();
    SUBCASE("pure outflow contributes nothing")
    {
        const VectorX w = interpolate_velocity(s, [](const Vec2& x) { return Vec2(1.0 - 0.5 * x.y() * x.y(), x.x()); });
        const auto t = assemble_ddn_boundary(s, w, random_field(s, 3));
        CHECK(t.matrix.norm() == 0.0);
        CHECK(t.load.norm() == 0.0);
    }
    SUBCASE("uniform inflow through the outlet gives half the boundary mass")
    {
        const VectorX w = interpolate_velocity(s, [](const Vec2&) { return Vec2(-1.0, 0.0); });
        const VectorX wstar = random_field(s, 4);
        const auto t = assemble_ddn_boundary(s, w, wstar);
        const auto mass = assemble_boundary_mass(s, BoundaryTag::Outlet,
                                                 [](const Vec2&, const Vec2&, double, std::size_t) { return 1.0; });
        CHECK((to_dense(t.matrix) - 0.5 * to_dense(mass)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((t.load - t.matrix * wstar).cwiseAbs().maxCoeff() < 1e-14);
        for (std::uint64_t seed = 10; seed < 15; ++seed) {
            const VectorX v = random_field(s, seed);
            const double oracle = boundary_integral(s, v, BoundaryTag::Outlet,
                                                    [](const Vec2&, const Vec2&, const Vec2& vt) { return 0.5 * vt.squaredNorm(); });
            CHECK(std::abs(v.dot(t.matrix * v) - oracle) < 1e-12);
        }
    }
    SUBCASE("positive semidefinite for random transport")
    {
        std::mt19937_64 rng(21);
        for (int k = 0; k < 1000; ++k) {
            const VectorX w = random_vector(nv, rng, 2.0);
            const auto t = assemble_ddn_boundary(s, w, VectorX::Zero(nv));
            const VectorX v = random_vector(nv, rng);
            CHECK(v.dot(t.matrix * v) >= -1e-14);
            if (k % 100 == 0) CHECK((to_dense(t.matrix) - to_dense(t.matrix).transpose()).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
    SUBCASE("derivative matches central differences away from the kink")
    {
        // w . nu stays in [-1.6, -0.4] on the outlet under the perturbations below.
        const VectorX w = interpolate_velocity(s, [](const Vec2& x) { return Vec2(-1.0 - 0.3 * x.y() * x.y(), 0.2); });
        std::mt19937_64 rng(5);
        const VectorX d = random_vector(nv, rng);
        const SparseMatrix jac = assemble_ddn_derivative(s, w, d);
        for (int k = 0; k < 5; ++k) {
            const VectorX dir = random_vector(nv, rng, 0.1);
            const double h = 1e-6;
            const VectorX plus = assemble_ddn_boundary(s, w + h * dir, VectorX::Zero(nv)).matrix * d;
            const VectorX minus = assemble_ddn_boundary(s, w - h * dir, VectorX::Zero(nv)).matrix * d;
            const VectorX fd = (plus - minus) / (2 * h);
            CHECK((fd - jac * dir).norm() <= 1e-8 * std::max(1.0, fd.norm()));
        }
    }
}

TEST_CASE("loads")
{
    const Mesh m = tall_outlet(3);
    const FESpace s(m);
    const VectorX nu = interpolate_velocity(s, [](const Vec2&) { return Vec2(1.0, 0.0); });
    CHECK(assemble_outlet_traction(s, [](const Vec2&) { return 0.0; }).norm() == 0.0);
    CHECK(std::abs(assemble_outlet_traction(s, [](const Vec2&) { return 1.0; }).dot(nu) - 2.0) < 1e-14);
    // sigma = y against phi = (x y, y^2): int_{-1}^{1} y * y dy at x = 1.
    const VectorX phi = interpolate_velocity(s, [](const Vec2& x) { return Vec2(x.x() * x.y(), x.y() * x.y()); });
    const VectorX load = assemble_outlet_traction(s, [](const Vec2& x) { return x.y(); });
    CHECK(std::abs(load.dot(phi) - 2.0 / 3.0) < 1e-12);

    const auto f = [](const Vec2& x) { return Vec2(std::sin(x.x()), x.y() * x.y()); };
    const auto g = [](const Vec2& x) { return Vec2(x.y(), x.x() * x.x()); };
    const double oracle = integrate(m, [&](const Vec2& x) { return f(x).dot(g(x)); });
    CHECK(std::abs(assemble_body_force(s, f).dot(interpolate_velocity(s, g)) - oracle) < 1e-9);
}

TEST_CASE("flux")
{
    const FESpace s(unit_square(4));
    CHECK(boundary_flux(s, VectorX::Zero(s.velocity_size()), BoundaryTag::Outlet) == 0.0);
    const VectorX u = interpolate_velocity(s, [](const Vec2& x) { return Vec2(x.x(), -x.y()); });
    CHECK(std::abs(boundary_flux(s, u, BoundaryTag::Outlet) - 1.0) < 1e-14);
    CHECK(std::abs(boundary_flux(s, u, BoundaryTag::Inlet)) < 1e-14);

    const auto spec = build_domain(straight_channel(2.0, 1.0));
    const FESpace c(generate_mesh(spec, 0.25));
    const PoiseuilleFlow p = inlet_poiseuille(spec, 1.0, 1.0);
    const VectorX up = interpolate_velocity(c, [&](const Vec2& x) { return p.velocity(x); });
    CHECK(std::abs(boundary_flux(c, up, BoundaryTag::Inlet) + 1.0) < 1e-13);
    CHECK(std::abs(boundary_flux(c, up, BoundaryTag::Outlet) - 1.0) < 1e-13);
    CHECK(std::abs(boundary_flux(c, up, BoundaryTag::Wall)) < 1e-14);
}

TEST_CASE("norms")
{
    const Mesh m = unit_square(4);
    const FESpace s(m);
    const auto exact_u = [](const Vec2& x) { return Vec2(x.x() * x.y(), 1.0 - x.x() * x.x()); };
    const auto grad_u = [](const Vec2& x) {
        Mat2 g;
        g << x.y(), x.x(), -2 * x.x(), 0.0;
        return g;
    };
    const auto exact_p = [](const Vec2& x) { return 3.0 - x.x() + x.y(); };
    const VectorX u = interpolate_velocity(s, exact_u);
    const VectorX p = interpolate_pressure(s, exact_p);
    const auto e = error_norms(s, u, p, {exact_u, grad_u, exact_p});
    CHECK(e.l2_velocity < 1e-13);
    CHECK(e.h1_velocity < 1e-13);
    CHECK(e.l2_pressure < 1e-13);

    // A nonpolynomial pressure is not reproduced.
    const auto wavy = [](const Vec2& x) { return std::sin(3 * x.x()); };
    CHECK(error_norms(s, u, p, {exact_u, grad_u, wavy}).l2_pressure > 1e-3);

    const double l2 = std::sqrt(integrate(m, [&](const Vec2& x) { return exact_u(x).squaredNorm(); }));
    CHECK(std::abs(l2_norm_velocity(s, u) - l2) < 1e-13);
    const double h1 = std::sqrt(integrate(m, [&](const Vec2& x) { return grad_u(x).squaredNorm(); }));
    CHECK(std::abs(h1_seminorm_velocity(s, u) - h1) < 1e-13);
    CHECK(std::abs(h1_norm_velocity(s, u) - std::hypot(l2, h1)) < 1e-13);
    CHECK(std::abs(l2_norm_pressure(s, p) - std::sqrt(integrate(m, [&](const Vec2& x) { return std::pow(exact_p(x), 2); }))) <
          1e-13);
    const double l4 = std::pow(integrate(m, [&](const Vec2& x) { return std::pow(exact_u(x).squaredNorm(), 2); }), 0.25);
    // |u|^4 has degree 8, beyond the assembly rule.
    CHECK(std::abs(l4_norm_velocity(s, u) - l4) < 1e-9);

    // Gradient of int |u|^4 against central differences.
    std::mt19937_64 rng(9);
    const VectorX v = random_field(s, 12);
    const VectorX g = l4_quartic_gradient(s, v);
    for (int k = 0; k < 5; ++k) {
        const VectorX dir = random_vector(s.velocity_size(), rng);
        const double h = 1e-5;
        const double fd = (std::pow(l4_norm_velocity(s, v + h * dir), 4) - std::pow(l4_norm_velocity(s, v - h * dir), 4)) / (2 * h);
        CHECK(std::abs(fd - g.dot(dir)) < 1e-7 * std::max(1.0, std::abs(fd)));
    }

    // Boundary L2 norm of sigma = y on the outlet x = 1: sqrt(1/3).
    CHECK(std::abs(boundary_l2_norm(s, [](const Vec2& x) { return x.y(); }, BoundaryTag::Outlet) - std::sqrt(1.0 / 3)) <
          1e-14);
}

TEST_CASE("dirichlet elimination and Stokes Poiseuille")
{
    const auto spec = build_domain(straight_channel(1.0, 1.0));
    const FESpace s(generate_mesh(spec, 0.25));
    const SparseMatrix k = assemble_stiffness(s);
    const SparseMatrix b = assemble_divergence(s);
    const auto fixed = s.dirichlet_mask();

    const auto zero = apply_dirichlet(k, VectorX::Zero(s.velocity_size()), fixed, VectorX::Zero(s.velocity_size()));
    CHECK(zero.rhs.norm() == 0.0);

    // Whole channel as one section so the pressure vanishes at x = 1.
    const PoiseuilleFlow p = poiseuille_2d(1, 1.0, 1.0, 1.0, 1.0, RigidTransformd{});
    const VectorX g = interpolate_velocity(s, [&](const Vec2& x) { return p.velocity(x); });
    VectorX values = VectorX::Zero(s.velocity_size());
    for (Index n = 0; n < s.num_nodes(); ++n)
        if (s.node_class(n) == NodeClass::Inlet)
            for (int c = 0; c < 2; ++c) values[s.velocity_dof(c, n)] = g[s.velocity_dof(c, n)];
    const auto sol = solve_saddle(k, b, VectorX::Zero(s.velocity_size()), VectorX::Zero(s.pressure_size()), fixed, values);
    CHECK(sol.relative_residual < 1e-12);
    const auto e = error_norms(s, sol.velocity, sol.pressure,
                               {[&](const Vec2& x) { return p.velocity(x); },
                                [&](const Vec2& x) { return p.velocity_gradient(x); },
                                [&](const Vec2& x) { return p.pressure(x); }});
    CHECK(e.h1_velocity < 1e-10);
    CHECK(e.l2_pressure < 1e-10);
    // p(0, y) = 3 eta Phi l / (2 h^3) = 1.5.
    for (Index v = 0; v < s.num_vertices(); ++v)
        if (std::abs(s.node_point(v).x()) < 1e-14) CHECK(std::abs(sol.pressure[v] - 1.5) < 1e-10);
}

TEST_CASE("threaded assembly is bit-identical to serial")
{
    const FESpace s(unit_square(24));
    REQUIRE(s.num_triangles() >= 1000);
    const VectorX a = random_field(s, 31);
    set_assembly_threads(1);
    const MatrixX k1 = to_dense(assemble_stiffness(s));
    const SparseMatrix c1 = assemble_convection(s, a, ConvectionForm::Skew);
    set_assembly_threads(4);
    CHECK(assembly_threads() == 4);
    const MatrixX k4 = to_dense(assemble_stiffness(s));
    const SparseMatrix c4 = assemble_convection(s, a, ConvectionForm::Skew);
    set_assembly_threads(0);
    CHECK((k1 - k4).cwiseAbs().maxCoeff() == 0.0);
    CHECK((to_dense(c1) - to_dense(c4)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("submesh extraction")
{
    const Mesh m = unit_square(4);
    const auto sub = extract_submesh(m, [&](Index t) { return m.centroid(static_cast<std::size_t>(t)).x() < 0.5; },
                                     BoundaryTag::Outlet);
    CHECK_NOTHROW(check_mesh(sub.mesh));
    CHECK(std::abs(sub.mesh.total_area() - 0.5) < 1e-14);
    CHECK(std::abs(sub.mesh.tag_length(BoundaryTag::Outlet) - 1.0) < 1e-14);
    CHECK(std::abs(sub.mesh.tag_length(BoundaryTag::Inlet) - 1.0) < 1e-14);
    const FESpace parent(m);
    const FESpace child(sub.mesh);
    const auto map = submesh_node_map(child, sub, parent);
    for (Index n = 0; n < child.num_nodes(); ++n)
        CHECK((child.node_point(n) - parent.node_point(map[static_cast<std::size_t>(n)])).norm() < 1e-15);
}
