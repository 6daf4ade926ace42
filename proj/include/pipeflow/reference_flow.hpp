#pragma once

#include "pipeflow/autodiff.hpp"
#include "pipeflow/fem.hpp"

#include <memory>
#include <string>
#include <vector>

namespace pipeflow {

/// Viscosity, body force f, inflow g* and outlet traction sigma*. Empty
/// fields mean zero.
struct ProblemData {
    double eta = 1.0;
    VectorField force;
    VectorField inflow;
    ScalarField traction;

    Vec2 f(const Vec2& x) const { return force ? force(x) : Vec2::Zero(); }
    Vec2 g(const Vec2& x) const { return inflow ? inflow(x) : Vec2::Zero(); }
    double sigma(const Vec2& x) const { return traction ? traction(x) : 0.0; }
};

/// Fully developed flow in a straight 2D section. In local coordinates
/// (x, y) in (0, l) x (-h, h) the velocity is (3 Phi / (4 h^3)) (h^2 - y^2, 0)
/// and the pressure -(3 eta Phi / (2 h^3)) (x - l).
struct PoiseuilleFlow {
    int section = 1;
    double flux = 0.0;
    double half_height = 1.0;
    double length = 1.0;
    double eta = 1.0;
    RigidTransformd transform;

    template <typename Scalar>
    Scalar local_axial_velocity(const Scalar& /*x*/, const Scalar& y) const
    {
        const double h = half_height;
        return (3.0 * flux / (4.0 * h * h * h)) * (h * h - y * y);
    }
    template <typename Scalar>
    Scalar local_pressure(const Scalar& x, const Scalar& /*y*/) const
    {
        const double h = half_height;
        return -(3.0 * eta * flux / (2.0 * h * h * h)) * (x - length);
    }

    /// Global velocity Q^T U(T x) and pressure P(T x), templated so the same
    /// expressions can be differentiated with Dual2.
    template <typename Scalar>
    std::array<Scalar, 2> velocity(const Scalar& x, const Scalar& y) const
    {
        const Mat2& r = transform.rotation;
        const Vec2& t = transform.translation;
        const Scalar lx = r(0, 0) * x + r(0, 1) * y + t[0];
        const Scalar ly = r(1, 0) * x + r(1, 1) * y + t[1];
        const Scalar ua = local_axial_velocity(lx, ly);
        // Q^T (ua, 0): first column of Q^T is the first row of Q.
        return {r(0, 0) * ua, r(0, 1) * ua};
    }
    template <typename Scalar>
    Scalar pressure(const Scalar& x, const Scalar& y) const
    {
        const Mat2& r = transform.rotation;
        const Vec2& t = transform.translation;
        return local_pressure(r(0, 0) * x + r(0, 1) * y + t[0], r(1, 0) * x + r(1, 1) * y + t[1]);
    }

    Vec2 velocity(const Vec2& x) const
    {
        const auto v = velocity(x[0], x[1]);
        return {v[0], v[1]};
    }
    double pressure(const Vec2& x) const { return pressure(x[0], x[1]); }
    Mat2 velocity_gradient(const Vec2& x) const;
    /// Cross-section flux  int_{-h}^{h} U_1 dy  at local station x, by Gauss quadrature.
    double cross_section_flux(double local_x) const;
};

/// Throws ArgumentError for nonpositive h, l, eta or negative flux.
PoiseuilleFlow poiseuille_2d(int section, double flux, double h, double l, double eta,
                             const RigidTransformd& transform);
PoiseuilleFlow inlet_poiseuille(const DomainSpec& spec, double flux, double eta);
PoiseuilleFlow outlet_poiseuille(const DomainSpec& spec, double flux, double eta);

/// -Delta u = 1 in the cross-section, u = 0 on its boundary, in P2.
struct TorsionSolution {
    std::shared_ptr<const FESpace> space;
    VectorX values;  // one per P2 node
    double rho = 0.0;  // int u
    double min_value = 0.0;

    /// Point evaluation; throws ArgumentError outside the mesh.
    double value_at(const Vec2& x) const;
};
TorsionSolution torsion_solve(const Mesh& cross_section);

/// Axial profile (Phi / rho) u of a 3D straight cylinder whose cross-section
/// carries the torsion solution u; pressure slope -eta Phi / rho.
struct Poiseuille3dProfile {
    std::shared_ptr<const TorsionSolution> torsion;
    double flux = 0.0;
    double eta = 1.0;

    double axial_velocity(const Vec2& cross_point) const;
    double pressure_slope() const;
    /// Quadrature of the axial velocity over the cross-section.
    double flux_integral() const;
};
Poiseuille3dProfile poiseuille_3d_profile(std::shared_ptr<const TorsionSolution> torsion, double flux, double eta);

/// Taylor-Couette field (1 - 1/(x^2 + y^2)) (-y, x), harmonic and
/// solenoidal outside the unit disk where it vanishes on the unit circle.
template <typename Scalar>
std::array<Scalar, 2> taylor_couette_velocity(const Scalar& x, const Scalar& y)
{
    const Scalar s = 1.0 - 1.0 / (x * x + y * y);
    return {-(s * y), s * x};
}
struct TaylorCouetteResiduals {
    double laplacian = 0.0;    // max |Delta v0|
    double divergence = 0.0;   // max |div v0|
    double inner_trace = 0.0;  // max |v0| on the unit circle at the sample angles
};
TaylorCouetteResiduals taylor_couette_check(const std::vector<Vec2>& samples);

/// P2 interpolant of g* on inlet nodes, zero elsewhere. Corner nodes take the
/// wall value 0; a warning is appended when |g*| exceeds 1e-12 there.
VectorX inflow_trace(const FESpace& space, const ProblemData& data, std::vector<std::string>* warnings = nullptr);

/// Phi* = -int_I g . nu of a velocity vector. Throws NegativeInflux below -1e-12.
double influx(const FESpace& space, const VectorX& inflow);

/// Discrete harmonic lift: vector Laplace with the given values on all
/// boundary nodes (the values on other DOFs are ignored).
VectorX harmonic_lift(const FESpace& space, const VectorX& boundary_values);

/// Quintic C2 cutoff: 1 for s <= a, 0 for s >= b, monotone in between.
double cutoff(double s, double a, double b);

struct ReferenceReport {
    double compatibility_defect = 0.0;
    double outlet_trace_error = 0.0;
    double inlet_trace_error = 0.0;
    double wall_trace_max = 0.0;
    double divergence_residual = 0.0;
    double normal_derivative = 0.0;
    double pi_trace_error = 0.0;
    double w_star_h1 = 0.0;
    double inflow_lift_h1 = 0.0;
    double bound_ratio = 0.0;  // w_star_h1 / inflow_lift_h1, 0 when there is no inflow
    std::vector<std::string> warnings;
};

struct ReferenceFlow {
    VectorX w_star;   // velocity coefficients
    VectorX pi_star;  // P1 coefficients
    double phi_star = 0.0;
    VectorX w0;  // truncated Stokes velocity on the upstream part (zero elsewhere)
    VectorX j0;  // divergence correction (zero outside the blending zone)
    ReferenceReport report;
};

/// Builds (W*, Pi*) in five steps: truncated Stokes solve, cutoff blend with
/// the outlet Poiseuille flow, divergence correction on the blending zone,
/// pasting, and a harmonic extension of -sigma*. Throws CompatibilityError,
/// NegativeInflux, SingularMatrix.
ReferenceFlow build_reference_flow(const FESpace& space, const DomainSpec& spec, const ProblemData& data);

}  // namespace pipeflow
