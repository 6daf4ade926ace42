#include "pipeflow/case_setup.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace pipeflow {

DomainSpec case_domain(const CaseConfig& config)
{
    const DomainConfig& d = config.domain;
    if (d.shape == DomainShape::Straight) return straight_channel(d.length, d.half_height);
    const double deg = std::numbers::pi / 180.0;
    const StraightSection inlet{d.inlet_length, d.inlet_half_height,
                                RigidTransformd::section_frame(Vec2(d.inlet_origin_x, d.inlet_origin_y), d.inlet_angle * deg)};
    const StraightSection outlet{d.outlet_length, d.outlet_half_height,
                                 RigidTransformd::section_frame(Vec2(d.outlet_origin_x, d.outlet_origin_y), d.outlet_angle * deg)};
    return build_domain(make_domain(inlet, outlet, d.tangent_scale));
}

MeshOptions case_mesh_options(const CaseConfig& config, int extra_refinements)
{
    MeshOptions o;
    o.target_h = config.mesh.target_h;
    o.refinement = config.mesh.refinements + extra_refinements;
    o.min_angle_degrees = config.mesh.min_angle;
    return o;
}

namespace {

struct ExactDerivatives {
    Dual2d ux, uy, p;
};

ExactDerivatives differentiate_exact(const ExactConfig& e, const Vec2& x)
{
    const Dual2d dx = Dual2d::variable(x[0], 0);
    const Dual2d dy = Dual2d::variable(x[1], 1);
    return {e.u_x(dx, dy), e.u_y(dx, dy), e.p(dx, dy)};
}

}  // namespace

ExactSolution exact_solution(const ExactConfig& exact)
{
    ExactSolution s;
    s.velocity = [exact](const Vec2& x) { return Vec2(exact.u_x(x), exact.u_y(x)); };
    s.velocity_gradient = [exact](const Vec2& x) {
        const ExactDerivatives d = differentiate_exact(exact, x);
        Mat2 g;
        g.row(0) = d.ux.g.transpose();
        g.row(1) = d.uy.g.transpose();
        return g;
    };
    s.pressure = [exact](const Vec2& x) { return exact.p(x); };
    return s;
}

CaseSetup build_case(const CaseConfig& config)
{
    CaseSetup c;
    c.spec = case_domain(config);
    const PhysicsConfig& ph = config.physics;
    const double eta = ph.eta;
    c.data.eta = eta;
    if (config.exact.present) c.exact = exact_solution(config.exact);
    const ExactConfig ex = config.exact;

    if (ph.force_auto) {
        c.data.force = [ex, eta](const Vec2& x) {
            const ExactDerivatives d = differentiate_exact(ex, x);
            const Vec2 u(d.ux.v, d.uy.v);
            return Vec2(-eta * d.ux.h.trace() + u.dot(d.ux.g) + d.p.g[0],
                        -eta * d.uy.h.trace() + u.dot(d.uy.g) + d.p.g[1]);
        };
    } else if (ph.force_x || ph.force_y) {
        const Expression fx = ph.force_x.value_or(Expression());
        const Expression fy = ph.force_y.value_or(Expression());
        c.data.force = [fx, fy](const Vec2& x) { return Vec2(fx(x), fy(x)); };
    }

    switch (ph.inflow) {
    case InflowKind::None: break;
    case InflowKind::Poiseuille: {
        const PoiseuilleFlow p = inlet_poiseuille(c.spec, ph.inflow_flux, eta);
        c.data.inflow = [p](const Vec2& x) { return p.velocity(x); };
        break;
    }
    case InflowKind::Expression: {
        const Expression gx = ph.inflow_x, gy = ph.inflow_y;
        c.data.inflow = [gx, gy](const Vec2& x) { return Vec2(gx(x), gy(x)); };
        break;
    }
    case InflowKind::Exact: c.data.inflow = c.exact->velocity; break;
    }

    const Vec2 nu = c.spec.outlet_normal;
    if (ph.traction_auto) {
        c.data.traction = [ex, eta, nu](const Vec2& x) {
            const ExactDerivatives d = differentiate_exact(ex, x);
            Mat2 g;
            g.row(0) = d.ux.g.transpose();
            g.row(1) = d.uy.g.transpose();
            return eta * nu.dot(g * nu) - d.p.v;
        };
    } else if (ph.traction) {
        const Expression s = *ph.traction;
        c.data.traction = [s](const Vec2& x) { return s(x); };
    }

    // An exact solution only satisfies the outlet condition when its
    // tangential stress vanishes there and it has no backflow.
    if (config.exact.present) {
        const Vec2 a = c.spec.outlet.to_global({c.spec.outlet.length, -c.spec.outlet.half_height});
        const Vec2 b = c.spec.outlet.to_global({c.spec.outlet.length, c.spec.outlet.half_height});
        const Vec2 tau(-nu[1], nu[0]);
        double shear = 0.0, backflow = 0.0;
        for (int k = 0; k <= 64; ++k) {
            const Vec2 x = a + (k / 64.0) * (b - a);
            const Mat2 g = c.exact->velocity_gradient(x);
            shear = std::max(shear, std::abs(eta * tau.dot(g * nu)));
            backflow = std::max(backflow, -c.exact->velocity(x).dot(nu));
        }
        std::ostringstream msg;
        msg.precision(6);
        if (shear > 1e-10) {
            msg << "exact solution has tangential outlet stress " << shear;
            c.warnings.push_back(msg.str());
            msg.str("");
        }
        if (backflow > 1e-12) {
            msg << "exact solution has outlet backflow " << backflow;
            c.warnings.push_back(msg.str());
        }
    }
    return c;
}

}  // namespace pipeflow
