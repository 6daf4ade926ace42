#include "pipeflow/reference_flow.hpp"

#include <algorithm>
#include <cmath>

namespace pipeflow {

Mat2 PoiseuilleFlow::velocity_gradient(const Vec2& x) const
{
    const auto v = velocity(Dual2d::variable(x[0], 0), Dual2d::variable(x[1], 1));
    Mat2 g;
    g.row(0) = v[0].g.transpose();
    g.row(1) = v[1].g.transpose();
    return g;
}

double PoiseuilleFlow::cross_section_flux(double local_x) const
{
    const LineRule& rule = gauss4();
    double total = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double y = -half_height + 2.0 * half_height * rule.points[q];
        total += 2.0 * half_height * rule.weights[q] * local_axial_velocity(local_x, y);
    }
    return total;
}

PoiseuilleFlow poiseuille_2d(int section, double flux, double h, double l, double eta, const RigidTransformd& transform)
{
    if (!(h > 0.0) || !(l > 0.0) || !(eta > 0.0))
        throw ArgumentError("Poiseuille flow needs positive half-height, length and viscosity");
    if (flux < 0.0) throw ArgumentError("Poiseuille flux must be non-negative");
    PoiseuilleFlow p;
    p.section = section;
    p.flux = flux;
    p.half_height = h;
    p.length = l;
    p.eta = eta;
    p.transform = transform;
    return p;
}

PoiseuilleFlow inlet_poiseuille(const DomainSpec& spec, double flux, double eta)
{
    return poiseuille_2d(1, flux, spec.inlet.half_height, spec.inlet.length, eta, spec.inlet.transform);
}

PoiseuilleFlow outlet_poiseuille(const DomainSpec& spec, double flux, double eta)
{
    return poiseuille_2d(2, flux, spec.outlet.half_height, spec.outlet.length, eta, spec.outlet.transform);
}

TaylorCouetteResiduals taylor_couette_check(const std::vector<Vec2>& samples)
{
    TaylorCouetteResiduals r;
    for (const Vec2& p : samples) {
        const auto v = taylor_couette_velocity(Dual2d::variable(p[0], 0), Dual2d::variable(p[1], 1));
        const double lap = std::hypot(v[0].h.trace(), v[1].h.trace());
        r.laplacian = std::max(r.laplacian, lap);
        r.divergence = std::max(r.divergence, std::abs(v[0].g[0] + v[1].g[1]));
        const double theta = std::atan2(p[1], p[0]);
        const auto w = taylor_couette_velocity(std::cos(theta), std::sin(theta));
        r.inner_trace = std::max(r.inner_trace, std::hypot(w[0], w[1]));
    }
    return r;
}

}  // namespace pipeflow
