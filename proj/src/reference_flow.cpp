#include "pipeflow/reference_flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pipeflow {

VectorX inflow_trace(const FESpace& space, const ProblemData& data, std::vector<std::string>* warnings)
{
    VectorX g = VectorX::Zero(space.velocity_size());
    if (!data.inflow) return g;
    std::vector<char> on_inlet(static_cast<std::size_t>(space.num_nodes()), 0);
    for (const BoundaryFace& f : space.boundary_faces())
        if (f.tag == BoundaryTag::Inlet)
            for (int n : f.nodes) on_inlet[static_cast<std::size_t>(n)] = 1;
    for (Index n = 0; n < space.num_nodes(); ++n) {
        if (!on_inlet[static_cast<std::size_t>(n)]) continue;
        const Vec2 v = data.g(space.node_point(n));
        if (space.node_class(n) == NodeClass::Inlet) {
            g[space.velocity_dof(0, n)] = v[0];
            g[space.velocity_dof(1, n)] = v[1];
        } else if (v.norm() > 1e-12 && warnings) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "inflow is " << v.norm() << " at inlet corner (" << space.node_point(n)[0] << ", "
                << space.node_point(n)[1] << "); the wall value 0 is used";
            warnings->push_back(msg.str());
        }
    }
    return g;
}

double influx(const FESpace& space, const VectorX& inflow)
{
    const double phi = -boundary_flux(space, inflow, BoundaryTag::Inlet);
    if (phi < -1e-12) throw NegativeInflux("inflow has negative flux " + std::to_string(phi));
    return std::max(phi, 0.0);
}

VectorX harmonic_lift(const FESpace& space, const VectorX& boundary_values)
{
    const SparseMatrix k = assemble_stiffness(space);
    const ReducedSystem sys =
        apply_dirichlet(k, VectorX::Zero(space.velocity_size()), space.boundary_mask(), boundary_values);
    if (sys.matrix.rows() == 0) return sys.fixed_values;
    return sys.expand(lu_factorize(sys.matrix).solve(sys.rhs));
}

double cutoff(double s, double a, double b)
{
    const double t = std::clamp((s - a) / (b - a), 0.0, 1.0);
    return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

ReferenceFlow build_reference_flow(const FESpace& space, const DomainSpec& spec, const ProblemData& data)
{
    ReferenceFlow ref;
    ReferenceReport& rep = ref.report;
    const Mesh& mesh = space.mesh();
    const Index nn = space.num_nodes();

    const VectorX g = inflow_trace(space, data, &rep.warnings);
    ref.phi_star = influx(space, g);
    const PoiseuilleFlow outlet = outlet_poiseuille(spec, ref.phi_star, data.eta);
    const double l2 = spec.outlet.length;

    // (a) Stokes on the part upstream of x2 = l2 / 3, with the outlet Poiseuille
    // flow prescribed on the cut.
    const auto upstream = [&](Index t) { return mesh.regions[static_cast<std::size_t>(t)] != Region::Omega2; };
    const Submesh star = extract_submesh(mesh, upstream, BoundaryTag::Outlet);
    const FESpace star_space(star.mesh);
    const std::vector<Index> star_map = submesh_node_map(star_space, star, space);

    VectorX star_data = VectorX::Zero(star_space.velocity_size());
    for (Index n = 0; n < star_space.num_nodes(); ++n) {
        const Index pn = star_map[static_cast<std::size_t>(n)];
        Vec2 v = Vec2::Zero();
        switch (star_space.node_class(n)) {
        case NodeClass::Inlet: v = {g[space.velocity_dof(0, pn)], g[space.velocity_dof(1, pn)]}; break;
        case NodeClass::Outlet: v = outlet.velocity(star_space.node_point(n)); break;
        default: break;
        }
        star_data[star_space.velocity_dof(0, n)] = v[0];
        star_data[star_space.velocity_dof(1, n)] = v[1];
    }
    rep.compatibility_defect = std::abs(boundary_flux(star_space, star_data, BoundaryTag::Inlet) +
                                        boundary_flux(star_space, star_data, BoundaryTag::Outlet));
    if (rep.compatibility_defect > 1e-10)
        throw CompatibilityError("truncated Stokes data has net flux " + std::to_string(rep.compatibility_defect));

    const SparseMatrix star_k = assemble_stiffness(star_space);
    const SparseMatrix star_b = assemble_divergence(star_space);
    const SaddleSolution w0 =
        solve_saddle(data.eta * star_k, star_b, VectorX::Zero(star_space.velocity_size()),
                     VectorX::Zero(star_space.pressure_size()), star_space.boundary_mask(), star_data, 0);

    ref.w0 = VectorX::Zero(space.velocity_size());
    for (Index n = 0; n < star_space.num_nodes(); ++n)
        for (int c = 0; c < 2; ++c)
            ref.w0[space.velocity_dof(c, star_map[static_cast<std::size_t>(n)])] = w0.velocity[star_space.velocity_dof(c, n)];

    // (b) Blend: zeta = 1 upstream of the outlet section, quintic cutoff in
    // local x2 inside the blending zone, zero downstream of it.
    std::vector<char> in_star(static_cast<std::size_t>(nn), 0);
    std::vector<char> in_outlet(static_cast<std::size_t>(nn), 0);
    for (Index t = 0; t < space.num_triangles(); ++t) {
        const Region r = mesh.regions[static_cast<std::size_t>(t)];
        for (int n : space.element_nodes(t)) {
            if (r != Region::Omega2) in_star[static_cast<std::size_t>(n)] = 1;
            if (r == Region::Omega2 || r == Region::OmegaSharp) in_outlet[static_cast<std::size_t>(n)] = 1;
        }
    }
    VectorX blended = VectorX::Zero(space.velocity_size());
    for (Index n = 0; n < nn; ++n) {
        const Vec2& x = space.node_point(n);
        const Vec2 v = outlet.velocity(x);
        double zeta = 0.0;
        if (in_star[static_cast<std::size_t>(n)])
            zeta = in_outlet[static_cast<std::size_t>(n)] ? cutoff(spec.outlet.to_local(x)[0], l2 / 12.0, l2 / 4.0) : 1.0;
        for (int c = 0; c < 2; ++c) {
            const Index dof = space.velocity_dof(c, n);
            blended[dof] = zeta * ref.w0[dof] + (1.0 - zeta) * v[c];
        }
    }
    // Exact trace data where the blend should reproduce it.
    for (Index n = 0; n < nn; ++n) {
        const NodeClass cls = space.node_class(n);
        if (cls == NodeClass::Inlet || cls == NodeClass::Wall)
            for (int c = 0; c < 2; ++c) blended[space.velocity_dof(c, n)] = g[space.velocity_dof(c, n)];
    }

    // (c) Divergence correction on the blending zone: zero trace, discrete
    // divergence cancelling the defect of the blend against every pressure
    // basis function touching the zone.
    const SparseMatrix b = assemble_divergence(space);
    const VectorX defect = b * blended;
    const auto sharp = [&](Index t) { return mesh.regions[static_cast<std::size_t>(t)] == Region::OmegaSharp; };
    const Submesh zone = extract_submesh(mesh, sharp, BoundaryTag::Wall);
    ref.j0 = VectorX::Zero(space.velocity_size());
    if (!zone.mesh.triangles.empty()) {
        const FESpace zone_space(zone.mesh);
        const std::vector<Index> zone_map = submesh_node_map(zone_space, zone, space);
        VectorX rhs(zone_space.pressure_size());
        for (Index k = 0; k < zone_space.pressure_size(); ++k) rhs[k] = -defect[zone.vertex_map[static_cast<std::size_t>(k)]];
        const SaddleSolution j0 = solve_saddle(data.eta * assemble_stiffness(zone_space), assemble_divergence(zone_space),
                                               VectorX::Zero(zone_space.velocity_size()), rhs,
                                               zone_space.boundary_mask(), VectorX::Zero(zone_space.velocity_size()), 0);
        for (Index n = 0; n < zone_space.num_nodes(); ++n)
            for (int c = 0; c < 2; ++c)
                ref.j0[space.velocity_dof(c, zone_map[static_cast<std::size_t>(n)])] = j0.velocity[zone_space.velocity_dof(c, n)];
    }

    // (d) Paste.
    ref.w_star = blended + ref.j0;

    // (e) Pi*: P1 Laplace, -sigma* on outlet vertices, natural elsewhere.
    std::vector<char> outlet_vertex(static_cast<std::size_t>(space.pressure_size()), 0);
    for (const BoundaryFace& f : space.boundary_faces())
        if (f.tag == BoundaryTag::Outlet) outlet_vertex[static_cast<std::size_t>(f.nodes[0])] = outlet_vertex[static_cast<std::size_t>(f.nodes[2])] = 1;
    VectorX pi_values = VectorX::Zero(space.pressure_size());
    for (Index v = 0; v < space.pressure_size(); ++v)
        if (outlet_vertex[static_cast<std::size_t>(v)]) pi_values[v] = -data.sigma(space.node_point(v));
    if (pi_values.cwiseAbs().maxCoeff() == 0.0) {
        ref.pi_star = VectorX::Zero(space.pressure_size());
    } else {
        const ReducedSystem pi_sys = apply_dirichlet(assemble_pressure_stiffness(space),
                                                     VectorX::Zero(space.pressure_size()), outlet_vertex, pi_values);
        ref.pi_star = pi_sys.expand(lu_factorize(pi_sys.matrix).solve(pi_sys.rhs));
    }

    // Report.
    const VectorX div = b * ref.w_star;
    rep.divergence_residual = div.size() ? div.cwiseAbs().maxCoeff() : 0.0;
    for (const BoundaryFace& f : space.boundary_faces()) {
        for (int n : f.nodes) {
            const Vec2 w(ref.w_star[space.velocity_dof(0, n)], ref.w_star[space.velocity_dof(1, n)]);
            if (f.tag == BoundaryTag::Outlet)
                rep.outlet_trace_error = std::max(rep.outlet_trace_error, (w - outlet.velocity(space.node_point(n))).norm());
            else if (f.tag == BoundaryTag::Inlet) {
                const Vec2 gv(g[space.velocity_dof(0, n)], g[space.velocity_dof(1, n)]);
                rep.inlet_trace_error = std::max(rep.inlet_trace_error, (w - gv).norm());
            } else {
                rep.wall_trace_max = std::max(rep.wall_trace_max, w.norm());
            }
        }
        if (f.tag == BoundaryTag::Outlet) {
            const auto& tri = mesh.triangles[static_cast<std::size_t>(f.triangle)];
            const ElementGeometry& eg = space.geometry(f.triangle);
            const LineRule& rule = gauss4();
            for (double t : rule.points) {
                const Vec2 x = space.node_point(f.nodes[0]) + t * (space.node_point(f.nodes[2]) - space.node_point(f.nodes[0]));
                const Vec2 d = x - mesh.vertices[tri[0]];
                Eigen::Vector3d l;
                l[1] = eg.grad_bary.row(1).dot(d);
                l[2] = eg.grad_bary.row(2).dot(d);
                l[0] = 1.0 - l[1] - l[2];
                const Mat2 grad = velocity_gradient_at(space, ref.w_star, f.triangle, l);
                rep.normal_derivative = std::max(rep.normal_derivative, std::abs(f.normal.dot(grad * f.normal)));
            }
            for (int n : {f.nodes[0], f.nodes[2]})
                rep.pi_trace_error = std::max(rep.pi_trace_error, std::abs(ref.pi_star[n] + data.sigma(space.node_point(n))));
        }
    }
    rep.w_star_h1 = h1_norm_velocity(space, ref.w_star);
    rep.inflow_lift_h1 = g.cwiseAbs().maxCoeff() > 0.0 ? h1_norm_velocity(space, harmonic_lift(space, g)) : 0.0;
    rep.bound_ratio = rep.inflow_lift_h1 > 0.0 ? rep.w_star_h1 / rep.inflow_lift_h1 : 0.0;
    return ref;
}

}  // namespace pipeflow
