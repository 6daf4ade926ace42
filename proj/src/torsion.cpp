#include "pipeflow/reference_flow.hpp"

#include <algorithm>

namespace pipeflow {

TorsionSolution torsion_solve(const Mesh& cross_section)
{
    auto space = std::make_shared<FESpace>(cross_section);
    const SparseMatrix k = assemble_scalar_stiffness(*space);
    const SparseMatrix m = assemble_scalar_mass(*space);
    const VectorX load = m * VectorX::Ones(space->num_nodes());

    std::vector<char> fixed(static_cast<std::size_t>(space->num_nodes()), 0);
    for (Index n = 0; n < space->num_nodes(); ++n)
        if (space->node_class(n) != NodeClass::Interior) fixed[static_cast<std::size_t>(n)] = 1;
    const ReducedSystem sys = apply_dirichlet(k, load, fixed, VectorX::Zero(space->num_nodes()));
    const VectorX x = lu_factorize(sys.matrix).solve(sys.rhs);

    TorsionSolution sol;
    sol.values = sys.expand(x);
    // int u = 1^T M u.
    sol.rho = VectorX::Ones(space->num_nodes()).dot(m * sol.values);
    sol.min_value = sol.values.minCoeff();
    sol.space = std::move(space);
    return sol;
}

double TorsionSolution::value_at(const Vec2& x) const
{
    const Mesh& mesh = space->mesh();
    for (Index t = 0; t < space->num_triangles(); ++t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        const ElementGeometry& g = space->geometry(t);
        Eigen::Vector3d l;
        const Vec2 d = x - mesh.vertices[tri[0]];
        l[1] = g.grad_bary.row(1).dot(d);
        l[2] = g.grad_bary.row(2).dot(d);
        l[0] = 1.0 - l[1] - l[2];
        if (l.minCoeff() < -1e-12) continue;
        const auto phi = p2_values(l);
        const auto& nodes = space->element_nodes(t);
        double v = 0.0;
        for (int i = 0; i < 6; ++i) v += phi[i] * values[nodes[i]];
        return v;
    }
    throw ArgumentError("point outside the cross-section mesh");
}

double Poiseuille3dProfile::axial_velocity(const Vec2& cross_point) const
{
    return flux / torsion->rho * torsion->value_at(cross_point);
}

double Poiseuille3dProfile::pressure_slope() const { return -eta * flux / torsion->rho; }

double Poiseuille3dProfile::flux_integral() const
{
    const FESpace& s = *torsion->space;
    const SparseMatrix m = assemble_scalar_mass(s);
    return flux / torsion->rho * VectorX::Ones(s.num_nodes()).dot(m * torsion->values);
}

Poiseuille3dProfile poiseuille_3d_profile(std::shared_ptr<const TorsionSolution> torsion, double flux, double eta)
{
    if (!torsion || !(torsion->rho > 0.0)) throw ArgumentError("torsion solution with positive rho required");
    Poiseuille3dProfile p;
    p.torsion = std::move(torsion);
    p.flux = flux;
    p.eta = eta;
    return p;
}

}  // namespace pipeflow
