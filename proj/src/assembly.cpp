#include "pipeflow/fem.hpp"

namespace pipeflow {

namespace {

struct BasisTable {
    std::vector<std::array<double, 6>> phi;
    std::vector<Eigen::Matrix<double, 6, 3>> dphi_bary;
    const TriangleRule* rule = nullptr;
};

const BasisTable& basis_table()
{
    static const BasisTable table = [] {
        BasisTable t;
        t.rule = &dunavant6();
        for (const auto& l : t.rule->bary) {
            t.phi.push_back(p2_values(l));
            t.dphi_bary.push_back(p2_bary_derivatives(l));
        }
        return t;
    }();
    return table;
}

struct LocalBlock {
    std::vector<Index> rows;
    std::vector<Index> cols;
    MatrixX values;
};

SparseMatrix assemble_blocks(Index nrows, Index ncols, Index count,
                             const std::function<void(Index, LocalBlock&)>& kernel)
{
    std::vector<LocalBlock> blocks(static_cast<std::size_t>(count));
    for_each_element(count, [&](Index t) { kernel(t, blocks[static_cast<std::size_t>(t)]); });
    std::vector<Triplet> triplets;
    std::size_t total = 0;
    for (const auto& b : blocks) total += static_cast<std::size_t>(b.values.size());
    triplets.reserve(total);
    for (const auto& b : blocks)
        for (std::size_t i = 0; i < b.rows.size(); ++i)
            for (std::size_t j = 0; j < b.cols.size(); ++j)
                triplets.push_back({b.rows[i], b.cols[j], b.values(static_cast<Index>(i), static_cast<Index>(j))});
    return assemble_from_triplets(nrows, ncols, triplets);
}

std::vector<Index> velocity_local_dofs(const FESpace& space, Index t)
{
    const auto& nodes = space.element_nodes(t);
    std::vector<Index> dofs(12);
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < 6; ++i) dofs[static_cast<std::size_t>(c * 6 + i)] = space.velocity_dof(c, nodes[i]);
    return dofs;
}

std::vector<Index> scalar_local_dofs(const FESpace& space, Index t)
{
    const auto& nodes = space.element_nodes(t);
    return {nodes.begin(), nodes.end()};
}

std::vector<Index> pressure_local_dofs(const FESpace& space, Index t)
{
    const auto& nodes = space.element_nodes(t);
    return {nodes[0], nodes[1], nodes[2]};
}

Eigen::Matrix<double, 6, 2> physical_gradients(const BasisTable& tab, std::size_t q, const ElementGeometry& g)
{
    return tab.dphi_bary[q] * g.grad_bary;
}

// Values of a P2 velocity field at the quadrature points of element t.
struct ElementField {
    std::array<double, 6> c0{};
    std::array<double, 6> c1{};
};

ElementField gather(const FESpace& space, const VectorX& u, Index t)
{
    ElementField f;
    const auto& nodes = space.element_nodes(t);
    for (int i = 0; i < 6; ++i) {
        f.c0[i] = u[space.velocity_dof(0, nodes[i])];
        f.c1[i] = u[space.velocity_dof(1, nodes[i])];
    }
    return f;
}

Vec2 field_value(const ElementField& f, const std::array<double, 6>& phi)
{
    Vec2 v = Vec2::Zero();
    for (int i = 0; i < 6; ++i) {
        v[0] += phi[i] * f.c0[i];
        v[1] += phi[i] * f.c1[i];
    }
    return v;
}

Mat2 field_gradient(const ElementField& f, const Eigen::Matrix<double, 6, 2>& grad)
{
    Mat2 g = Mat2::Zero();
    for (int i = 0; i < 6; ++i) {
        g.row(0) += f.c0[i] * grad.row(i);
        g.row(1) += f.c1[i] * grad.row(i);
    }
    return g;
}

Vec2 face_value(const FESpace& space, const VectorX& u, const BoundaryFace& f, const std::array<double, 3>& psi)
{
    Vec2 v = Vec2::Zero();
    for (int i = 0; i < 3; ++i) {
        v[0] += psi[i] * u[space.velocity_dof(0, f.nodes[i])];
        v[1] += psi[i] * u[space.velocity_dof(1, f.nodes[i])];
    }
    return v;
}

Vec2 face_point(const FESpace& space, const BoundaryFace& f, double t)
{
    const Vec2& a = space.node_point(f.nodes[0]);
    const Vec2& b = space.node_point(f.nodes[2]);
    return a + t * (b - a);
}

}  // namespace

SparseMatrix assemble_scalar_stiffness(const FESpace& space)
{
    const BasisTable& tab = basis_table();
    return assemble_blocks(space.num_nodes(), space.num_nodes(), space.num_triangles(), [&](Index t, LocalBlock& b) {
        b.rows = scalar_local_dofs(space, t);
        b.cols = b.rows;
        b.values = MatrixX::Zero(6, 6);
        const ElementGeometry& g = space.geometry(t);
        for (std::size_t q = 0; q < tab.phi.size(); ++q) {
            const auto grad = physical_gradients(tab, q, g);
            b.values.noalias() += (g.area * tab.rule->weights[q]) * (grad * grad.transpose());
        }
    });
}

SparseMatrix assemble_scalar_mass(const FESpace& space)
{
    const BasisTable& tab = basis_table();
    return assemble_blocks(space.num_nodes(), space.num_nodes(), space.num_triangles(), [&](Index t, LocalBlock& b) {
        b.rows = scalar_local_dofs(space, t);
        b.cols = b.rows;
        b.values = MatrixX::Zero(6, 6);
        const double area = space.geometry(t).area;
        for (std::size_t q = 0; q < tab.phi.size(); ++q) {
            const Eigen::Map<const Eigen::Matrix<double, 6, 1>> phi(tab.phi[q].data());
            b.values.noalias() += (area * tab.rule->weights[q]) * (phi * phi.transpose());
        }
    });
}

namespace {

SparseMatrix expand_to_velocity(const FESpace& space, const SparseMatrix& scalar)
{
    const Index nn = space.num_nodes();
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(2 * scalar.nonZeros()));
    for (int c = 0; c < 2; ++c)
        for (Index i = 0; i < nn; ++i)
            for (SparseMatrix::InnerIterator it(scalar, i); it; ++it)
                t.push_back({c * nn + i, c * nn + it.col(), it.value()});
    return assemble_from_triplets(2 * nn, 2 * nn, t);
}

}  // namespace

SparseMatrix assemble_stiffness(const FESpace& space)
{
    return expand_to_velocity(space, assemble_scalar_stiffness(space));
}

SparseMatrix assemble_velocity_mass(const FESpace& space)
{
    return expand_to_velocity(space, assemble_scalar_mass(space));
}

SparseMatrix assemble_pressure_mass(const FESpace& space)
{
    return assemble_blocks(space.pressure_size(), space.pressure_size(), space.num_triangles(),
                           [&](Index t, LocalBlock& b) {
                               b.rows = pressure_local_dofs(space, t);
                               b.cols = b.rows;
                               const double a = space.geometry(t).area;
                               b.values = MatrixX::Constant(3, 3, a / 12.0);
                               b.values.diagonal().setConstant(a / 6.0);
                           });
}

SparseMatrix assemble_pressure_stiffness(const FESpace& space)
{
    return assemble_blocks(space.pressure_size(), space.pressure_size(), space.num_triangles(),
                           [&](Index t, LocalBlock& b) {
                               b.rows = pressure_local_dofs(space, t);
                               b.cols = b.rows;
                               const ElementGeometry& g = space.geometry(t);
                               b.values = g.area * (g.grad_bary * g.grad_bary.transpose());
                           });
}

SparseMatrix assemble_divergence(const FESpace& space)
{
    const BasisTable& tab = basis_table();
    return assemble_blocks(space.pressure_size(), space.velocity_size(), space.num_triangles(),
                           [&](Index t, LocalBlock& b) {
                               b.rows = pressure_local_dofs(space, t);
                               b.cols = velocity_local_dofs(space, t);
                               b.values = MatrixX::Zero(3, 12);
                               const ElementGeometry& g = space.geometry(t);
                               for (std::size_t q = 0; q < tab.phi.size(); ++q) {
                                   const auto grad = physical_gradients(tab, q, g);
                                   const Eigen::Vector3d& r = tab.rule->bary[q];
                                   const double w = g.area * tab.rule->weights[q];
                                   for (int k = 0; k < 3; ++k)
                                       for (int c = 0; c < 2; ++c)
                                           for (int j = 0; j < 6; ++j) b.values(k, c * 6 + j) += w * r[k] * grad(j, c);
                               }
                           });
}

SparseMatrix assemble_boundary_mass(const FESpace& space, BoundaryTag tag,
                                    const std::function<double(const Vec2&, const Vec2&, double, std::size_t)>& weight)
{
    const LineRule& rule = gauss4();
    const Index nn = space.num_nodes();
    std::vector<Triplet> trip;
    const auto& faces = space.boundary_faces();
    for (std::size_t fi = 0; fi < faces.size(); ++fi) {
        const BoundaryFace& f = faces[fi];
        if (f.tag != tag) continue;
        Eigen::Matrix3d local = Eigen::Matrix3d::Zero();
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double t = rule.points[q];
            const auto psi = p2_edge_values(t);
            const double w = f.length * rule.weights[q] * weight(face_point(space, f, t), f.normal, t, fi);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) local(i, j) += w * psi[i] * psi[j];
        }
        for (int c = 0; c < 2; ++c)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) trip.push_back({c * nn + f.nodes[i], c * nn + f.nodes[j], local(i, j)});
    }
    return assemble_from_triplets(2 * nn, 2 * nn, trip);
}

namespace {

// (a . nu) boundary mass over every boundary face.
SparseMatrix flux_weighted_boundary_mass(const FESpace& space, const VectorX& a)
{
    const LineRule& rule = gauss4();
    const Index nn = space.num_nodes();
    std::vector<Triplet> trip;
    for (const BoundaryFace& f : space.boundary_faces()) {
        Eigen::Matrix3d local = Eigen::Matrix3d::Zero();
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto psi = p2_edge_values(rule.points[q]);
            const double w = f.length * rule.weights[q] * face_value(space, a, f, psi).dot(f.normal);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) local(i, j) += w * psi[i] * psi[j];
        }
        for (int c = 0; c < 2; ++c)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) trip.push_back({c * nn + f.nodes[i], c * nn + f.nodes[j], local(i, j)});
    }
    return assemble_from_triplets(2 * nn, 2 * nn, trip);
}

}  // namespace

SparseMatrix assemble_convection(const FESpace& space, const VectorX& a, ConvectionForm form)
{
    const BasisTable& tab = basis_table();
    const Index nv = space.velocity_size();
    SparseMatrix c = assemble_blocks(nv, nv, space.num_triangles(), [&](Index t, LocalBlock& b) {
        b.rows = velocity_local_dofs(space, t);
        b.cols = b.rows;
        Eigen::Matrix<double, 6, 6> s = Eigen::Matrix<double, 6, 6>::Zero();
        const ElementGeometry& g = space.geometry(t);
        const ElementField af = gather(space, a, t);
        for (std::size_t q = 0; q < tab.phi.size(); ++q) {
            const auto grad = physical_gradients(tab, q, g);
            const Vec2 av = field_value(af, tab.phi[q]);
            const Eigen::Matrix<double, 6, 1> adv = grad * av;  // a . grad phi_j
            const Eigen::Map<const Eigen::Matrix<double, 6, 1>> phi(tab.phi[q].data());
            s.noalias() += (g.area * tab.rule->weights[q]) * (phi * adv.transpose());
        }
        if (form == ConvectionForm::Skew) s = 0.5 * (s - s.transpose()).eval();
        b.values = MatrixX::Zero(12, 12);
        b.values.topLeftCorner(6, 6) = s;
        b.values.bottomRightCorner(6, 6) = s;
    });
    if (form == ConvectionForm::Skew) {
        SparseMatrix boundary = flux_weighted_boundary_mass(space, a);
        c = c + 0.5 * boundary;
    }
    return c;
}

SparseMatrix assemble_convection_derivative(const FESpace& space, const VectorX& u, ConvectionForm form)
{
    const BasisTable& tab = basis_table();
    const Index nv = space.velocity_size();
    SparseMatrix n = assemble_blocks(nv, nv, space.num_triangles(), [&](Index t, LocalBlock& b) {
        b.rows = velocity_local_dofs(space, t);
        b.cols = b.rows;
        b.values = MatrixX::Zero(12, 12);
        const ElementGeometry& g = space.geometry(t);
        const ElementField uf = gather(space, u, t);
        const double half = form == ConvectionForm::Skew ? 0.5 : 1.0;
        for (std::size_t q = 0; q < tab.phi.size(); ++q) {
            const auto grad = physical_gradients(tab, q, g);
            const Vec2 uv = field_value(uf, tab.phi[q]);
            const Mat2 gu = field_gradient(uf, grad);
            const double w = g.area * tab.rule->weights[q];
            const auto& phi = tab.phi[q];
            for (int c = 0; c < 2; ++c)
                for (int i = 0; i < 6; ++i)
                    for (int d = 0; d < 2; ++d)
                        for (int j = 0; j < 6; ++j) {
                            double v = half * phi[j] * gu(c, d) * phi[i];
                            if (form == ConvectionForm::Skew) v -= 0.5 * phi[j] * grad(i, d) * uv[c];
                            b.values(c * 6 + i, d * 6 + j) += w * v;
                        }
        }
    });
    if (form == ConvectionForm::Skew) {
        const LineRule& rule = gauss4();
        const Index nn = space.num_nodes();
        std::vector<Triplet> trip;
        for (const BoundaryFace& f : space.boundary_faces()) {
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const auto psi = p2_edge_values(rule.points[q]);
                const Vec2 uv = face_value(space, u, f, psi);
                const double w = 0.5 * f.length * rule.weights[q];
                for (int c = 0; c < 2; ++c)
                    for (int i = 0; i < 3; ++i)
                        for (int d = 0; d < 2; ++d)
                            for (int j = 0; j < 3; ++j)
                                trip.push_back({c * nn + f.nodes[i], d * nn + f.nodes[j],
                                                w * psi[j] * f.normal[d] * uv[c] * psi[i]});
            }
        }
        n = n + assemble_from_triplets(nv, nv, trip);
    }
    return n;
}

double convection_form(const FESpace& space, const VectorX& a, const VectorX& b, const VectorX& c, ConvectionForm form)
{
    const BasisTable& tab = basis_table();
    double total = 0.0;
    for (Index t = 0; t < space.num_triangles(); ++t) {
        const ElementGeometry& g = space.geometry(t);
        const ElementField af = gather(space, a, t), bf = gather(space, b, t), cf = gather(space, c, t);
        for (std::size_t q = 0; q < tab.phi.size(); ++q) {
            const auto grad = physical_gradients(tab, q, g);
            const Vec2 av = field_value(af, tab.phi[q]);
            const Vec2 bv = field_value(bf, tab.phi[q]);
            const Vec2 cv = field_value(cf, tab.phi[q]);
            const Vec2 a_grad_b = field_gradient(bf, grad) * av;
            double v = a_grad_b.dot(cv);
            if (form == ConvectionForm::Skew) {
                const Vec2 a_grad_c = field_gradient(cf, grad) * av;
                v = 0.5 * v - 0.5 * a_grad_c.dot(bv);
            }
            total += g.area * tab.rule->weights[q] * v;
        }
    }
    if (form == ConvectionForm::Skew) {
        const LineRule& rule = gauss4();
        for (const BoundaryFace& f : space.boundary_faces())
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                const auto psi = p2_edge_values(rule.points[q]);
                total += 0.5 * f.length * rule.weights[q] * face_value(space, a, f, psi).dot(f.normal) *
                         face_value(space, b, f, psi).dot(face_value(space, c, f, psi));
            }
    }
    return total;
}

DdnTerm assemble_ddn_boundary(const FESpace& space, const VectorX& w, const VectorX& wstar)
{
    const auto& faces = space.boundary_faces();
    DdnTerm term;
    term.matrix = assemble_boundary_mass(space, BoundaryTag::Outlet,
                                         [&](const Vec2&, const Vec2& normal, double t, std::size_t fi) {
                                             const Vec2 wv = face_value(space, w, faces[fi], p2_edge_values(t));
                                             return 0.5 * negative_part(wv.dot(normal));
                                         });
    term.load = term.matrix * wstar;
    return term;
}

SparseMatrix assemble_ddn_derivative(const FESpace& space, const VectorX& w, const VectorX& d)
{
    const LineRule& rule = gauss4();
    const Index nn = space.num_nodes();
    std::vector<Triplet> trip;
    for (const BoundaryFace& f : space.boundary_faces()) {
        if (f.tag != BoundaryTag::Outlet) continue;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto psi = p2_edge_values(rule.points[q]);
            const double slope = negative_part_slope(face_value(space, w, f, psi).dot(f.normal));
            if (slope == 0.0) continue;
            const Vec2 dv = face_value(space, d, f, psi);
            const double wq = 0.5 * f.length * rule.weights[q] * slope;
            for (int c = 0; c < 2; ++c)
                for (int i = 0; i < 3; ++i)
                    for (int e = 0; e < 2; ++e)
                        for (int j = 0; j < 3; ++j)
                            trip.push_back({c * nn + f.nodes[i], e * nn + f.nodes[j],
                                            wq * psi[j] * f.normal[e] * dv[c] * psi[i]});
        }
    }
    return assemble_from_triplets(2 * nn, 2 * nn, trip);
}

VectorX assemble_outlet_traction(const FESpace& space, const ScalarField& sigma)
{
    const LineRule& rule = gauss4();
    VectorX load = VectorX::Zero(space.velocity_size());
    for (const BoundaryFace& f : space.boundary_faces()) {
        if (f.tag != BoundaryTag::Outlet) continue;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double t = rule.points[q];
            const auto psi = p2_edge_values(t);
            const double s = f.length * rule.weights[q] * sigma(face_point(space, f, t));
            for (int c = 0; c < 2; ++c)
                for (int i = 0; i < 3; ++i) load[space.velocity_dof(c, f.nodes[i])] += s * psi[i] * f.normal[c];
        }
    }
    return load;
}

VectorX assemble_body_force(const FESpace& space, const VectorField& f)
{
    const BasisTable& tab = basis_table();
    const Mesh& mesh = space.mesh();
    VectorX load = VectorX::Zero(space.velocity_size());
    for (Index t = 0; t < space.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        const auto& nodes = space.element_nodes(t);
        const double area = space.geometry(t).area;
        for (std::size_t q = 0; q < tab.phi.size(); ++q) {
            const Eigen::Vector3d& l = tab.rule->bary[q];
            const Vec2 x = l[0] * mesh.vertices[tri[0]] + l[1] * mesh.vertices[tri[1]] + l[2] * mesh.vertices[tri[2]];
            const Vec2 fv = f(x) * (area * tab.rule->weights[q]);
            for (int i = 0; i < 6; ++i)
                for (int c = 0; c < 2; ++c) load[space.velocity_dof(c, nodes[i])] += fv[c] * tab.phi[q][i];
        }
    }
    return load;
}

double boundary_flux(const FESpace& space, const VectorX& u, BoundaryTag tag)
{
    const LineRule& rule = gauss4();
    double flux = 0.0;
    for (const BoundaryFace& f : space.boundary_faces()) {
        if (f.tag != tag) continue;
        for (std::size_t q = 0; q < rule.points.size(); ++q)
            flux += f.length * rule.weights[q] * face_value(space, u, f, p2_edge_values(rule.points[q])).dot(f.normal);
    }
    return flux;
}

}  // namespace pipeflow
