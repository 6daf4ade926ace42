#pragma once

#include "pipeflow/geometry.hpp"
#include "pipeflow/linalg.hpp"
#include "pipeflow/quadrature.hpp"

#include <array>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

namespace pipeflow {

/// Constraint class of a quadratic node. Corner nodes shared by the inlet (or
/// outlet) and a wall are Wall.
enum class NodeClass : std::uint8_t { Interior, Inlet, Wall, Outlet };

struct BoundaryFace {
    std::array<int, 3> nodes{};  // start vertex, midpoint, end vertex
    BoundaryTag tag = BoundaryTag::Wall;
    Vec2 normal = Vec2::Zero();  // outward unit normal
    double length = 0.0;
    int triangle = -1;
};

/// Affine element data: barycentric gradients (rows) and area.
struct ElementGeometry {
    Eigen::Matrix<double, 3, 2> grad_bary;
    double area = 0.0;
};

/// Taylor-Hood P2/P1 space. Velocity DOF (c, node) has index c * num_nodes()
/// + node; nodes 0..nv-1 are vertices, nv + e is the midpoint of edge e.
/// Pressure DOFs are the vertices.
class FESpace {
public:
    explicit FESpace(Mesh mesh);

    const Mesh& mesh() const { return mesh_; }
    Index num_vertices() const { return static_cast<Index>(mesh_.vertices.size()); }
    Index num_edges() const { return static_cast<Index>(edges_.size()); }
    Index num_nodes() const { return num_vertices() + num_edges(); }
    Index num_triangles() const { return static_cast<Index>(mesh_.triangles.size()); }
    Index velocity_size() const { return 2 * num_nodes(); }
    Index pressure_size() const { return num_vertices(); }
    Index total_size() const { return velocity_size() + pressure_size(); }
    Index velocity_dof(int component, Index node) const { return component * num_nodes() + node; }

    const std::array<int, 6>& element_nodes(Index t) const { return element_nodes_[static_cast<std::size_t>(t)]; }
    const ElementGeometry& geometry(Index t) const { return geometry_[static_cast<std::size_t>(t)]; }
    const std::array<int, 2>& edge(Index e) const { return edges_[static_cast<std::size_t>(e)]; }
    /// Edge id for a vertex pair, -1 if absent.
    Index edge_index(int a, int b) const;
    const Vec2& node_point(Index node) const { return node_points_[static_cast<std::size_t>(node)]; }
    NodeClass node_class(Index node) const { return node_class_[static_cast<std::size_t>(node)]; }
    const std::vector<BoundaryFace>& boundary_faces() const { return faces_; }

    /// Velocity DOF mask, set on Inlet and Wall nodes.
    std::vector<char> dirichlet_mask() const;
    /// Velocity DOF mask set on every boundary node.
    std::vector<char> boundary_mask() const;
    /// Unit outward outlet normal; throws MeshError if the outlet is not straight.
    Vec2 outlet_normal() const;

private:
    Mesh mesh_;
    std::vector<std::array<int, 2>> edges_;
    std::unordered_map<std::uint64_t, Index> edge_lookup_;
    std::vector<std::array<int, 6>> element_nodes_;
    std::vector<ElementGeometry> geometry_;
    std::vector<Vec2> node_points_;
    std::vector<NodeClass> node_class_;
    std::vector<BoundaryFace> faces_;
};

using VectorField = std::function<Vec2(const Vec2&)>;
using ScalarField = std::function<double(const Vec2&)>;
using GradientField = std::function<Mat2(const Vec2&)>;  // (i, j) = d u_i / d x_j

/// Nodal P2 interpolant of a vector field.
VectorX interpolate_velocity(const FESpace& space, const VectorField& field);
/// Nodal P1 interpolant of a scalar field.
VectorX interpolate_pressure(const FESpace& space, const ScalarField& field);
/// Scalar P2 interpolant (one value per node).
VectorX interpolate_scalar_p2(const FESpace& space, const ScalarField& field);

/// Velocity value and gradient of a P2 field at barycentric point `bary` of triangle t.
Vec2 velocity_at(const FESpace& space, const VectorX& u, Index t, const Eigen::Vector3d& bary);
Mat2 velocity_gradient_at(const FESpace& space, const VectorX& u, Index t, const Eigen::Vector3d& bary);

enum class ConvectionForm : std::uint8_t { Skew, Convective };

// Velocity-space matrices are velocity_size() square; scalar P2 matrices are
// num_nodes() square; the divergence matrix is pressure_size() x velocity_size().

/// Vector Laplacian  int grad u : grad phi  (without eta).
SparseMatrix assemble_stiffness(const FESpace& space);
SparseMatrix assemble_scalar_stiffness(const FESpace& space);
SparseMatrix assemble_scalar_mass(const FESpace& space);
SparseMatrix assemble_velocity_mass(const FESpace& space);
SparseMatrix assemble_pressure_mass(const FESpace& space);
SparseMatrix assemble_pressure_stiffness(const FESpace& space);
/// B(k, j) = int r_k div psi_j.
SparseMatrix assemble_divergence(const FESpace& space);

/// C(a)(i, j) = c(a, psi_j, psi_i). CONVECTIVE: int (a . grad psi_j) . psi_i.
/// SKEW: (C - C^T) / 2 plus (1/2) boundary mass weighted by a . nu.
SparseMatrix assemble_convection(const FESpace& space, const VectorX& a, ConvectionForm form);
/// Derivative in the transporting slot: N(u)(i, j) = c(psi_j, u, psi_i).
SparseMatrix assemble_convection_derivative(const FESpace& space, const VectorX& u, ConvectionForm form);
/// c(a, b, c) evaluated directly by quadrature, for diagnostics.
double convection_form(const FESpace& space, const VectorX& a, const VectorX& b, const VectorX& c,
                       ConvectionForm form);

/// Weighted scalar boundary mass on one tag, expanded to both velocity
/// components:  int_tag w psi_j . psi_i  with w evaluated per quadrature point.
SparseMatrix assemble_boundary_mass(const FESpace& space, BoundaryTag tag,
                                    const std::function<double(const Vec2& x, const Vec2& normal, double t,
                                                               std::size_t face)>& weight);

struct DdnTerm {
    SparseMatrix matrix;  // (1/2) int_O [w.nu]^- psi_j . psi_i
    VectorX load;         // matrix * wstar
};
DdnTerm assemble_ddn_boundary(const FESpace& space, const VectorX& w, const VectorX& wstar);
/// Derivative of (1/2) int_O [w.nu]^- d . phi with respect to w, at fixed d:
/// (1/2) int_O s(w.nu) (psi_j . nu) (d . psi_i) with s the slope of [.]^-.
SparseMatrix assemble_ddn_derivative(const FESpace& space, const VectorX& w, const VectorX& d);

/// int_O sigma (phi . nu).
VectorX assemble_outlet_traction(const FESpace& space, const ScalarField& sigma);
/// int f . phi.
VectorX assemble_body_force(const FESpace& space, const VectorField& f);

/// int_tag u . nu over the faces carrying the tag.
double boundary_flux(const FESpace& space, const VectorX& u, BoundaryTag tag);

struct ErrorNorms {
    double l2_velocity = 0.0;
    double h1_velocity = 0.0;  // H1 seminorm of the velocity error
    double l2_pressure = 0.0;
};
struct ExactSolution {
    VectorField velocity;
    GradientField velocity_gradient;
    ScalarField pressure;
};
ErrorNorms error_norms(const FESpace& space, const VectorX& u, const VectorX& p, const ExactSolution& exact);

double l2_norm_velocity(const FESpace& space, const VectorX& u);
double h1_seminorm_velocity(const FESpace& space, const VectorX& u);
double h1_norm_velocity(const FESpace& space, const VectorX& u);
double l2_norm_pressure(const FESpace& space, const VectorX& p);
/// Discrete L4 norm of a velocity field, (int |u|^4)^(1/4).
double l4_norm_velocity(const FESpace& space, const VectorX& u);
/// Gradient of int |u|^4 with respect to the velocity coefficients.
VectorX l4_quartic_gradient(const FESpace& space, const VectorX& u);
double boundary_l2_norm(const FESpace& space, const ScalarField& s, BoundaryTag tag);

/// Applies Dirichlet data and returns the reduced system for the free DOFs.
struct ReducedSystem {
    SparseMatrix matrix;
    VectorX rhs;
    DofPartition partition;
    VectorX fixed_values;  // full-size, holding the prescribed values
    VectorX expand(const VectorX& free) const { return partition.expand(free, fixed_values); }
};
ReducedSystem apply_dirichlet(const SparseMatrix& a, const VectorX& b, const std::vector<char>& fixed,
                              const VectorX& values);

/// Saddle-point solve of  A u - B^T p = load,  B u = div_rhs  with fixed
/// velocity DOFs and an optional pinned pressure DOF (set to zero, its
/// continuity row dropped). Throws SingularMatrix.
struct SaddleSolution {
    VectorX velocity;
    VectorX pressure;
    double relative_residual = 0.0;
};
SaddleSolution solve_saddle(const SparseMatrix& a, const SparseMatrix& b, const VectorX& load, const VectorX& div_rhs,
                            const std::vector<char>& fixed_velocity, const VectorX& velocity_values,
                            Index pinned_pressure = -1);

/// Runs kernel(t) for every triangle, split over PIPEFLOW_THREADS workers.
void for_each_element(Index count, const std::function<void(Index)>& kernel);
int assembly_threads();
/// Overrides PIPEFLOW_THREADS for this process; 0 restores it.
void set_assembly_threads(int n);

/// Triangles of `mesh` selected by `keep`, with its own vertex numbering.
/// Edges on the cut get `cut_tag`; original boundary edges keep their tags.
struct Submesh {
    Mesh mesh;
    std::vector<int> vertex_map;    // submesh vertex -> parent vertex
    std::vector<int> triangle_map;  // submesh triangle -> parent triangle
};
Submesh extract_submesh(const Mesh& mesh, const std::function<bool(Index)>& keep, BoundaryTag cut_tag);

/// Node map from a space built on a submesh to its parent space.
std::vector<Index> submesh_node_map(const FESpace& sub, const Submesh& submesh, const FESpace& parent);

}  // namespace pipeflow
