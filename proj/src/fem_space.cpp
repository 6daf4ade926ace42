#include "pipeflow/fem.hpp"

#include <atomic>
#include <algorithm>
#include <cstdlib>
#include <map>
#include <thread>

namespace pipeflow {

namespace {

std::uint64_t edge_key(int a, int b)
{
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

int class_rank(NodeClass c)
{
    switch (c) {
    case NodeClass::Interior: return 0;
    case NodeClass::Outlet: return 1;
    case NodeClass::Inlet: return 2;
    case NodeClass::Wall: return 3;
    }
    return 0;
}

NodeClass class_of(BoundaryTag tag)
{
    switch (tag) {
    case BoundaryTag::Inlet: return NodeClass::Inlet;
    case BoundaryTag::Wall: return NodeClass::Wall;
    case BoundaryTag::Outlet: return NodeClass::Outlet;
    }
    return NodeClass::Wall;
}

}  // namespace

FESpace::FESpace(Mesh mesh) : mesh_(std::move(mesh))
{
    check_mesh(mesh_);
    const auto nv = static_cast<int>(mesh_.vertices.size());
    const std::size_t nt = mesh_.triangles.size();
    element_nodes_.resize(nt);
    geometry_.resize(nt);
    std::vector<int> edge_owner;
    for (std::size_t t = 0; t < nt; ++t) {
        const auto& tri = mesh_.triangles[t];
        auto& nodes = element_nodes_[t];
        for (int k = 0; k < 3; ++k) {
            nodes[k] = tri[k];
            const int a = tri[(k + 1) % 3];
            const int b = tri[(k + 2) % 3];
            const auto [it, inserted] = edge_lookup_.try_emplace(edge_key(a, b), static_cast<Index>(edges_.size()));
            if (inserted) {
                edges_.push_back({std::min(a, b), std::max(a, b)});
                edge_owner.push_back(static_cast<int>(t));
            }
            nodes[3 + k] = nv + static_cast<int>(it->second);
        }
        const Vec2& p0 = mesh_.vertices[tri[0]];
        const Vec2& p1 = mesh_.vertices[tri[1]];
        const Vec2& p2 = mesh_.vertices[tri[2]];
        Mat2 jac;
        jac.col(0) = p1 - p0;
        jac.col(1) = p2 - p0;
        const Mat2 inv_t = jac.inverse().transpose();
        ElementGeometry& g = geometry_[t];
        g.area = 0.5 * jac.determinant();
        // lambda_1 = first row of J^{-1} (x - p0), lambda_2 = second row.
        g.grad_bary.row(1) = inv_t.col(0).transpose();
        g.grad_bary.row(2) = inv_t.col(1).transpose();
        g.grad_bary.row(0) = -(g.grad_bary.row(1) + g.grad_bary.row(2));
    }

    node_points_.reserve(static_cast<std::size_t>(num_nodes()));
    for (const Vec2& p : mesh_.vertices) node_points_.push_back(p);
    for (const auto& e : edges_) node_points_.push_back(0.5 * (mesh_.vertices[e[0]] + mesh_.vertices[e[1]]));

    node_class_.assign(static_cast<std::size_t>(num_nodes()), NodeClass::Interior);
    for (const BoundaryEdge& be : mesh_.boundary_edges) {
        const Index e = edge_index(be.v[0], be.v[1]);
        const int t = edge_owner[static_cast<std::size_t>(e)];
        const auto& tri = mesh_.triangles[static_cast<std::size_t>(t)];
        int start = be.v[0];
        int end = be.v[1];
        // Orient so the interior lies to the left.
        const int other = tri[0] != start && tri[0] != end ? tri[0] : (tri[1] != start && tri[1] != end ? tri[1] : tri[2]);
        const Vec2 d = mesh_.vertices[end] - mesh_.vertices[start];
        const Vec2 to_other = mesh_.vertices[other] - mesh_.vertices[start];
        if (d[0] * to_other[1] - d[1] * to_other[0] < 0) std::swap(start, end);
        BoundaryFace f;
        f.nodes = {start, nv + static_cast<int>(e), end};
        f.tag = be.tag;
        const Vec2 dd = mesh_.vertices[end] - mesh_.vertices[start];
        f.length = dd.norm();
        f.normal = Vec2(dd[1], -dd[0]) / f.length;
        f.triangle = t;
        faces_.push_back(f);
        for (int n : f.nodes) {
            NodeClass& c = node_class_[static_cast<std::size_t>(n)];
            if (class_rank(class_of(be.tag)) > class_rank(c)) c = class_of(be.tag);
        }
    }
}

Index FESpace::edge_index(int a, int b) const
{
    const auto it = edge_lookup_.find(edge_key(a, b));
    return it == edge_lookup_.end() ? -1 : it->second;
}

std::vector<char> FESpace::dirichlet_mask() const
{
    std::vector<char> mask(static_cast<std::size_t>(velocity_size()), 0);
    for (Index n = 0; n < num_nodes(); ++n) {
        const NodeClass c = node_class(n);
        if (c == NodeClass::Inlet || c == NodeClass::Wall) {
            mask[static_cast<std::size_t>(velocity_dof(0, n))] = 1;
            mask[static_cast<std::size_t>(velocity_dof(1, n))] = 1;
        }
    }
    return mask;
}

std::vector<char> FESpace::boundary_mask() const
{
    std::vector<char> mask(static_cast<std::size_t>(velocity_size()), 0);
    for (Index n = 0; n < num_nodes(); ++n)
        if (node_class(n) != NodeClass::Interior) {
            mask[static_cast<std::size_t>(velocity_dof(0, n))] = 1;
            mask[static_cast<std::size_t>(velocity_dof(1, n))] = 1;
        }
    return mask;
}

Vec2 FESpace::outlet_normal() const
{
    Vec2 n = Vec2::Zero();
    bool found = false;
    for (const BoundaryFace& f : faces_) {
        if (f.tag != BoundaryTag::Outlet) continue;
        if (found && (f.normal - n).norm() > 1e-10) throw MeshError("outlet faces are not collinear");
        n = f.normal;
        found = true;
    }
    if (!found) throw MeshError("mesh has no outlet faces");
    return n;
}

VectorX interpolate_velocity(const FESpace& space, const VectorField& field)
{
    VectorX u(space.velocity_size());
    for (Index n = 0; n < space.num_nodes(); ++n) {
        const Vec2 v = field(space.node_point(n));
        u[space.velocity_dof(0, n)] = v[0];
        u[space.velocity_dof(1, n)] = v[1];
    }
    return u;
}

VectorX interpolate_pressure(const FESpace& space, const ScalarField& field)
{
    VectorX p(space.pressure_size());
    for (Index n = 0; n < space.num_vertices(); ++n) p[n] = field(space.node_point(n));
    return p;
}

VectorX interpolate_scalar_p2(const FESpace& space, const ScalarField& field)
{
    VectorX s(space.num_nodes());
    for (Index n = 0; n < space.num_nodes(); ++n) s[n] = field(space.node_point(n));
    return s;
}

Vec2 velocity_at(const FESpace& space, const VectorX& u, Index t, const Eigen::Vector3d& bary)
{
    const auto phi = p2_values(bary);
    const auto& nodes = space.element_nodes(t);
    Vec2 v = Vec2::Zero();
    for (int i = 0; i < 6; ++i) {
        v[0] += phi[i] * u[space.velocity_dof(0, nodes[i])];
        v[1] += phi[i] * u[space.velocity_dof(1, nodes[i])];
    }
    return v;
}

Mat2 velocity_gradient_at(const FESpace& space, const VectorX& u, Index t, const Eigen::Vector3d& bary)
{
    const Eigen::Matrix<double, 6, 2> grad = p2_bary_derivatives(bary) * space.geometry(t).grad_bary;
    const auto& nodes = space.element_nodes(t);
    Mat2 g = Mat2::Zero();
    for (int i = 0; i < 6; ++i)
        for (int c = 0; c < 2; ++c) g.row(c) += u[space.velocity_dof(c, nodes[i])] * grad.row(i);
    return g;
}

ReducedSystem apply_dirichlet(const SparseMatrix& a, const VectorX& b, const std::vector<char>& fixed,
                              const VectorX& values)
{
    ReducedSystem r;
    r.partition = DofPartition(fixed);
    r.fixed_values = VectorX::Zero(a.rows());
    for (Index i = 0; i < a.rows(); ++i)
        if (fixed[static_cast<std::size_t>(i)]) r.fixed_values[i] = values[i];
    r.matrix = r.partition.restrict_matrix(a);
    r.rhs = r.partition.reduce_rhs(a, b, r.fixed_values);
    return r;
}

namespace {
std::atomic<int> thread_override{0};
}

void set_assembly_threads(int n) { thread_override = std::clamp(n, 0, 256); }

int assembly_threads()
{
    if (const int n = thread_override.load(); n > 0) return n;
    static const int threads = [] {
        const char* env = std::getenv("PIPEFLOW_THREADS");
        if (!env) return 1;
        const int n = std::atoi(env);
        return std::clamp(n, 1, 256);
    }();
    return threads;
}

void for_each_element(Index count, const std::function<void(Index)>& kernel)
{
    const int threads = assembly_threads();
    if (threads <= 1 || count < 256) {
        for (Index t = 0; t < count; ++t) kernel(t);
        return;
    }
    std::vector<std::thread> pool;
    const Index chunk = (count + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
        const Index lo = w * chunk;
        const Index hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &kernel] {
            for (Index t = lo; t < hi; ++t) kernel(t);
        });
    }
    for (auto& th : pool) th.join();
}

Submesh extract_submesh(const Mesh& mesh, const std::function<bool(Index)>& keep, BoundaryTag cut_tag)
{
    Submesh s;
    std::vector<int> local(mesh.vertices.size(), -1);
    std::map<std::pair<int, int>, int> edge_count;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (!keep(static_cast<Index>(t))) continue;
        std::array<int, 3> tri{};
        for (int k = 0; k < 3; ++k) {
            const int v = mesh.triangles[t][k];
            if (local[v] < 0) {
                local[v] = static_cast<int>(s.mesh.vertices.size());
                s.mesh.vertices.push_back(mesh.vertices[v]);
                s.vertex_map.push_back(v);
            }
            tri[k] = local[v];
        }
        for (int k = 0; k < 3; ++k) {
            const int a = tri[k], b = tri[(k + 1) % 3];
            ++edge_count[{std::min(a, b), std::max(a, b)}];
        }
        s.mesh.triangles.push_back(tri);
        s.mesh.regions.push_back(mesh.regions[t]);
        s.triangle_map.push_back(static_cast<int>(t));
    }
    std::map<std::pair<int, int>, BoundaryTag> original;
    for (const BoundaryEdge& e : mesh.boundary_edges)
        original[{std::min(e.v[0], e.v[1]), std::max(e.v[0], e.v[1])}] = e.tag;
    for (const auto& [key, count] : edge_count) {
        if (count != 1) continue;
        const int ga = s.vertex_map[key.first];
        const int gb = s.vertex_map[key.second];
        const auto it = original.find({std::min(ga, gb), std::max(ga, gb)});
        s.mesh.boundary_edges.push_back({{key.first, key.second}, it == original.end() ? cut_tag : it->second});
    }
    return s;
}

std::vector<Index> submesh_node_map(const FESpace& sub, const Submesh& submesh, const FESpace& parent)
{
    std::vector<Index> map(static_cast<std::size_t>(sub.num_nodes()));
    for (Index v = 0; v < sub.num_vertices(); ++v) map[static_cast<std::size_t>(v)] = submesh.vertex_map[static_cast<std::size_t>(v)];
    for (Index e = 0; e < sub.num_edges(); ++e) {
        const auto& ed = sub.edge(e);
        const Index pe = parent.edge_index(submesh.vertex_map[static_cast<std::size_t>(ed[0])],
                                           submesh.vertex_map[static_cast<std::size_t>(ed[1])]);
        if (pe < 0) throw MeshError("submesh edge missing from the parent mesh");
        map[static_cast<std::size_t>(sub.num_vertices() + e)] = parent.num_vertices() + pe;
    }
    return map;
}

}  // namespace pipeflow
