#include "pipeflow/geometry.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

namespace pipeflow {

void write_mesh(std::ostream& out, const Mesh& mesh)
{
    out << mesh.vertices.size() << ' ' << mesh.triangles.size() << ' ' << mesh.boundary_edges.size()
        << '\n';
    out << std::setprecision(17);
    for (const Vec2& p : mesh.vertices) out << p[0] << ' ' << p[1] << '\n';
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        out << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' ' << static_cast<int>(mesh.regions[t]) << '\n';
    }
    for (const auto& e : mesh.boundary_edges) out << e.v[0] << ' ' << e.v[1] << ' ' << tag_letter(e.tag) << '\n';
}

Mesh read_mesh(std::istream& in)
{
    std::size_t nv = 0, nt = 0, nb = 0;
    if (!(in >> nv >> nt >> nb)) throw MeshError("mesh file: bad header");
    Mesh mesh;
    mesh.vertices.resize(nv);
    for (auto& p : mesh.vertices)
        if (!(in >> p[0] >> p[1])) throw MeshError("mesh file: truncated vertex block");
    mesh.triangles.resize(nt);
    mesh.regions.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        int label = 0;
        auto& tri = mesh.triangles[t];
        if (!(in >> tri[0] >> tri[1] >> tri[2] >> label)) throw MeshError("mesh file: truncated triangle block");
        if (label < 0 || label > 3) throw MeshError("mesh file: bad region label");
        mesh.regions[t] = static_cast<Region>(label);
    }
    mesh.boundary_edges.resize(nb);
    for (auto& e : mesh.boundary_edges) {
        std::string tag;
        if (!(in >> e.v[0] >> e.v[1] >> tag) || tag.size() != 1)
            throw MeshError("mesh file: truncated boundary block");
        e.tag = tag_from_letter(tag[0]);
    }
    check_mesh(mesh);
    return mesh;
}

}  // namespace pipeflow
