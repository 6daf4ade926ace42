#include "pipeflow/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace pipeflow {

std::string format_double(double v)
{
    if (std::isnan(v)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string quote(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

}  // namespace

CsvTable& CsvTable::row(std::vector<std::string> cells)
{
    if (cells.size() != header_.size())
        throw ArgumentError("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(header_.size()));
    rows_.push_back(std::move(cells));
    return *this;
}

std::string CsvTable::str() const
{
    std::string out;
    const auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += quote(cells[i]);
        }
        out += "\r\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
}

void write_vtk(std::ostream& out, const FESpace& space, const VectorX& velocity, const VectorX& pressure)
{
    const Mesh& mesh = space.mesh();
    const Index nv = space.num_vertices();
    out << "# vtk DataFile Version 3.0\npipeflow velocity and pressure\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nv << " double\n";
    for (const Vec2& p : mesh.vertices) out << format_double(p[0]) << ' ' << format_double(p[1]) << " 0\n";
    out << "CELLS " << mesh.triangles.size() << ' ' << 4 * mesh.triangles.size() << '\n';
    for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out << "CELL_TYPES " << mesh.triangles.size() << '\n';
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) out << "5\n";
    out << "POINT_DATA " << nv << "\nVECTORS velocity double\n";
    for (Index v = 0; v < nv; ++v)
        out << format_double(velocity[space.velocity_dof(0, v)]) << ' ' << format_double(velocity[space.velocity_dof(1, v)])
            << " 0\n";
    out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (Index v = 0; v < nv; ++v) out << format_double(pressure[v]) << '\n';
}

std::uint64_t fnv1a(std::string_view bytes)
{
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ArgumentError("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw ArgumentError("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace pipeflow
