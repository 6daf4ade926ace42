#include "pipeflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace pipeflow {

namespace {

struct ColumnLine {
    Vec2 lower;
    Vec2 upper;
};

// Smallest interior angle of triangle (a, b, c), radians.
double min_angle(const Vec2& a, const Vec2& b, const Vec2& c)
{
    const auto ang = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        const Vec2 u = q - p;
        const Vec2 v = r - p;
        return std::atan2(std::abs(u[0] * v[1] - u[1] * v[0]), u.dot(v));
    };
    return std::min({ang(a, b, c), ang(b, c, a), ang(c, a, b)});
}

int count_for(double length, double target_h, int factor)
{
    return std::max(1, static_cast<int>(std::ceil(length / target_h - 1e-9))) * factor;
}

}  // namespace

Mesh generate_mesh(const DomainSpec& spec, const MeshOptions& options)
{
    if (!spec.validated) throw MeshError("domain must be validated with build_domain first");
    const double h = options.target_h;
    if (!(h > 0.0) || !(h < std::min(spec.inlet.half_height, spec.outlet.half_height)))
        throw MeshError("target_h must be positive and below min(h1, h2)");
    if (options.refinement < 0) throw MeshError("refinement level must be non-negative");
    const int factor = 1 << options.refinement;

    const StraightSection& in = spec.inlet;
    const StraightSection& out = spec.outlet;
    const bool degenerate = spec.junction_is_degenerate();

    // Column lines and the region of each column interval.
    std::vector<ColumnLine> lines;
    std::vector<Region> column_region;
    const auto add_section_columns = [&](const StraightSection& s, double x0, double x1, int n, Region r,
                                         bool include_first) {
        for (int i = include_first ? 0 : 1; i <= n; ++i) {
            const double x = x0 + (x1 - x0) * i / n;
            lines.push_back({s.to_global({x, -s.half_height}), s.to_global({x, s.half_height})});
        }
        column_region.insert(column_region.end(), static_cast<std::size_t>(n), r);
    };

    add_section_columns(in, 0.0, in.length, count_for(in.length, h, factor), Region::Omega1, true);
    double max_width = 2.0 * std::max(in.half_height, out.half_height);
    if (!degenerate) {
        const double arc = std::max(spec.lower_wall.arc_length(), spec.upper_wall.arc_length());
        const int n0 = count_for(arc, h, factor);
        for (int i = 1; i <= n0; ++i) {
            const double s = static_cast<double>(i) / n0;
            lines.push_back({spec.lower_wall.point(s), spec.upper_wall.point(s)});
        }
        column_region.insert(column_region.end(), static_cast<std::size_t>(n0), Region::Omega0);
        for (int k = 0; k <= 64; ++k) {
            const double s = k / 64.0;
            max_width = std::max(max_width, (spec.upper_wall.point(s) - spec.lower_wall.point(s)).norm());
        }
    }
    const std::size_t sharp_start = lines.size() - 1;
    const double station = out.length / 3.0;
    add_section_columns(out, 0.0, station, count_for(station, h, factor), Region::OmegaSharp, false);
    const std::size_t sharp_end = lines.size() - 1;
    add_section_columns(out, station, out.length, count_for(out.length - station, h, factor),
                        Region::Omega2, false);

    const int rows = count_for(max_width, h, factor);
    const auto ncols = static_cast<int>(lines.size()) - 1;
    const auto vid = [rows](int i, int k) { return i * (rows + 1) + k; };

    Mesh mesh;
    mesh.vertices.reserve(static_cast<std::size_t>((ncols + 1) * (rows + 1)));
    for (int i = 0; i <= ncols; ++i) {
        for (int k = 0; k <= rows; ++k) {
            const double t = static_cast<double>(k) / rows;
            mesh.vertices.push_back((1.0 - t) * lines[i].lower + t * lines[i].upper);
        }
    }

    // Laplacian smoothing of interior vertices in the curved middle part, only
    // when the straight transfinite layout misses the angle floor.
    std::vector<char> movable(mesh.vertices.size(), 0);
    for (int i = 1; i < ncols; ++i) {
        if (column_region[i - 1] != Region::Omega0 || column_region[i] != Region::Omega0) continue;
        for (int k = 1; k < rows; ++k) movable[vid(i, k)] = 1;
    }

    std::set<int> special;
    for (int i : {0, static_cast<int>(sharp_start), static_cast<int>(sharp_end), ncols}) {
        special.insert(vid(i, 0));
        special.insert(vid(i, rows));
    }

    const auto triangulate = [&]() {
        mesh.triangles.clear();
        mesh.regions.clear();
        for (int i = 0; i < ncols; ++i) {
            for (int k = 0; k < rows; ++k) {
                const int a = vid(i, k), b = vid(i + 1, k), c = vid(i + 1, k + 1), d = vid(i, k + 1);
                bool diag_ac;
                if (special.count(a) || special.count(c))
                    diag_ac = true;
                else if (special.count(b) || special.count(d))
                    diag_ac = false;
                else {
                    const auto& V = mesh.vertices;
                    const double q_ac = std::min(min_angle(V[a], V[b], V[c]), min_angle(V[a], V[c], V[d]));
                    const double q_bd = std::min(min_angle(V[a], V[b], V[d]), min_angle(V[b], V[c], V[d]));
                    diag_ac = q_ac >= q_bd - 1e-12;
                }
                if (diag_ac) {
                    mesh.triangles.push_back({a, b, c});
                    mesh.triangles.push_back({a, c, d});
                } else {
                    mesh.triangles.push_back({a, b, d});
                    mesh.triangles.push_back({b, c, d});
                }
                mesh.regions.push_back(column_region[i]);
                mesh.regions.push_back(column_region[i]);
            }
        }
    };
    triangulate();

    const double floor_deg = options.min_angle_degrees;
    for (int pass = 0; pass < options.max_smoothing_passes && mesh.min_angle_degrees() <= floor_deg; ++pass) {
        std::vector<Vec2> next = mesh.vertices;
        for (int i = 1; i < ncols; ++i)
            for (int k = 1; k < rows; ++k) {
                const int v = vid(i, k);
                if (!movable[v]) continue;
                next[v] = 0.25 * (mesh.vertices[vid(i - 1, k)] + mesh.vertices[vid(i + 1, k)] +
                                  mesh.vertices[vid(i, k - 1)] + mesh.vertices[vid(i, k + 1)]);
            }
        mesh.vertices = std::move(next);
        triangulate();
    }

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
        if (!(mesh.signed_area(t) > 0.0)) throw MeshError("generated mesh has an inverted triangle");
    if (mesh.min_angle_degrees() <= floor_deg)
        throw MeshError("minimum angle floor of " + std::to_string(floor_deg) +
                        " degrees not reached after smoothing");

    // Boundary edges: inlet on column 0 (upper to lower keeps the interior on
    // the left), outlet on the last column, walls along rows 0 and `rows`.
    for (int k = 0; k < rows; ++k) {
        mesh.boundary_edges.push_back({{vid(0, k + 1), vid(0, k)}, BoundaryTag::Inlet});
        mesh.boundary_edges.push_back({{vid(ncols, k), vid(ncols, k + 1)}, BoundaryTag::Outlet});
    }
    for (int i = 0; i < ncols; ++i) {
        mesh.boundary_edges.push_back({{vid(i, 0), vid(i + 1, 0)}, BoundaryTag::Wall});
        mesh.boundary_edges.push_back({{vid(i + 1, rows), vid(i, rows)}, BoundaryTag::Wall});
    }
    return mesh;
}

Mesh rectangle_mesh(const Vec2& lo, const Vec2& hi, int nx, int ny, RectangleTags tags)
{
    if (nx < 1 || ny < 1) throw MeshError("rectangle mesh needs at least one cell per direction");
    Mesh mesh;
    const auto vid = [ny](int i, int k) { return i * (ny + 1) + k; };
    for (int i = 0; i <= nx; ++i)
        for (int k = 0; k <= ny; ++k)
            mesh.vertices.emplace_back(lo[0] + (hi[0] - lo[0]) * i / nx, lo[1] + (hi[1] - lo[1]) * k / ny);
    for (int i = 0; i < nx; ++i)
        for (int k = 0; k < ny; ++k) {
            const int a = vid(i, k), b = vid(i + 1, k), c = vid(i + 1, k + 1), d = vid(i, k + 1);
            mesh.triangles.push_back({a, b, c});
            mesh.triangles.push_back({a, c, d});
            mesh.regions.push_back(Region::Omega0);
            mesh.regions.push_back(Region::Omega0);
        }
    for (int k = 0; k < ny; ++k) {
        mesh.boundary_edges.push_back({{vid(0, k + 1), vid(0, k)}, tags.left});
        mesh.boundary_edges.push_back({{vid(nx, k), vid(nx, k + 1)}, tags.right});
    }
    for (int i = 0; i < nx; ++i) {
        mesh.boundary_edges.push_back({{vid(i, 0), vid(i + 1, 0)}, tags.bottom});
        mesh.boundary_edges.push_back({{vid(i + 1, ny), vid(i, ny)}, tags.top});
    }
    return mesh;
}

Mesh disk_mesh(int rings, double radius)
{
    if (rings < 1) throw MeshError("disk mesh needs at least one ring");
    Mesh mesh;
    mesh.vertices.emplace_back(0.0, 0.0);
    std::vector<int> ring_start{0};
    for (int r = 1; r <= rings; ++r) {
        ring_start.push_back(static_cast<int>(mesh.vertices.size()));
        const int n = 6 * r;
        for (int j = 0; j < n; ++j) {
            const double theta = 2.0 * std::numbers::pi * j / n;
            const double rho = radius * r / rings;
            mesh.vertices.emplace_back(rho * std::cos(theta), rho * std::sin(theta));
        }
    }
    const auto at = [&](int r, int j) {
        if (r == 0) return 0;
        const int n = 6 * r;
        return ring_start[r] + ((j % n) + n) % n;
    };
    // Each ring r is split into six sextants; sextant s of ring r has r vertices
    // starting at index s*r, matched to r-1 vertices of ring r-1.
    for (int r = 1; r <= rings; ++r) {
        for (int s = 0; s < 6; ++s) {
            for (int j = 0; j < r; ++j) {
                const int outer = s * r + j;
                const int inner = s * (r - 1) + j;
                mesh.triangles.push_back({at(r - 1, inner), at(r, outer), at(r, outer + 1)});
                mesh.regions.push_back(Region::Omega0);
                if (j < r - 1) {
                    mesh.triangles.push_back({at(r - 1, inner), at(r, outer + 1), at(r - 1, inner + 1)});
                    mesh.regions.push_back(Region::Omega0);
                }
            }
        }
    }
    const int n = 6 * rings;
    for (int j = 0; j < n; ++j)
        mesh.boundary_edges.push_back({{at(rings, j), at(rings, j + 1)}, BoundaryTag::Wall});
    return mesh;
}

}  // namespace pipeflow
