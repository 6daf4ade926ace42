#pragma once

#include "pipeflow/case_setup.hpp"
#include "pipeflow/config.hpp"
#include "pipeflow/nse_solver.hpp"
#include "pipeflow/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <limits>
#include <random>
#include <string>

namespace pipeflow::testing {

inline std::string case_path(const std::string& name)
{
    return std::string(PIPEFLOW_SOURCE_DIR) + "/cases/" + name + ".ini";
}

struct LoadedCase {
    CaseConfig config;
    CaseSetup setup;
};

inline LoadedCase load_case(const std::string& name)
{
    LoadedCase c;
    c.config = read_case_file(case_path(name));
    c.setup = build_case(c.config);
    return c;
}

inline Mesh case_mesh(const LoadedCase& c, double target_h)
{
    MeshOptions options = case_mesh_options(c.config);
    options.target_h = target_h;
    return generate_mesh(c.setup.spec, options);
}

inline VectorX random_vector(Index n, std::mt19937_64& rng, double scale = 1.0)
{
    std::uniform_real_distribution<double> d(-scale, scale);
    VectorX v(n);
    for (Index i = 0; i < n; ++i) v[i] = d(rng);
    return v;
}

// min |u . nu| over the outlet points of the boundary rule, i.e. how far a
// state sits from the kink of the backflow term.
inline double outlet_kink_distance(const FESpace& space, const VectorX& u)
{
    double d = std::numeric_limits<double>::infinity();
    const Index nn = space.num_nodes();
    for (const auto& f : space.boundary_faces()) {
        if (f.tag != BoundaryTag::Outlet) continue;
        for (double t : gauss4().points) {
            const auto b = p2_edge_values(t);
            Vec2 v = Vec2::Zero();
            for (int k = 0; k < 3; ++k)
                for (int c = 0; c < 2; ++c) v[c] += b[static_cast<std::size_t>(k)] * u[c * nn + f.nodes[static_cast<std::size_t>(k)]];
            d = std::min(d, std::abs(v.dot(f.normal)));
        }
    }
    return d;
}

// Largest relative column error of the Jacobian against central differences
// of the residual, over the given columns. Constrained rows are left out since
// the residual pins them to zero and Newton never sees them.
inline double jacobian_fd_error(const NavierStokesSystem& sys, const VectorX& x, double lambda,
                                const std::vector<Index>& columns)
{
    const SparseMatrix j = sys.jacobian(x, lambda);
    const Eigen::SparseMatrix<double> jc(j);
    double worst = 0.0;
    for (Index c : columns) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[c]));
        VectorX xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        const VectorX fd = (sys.residual(xp, lambda) - sys.residual(xm, lambda)) / (2 * h);
        VectorX exact = jc.col(c);
        for (Index i = 0; i < sys.size(); ++i)
            if (sys.fixed()[static_cast<std::size_t>(i)]) exact[i] = 0.0;
        worst = std::max(worst, (fd - exact).norm() / std::max(exact.norm(), 1e-300));
    }
    return worst;
}

// Free unknowns of the system: unconstrained velocities and all pressures.
inline std::vector<Index> free_columns(const NavierStokesSystem& sys)
{
    std::vector<Index> cols;
    for (Index i = 0; i < sys.size(); ++i)
        if (!sys.fixed()[static_cast<std::size_t>(i)]) cols.push_back(i);
    return cols;
}

// Center value of -Lap u = 1 on (-1, 1)^2, u = 0 on the boundary, from the
// 5-point scheme on n x n interior points with one Richardson step.
inline double square_center_fd(int n)
{
    auto solve = [](int m) {
        const double h = 2.0 / (m + 1);
        std::vector<Eigen::Triplet<double>> t;
        auto id = [m](int i, int j) { return i * m + j; };
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                t.emplace_back(id(i, j), id(i, j), 4.0 / (h * h));
                if (i > 0) t.emplace_back(id(i, j), id(i - 1, j), -1.0 / (h * h));
                if (i + 1 < m) t.emplace_back(id(i, j), id(i + 1, j), -1.0 / (h * h));
                if (j > 0) t.emplace_back(id(i, j), id(i, j - 1), -1.0 / (h * h));
                if (j + 1 < m) t.emplace_back(id(i, j), id(i, j + 1), -1.0 / (h * h));
            }
        Eigen::SparseMatrix<double> a(m * m, m * m);
        a.setFromTriplets(t.begin(), t.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
        const Eigen::VectorXd u = ldlt.solve(Eigen::VectorXd::Ones(m * m));
        return u[id(m / 2, m / 2)];
    };
    // n odd so the center is a grid point; halving h keeps it one.
    const double coarse = solve(n);
    const double fine = solve(2 * n + 1);
    return (4 * fine - coarse) / 3;
}

inline MatrixX dense_restricted(const SparseMatrix& a, const std::vector<Index>& rows, const std::vector<Index>& cols)
{
    const MatrixX d = to_dense(a);
    MatrixX out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(static_cast<Index>(i), static_cast<Index>(j)) = d(rows[i], cols[j]);
    return out;
}

// Scalar P2 outlet mass built face by face with a Gauss-Legendre rule.
inline MatrixX outlet_mass_oracle(const FESpace& space)
{
    const Index nn = space.num_nodes();
    MatrixX m = MatrixX::Zero(nn, nn);
    const auto rule = gauss_legendre(6);
    for (const auto& f : space.boundary_faces()) {
        if (f.tag != BoundaryTag::Outlet) continue;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto b = p2_edge_values(rule.points[q]);
            const double w = rule.weights[q] * f.length;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    m(f.nodes[static_cast<std::size_t>(i)], f.nodes[static_cast<std::size_t>(j)]) +=
                        w * b[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
        }
    }
    return m;
}

// Largest eigenvalue of (outlet mass, scalar stiffness) on nodes off the
// inlet and the walls, by a dense generalized eigensolver.
inline double dense_trace_eigenvalue(const FESpace& space)
{
    std::vector<Index> free;
    for (Index n = 0; n < space.num_nodes(); ++n) {
        const NodeClass k = space.node_class(n);
        if (k != NodeClass::Inlet && k != NodeClass::Wall) free.push_back(n);
    }
    const MatrixX k = dense_restricted(assemble_scalar_stiffness(space), free, free);
    const MatrixX mfull = outlet_mass_oracle(space);
    MatrixX m(static_cast<Index>(free.size()), static_cast<Index>(free.size()));
    for (std::size_t i = 0; i < free.size(); ++i)
        for (std::size_t j = 0; j < free.size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = mfull(free[i], free[j]);
    return Eigen::GeneralizedSelfAdjointEigenSolver<MatrixX>(m, k).eigenvalues().maxCoeff();
}

inline double relative_difference(double a, double b)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace pipeflow::testing
