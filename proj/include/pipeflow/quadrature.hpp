#pragma once

#include "pipeflow/core.hpp"

#include <array>
#include <vector>

namespace pipeflow {

/// Triangle rule in barycentric coordinates; weights sum to one, so an
/// integral is area * sum(w_q f(x_q)).
struct TriangleRule {
    std::vector<Eigen::Vector3d> bary;
    std::vector<double> weights;
    int degree = 0;
};

/// Rule on the unit interval [0, 1]; weights sum to one.
struct LineRule {
    std::vector<double> points;
    std::vector<double> weights;
    int degree = 0;
};

/// 12-point Dunavant rule, exact for polynomials of degree 6.
const TriangleRule& dunavant6();

/// 4-point Gauss-Legendre rule, exact for polynomials of degree 7.
const LineRule& gauss4();

/// n-point Gauss-Legendre rule on [0, 1], computed by Newton iteration on
/// the Legendre recurrence. Used by tests and high-accuracy diagnostics.
LineRule gauss_legendre(int n);

/// Collapsed (Duffy) tensor rule on the reference triangle built from two
/// n-point Gauss rules; exact to degree 2n - 2.
TriangleRule duffy_rule(int n);

/// Quadratic Lagrange basis on a triangle, in barycentric form. Nodes 0..2
/// are the vertices, node 3 + k is the midpoint of the edge opposite vertex k.
inline std::array<double, 6> p2_values(const Eigen::Vector3d& l)
{
    return {l[0] * (2 * l[0] - 1), l[1] * (2 * l[1] - 1), l[2] * (2 * l[2] - 1),
            4 * l[1] * l[2], 4 * l[2] * l[0], 4 * l[0] * l[1]};
}

/// d(phi_i)/d(lambda_j), a 6x3 matrix.
inline Eigen::Matrix<double, 6, 3> p2_bary_derivatives(const Eigen::Vector3d& l)
{
    Eigen::Matrix<double, 6, 3> d = Eigen::Matrix<double, 6, 3>::Zero();
    for (int i = 0; i < 3; ++i) d(i, i) = 4 * l[i] - 1;
    d(3, 1) = 4 * l[2];
    d(3, 2) = 4 * l[1];
    d(4, 2) = 4 * l[0];
    d(4, 0) = 4 * l[2];
    d(5, 0) = 4 * l[1];
    d(5, 1) = 4 * l[0];
    return d;
}

/// Quadratic basis on an edge parametrized by t in [0, 1]: start, midpoint, end.
inline std::array<double, 3> p2_edge_values(double t)
{
    return {(1 - t) * (1 - 2 * t), 4 * t * (1 - t), t * (2 * t - 1)};
}

}  // namespace pipeflow
