#include "pipeflow/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace pipeflow {

const TriangleRule& dunavant6()
{
    static const TriangleRule rule = [] {
        TriangleRule r;
        r.degree = 6;
        const auto add3 = [&r](double a, double w) {
            const double b = 1.0 - 2.0 * a;
            r.bary.emplace_back(a, a, b);
            r.bary.emplace_back(a, b, a);
            r.bary.emplace_back(b, a, a);
            r.weights.insert(r.weights.end(), 3, w);
        };
        add3(0.063089014491502228340331602870819, 0.050844906370206816920936809106869);
        add3(0.24928674517091042129163855310702, 0.11678627572637936602528961138558);
        const double a = 0.053145049844816947353249671631398;
        const double b = 0.31035245103378440541660773395655;
        const double c = 1.0 - a - b;
        const double w = 0.082851075618373575193553456420442;
        for (const auto& p : {Eigen::Vector3d(a, b, c), Eigen::Vector3d(a, c, b), Eigen::Vector3d(b, a, c),
                              Eigen::Vector3d(b, c, a), Eigen::Vector3d(c, a, b), Eigen::Vector3d(c, b, a)}) {
            r.bary.push_back(p);
            r.weights.push_back(w);
        }
        return r;
    }();
    return rule;
}

const LineRule& gauss4()
{
    static const LineRule rule = [] {
        LineRule r;
        r.degree = 7;
        const double x1 = 0.33998104358485626480266575910324;
        const double x2 = 0.86113631159405257522394648889281;
        const double w1 = 0.65214515486254614262693605077800;
        const double w2 = 0.34785484513745385737306394922200;
        for (const auto& [x, w] : {std::pair{-x2, w2}, std::pair{-x1, w1}, std::pair{x1, w1}, std::pair{x2, w2}}) {
            r.points.push_back(0.5 * (x + 1.0));
            r.weights.push_back(0.5 * w);
        }
        return r;
    }();
    return rule;
}

LineRule gauss_legendre(int n)
{
    if (n < 1) throw ArgumentError("gauss_legendre needs at least one point");
    LineRule r;
    r.degree = 2 * n - 1;
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.points.push_back(0.5 * (1.0 - x));
        r.weights.push_back(1.0 / ((1.0 - x * x) * dp * dp));
    }
    return r;
}

TriangleRule duffy_rule(int n)
{
    const LineRule g = gauss_legendre(n);
    TriangleRule r;
    r.degree = 2 * n - 2;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double u = g.points[i];
            const double v = g.points[j];
            // (u, v) in the unit square -> (x, y) = (u, (1 - u) v); Jacobian (1 - u),
            // reference area 1/2, so unit-area weight is 2 * (1 - u) w_i w_j.
            const double x = u;
            const double y = (1.0 - u) * v;
            r.bary.emplace_back(1.0 - x - y, x, y);
            r.weights.push_back(2.0 * (1.0 - u) * g.weights[i] * g.weights[j]);
        }
    return r;
}

}  // namespace pipeflow
