#pragma once

#include "pipeflow/core.hpp"

#include <cmath>

namespace pipeflow {

/// Second-order forward-mode number in two variables: value, gradient and
/// Hessian propagated together. Used to differentiate closed-form fields
/// (exact solutions, Poiseuille and Taylor-Couette evaluators) without
/// hand-written derivatives.
template <typename Scalar>
struct Dual2 {
    Scalar v{0};
    Vector2<Scalar> g = Vector2<Scalar>::Zero();
    Matrix2<Scalar> h = Matrix2<Scalar>::Zero();

    Dual2() = default;
    Dual2(Scalar value) : v(value) {}  // NOLINT: implicit from constants
    Dual2(Scalar value, const Vector2<Scalar>& grad, const Matrix2<Scalar>& hess)
        : v(value), g(grad), h(hess) {}

    static Dual2 variable(Scalar value, int which)
    {
        Dual2 d(value);
        d.g[which] = Scalar(1);
        return d;
    }

    Dual2& operator+=(const Dual2& o) { return *this = *this + o; }
    Dual2& operator-=(const Dual2& o) { return *this = *this - o; }
    Dual2& operator*=(const Dual2& o) { return *this = *this * o; }
    Dual2& operator/=(const Dual2& o) { return *this = *this / o; }
};

using Dual2d = Dual2<double>;

// Chain rule for a scalar function with value f0, slope f1, curvature f2.
template <typename Scalar>
Dual2<Scalar> chain(const Dual2<Scalar>& a, Scalar f0, Scalar f1, Scalar f2)
{
    return {f0, f1 * a.g, f1 * a.h + f2 * a.g * a.g.transpose()};
}

template <typename Scalar>
Dual2<Scalar> operator+(const Dual2<Scalar>& a, const Dual2<Scalar>& b)
{
    return {a.v + b.v, a.g + b.g, a.h + b.h};
}
template <typename Scalar>
Dual2<Scalar> operator-(const Dual2<Scalar>& a, const Dual2<Scalar>& b)
{
    return {a.v - b.v, a.g - b.g, a.h - b.h};
}
template <typename Scalar>
Dual2<Scalar> operator-(const Dual2<Scalar>& a)
{
    return {-a.v, -a.g, -a.h};
}
template <typename Scalar>
Dual2<Scalar> operator*(const Dual2<Scalar>& a, const Dual2<Scalar>& b)
{
    return {a.v * b.v, a.v * b.g + b.v * a.g,
            a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose()};
}
template <typename Scalar>
Dual2<Scalar> operator/(const Dual2<Scalar>& a, const Dual2<Scalar>& b)
{
    const Scalar inv = Scalar(1) / b.v;
    return a * chain(b, inv, -inv * inv, Scalar(2) * inv * inv * inv);
}

#define PIPEFLOW_DUAL2_MIXED(op)                                              \
    template <typename Scalar>                                                \
    Dual2<Scalar> operator op(const Dual2<Scalar>& a, Scalar b)               \
    {                                                                         \
        return a op Dual2<Scalar>(b);                                         \
    }                                                                         \
    template <typename Scalar>                                                \
    Dual2<Scalar> operator op(Scalar a, const Dual2<Scalar>& b)               \
    {                                                                         \
        return Dual2<Scalar>(a) op b;                                         \
    }
PIPEFLOW_DUAL2_MIXED(+)
PIPEFLOW_DUAL2_MIXED(-)
PIPEFLOW_DUAL2_MIXED(*)
PIPEFLOW_DUAL2_MIXED(/)
#undef PIPEFLOW_DUAL2_MIXED

template <typename Scalar>
Dual2<Scalar> sin(const Dual2<Scalar>& a)
{
    using std::cos;
    using std::sin;
    return chain(a, sin(a.v), cos(a.v), -sin(a.v));
}
template <typename Scalar>
Dual2<Scalar> cos(const Dual2<Scalar>& a)
{
    using std::cos;
    using std::sin;
    return chain(a, cos(a.v), -sin(a.v), -cos(a.v));
}
template <typename Scalar>
Dual2<Scalar> tan(const Dual2<Scalar>& a)
{
    using std::tan;
    const Scalar t = tan(a.v);
    const Scalar s = Scalar(1) + t * t;
    return chain(a, t, s, Scalar(2) * t * s);
}
template <typename Scalar>
Dual2<Scalar> exp(const Dual2<Scalar>& a)
{
    using std::exp;
    const Scalar e = exp(a.v);
    return chain(a, e, e, e);
}
template <typename Scalar>
Dual2<Scalar> log(const Dual2<Scalar>& a)
{
    using std::log;
    const Scalar inv = Scalar(1) / a.v;
    return chain(a, log(a.v), inv, -inv * inv);
}
template <typename Scalar>
Dual2<Scalar> sqrt(const Dual2<Scalar>& a)
{
    using std::sqrt;
    const Scalar s = sqrt(a.v);
    return chain(a, s, Scalar(0.5) / s, Scalar(-0.25) / (s * a.v));
}
template <typename Scalar>
Dual2<Scalar> abs(const Dual2<Scalar>& a)
{
    return a.v < Scalar(0) ? -a : a;
}
template <typename Scalar>
Dual2<Scalar> pow(const Dual2<Scalar>& a, Scalar p)
{
    using std::pow;
    return chain(a, pow(a.v, p), p * pow(a.v, p - Scalar(1)),
                 p * (p - Scalar(1)) * pow(a.v, p - Scalar(2)));
}
template <typename Scalar>
Dual2<Scalar> pow(const Dual2<Scalar>& a, const Dual2<Scalar>& b)
{
    // a^b with a non-constant exponent.
    if (b.g.isZero() && b.h.isZero()) return pow(a, b.v);
    return exp(b * log(a));
}
template <typename Scalar>
bool operator<(const Dual2<Scalar>& a, const Dual2<Scalar>& b)
{
    return a.v < b.v;
}

/// Value, gradient and Hessian of a scalar field f(x, y) templated on its scalar.
template <typename Field>
Dual2d differentiate(const Field& field, const Vec2& x)
{
    return field(Dual2d::variable(x[0], 0), Dual2d::variable(x[1], 1));
}

}  // namespace pipeflow
