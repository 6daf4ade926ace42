#pragma once

#include "pipeflow/autodiff.hpp"

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace pipeflow {

/// Arithmetic expression over the coordinates x and y:
///   + - * / ^ (right associative), unary minus, parentheses,
///   sin cos tan exp log sqrt abs, constants pi and e.
/// Evaluation is templated so the same tree runs on double and Dual2.
class Expression {
public:
    Expression() { nodes_.push_back({Op::Number, 0.0, Fn::Sin, -1, -1}); text_ = "0"; }

    /// Throws ConfigError; reported columns are offset by `column` (1-based
    /// column of the first character of `text` in its line).
    static Expression parse(std::string_view text, int line = 0, int column = 1);
    static Expression constant(double value);

    const std::string& text() const { return text_; }
    bool depends_on_position() const;

    template <typename Scalar>
    Scalar operator()(const Scalar& x, const Scalar& y) const
    {
        return eval<Scalar>(root(), x, y);
    }
    double operator()(const Vec2& p) const { return (*this)(p[0], p[1]); }

    /// Structural equality (the source text is not compared).
    bool operator==(const Expression& o) const { return nodes_ == o.nodes_; }

private:
    enum class Op : std::uint8_t { Number, X, Y, Add, Sub, Mul, Div, Pow, Neg, Call };
    enum class Fn : std::uint8_t { Sin, Cos, Tan, Exp, Log, Sqrt, Abs };
    struct Node {
        Op op;
        double value;
        Fn fn;
        int a;
        int b;
        bool operator==(const Node&) const = default;
    };
    friend class ExpressionParser;

    int root() const { return static_cast<int>(nodes_.size()) - 1; }

    template <typename Scalar>
    Scalar eval(int i, const Scalar& x, const Scalar& y) const
    {
        using std::abs, std::cos, std::exp, std::log, std::pow, std::sin, std::sqrt, std::tan;
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        switch (n.op) {
        case Op::Number: return Scalar(n.value);
        case Op::X: return x;
        case Op::Y: return y;
        case Op::Add: return eval(n.a, x, y) + eval(n.b, x, y);
        case Op::Sub: return eval(n.a, x, y) - eval(n.b, x, y);
        case Op::Mul: return eval(n.a, x, y) * eval(n.b, x, y);
        case Op::Div: return eval(n.a, x, y) / eval(n.b, x, y);
        case Op::Pow: return pow(eval(n.a, x, y), eval(n.b, x, y));
        case Op::Neg: return -eval(n.a, x, y);
        case Op::Call: {
            const Scalar v = eval(n.a, x, y);
            switch (n.fn) {
            case Fn::Sin: return sin(v);
            case Fn::Cos: return cos(v);
            case Fn::Tan: return tan(v);
            case Fn::Exp: return exp(v);
            case Fn::Log: return log(v);
            case Fn::Sqrt: return sqrt(v);
            case Fn::Abs: return abs(v);
            }
        }
        }
        return Scalar(0.0);
    }

    // Children precede parents; the last node is the root.
    std::vector<Node> nodes_;
    std::string text_;
};

}  // namespace pipeflow
