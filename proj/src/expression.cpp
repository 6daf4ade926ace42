#include "pipeflow/expression.hpp"

#include <cctype>
#include <cstdlib>
#include <numbers>

namespace pipeflow {

class ExpressionParser {
public:
    ExpressionParser(std::string_view text, int line, int column) : s_(text), line_(line), column_(column) {}

    Expression run()
    {
        skip();
        if (pos_ >= s_.size()) fail("empty expression");
        parse_sum();
        skip();
        if (pos_ < s_.size()) fail(std::string("unexpected '") + s_[pos_] + "'");
        Expression e;
        e.nodes_ = std::move(nodes_);
        e.text_ = std::string(s_);
        return e;
    }

private:
    using Op = Expression::Op;
    using Fn = Expression::Fn;

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ConfigError(line_, column_ + static_cast<int>(pos_), msg);
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    int push(Op op, int a = -1, int b = -1, double value = 0.0, Fn fn = Fn::Sin)
    {
        nodes_.push_back({op, value, fn, a, b});
        return static_cast<int>(nodes_.size()) - 1;
    }

    int parse_sum()
    {
        int lhs = parse_product();
        for (;;) {
            if (accept('+')) lhs = push(Op::Add, lhs, parse_product());
            else if (accept('-')) lhs = push(Op::Sub, lhs, parse_product());
            else return lhs;
        }
    }

    int parse_product()
    {
        int lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = push(Op::Mul, lhs, parse_unary());
            else if (accept('/')) lhs = push(Op::Div, lhs, parse_unary());
            else return lhs;
        }
    }

    // -a^b is -(a^b); the exponent may itself carry a sign.
    int parse_unary()
    {
        if (accept('-')) return push(Op::Neg, parse_unary());
        if (accept('+')) return parse_unary();
        const int base = parse_primary();
        if (accept('^')) return push(Op::Pow, base, parse_unary());
        return base;
    }

    int parse_primary()
    {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            const int inner = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
        fail(std::string("unexpected '") + c + "'");
    }

    int parse_number()
    {
        const std::size_t start = pos_;
        const std::string tail(s_.substr(pos_));
        char* end = nullptr;
        const double v = std::strtod(tail.c_str(), &end);
        if (end == tail.c_str()) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - tail.c_str());
        if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
            pos_ = start;
            fail("malformed number");
        }
        return push(Op::Number, -1, -1, v);
    }

    int parse_name()
    {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string name(s_.substr(start, pos_ - start));
        if (name == "x") return push(Op::X);
        if (name == "y") return push(Op::Y);
        if (name == "pi") return push(Op::Number, -1, -1, std::numbers::pi);
        if (name == "e") return push(Op::Number, -1, -1, std::numbers::e);
        static const std::pair<const char*, Fn> functions[] = {{"sin", Fn::Sin}, {"cos", Fn::Cos},   {"tan", Fn::Tan},
                                                               {"exp", Fn::Exp}, {"log", Fn::Log},   {"sqrt", Fn::Sqrt},
                                                               {"abs", Fn::Abs}};
        for (const auto& [fname, fn] : functions) {
            if (name != fname) continue;
            if (!accept('(')) fail("expected '(' after " + name);
            const int arg = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return push(Op::Call, arg, -1, 0.0, fn);
        }
        pos_ = start;
        fail("unknown name '" + name + "'");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    int line_;
    int column_;
    std::vector<Expression::Node> nodes_;
};

Expression Expression::parse(std::string_view text, int line, int column)
{
    return ExpressionParser(text, line, column).run();
}

Expression Expression::constant(double value)
{
    Expression e;
    e.nodes_[0].value = value;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    e.text_ = buf;
    return e;
}

bool Expression::depends_on_position() const
{
    for (const Node& n : nodes_)
        if (n.op == Op::X || n.op == Op::Y) return true;
    return false;
}

}  // namespace pipeflow
