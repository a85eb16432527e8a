#include "cohesim/expression.hpp"

#include "cohesim/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

namespace cohesim {

struct Expression::Node {
    enum class Op { Number, X, Y, T, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Abs, Min, Max } op;
    double value = 0.0;
    int a = -1, b = -1;
};

namespace {

using Node = Expression::Node;
using Op = Node::Op;

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    int parse()
    {
        const int root = expr();
        skip();
        if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
        return root;
    }

    std::vector<Node> nodes;
    bool uses_t = false;

private:
    [[noreturn]] void error(const std::string& what) const
    {
        throw ConfigError("expression \"" + s_ + "\": " + what + " at position " + std::to_string(pos_ + 1));
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

    void expect(char c)
    {
        if (!accept(c)) error(std::string("expected '") + c + "'");
    }

    int add(Op op, int a = -1, int b = -1, double v = 0.0)
    {
        nodes.push_back({op, v, a, b});
        return static_cast<int>(nodes.size()) - 1;
    }

    int expr()
    {
        int lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = add(Op::Add, lhs, term());
            else if (accept('-'))
                lhs = add(Op::Sub, lhs, term());
            else
                return lhs;
        }
    }

    int term()
    {
        int lhs = unary();
        for (;;) {
            if (accept('*'))
                lhs = add(Op::Mul, lhs, unary());
            else if (accept('/'))
                lhs = add(Op::Div, lhs, unary());
            else
                return lhs;
        }
    }

    int unary()
    {
        if (accept('-')) return add(Op::Neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    int power()
    {
        const int base = primary();
        if (accept('^')) return add(Op::Pow, base, unary());
        return base;
    }

    int primary()
    {
        skip();
        if (pos_ >= s_.size()) error("unexpected end of input");
        const char c = s_[pos_];
        if (accept('(')) {
            const int inner = expr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) error("malformed number");
            pos_ += static_cast<std::size_t>(end - begin);
            return add(Op::Number, -1, -1, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            const std::string name = s_.substr(start, pos_ - start);
            if (name == "x") return add(Op::X);
            if (name == "y") return add(Op::Y);
            if (name == "t") {
                uses_t = true;
                return add(Op::T);
            }
            if (name == "pi") return add(Op::Number, -1, -1, std::numbers::pi);
            static const std::pair<const char*, Op> unary_fns[] = {
                {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"abs", Op::Abs}};
            static const std::pair<const char*, Op> binary_fns[] = {{"min", Op::Min}, {"max", Op::Max}};
            for (const auto& [fn, op] : unary_fns)
                if (name == fn) {
                    expect('(');
                    const int a = expr();
                    expect(')');
                    return add(op, a);
                }
            for (const auto& [fn, op] : binary_fns)
                if (name == fn) {
                    expect('(');
                    const int a = expr();
                    expect(',');
                    const int b = expr();
                    expect(')');
                    return add(op, a, b);
                }
            pos_ = start;
            error("unknown identifier '" + name + "'");
        }
        error("unexpected '" + std::string(1, c) + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

double eval(const std::vector<Node>& n, int i, double x, double y, double t)
{
    const Node& k = n[static_cast<std::size_t>(i)];
    switch (k.op) {
    case Op::Number: return k.value;
    case Op::X: return x;
    case Op::Y: return y;
    case Op::T: return t;
    case Op::Neg: return -eval(n, k.a, x, y, t);
    case Op::Add: return eval(n, k.a, x, y, t) + eval(n, k.b, x, y, t);
    case Op::Sub: return eval(n, k.a, x, y, t) - eval(n, k.b, x, y, t);
    case Op::Mul: return eval(n, k.a, x, y, t) * eval(n, k.b, x, y, t);
    case Op::Div: return eval(n, k.a, x, y, t) / eval(n, k.b, x, y, t);
    case Op::Pow: return std::pow(eval(n, k.a, x, y, t), eval(n, k.b, x, y, t));
    case Op::Sin: return std::sin(eval(n, k.a, x, y, t));
    case Op::Cos: return std::cos(eval(n, k.a, x, y, t));
    case Op::Exp: return std::exp(eval(n, k.a, x, y, t));
    case Op::Abs: return std::abs(eval(n, k.a, x, y, t));
    case Op::Min: return std::min(eval(n, k.a, x, y, t), eval(n, k.b, x, y, t));
    case Op::Max: return std::max(eval(n, k.a, x, y, t), eval(n, k.b, x, y, t));
    }
    return 0.0;
}

}  // namespace

Expression Expression::parse(const std::string& text)
{
    Parser p(text);
    Expression e;
    e.root_ = p.parse();
    e.text_ = text;
    e.uses_t_ = p.uses_t;
    e.nodes_ = std::make_shared<const std::vector<Node>>(std::move(p.nodes));
    return e;
}

Expression Expression::constant(double value)
{
    Expression e;
    e.nodes_ = std::make_shared<const std::vector<Node>>(std::vector<Node>{{Op::Number, value, -1, -1}});
    e.root_ = 0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    e.text_ = buf;
    return e;
}

double Expression::operator()(double x, double y, double t) const
{
    if (root_ < 0) return 0.0;
    return eval(*nodes_, root_, x, y, t);
}

}  // namespace cohesim
