#pragma once

#include <memory>
#include <string>
#include <vector>

namespace cohesim {

/// Arithmetic expression over the variables x, y, t.
///
/// Grammar: numbers, x, y, t, pi, + - * / ^ (right associative), unary
/// minus, parentheses, and the functions sin, cos, exp, abs (one argument)
/// and min, max (two arguments). Parse errors throw ConfigError with the
/// offending position. Evaluation is const and thread-safe.
class Expression {
public:
    Expression() = default;  // the constant 0
    static Expression parse(const std::string& text);
    static Expression constant(double value);

    double operator()(double x, double y, double t) const;
    const std::string& text() const noexcept { return text_; }
    /// True when the expression does not depend on t.
    bool time_independent() const noexcept { return !uses_t_; }

    struct Node;

private:
    std::string text_ = "0";
    std::shared_ptr<const std::vector<Node>> nodes_;
    int root_ = -1;
    bool uses_t_ = false;
};

}  // namespace cohesim
