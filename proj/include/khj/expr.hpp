#ifndef KHJ_EXPR_HPP
#define KHJ_EXPR_HPP

#include <memory>
#include <stdexcept>
#include <string>

namespace khj {

// Tiny closed expression grammar for coefficients in problem files:
// numbers, x, pi, + - * / ^, sin, cos, abs, parentheses. No user functions,
// no state, so runs are reproducible.
class Expr {
public:
    Expr() = default;
    static Expr parse(const std::string& text);
    static Expr constant(double c);

    double operator()(double x) const;
    bool empty() const { return !root_; }
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

struct ExprError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace khj

#endif
