#include "khj/expr.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

namespace khj {

struct Expr::Node {
    enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Abs };
    Op op;
    double value = 0.0;
    std::shared_ptr<const Node> a, b;

    double eval(double x) const {
        switch (op) {
        case Op::Const: return value;
        case Op::Var: return x;
        case Op::Add: return a->eval(x) + b->eval(x);
        case Op::Sub: return a->eval(x) - b->eval(x);
        case Op::Mul: return a->eval(x) * b->eval(x);
        case Op::Div: return a->eval(x) / b->eval(x);
        case Op::Pow: return std::pow(a->eval(x), b->eval(x));
        case Op::Neg: return -a->eval(x);
        case Op::Sin: return std::sin(a->eval(x));
        case Op::Cos: return std::cos(a->eval(x));
        case Op::Abs: return std::abs(a->eval(x));
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Op = Expr::Node::Op;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    n->value = v;
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse() {
        auto n = sum();
        skip_ws();
        if (pos_ != s_.size())
            fail("trailing input");
        return n;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ExprError("expression '" + s_ + "': " + what + " at position " + std::to_string(pos_));
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr sum() {
        auto n = product();
        for (;;) {
            if (consume('+'))
                n = make(Op::Add, n, product());
            else if (consume('-'))
                n = make(Op::Sub, n, product());
            else
                return n;
        }
    }

    NodePtr product() {
        auto n = unary();
        for (;;) {
            if (consume('*'))
                n = make(Op::Mul, n, unary());
            else if (consume('/'))
                n = make(Op::Div, n, unary());
            else
                return n;
        }
    }

    NodePtr unary() {
        if (consume('-'))
            return make(Op::Neg, unary()); // -x^2 parses as -(x^2)
        if (consume('+'))
            return unary();
        return power();
    }

    NodePtr power() {
        auto base = atom();
        if (consume('^'))
            return make(Op::Pow, base, unary()); // right-assoc via recursion
        return base;
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= s_.size())
            fail("unexpected end");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = std::stod(s_.substr(pos_), &used);
            pos_ += used;
            return make(Op::Const, nullptr, nullptr, v);
        }
        if (consume('(')) {
            auto n = sum();
            if (!consume(')'))
                fail("expected ')'");
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
            std::string name = s_.substr(start, pos_ - start);
            if (name == "x")
                return make(Op::Var);
            if (name == "pi")
                return make(Op::Const, nullptr, nullptr, std::numbers::pi);
            Op fn;
            if (name == "sin")
                fn = Op::Sin;
            else if (name == "cos")
                fn = Op::Cos;
            else if (name == "abs")
                fn = Op::Abs;
            else
                fail("unknown name '" + name + "'");
            if (!consume('('))
                fail("expected '(' after " + name);
            auto arg = sum();
            if (!consume(')'))
                fail("expected ')'");
            return make(fn, arg);
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

} // namespace

Expr Expr::parse(const std::string& text) {
    Expr e;
    e.root_ = Parser(text).parse();
    e.text_ = text;
    return e;
}

Expr Expr::constant(double c) {
    Expr e;
    e.root_ = make(Op::Const, nullptr, nullptr, c);
    e.text_ = std::to_string(c);
    return e;
}

double Expr::operator()(double x) const {
    if (!root_)
        throw ExprError("evaluating empty expression");
    return root_->eval(x);
}

} // namespace khj
