#pragma once

// Series expression grammar for the command line:
//   expr   := term (('+' | '-') term)*
//   term   := factor ('*' factor)*
//   factor := atom ('^' int | '/' int)*
//   atom   := int | 'X' | 'Y' | '(' expr ')' | '-' atom
// Exponents are nonnegative except on a variable in a Laurent ring; division
// only by integer literals.

#include <cctype>
#include <memory>
#include <string>

#include "recip/series_ops.hpp"

namespace recip {

namespace ast {

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
    enum Kind { Int, Var, Add, Sub, Mul, Neg, Pow, Div } kind;
    i64 value = 0;   // Int: literal; Pow: exponent; Div: divisor
    char var = 'Y';  // Var
    NodePtr a, b;
    size_t pos = 0;
};

} // namespace ast

class SeriesParser {
  public:
    explicit SeriesParser(std::string text) : text_(std::move(text)) {}

    ast::NodePtr parse() {
        auto n = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) throw parse_error("unexpected trailing input", pos_);
        return n;
    }

  private:
    std::string text_;
    size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    i64 parse_int_literal() {
        skip_ws();
        size_t start = pos_;
        bool neg = false;
        if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
            neg = text_[pos_] == '-';
            ++pos_;
        }
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
            throw parse_error("expected an integer", start);
        i64 v = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            v = v * 10 + (text_[pos_] - '0');
            if (v > (1LL << 60)) throw parse_error("integer literal too large", start);
            ++pos_;
        }
        return neg ? -v : v;
    }

    ast::NodePtr parse_expr() {
        auto lhs = parse_term();
        while (true) {
            skip_ws();
            size_t p = pos_;
            if (eat('+')) {
                auto n = std::make_shared<ast::Node>();
                n->kind = ast::Node::Add;
                n->a = lhs;
                n->b = parse_term();
                n->pos = p;
                lhs = n;
            } else if (eat('-')) {
                auto n = std::make_shared<ast::Node>();
                n->kind = ast::Node::Sub;
                n->a = lhs;
                n->b = parse_term();
                n->pos = p;
                lhs = n;
            } else {
                return lhs;
            }
        }
    }
    ast::NodePtr parse_term() {
        auto lhs = parse_factor();
        while (true) {
            skip_ws();
            size_t p = pos_;
            if (eat('*')) {
                auto n = std::make_shared<ast::Node>();
                n->kind = ast::Node::Mul;
                n->a = lhs;
                n->b = parse_factor();
                n->pos = p;
                lhs = n;
            } else {
                return lhs;
            }
        }
    }
    ast::NodePtr parse_factor() {
        auto base = parse_atom();
        while (true) {
            skip_ws();
            size_t p = pos_;
            if (eat('^')) {
                auto n = std::make_shared<ast::Node>();
                n->kind = ast::Node::Pow;
                n->a = base;
                n->value = parse_int_literal();
                n->pos = p;
                base = n;
            } else if (eat('/')) {
                auto n = std::make_shared<ast::Node>();
                n->kind = ast::Node::Div;
                n->a = base;
                n->value = parse_int_literal();
                n->pos = p;
                base = n;
            } else {
                return base;
            }
        }
    }
    ast::NodePtr parse_atom() {
        skip_ws();
        size_t p = pos_;
        if (eat('(')) {
            auto inner = parse_expr();
            if (!eat(')')) throw parse_error("expected ')'", pos_);
            return inner;
        }
        if (peek() == '-') {
            ++pos_;
            auto n = std::make_shared<ast::Node>();
            n->kind = ast::Node::Neg;
            n->a = parse_atom();
            n->pos = p;
            return n;
        }
        char c = peek();
        if (c == 'X' || c == 'Y') {
            ++pos_;
            auto n = std::make_shared<ast::Node>();
            n->kind = ast::Node::Var;
            n->var = c;
            n->pos = p;
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            auto n = std::make_shared<ast::Node>();
            n->kind = ast::Node::Int;
            n->value = parse_int_literal();
            n->pos = p;
            return n;
        }
        throw parse_error("expected a literal, variable or '('", p);
    }
};

namespace detail_parse {

template <class C>
SeriesT<C> eval_node(const ast::NodePtr& n, RingPtr ring) {
    using S = SeriesT<C>;
    CtxPtr ctx = ring->ctx;
    switch (n->kind) {
        case ast::Node::Int:
            return S::constant(ring, n->value);
        case ast::Node::Var:
            return S::variable(ring, n->var);
        case ast::Node::Add:
            return eval_node<C>(n->a, ring) + eval_node<C>(n->b, ring);
        case ast::Node::Sub:
            return eval_node<C>(n->a, ring) - eval_node<C>(n->b, ring);
        case ast::Node::Mul:
            return eval_node<C>(n->a, ring) * eval_node<C>(n->b, ring);
        case ast::Node::Neg:
            return -eval_node<C>(n->a, ring);
        case ast::Node::Pow: {
            if (n->value < 0) {
                if (n->a->kind != ast::Node::Var)
                    throw parse_error("negative exponents allowed on a bare variable only", n->pos);
                int idx = ring->index_of(n->a->var);
                if (ring->var[idx].window_low >= 0)
                    throw parse_error("negative exponent outside a Laurent ring", n->pos);
                return S::variable(ring, n->a->var, static_cast<int>(n->value));
            }
            S base = eval_node<C>(n->a, ring);
            S acc = S::constant(ring, 1);
            for (i64 i = 0; i < n->value; ++i) acc = acc * base;
            return acc;
        }
        case ast::Node::Div: {
            S base = eval_node<C>(n->a, ring);
            i64 d = n->value;
            if (d == 0) throw parse_error("division by zero", n->pos);
            if constexpr (std::is_same_v<C, WittElement>) {
                if (d % ctx->p == 0) throw divisor_not_unit("literal divisor not a unit in an integral ring");
                WittElement inv = WittElement::from_int(ctx, d).inverse();
                return base.scaled(inv);
            } else {
                return base.scaled(RationalCoefficient::from_fraction(ctx, 1, d));
            }
        }
    }
    throw parse_error("unreachable", n->pos);
}

} // namespace detail_parse

inline ZSeries parse_series(const std::string& text, RingPtr ring) {
    SeriesParser p(text);
    return detail_parse::eval_node<WittElement>(p.parse(), ring);
}
inline QSeries parse_series_rational(const std::string& text, RingPtr ring) {
    SeriesParser p(text);
    return detail_parse::eval_node<RationalCoefficient>(p.parse(), ring);
}

// printable form that reparses to an equal series
inline std::string print_series(const ZSeries& s) {
    if (s.terms.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : s.terms) {
        if (c.ctx->f != 1) throw spec_mismatch("print_series: univariate coefficients only");
        if (!first) os << " + ";
        first = false;
        os << c.c[0];
        for (int i = 0; i < s.ring->nvars; ++i)
            if (e.get(i) != 0) os << "*" << s.ring->var[i].name << "^" << e.get(i);
    }
    return os.str();
}

} // namespace recip
