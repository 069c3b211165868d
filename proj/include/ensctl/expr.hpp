#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ensctl {

/// Thrown by parse_expr; `offset` is the byte position of the offending token.
struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t offset);
    std::size_t offset;
};

/// Thrown when evaluation hits a singular point (division by zero, sqrt of a
/// negative). The message names the parameter value.
struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Immutable scalar expression in the parameters theta1..theta<d>.
///
/// Value type over a shared tree: cheap to copy and safe to evaluate from any
/// number of threads concurrently.
class Expr {
public:
    Expr();  // constant 0

    static Expr constant(double value);
    static Expr parameter(int index);  // 1-based

    /// IEEE double evaluation; deterministic for fixed input.
    double eval(std::span<const double> theta) const;

    /// Canonical text form; parse(str()) reproduces the tree exactly.
    std::string str() const;

    /// Largest parameter index referenced (0 for constant expressions).
    int max_param_index() const;

    /// Structural (AST-level) equality.
    bool same_tree(const Expr& other) const;

    /// True when the tree is a single constant node; writes it to *value.
    bool constant_value(double* value = nullptr) const;

    // Combinators with trivial constant folding (0+x, 0*x, 1*x, const op
    // const). Used to build network Kronecker entries; the parser never folds
    // anything except the sign of numeric literals.
    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);

    struct Node;

private:
    explicit Expr(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;

    friend class ExprParser;
};

/// Parse an expression over theta1..theta<param_count> (alias `theta` for
/// theta1). Grammar: numbers (decimal/scientific), + - * / ^ with standard
/// precedence (^ right-associative, integer exponents only), unary minus,
/// sin cos exp sqrt abs, parentheses. No implicit multiplication.
Expr parse_expr(std::string_view text, int param_count);

}  // namespace ensctl
