#include "ensctl/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

namespace ensctl {

namespace {

enum class Kind { Const, Param, Neg, Call, Add, Sub, Mul, Div, Pow };
enum class Func { Sin, Cos, Exp, Sqrt, Abs };

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_theta(std::span<const double> theta) {
    std::string s = "(";
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (i) s += ", ";
        s += format_double(theta[i]);
    }
    return s + ")";
}

}  // namespace

struct Expr::Node {
    Kind kind;
    double value = 0.0;        // Const
    int param = 0;             // Param (1-based)
    int exponent = 0;          // Pow
    Func func = Func::Sin;     // Call
    std::shared_ptr<const Node> lhs, rhs;
};

ParseError::ParseError(const std::string& msg, std::size_t off)
    : std::runtime_error(msg + " (at offset " + std::to_string(off) + ")"), offset(off) {}

Expr::Expr() : node_(std::make_shared<Node>(Node{Kind::Const})) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::constant(double value) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Const;
    n->value = value;
    return Expr(std::move(n));
}

Expr Expr::parameter(int index) {
    if (index < 1) throw std::invalid_argument("parameter index must be >= 1");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Param;
    n->param = index;
    return Expr(std::move(n));
}

namespace {

std::shared_ptr<const Expr::Node> make_binary(Kind k, std::shared_ptr<const Expr::Node> a,
                                              std::shared_ptr<const Expr::Node> b) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

double eval_node(const Expr::Node& n, std::span<const double> theta) {
    switch (n.kind) {
        case Kind::Const:
            return n.value;
        case Kind::Param:
            if (n.param > static_cast<int>(theta.size()))
                throw EvalError("parameter theta" + std::to_string(n.param) +
                                " out of range for point " + format_theta(theta));
            return theta[n.param - 1];
        case Kind::Neg:
            return -eval_node(*n.lhs, theta);
        case Kind::Call: {
            double v = eval_node(*n.lhs, theta);
            switch (n.func) {
                case Func::Sin: return std::sin(v);
                case Func::Cos: return std::cos(v);
                case Func::Exp: return std::exp(v);
                case Func::Sqrt:
                    if (v < 0.0)
                        throw EvalError("sqrt of negative value " + format_double(v) +
                                        " at theta=" + format_theta(theta));
                    return std::sqrt(v);
                case Func::Abs: return std::fabs(v);
            }
            return 0.0;
        }
        case Kind::Add: return eval_node(*n.lhs, theta) + eval_node(*n.rhs, theta);
        case Kind::Sub: return eval_node(*n.lhs, theta) - eval_node(*n.rhs, theta);
        case Kind::Mul: return eval_node(*n.lhs, theta) * eval_node(*n.rhs, theta);
        case Kind::Div: {
            double num = eval_node(*n.lhs, theta);
            double den = eval_node(*n.rhs, theta);
            if (den == 0.0)
                throw EvalError("division by zero at theta=" + format_theta(theta));
            return num / den;
        }
        case Kind::Pow: {
            double base = eval_node(*n.lhs, theta);
            int e = n.exponent;
            bool inv = e < 0;
            unsigned long k = inv ? -static_cast<long>(e) : e;
            double acc = 1.0, p = base;
            while (k) {  // binary exponentiation, deterministic
                if (k & 1) acc *= p;
                k >>= 1;
                if (k) p *= p;
            }
            if (inv) {
                if (acc == 0.0)
                    throw EvalError("division by zero (negative power) at theta=" +
                                    format_theta(theta));
                return 1.0 / acc;
            }
            return acc;
        }
    }
    return 0.0;
}

int precedence(Kind k) {
    switch (k) {
        case Kind::Add:
        case Kind::Sub: return 1;
        case Kind::Mul:
        case Kind::Div: return 2;
        case Kind::Neg: return 3;
        case Kind::Pow: return 4;
        default: return 5;  // atoms
    }
}

void print_node(const Expr::Node& n, std::string& out);

void print_child(const Expr::Node& child, int min_prec, std::string& out) {
    bool parens = precedence(child.kind) < min_prec ||
                  (child.kind == Kind::Const && child.value < 0.0 && min_prec > 1);
    if (parens) out += '(';
    print_node(child, out);
    if (parens) out += ')';
}

void print_node(const Expr::Node& n, std::string& out) {
    switch (n.kind) {
        case Kind::Const:
            out += format_double(n.value);
            return;
        case Kind::Param:
            out += n.param == 1 ? "theta" : "theta" + std::to_string(n.param);
            return;
        case Kind::Neg:
            out += '-';
            print_child(*n.lhs, 4, out);
            return;
        case Kind::Call: {
            switch (n.func) {
                case Func::Sin: out += "sin"; break;
                case Func::Cos: out += "cos"; break;
                case Func::Exp: out += "exp"; break;
                case Func::Sqrt: out += "sqrt"; break;
                case Func::Abs: out += "abs"; break;
            }
            out += '(';
            print_node(*n.lhs, out);
            out += ')';
            return;
        }
        case Kind::Add:
        case Kind::Sub:
        case Kind::Mul:
        case Kind::Div: {
            int p = precedence(n.kind);
            print_child(*n.lhs, p, out);
            out += n.kind == Kind::Add ? "+" : n.kind == Kind::Sub ? "-"
                   : n.kind == Kind::Mul ? "*" : "/";
            // equal precedence on the right always gets parentheses so the
            // reparse rebuilds the identical (left-associated) tree
            print_child(*n.rhs, p + 1, out);
            return;
        }
        case Kind::Pow:
            print_child(*n.lhs, 5, out);
            out += '^';
            if (n.exponent < 0) out += '-';
            out += std::to_string(std::abs(static_cast<long>(n.exponent)));
            return;
    }
}

bool same_node(const Expr::Node& a, const Expr::Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Kind::Const:
            // bit-level comparison keeps -0.0 and 0.0 distinct trees
            return a.value == b.value && std::signbit(a.value) == std::signbit(b.value);
        case Kind::Param: return a.param == b.param;
        case Kind::Neg: return same_node(*a.lhs, *b.lhs);
        case Kind::Call: return a.func == b.func && same_node(*a.lhs, *b.lhs);
        case Kind::Pow: return a.exponent == b.exponent && same_node(*a.lhs, *b.lhs);
        default: return same_node(*a.lhs, *b.lhs) && same_node(*a.rhs, *b.rhs);
    }
}

int max_param_node(const Expr::Node& n) {
    switch (n.kind) {
        case Kind::Const: return 0;
        case Kind::Param: return n.param;
        case Kind::Neg:
        case Kind::Call:
        case Kind::Pow: return max_param_node(*n.lhs);
        default: return std::max(max_param_node(*n.lhs), max_param_node(*n.rhs));
    }
}

}  // namespace

double Expr::eval(std::span<const double> theta) const { return eval_node(*node_, theta); }

std::string Expr::str() const {
    std::string out;
    print_node(*node_, out);
    return out;
}

int Expr::max_param_index() const { return max_param_node(*node_); }

bool Expr::same_tree(const Expr& other) const { return same_node(*node_, *other.node_); }

bool Expr::constant_value(double* value) const {
    if (node_->kind != Kind::Const) return false;
    if (value) *value = node_->value;
    return true;
}

Expr operator+(const Expr& a, const Expr& b) {
    double ca, cb;
    bool isa = a.constant_value(&ca), isb = b.constant_value(&cb);
    if (isa && isb) return Expr::constant(ca + cb);
    if (isa && ca == 0.0) return b;
    if (isb && cb == 0.0) return a;
    return Expr(make_binary(Kind::Add, a.node_, b.node_));
}

Expr operator-(const Expr& a, const Expr& b) {
    double ca, cb;
    bool isa = a.constant_value(&ca), isb = b.constant_value(&cb);
    if (isa && isb) return Expr::constant(ca - cb);
    if (isb && cb == 0.0) return a;
    return Expr(make_binary(Kind::Sub, a.node_, b.node_));
}

Expr operator*(const Expr& a, const Expr& b) {
    double ca, cb;
    bool isa = a.constant_value(&ca), isb = b.constant_value(&cb);
    if (isa && isb) return Expr::constant(ca * cb);
    if ((isa && ca == 0.0) || (isb && cb == 0.0)) return Expr::constant(0.0);
    if (isa && ca == 1.0) return b;
    if (isb && cb == 1.0) return a;
    return Expr(make_binary(Kind::Mul, a.node_, b.node_));
}

// ---------------------------------------------------------------------------
// recursive descent parser

class ExprParser {
public:
    ExprParser(std::string_view text, int param_count) : text_(text), d_(param_count) {}

    Expr parse() {
        auto node = parse_sum();
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError("unexpected trailing input", pos_);
        return Expr(std::move(node));
    }

private:
    using NodePtr = std::shared_ptr<const Expr::Node>;

    std::string_view text_;
    int d_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool consume(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_sum() {
        auto lhs = parse_term();
        for (;;) {
            if (consume('+'))
                lhs = make_binary(Kind::Add, lhs, parse_term());
            else if (consume('-'))
                lhs = make_binary(Kind::Sub, lhs, parse_term());
            else
                return lhs;
        }
    }

    NodePtr parse_term() {
        auto lhs = parse_factor();
        for (;;) {
            if (consume('*'))
                lhs = make_binary(Kind::Mul, lhs, parse_factor());
            else if (consume('/'))
                lhs = make_binary(Kind::Div, lhs, parse_factor());
            else
                return lhs;
        }
    }

    NodePtr parse_factor() {
        if (consume('-')) {
            skip_ws();
            if (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                                        text_[pos_] == '.')) {
                double v = parse_number_token();
                if (peek() == '^') {
                    // ^ binds tighter than the sign: -2^2 == -(2^2)
                    ++pos_;
                    long e = parse_exponent();
                    auto p = std::make_shared<Expr::Node>();
                    p->kind = Kind::Pow;
                    p->exponent = static_cast<int>(e);
                    p->lhs = const_node(v);
                    auto n = std::make_shared<Expr::Node>();
                    n->kind = Kind::Neg;
                    n->lhs = std::move(p);
                    return n;
                }
                // fold the sign so "-3.5" round-trips as one constant node
                return const_node(-v);
            }
            auto child = parse_factor();
            // keep the constant fold uniform: -(3.5) and -3.5 are one node
            if (child->kind == Kind::Const) return const_node(-child->value);
            auto n = std::make_shared<Expr::Node>();
            n->kind = Kind::Neg;
            n->lhs = std::move(child);
            return n;
        }
        return parse_power();
    }

    NodePtr parse_power() {
        auto base = parse_primary();
        if (consume('^')) {
            long e = parse_exponent();
            if (e > std::numeric_limits<int>::max() || e < std::numeric_limits<int>::min())
                throw ParseError("exponent out of range", pos_);
            auto n = std::make_shared<Expr::Node>();
            n->kind = Kind::Pow;
            n->exponent = static_cast<int>(e);
            n->lhs = std::move(base);
            return n;
        }
        return base;
    }

    // exponent := ['-'] integer ['^' exponent], folded right-associatively
    long parse_exponent() {
        skip_ws();
        bool neg = consume('-');
        std::size_t at = pos_;
        double v = parse_number_token();
        if (v != std::floor(v) || std::fabs(v) > 1e9)
            throw ParseError("non-integer exponent", at);
        long e = static_cast<long>(v) * (neg ? -1 : 1);
        if (consume('^')) {
            long upper = parse_exponent();
            if (upper < 0) throw ParseError("non-integer exponent (negative exponent tower)", at);
            long acc = 1;
            for (long i = 0; i < upper; ++i) {
                acc *= e;
                if (std::labs(acc) > 1000000000L) throw ParseError("exponent out of range", at);
            }
            e = acc;
        }
        return e;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto inner = parse_sum();
            if (!consume(')')) throw ParseError("expected ')'", pos_);
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return const_node(parse_number_token());
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    double parse_number_token() {
        skip_ws();
        std::size_t start = pos_;
        double value = 0.0;
        auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
        if (res.ec != std::errc() || res.ptr == text_.data() + pos_)
            throw ParseError("expected a number", start);
        pos_ = res.ptr - text_.data();
        return value;
    }

    NodePtr parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string_view name = text_.substr(start, pos_ - start);

        if (name == "theta") return param_node(1, start);
        if (name.starts_with("theta")) {
            int idx = 0;
            auto res = std::from_chars(name.data() + 5, name.data() + name.size(), idx);
            if (res.ec == std::errc() && res.ptr == name.data() + name.size())
                return param_node(idx, start);
        }

        Func f;
        if (name == "sin") f = Func::Sin;
        else if (name == "cos") f = Func::Cos;
        else if (name == "exp") f = Func::Exp;
        else if (name == "sqrt") f = Func::Sqrt;
        else if (name == "abs") f = Func::Abs;
        else throw ParseError("unknown identifier '" + std::string(name) + "'", start);

        if (!consume('(')) throw ParseError("expected '(' after function name", pos_);
        auto arg = parse_sum();
        if (!consume(')')) throw ParseError("expected ')'", pos_);
        auto n = std::make_shared<Expr::Node>();
        n->kind = Kind::Call;
        n->func = f;
        n->lhs = std::move(arg);
        return n;
    }

    NodePtr param_node(int idx, std::size_t at) {
        if (idx < 1) throw ParseError("invalid parameter index", at);
        if (idx > d_)
            throw ParseError("parameter index " + std::to_string(idx) +
                                 " out of range (model has " + std::to_string(d_) + ")",
                             at);
        auto n = std::make_shared<Expr::Node>();
        n->kind = Kind::Param;
        n->param = idx;
        return n;
    }

    static NodePtr const_node(double v) {
        auto n = std::make_shared<Expr::Node>();
        n->kind = Kind::Const;
        n->value = v;
        return n;
    }
};

Expr parse_expr(std::string_view text, int param_count) {
    if (text.empty()) throw ParseError("empty expression", 0);
    if (param_count < 1) throw std::invalid_argument("param_count must be >= 1");
    return ExprParser(text, param_count).parse();
}

}  // namespace ensctl
