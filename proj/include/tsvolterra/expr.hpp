#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tsvolterra/errors.hpp"
#include "tsvolterra/timescale.hpp"

namespace tsvolterra {

/// Variables an expression may reference.
enum class Var { T, S, X };

namespace detail {

enum class BinOp { Add, Sub, Mul, Div, Pow };
enum class FnId { Sin, Cos, Exp, Log, Sqrt, Abs, Min, Max };

struct FnInfo {
    const char* name;
    FnId id;
    int arity;
};

inline constexpr FnInfo kFunctions[] = {
    {"sin", FnId::Sin, 1},  {"cos", FnId::Cos, 1}, {"exp", FnId::Exp, 1},
    {"log", FnId::Log, 1},  {"sqrt", FnId::Sqrt, 1}, {"abs", FnId::Abs, 1},
    {"min", FnId::Min, 2},  {"max", FnId::Max, 2},
};

inline const FnInfo* find_function(std::string_view name) {
    for (const FnInfo& f : kFunctions)
        if (name == f.name) return &f;
    return nullptr;
}

struct ExprNode {
    enum class Kind { Number, Variable, Negate, Binary, Call };

    Kind kind;
    double number = 0.0;
    Var var = Var::T;
    BinOp op = BinOp::Add;
    FnId fn = FnId::Sin;
    std::unique_ptr<const ExprNode> a;
    std::unique_ptr<const ExprNode> b;
};

using NodePtr = std::unique_ptr<const ExprNode>;

inline NodePtr make_number(double v) {
    auto n = std::make_unique<ExprNode>();
    n->kind = ExprNode::Kind::Number;
    n->number = v;
    return n;
}

inline NodePtr make_variable(Var v) {
    auto n = std::make_unique<ExprNode>();
    n->kind = ExprNode::Kind::Variable;
    n->var = v;
    return n;
}

inline NodePtr make_negate(NodePtr child) {
    auto n = std::make_unique<ExprNode>();
    n->kind = ExprNode::Kind::Negate;
    n->a = std::move(child);
    return n;
}

inline NodePtr make_binary(BinOp op, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_unique<ExprNode>();
    n->kind = ExprNode::Kind::Binary;
    n->op = op;
    n->a = std::move(lhs);
    n->b = std::move(rhs);
    return n;
}

inline NodePtr make_call(FnId fn, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_unique<ExprNode>();
    n->kind = ExprNode::Kind::Call;
    n->fn = fn;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

// ---- tokenizer ----------------------------------------------------------

struct Token {
    enum class Type { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };
    Type type;
    std::size_t offset;
    double number = 0.0;
    std::string text;
};

inline std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t pos = 0;
    while (pos < src.size()) {
        char c = src[pos];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[pos + 1])))) {
            double value = 0.0;
            const char* first = src.data() + pos;
            auto [ptr, ec] = std::from_chars(first, src.data() + src.size(), value);
            if (ec != std::errc()) throw SyntaxError(pos, "number", "unparsable numeric literal");
            out.push_back({Token::Type::Number, pos, value, {}});
            pos += static_cast<std::size_t>(ptr - first);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos;
            while (pos < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
                ++pos;
            out.push_back({Token::Type::Ident, start, 0.0, std::string(src.substr(start, pos - start))});
            continue;
        }
        Token::Type t;
        switch (c) {
            case '+': t = Token::Type::Plus; break;
            case '-': t = Token::Type::Minus; break;
            case '*': t = Token::Type::Star; break;
            case '/': t = Token::Type::Slash; break;
            case '^': t = Token::Type::Caret; break;
            case '(': t = Token::Type::LParen; break;
            case ')': t = Token::Type::RParen; break;
            case ',': t = Token::Type::Comma; break;
            default:
                throw SyntaxError(pos, "number, identifier, operator, or parenthesis",
                                  std::string("unexpected character '") + c + "'");
        }
        out.push_back({t, pos, 0.0, {}});
        ++pos;
    }
    out.push_back({Token::Type::End, src.size(), 0.0, {}});
    return out;
}

// ---- recursive-descent parser -------------------------------------------
//
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' unary)?          right-associative
//   atom  := NUMBER | VAR | FN '(' expr (',' expr)* ')' | '(' expr ')'

class Parser {
public:
    explicit Parser(std::string_view src) : tokens_(tokenize(src)) {}

    NodePtr parse() {
        NodePtr e = parse_expr();
        if (peek().type != Token::Type::End)
            throw SyntaxError(peek().offset, "operator or end of expression");
        return e;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& advance() { return tokens_[pos_++]; }
    bool accept(Token::Type t) {
        if (peek().type == t) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        while (true) {
            if (accept(Token::Type::Plus))
                lhs = make_binary(BinOp::Add, std::move(lhs), parse_term());
            else if (accept(Token::Type::Minus))
                lhs = make_binary(BinOp::Sub, std::move(lhs), parse_term());
            else
                return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        while (true) {
            if (accept(Token::Type::Star))
                lhs = make_binary(BinOp::Mul, std::move(lhs), parse_unary());
            else if (accept(Token::Type::Slash))
                lhs = make_binary(BinOp::Div, std::move(lhs), parse_unary());
            else
                return lhs;
        }
    }

    NodePtr parse_unary() {
        if (accept(Token::Type::Minus)) return make_negate(parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (accept(Token::Type::Caret))
            return make_binary(BinOp::Pow, std::move(base), parse_unary());
        return base;
    }

    NodePtr parse_atom() {
        const Token& tok = peek();
        switch (tok.type) {
            case Token::Type::Number:
                advance();
                return make_number(tok.number);
            case Token::Type::Ident: {
                advance();
                if (tok.text == "t") return make_variable(Var::T);
                if (tok.text == "s") return make_variable(Var::S);
                if (tok.text == "x") return make_variable(Var::X);
                const FnInfo* fn = find_function(tok.text);
                if (!fn) throw UnknownIdentifier(tok.offset, tok.text);
                if (!accept(Token::Type::LParen))
                    throw SyntaxError(peek().offset, "'('",
                                      "function '" + tok.text + "' needs an argument list");
                std::vector<NodePtr> args;
                args.push_back(parse_expr());
                while (accept(Token::Type::Comma)) args.push_back(parse_expr());
                if (!accept(Token::Type::RParen))
                    throw SyntaxError(peek().offset, "',' or ')'");
                if (static_cast<int>(args.size()) != fn->arity)
                    throw SyntaxError(tok.offset,
                                      std::to_string(fn->arity) + " argument(s) to '" +
                                          std::string(fn->name) + "'",
                                      "got " + std::to_string(args.size()));
                NodePtr a = std::move(args[0]);
                NodePtr b = args.size() > 1 ? std::move(args[1]) : nullptr;
                return make_call(fn->id, std::move(a), std::move(b));
            }
            case Token::Type::LParen: {
                advance();
                NodePtr inner = parse_expr();
                if (!accept(Token::Type::RParen)) throw SyntaxError(peek().offset, "')'");
                return inner;
            }
            default:
                throw SyntaxError(tok.offset, "number, variable, function, '-', or '('");
        }
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

// ---- evaluation ----------------------------------------------------------

inline double checked(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string("non-finite result in ") + what);
    return v;
}

inline double eval_node(const ExprNode& n, double t, double s, double x) {
    switch (n.kind) {
        case ExprNode::Kind::Number:
            return n.number;
        case ExprNode::Kind::Variable:
            switch (n.var) {
                case Var::T: return t;
                case Var::S: return s;
                case Var::X: return x;
            }
            return 0.0;
        case ExprNode::Kind::Negate:
            return -eval_node(*n.a, t, s, x);
        case ExprNode::Kind::Binary: {
            double a = eval_node(*n.a, t, s, x);
            double b = eval_node(*n.b, t, s, x);
            switch (n.op) {
                case BinOp::Add: return checked(a + b, "addition");
                case BinOp::Sub: return checked(a - b, "subtraction");
                case BinOp::Mul: return checked(a * b, "multiplication");
                case BinOp::Div:
                    if (b == 0.0) throw DomainError("division by zero");
                    return checked(a / b, "division");
                case BinOp::Pow: {
                    if (a == 0.0 && b < 0.0) throw DomainError("zero raised to a negative power");
                    if (a < 0.0 && b != std::floor(b))
                        throw DomainError("negative base with non-integer exponent");
                    return checked(std::pow(a, b), "power");
                }
            }
            return 0.0;
        }
        case ExprNode::Kind::Call: {
            double a = eval_node(*n.a, t, s, x);
            switch (n.fn) {
                case FnId::Sin: return std::sin(a);
                case FnId::Cos: return std::cos(a);
                case FnId::Exp: return checked(std::exp(a), "exp");
                case FnId::Log:
                    if (a <= 0.0) throw DomainError("log of a nonpositive value");
                    return std::log(a);
                case FnId::Sqrt:
                    if (a < 0.0) throw DomainError("sqrt of a negative value");
                    return std::sqrt(a);
                case FnId::Abs: return std::abs(a);
                case FnId::Min: return std::min(a, eval_node(*n.b, t, s, x));
                case FnId::Max: return std::max(a, eval_node(*n.b, t, s, x));
            }
            return 0.0;
        }
    }
    return 0.0;
}

// ---- pretty-printer ------------------------------------------------------
//
// Emits a string that reparses to the identical tree: equal-precedence
// right operands of the left-associative operators, and non-atomic left
// operands of '^', are parenthesized so the tree shape survives.

inline int node_prec(const ExprNode& n) {
    switch (n.kind) {
        case ExprNode::Kind::Binary:
            switch (n.op) {
                case BinOp::Add:
                case BinOp::Sub: return 1;
                case BinOp::Mul:
                case BinOp::Div: return 2;
                case BinOp::Pow: return 4;
            }
            return 1;
        case ExprNode::Kind::Negate:
            return 3;
        default:
            return 5;
    }
}

inline void print_node(const ExprNode& n, std::string& out);

inline void print_child(const ExprNode& child, int min_prec, std::string& out) {
    bool parens = node_prec(child) < min_prec;
    if (parens) out += '(';
    print_node(child, out);
    if (parens) out += ')';
}

inline void print_node(const ExprNode& n, std::string& out) {
    switch (n.kind) {
        case ExprNode::Kind::Number:
            out += dtos(n.number);
            return;
        case ExprNode::Kind::Variable:
            out += (n.var == Var::T ? 't' : n.var == Var::S ? 's' : 'x');
            return;
        case ExprNode::Kind::Negate:
            out += '-';
            print_child(*n.a, 3, out);
            return;
        case ExprNode::Kind::Binary: {
            int prec = node_prec(n);
            const char* op = n.op == BinOp::Add   ? " + "
                             : n.op == BinOp::Sub ? " - "
                             : n.op == BinOp::Mul ? "*"
                             : n.op == BinOp::Div ? "/"
                                                  : "^";
            if (n.op == BinOp::Pow) {
                print_child(*n.a, 5, out);  // lhs of '^' must be atomic
                out += op;
                print_child(*n.b, 3, out);  // rhs may be unary or another power
            } else {
                print_child(*n.a, prec, out);
                out += op;
                print_child(*n.b, prec + 1, out);
            }
            return;
        }
        case ExprNode::Kind::Call: {
            for (const FnInfo& f : kFunctions)
                if (f.id == n.fn) {
                    out += f.name;
                    break;
                }
            out += '(';
            print_node(*n.a, out);
            if (n.b) {
                out += ", ";
                print_node(*n.b, out);
            }
            out += ')';
            return;
        }
    }
}

inline bool node_uses(const ExprNode& n, Var v) {
    switch (n.kind) {
        case ExprNode::Kind::Variable: return n.var == v;
        case ExprNode::Kind::Negate: return node_uses(*n.a, v);
        case ExprNode::Kind::Binary: return node_uses(*n.a, v) || node_uses(*n.b, v);
        case ExprNode::Kind::Call:
            return node_uses(*n.a, v) || (n.b && node_uses(*n.b, v));
        default: return false;
    }
}

}  // namespace detail

/// Parsed scalar expression in the variables t, s, x with the functions
/// sin, cos, exp, log, sqrt, abs, min, max. Immutable after parse;
/// evaluation is pure and reentrant.
class Expr {
public:
    /// Parse with standard precedence: '^' (right-associative) binds
    /// tighter than unary '-', then '*' '/', then '+' '-'.
    static Expr parse(std::string_view text) {
        detail::Parser p(text);
        return Expr(std::shared_ptr<const detail::ExprNode>(p.parse().release()));
    }

    /// Evaluate at (t, s, x); unused variables are ignored.
    double eval(double t, double s, double x) const {
        return detail::eval_node(*root_, t, s, x);
    }

    double operator()(double t, double s, double x) const { return eval(t, s, x); }

    /// Render to text that reparses to an identical tree.
    std::string str() const {
        std::string out;
        detail::print_node(*root_, out);
        return out;
    }

    bool uses(Var v) const { return detail::node_uses(*root_, v); }

private:
    explicit Expr(std::shared_ptr<const detail::ExprNode> root) : root_(std::move(root)) {}
    std::shared_ptr<const detail::ExprNode> root_;
};

inline Expr parse_expr(std::string_view text) { return Expr::parse(text); }

/// Adapt an expression in t alone to a one-argument callable f(t).
inline auto forcing_fn(const Expr& e) {
    return [e](double t) { return e.eval(t, 0.0, 0.0); };
}

struct LipschitzEstimate {
    double L = 0.0;
    long sample_count = 0;
    std::pair<double, double> x_range{0.0, 0.0};
};

/// Sampled lower estimate of the Lipschitz constant of k(t, s, x) in x:
/// the maximum symmetric difference quotient over all grid-node pairs
/// (t_i, s_j) with s_j <= t_i and n_x uniform x-samples in [x_lo, x_hi],
/// with half-width delta = (x_hi - x_lo) / (10 n_x).
template <class Kernel>
LipschitzEstimate estimate_lipschitz(Kernel&& k, const Grid& grid, double x_lo, double x_hi,
                                     int n_x) {
    if (!(x_lo <= x_hi)) throw Error("lipschitz estimate needs x_lo <= x_hi");
    if (n_x < 2) throw Error("lipschitz estimate needs n_x >= 2");
    double delta = (x_hi - x_lo) / (10.0 * n_x);
    if (delta == 0.0) delta = 1e-6 * std::max(1.0, std::abs(x_lo));  // degenerate range

    LipschitzEstimate out;
    out.x_range = {x_lo, x_hi};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double t = grid.node(i);
        for (std::size_t j = 0; j <= i; ++j) {
            double s = grid.node(j);
            for (int m = 0; m < n_x; ++m) {
                double u = x_lo + (x_hi - x_lo) * static_cast<double>(m) /
                                      static_cast<double>(n_x - 1);
                double q = std::abs(k(t, s, u + delta) - k(t, s, u - delta)) / (2.0 * delta);
                if (q > out.L) out.L = q;
                ++out.sample_count;
            }
        }
    }
    return out;
}

struct MonotoneWitness {
    double t = 0.0;
    double s = 0.0;
    double x1 = 0.0;
    double x2 = 0.0;
};

struct MonotoneCheck {
    bool monotone = true;
    std::optional<MonotoneWitness> witness;
};

/// Sampled check that k(t, s, x) is nondecreasing in x on [x_lo, x_hi]:
/// every adjacent x-sample pair must satisfy k(., ., x2) >= k(., ., x1) - 1e-12.
/// On failure the witness carries the offending (t, s, x1, x2).
template <class Kernel>
MonotoneCheck check_monotone_in_x(Kernel&& k, const Grid& grid, double x_lo, double x_hi,
                                  int n_x) {
    if (!(x_lo <= x_hi)) throw Error("monotonicity check needs x_lo <= x_hi");
    if (n_x < 2) throw Error("monotonicity check needs n_x >= 2");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double t = grid.node(i);
        for (std::size_t j = 0; j <= i; ++j) {
            double s = grid.node(j);
            double prev_x = x_lo;
            double prev_k = k(t, s, x_lo);
            for (int m = 1; m < n_x; ++m) {
                double u = x_lo + (x_hi - x_lo) * static_cast<double>(m) /
                                      static_cast<double>(n_x - 1);
                double ku = k(t, s, u);
                if (ku < prev_k - 1e-12)
                    return {false, MonotoneWitness{t, s, prev_x, u}};
                prev_x = u;
                prev_k = ku;
            }
        }
    }
    return {true, std::nullopt};
}

}  // namespace tsvolterra
