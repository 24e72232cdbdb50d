#include "pstab/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "program.hpp"
#include "pstab/errors.hpp"

namespace pstab {

NodePtr make_constant(double v) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Constant;
    n->value = v;
    return n;
}

NodePtr make_variable(int index, std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Variable;
    n->index = index;
    n->name = std::move(name);
    return n;
}

NodePtr make_parameter(int index, std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Parameter;
    n->index = index;
    n->name = std::move(name);
    return n;
}

NodePtr make_unary(UnaryOp op, NodePtr a) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Unary;
    n->uop = op;
    n->a = std::move(a);
    return n;
}

NodePtr make_binary(BinaryOp op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Binary;
    n->bop = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr make_power(NodePtr base, double exponent) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Power;
    n->a = std::move(base);
    n->value = exponent;
    n->integer_exponent = std::isfinite(exponent) && exponent == std::round(exponent) &&
                          std::fabs(exponent) < 1e9;
    return n;
}

const char* unary_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::Neg: return "-";
        case UnaryOp::Sin: return "sin";
        case UnaryOp::Cos: return "cos";
        case UnaryOp::Tan: return "tan";
        case UnaryOp::Exp: return "exp";
        case UnaryOp::Log: return "log";
        case UnaryOp::Sqrt: return "sqrt";
        case UnaryOp::Atan: return "atan";
        case UnaryOp::Abs: return "abs";
    }
    return "?";
}

namespace {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    return v < 0 ? "(" + s + ")" : s;
}

void print(const Node& n, std::string& out) {
    switch (n.kind) {
        case NodeKind::Constant: out += format_number(n.value); return;
        case NodeKind::Variable:
        case NodeKind::Parameter: out += n.name; return;
        case NodeKind::Unary:
            if (n.uop == UnaryOp::Neg) {
                out += "(-";
                print(*n.a, out);
                out += ")";
            } else {
                out += unary_name(n.uop);
                out += "(";
                print(*n.a, out);
                out += ")";
            }
            return;
        case NodeKind::Binary: {
            static const char* sym[] = {" + ", " - ", "*", "/"};
            out += "(";
            print(*n.a, out);
            out += sym[int(n.bop)];
            print(*n.b, out);
            out += ")";
            return;
        }
        case NodeKind::Power:
            out += "(";
            print(*n.a, out);
            out += "^";
            if (n.integer_exponent) {
                long long k = (long long)n.value;
                out += k < 0 ? "(" + std::to_string(k) + ")" : std::to_string(k);
            } else {
                out += format_number(n.value);
            }
            out += ")";
            return;
    }
}

}  // namespace

std::string to_string(const Node& n) {
    std::string s;
    print(n, s);
    return s;
}

bool structurally_equal(const Node& x, const Node& y) {
    if (x.kind != y.kind) return false;
    switch (x.kind) {
        case NodeKind::Constant: return x.value == y.value;
        case NodeKind::Variable:
        case NodeKind::Parameter: return x.index == y.index && x.name == y.name;
        case NodeKind::Unary: return x.uop == y.uop && structurally_equal(*x.a, *y.a);
        case NodeKind::Binary:
            return x.bop == y.bop && structurally_equal(*x.a, *y.a) && structurally_equal(*x.b, *y.b);
        case NodeKind::Power:
            return x.value == y.value && x.integer_exponent == y.integer_exponent &&
                   structurally_equal(*x.a, *y.a);
    }
    return false;
}

Expression::Expression(NodePtr root) : root_(std::move(root)) {
    if (root_) prog_ = std::make_shared<Program>(root_);
}

std::string Expression::str() const { return root_ ? to_string(*root_) : std::string(); }

int Expression::variable_extent() const { return prog_ ? prog_->variable_extent() : 0; }

namespace {

void check_sizes(const Program& p, std::size_t nz, std::size_t np) {
    if (std::size_t(p.variable_extent()) > nz)
        throw PreconditionError("evaluation point has too few coordinates");
    if (std::size_t(p.parameter_extent()) > np)
        throw PreconditionError("unbound parameter at evaluation");
}

}  // namespace

double Expression::eval(std::span<const double> z, std::span<const double> params) const {
    check_sizes(*prog_, z.size(), params.size());
    return prog_->eval(z.data(), params.data());
}

double Expression::grad(std::span<const double> z, std::span<const double> params, double* g) const {
    check_sizes(*prog_, z.size(), params.size());
    return prog_->grad(z.data(), params.data(), int(z.size()), g);
}

Eigen::VectorXd Expression::grad(std::span<const double> z, std::span<const double> params) const {
    Eigen::VectorXd g(z.size());
    grad(z, params, g.data());
    return g;
}

double Expression::hess(std::span<const double> z, std::span<const double> params, double* g,
                        double* h) const {
    check_sizes(*prog_, z.size(), params.size());
    return prog_->hess(z.data(), params.data(), int(z.size()), g, h);
}

Eigen::MatrixXd Expression::hess(std::span<const double> z, std::span<const double> params) const {
    const std::size_t n = z.size();
    Eigen::VectorXd g(n);
    Eigen::MatrixXd h(n, n);
    hess(z, params, g.data(), h.data());
    return 0.5 * (h + h.transpose());
}

// ---------------------------------------------------------------- parser

bool is_reserved_name(std::string_view name) {
    static const char* names[] = {"sin", "cos", "tan", "exp", "log", "sqrt", "atan", "abs", "pi"};
    for (const char* n : names)
        if (name == n) return true;
    return false;
}

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    Tok kind;
    std::size_t offset;
    std::string_view text;
    double number = 0.0;
};

class Parser {
public:
    Parser(std::string_view text, const std::vector<std::string>& vars,
           const std::vector<std::string>& params)
        : text_(text), vars_(vars), params_(params) {
        advance();
    }

    NodePtr parse_all() {
        NodePtr e = expr();
        if (tok_.kind != Tok::End) fail("unexpected token '" + std::string(tok_.text) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError("syntax error: " + msg, tok_.offset); }

    void advance() {
        while (pos_ < text_.size() && std::isspace((unsigned char)text_[pos_])) ++pos_;
        tok_ = Token{Tok::End, pos_, {}};
        if (pos_ >= text_.size()) return;
        char c = text_[pos_];
        std::size_t start = pos_;
        auto single = [&](Tok k) {
            tok_ = Token{k, start, text_.substr(start, 1)};
            ++pos_;
        };
        switch (c) {
            case '+': single(Tok::Plus); return;
            case '-': single(Tok::Minus); return;
            case '*': single(Tok::Star); return;
            case '/': single(Tok::Slash); return;
            case '^': single(Tok::Caret); return;
            case '(': single(Tok::LParen); return;
            case ')': single(Tok::RParen); return;
            default: break;
        }
        if (std::isdigit((unsigned char)c) || c == '.') {
            std::size_t p = pos_;
            while (p < text_.size() && (std::isdigit((unsigned char)text_[p]) || text_[p] == '.')) ++p;
            if (p < text_.size() && (text_[p] == 'e' || text_[p] == 'E')) {
                std::size_t q = p + 1;
                if (q < text_.size() && (text_[q] == '+' || text_[q] == '-')) ++q;
                if (q < text_.size() && std::isdigit((unsigned char)text_[q])) {
                    while (q < text_.size() && std::isdigit((unsigned char)text_[q])) ++q;
                    p = q;
                }
            }
            double v = 0.0;
            auto res = std::from_chars(text_.data() + start, text_.data() + p, v);
            if (res.ec != std::errc() || res.ptr != text_.data() + p) {
                tok_ = Token{Tok::End, start, text_.substr(start, p - start)};
                fail("malformed number");
            }
            tok_ = Token{Tok::Number, start, text_.substr(start, p - start), v};
            pos_ = p;
            return;
        }
        if (std::isalpha((unsigned char)c) || c == '_') {
            std::size_t p = pos_;
            while (p < text_.size() && (std::isalnum((unsigned char)text_[p]) || text_[p] == '_')) ++p;
            tok_ = Token{Tok::Ident, start, text_.substr(start, p - start)};
            pos_ = p;
            return;
        }
        tok_ = Token{Tok::End, start, text_.substr(start, 1)};
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    NodePtr expr() {
        NodePtr lhs = term();
        while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
            BinaryOp op = tok_.kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
            advance();
            lhs = make_binary(op, lhs, term());
        }
        return lhs;
    }

    NodePtr term() {
        NodePtr lhs = unary();
        while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
            BinaryOp op = tok_.kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
            advance();
            lhs = make_binary(op, lhs, unary());
        }
        return lhs;
    }

    NodePtr unary() {
        if (tok_.kind == Tok::Minus) {
            advance();
            return make_unary(UnaryOp::Neg, unary());
        }
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (tok_.kind != Tok::Caret) return base;
        advance();
        std::size_t at = tok_.offset;
        NodePtr ex = unary();
        Program prog(ex);
        if (prog.variable_extent() > 0 || prog.parameter_extent() > 0)
            throw ParseError("syntax error: exponent must be a numeric constant", at);
        double v = prog.eval(nullptr, nullptr);
        return make_power(base, v);
    }

    NodePtr primary() {
        switch (tok_.kind) {
            case Tok::Number: {
                double v = tok_.number;
                advance();
                return make_constant(v);
            }
            case Tok::LParen: {
                advance();
                NodePtr e = expr();
                if (tok_.kind != Tok::RParen) fail("expected ')'");
                advance();
                return e;
            }
            case Tok::Ident: return identifier();
            case Tok::End:
                if (tok_.text.empty()) fail("unexpected end of input");
                fail("unexpected token '" + std::string(tok_.text) + "'");
            default: fail("unexpected token '" + std::string(tok_.text) + "'");
        }
    }

    NodePtr identifier() {
        std::string name(tok_.text);
        static const std::pair<const char*, UnaryOp> funcs[] = {
            {"sin", UnaryOp::Sin}, {"cos", UnaryOp::Cos},   {"tan", UnaryOp::Tan},   {"exp", UnaryOp::Exp},
            {"log", UnaryOp::Log}, {"sqrt", UnaryOp::Sqrt}, {"atan", UnaryOp::Atan}, {"abs", UnaryOp::Abs}};
        for (const auto& [fname, op] : funcs) {
            if (name == fname) {
                advance();
                if (tok_.kind != Tok::LParen) fail("expected '(' after " + name);
                advance();
                NodePtr arg = expr();
                if (tok_.kind != Tok::RParen) fail("expected ')'");
                advance();
                return make_unary(op, arg);
            }
        }
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == name) {
                advance();
                return make_variable(int(i), name);
            }
        for (std::size_t i = 0; i < params_.size(); ++i)
            if (params_[i] == name) {
                advance();
                return make_parameter(int(i), name);
            }
        if (name == "pi") {
            advance();
            return make_constant(std::numbers::pi);
        }
        throw UnknownIdentifierError(name);
    }

    std::string_view text_;
    const std::vector<std::string>& vars_;
    const std::vector<std::string>& params_;
    std::size_t pos_ = 0;
    Token tok_{Tok::End, 0, {}};
};

NodePtr substitute_node(const NodePtr& n, const std::vector<Expression>& rep) {
    switch (n->kind) {
        case NodeKind::Constant:
        case NodeKind::Parameter: return n;
        case NodeKind::Variable:
            if (n->index < 0 || std::size_t(n->index) >= rep.size())
                throw PreconditionError("substitution is missing variable " + n->name);
            return rep[n->index].node();
        case NodeKind::Unary: return make_unary(n->uop, substitute_node(n->a, rep));
        case NodeKind::Binary:
            return make_binary(n->bop, substitute_node(n->a, rep), substitute_node(n->b, rep));
        case NodeKind::Power: return make_power(substitute_node(n->a, rep), n->value);
    }
    return n;
}

}  // namespace

Expression parse(std::string_view text, const std::vector<std::string>& vars,
                 const std::vector<std::string>& params) {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
        throw ParseError("syntax error: empty expression", 0);
    Parser p(text, vars, params);
    return Expression(p.parse_all());
}

double parse_constant(std::string_view text, const std::vector<std::string>& params,
                      std::span<const double> values) {
    Expression e = parse(text, {}, params);
    return e.eval({}, values);
}

Expression substitute(const Expression& e, const std::vector<Expression>& replacement) {
    return Expression(substitute_node(e.node(), replacement));
}

}  // namespace pstab
