#include "ndde/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <utility>

#include <fmt/format.h>

namespace ndde {

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error(fmt::format("{} at position {}", message, position)), position_(position) {}

DomainError::DomainError(const std::string& message, double t)
    : std::runtime_error(fmt::format("{} at t = {:.17g}", message, t)), t_(t) {}

struct Expr::Node {
    NodeKind kind = NodeKind::Number;
    double value = 0.0;
    BinaryOp op = BinaryOp::Add;
    Function fn = Function::Sin;
    std::vector<Expr> children;
};

Expr::Expr() : Expr(number(0.0)) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::number(double value) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Number;
    n->value = value;
    return Expr(std::move(n));
}

Expr Expr::variable() {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Variable;
    return Expr(std::move(n));
}

Expr Expr::pi() {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::NamedConstant;
    n->value = std::numbers::pi;
    return Expr(std::move(n));
}

Expr Expr::euler() {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::NamedConstant;
    n->value = std::numbers::e;
    return Expr(std::move(n));
}

Expr Expr::negate(Expr operand) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Negate;
    n->children.push_back(std::move(operand));
    return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Binary;
    n->op = op;
    n->children.push_back(std::move(lhs));
    n->children.push_back(std::move(rhs));
    return Expr(std::move(n));
}

Expr Expr::call(Function fn, std::vector<Expr> args) {
    const std::size_t arity = (fn == Function::Min || fn == Function::Max) ? 2 : 1;
    if (args.size() != arity) {
        throw std::invalid_argument(fmt::format("{} takes {} argument(s), got {}", function_name(fn),
                                                arity, args.size()));
    }
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Call;
    n->fn = fn;
    n->children = std::move(args);
    return Expr(std::move(n));
}

NodeKind Expr::kind() const { return node_->kind; }
double Expr::literal() const { return node_->value; }
BinaryOp Expr::op() const { return node_->op; }
Function Expr::function() const { return node_->fn; }
const std::vector<Expr>& Expr::children() const { return node_->children; }

std::string_view function_name(Function fn) noexcept {
    switch (fn) {
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Exp: return "exp";
    case Function::Log: return "log";
    case Function::Sqrt: return "sqrt";
    case Function::Abs: return "abs";
    case Function::Min: return "min";
    case Function::Max: return "max";
    }
    return "?";
}

namespace {

double checked(double v, double t, const char* what) {
    if (!std::isfinite(v)) throw DomainError(fmt::format("non-finite result of {}", what), t);
    return v;
}

} // namespace

double Expr::eval(double t) const {
    const Node& n = *node_;
    switch (n.kind) {
    case NodeKind::Number:
    case NodeKind::NamedConstant:
        return n.value;
    case NodeKind::Variable:
        return t;
    case NodeKind::Negate:
        return -n.children[0].eval(t);
    case NodeKind::Binary: {
        const double l = n.children[0].eval(t);
        const double r = n.children[1].eval(t);
        switch (n.op) {
        case BinaryOp::Add: return checked(l + r, t, "addition");
        case BinaryOp::Sub: return checked(l - r, t, "subtraction");
        case BinaryOp::Mul: return checked(l * r, t, "multiplication");
        case BinaryOp::Div:
            if (r == 0.0) throw DomainError("division by zero", t);
            return checked(l / r, t, "division");
        case BinaryOp::Pow: return checked(std::pow(l, r), t, "power");
        }
        break;
    }
    case NodeKind::Call: {
        const double x = n.children[0].eval(t);
        switch (n.fn) {
        case Function::Sin: return std::sin(x);
        case Function::Cos: return std::cos(x);
        case Function::Exp: return checked(std::exp(x), t, "exp");
        case Function::Log:
            if (x <= 0.0) throw DomainError("log of non-positive value", t);
            return std::log(x);
        case Function::Sqrt:
            if (x < 0.0) throw DomainError("sqrt of negative value", t);
            return std::sqrt(x);
        case Function::Abs: return std::abs(x);
        case Function::Min: return std::min(x, n.children[1].eval(t));
        case Function::Max: return std::max(x, n.children[1].eval(t));
        }
        break;
    }
    }
    return 0.0;
}

bool Expr::depends_on_t() const {
    if (node_->kind == NodeKind::Variable) return true;
    for (const auto& c : node_->children) {
        if (c.depends_on_t()) return true;
    }
    return false;
}

std::string Expr::unparse() const {
    const Node& n = *node_;
    switch (n.kind) {
    case NodeKind::Number:
        if (n.value < 0.0 || std::signbit(n.value)) return fmt::format("(-{:.17g})", -n.value);
        return fmt::format("{:.17g}", n.value);
    case NodeKind::NamedConstant:
        return n.value == std::numbers::pi ? "pi" : "e";
    case NodeKind::Variable:
        return "t";
    case NodeKind::Negate:
        return "(-" + n.children[0].unparse() + ")";
    case NodeKind::Binary: {
        static constexpr char symbols[] = {'+', '-', '*', '/', '^'};
        return "(" + n.children[0].unparse() + " " + symbols[static_cast<int>(n.op)] + " " +
               n.children[1].unparse() + ")";
    }
    case NodeKind::Call: {
        std::string out{function_name(n.fn)};
        out += "(";
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            if (i) out += ", ";
            out += n.children[i].unparse();
        }
        return out + ")";
    }
    }
    return {};
}

bool operator==(const Expr& lhs, const Expr& rhs) {
    const auto& a = *lhs.node_;
    const auto& b = *rhs.node_;
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case NodeKind::Number:
    case NodeKind::NamedConstant:
        if (a.value != b.value) return false;
        break;
    case NodeKind::Binary:
        if (a.op != b.op) return false;
        break;
    case NodeKind::Call:
        if (a.fn != b.fn) return false;
        break;
    default:
        break;
    }
    if (a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i) {
        if (!(a.children[i] == b.children[i])) return false;
    }
    return true;
}

Expr operator+(Expr lhs, Expr rhs) { return Expr::binary(BinaryOp::Add, std::move(lhs), std::move(rhs)); }
Expr operator-(Expr lhs, Expr rhs) { return Expr::binary(BinaryOp::Sub, std::move(lhs), std::move(rhs)); }
Expr operator*(Expr lhs, Expr rhs) { return Expr::binary(BinaryOp::Mul, std::move(lhs), std::move(rhs)); }
Expr operator/(Expr lhs, Expr rhs) { return Expr::binary(BinaryOp::Div, std::move(lhs), std::move(rhs)); }
Expr exp(Expr arg) { return Expr::call(Function::Exp, {std::move(arg)}); }

namespace {

class Parser {
public:
    Parser(std::string_view src, const ParameterTable& params) : src_(src), params_(params) {}

    Expr run() {
        skip_ws();
        if (pos_ == src_.size()) throw ParseError("empty expression", pos_);
        Expr e = sum();
        skip_ws();
        if (pos_ != src_.size()) {
            throw ParseError(fmt::format("unexpected '{}', expected operator or end of input", src_[pos_]),
                             pos_);
        }
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ == src_.size()) throw ParseError(fmt::format("expected '{}', found end of input", c), pos_);
            throw ParseError(fmt::format("expected '{}', found '{}'", c, src_[pos_]), pos_);
        }
    }

    Expr sum() {
        Expr lhs = product();
        for (;;) {
            if (accept('+')) {
                lhs = Expr::binary(BinaryOp::Add, std::move(lhs), product());
            } else if (accept('-')) {
                lhs = Expr::binary(BinaryOp::Sub, std::move(lhs), product());
            } else {
                return lhs;
            }
        }
    }

    Expr product() {
        Expr lhs = unary();
        for (;;) {
            if (accept('*')) {
                lhs = Expr::binary(BinaryOp::Mul, std::move(lhs), unary());
            } else if (accept('/')) {
                lhs = Expr::binary(BinaryOp::Div, std::move(lhs), unary());
            } else {
                return lhs;
            }
        }
    }

    Expr unary() {
        if (accept('-')) return Expr::negate(unary());
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (accept('^')) return Expr::binary(BinaryOp::Pow, std::move(base), unary());
        return base;
    }

    Expr primary() {
        skip_ws();
        if (pos_ == src_.size()) throw ParseError("expected operand, found end of input", pos_);
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Expr inner = sum();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw ParseError(fmt::format("unexpected '{}', expected operand", c), pos_);
    }

    Expr number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t count = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            count += digits();
        }
        if (count == 0) throw ParseError("malformed number", start);
        // Exponent only if followed by digits; otherwise 'e' is left for the caller.
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
            if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
                pos_ = look;
                digits();
            }
        }
        double value = 0.0;
        const auto* first = src_.data() + start;
        const auto* last = src_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last) throw ParseError("malformed number", start);
        return Expr::number(value);
    }

    Expr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = src_.substr(start, pos_ - start);

        static constexpr Function functions[] = {Function::Sin,  Function::Cos, Function::Exp,
                                                 Function::Log,  Function::Sqrt, Function::Abs,
                                                 Function::Min,  Function::Max};
        for (Function fn : functions) {
            if (name != function_name(fn)) continue;
            skip_ws();
            if (pos_ == src_.size() || src_[pos_] != '(') {
                throw ParseError(fmt::format("expected '(' after function '{}'", name), pos_);
            }
            ++pos_;
            std::vector<Expr> args;
            args.push_back(sum());
            while (accept(',')) args.push_back(sum());
            const std::size_t close = pos_;
            expect(')');
            const std::size_t arity = (fn == Function::Min || fn == Function::Max) ? 2 : 1;
            if (args.size() != arity) {
                throw ParseError(fmt::format("function '{}' takes {} argument(s), got {}", name, arity,
                                             args.size()),
                                 close);
            }
            return Expr::call(fn, std::move(args));
        }
        if (name == "t") return Expr::variable();
        if (name == "pi") return Expr::pi();
        if (name == "e") return Expr::euler();
        if (auto it = params_.find(name); it != params_.end()) return Expr::number(it->second);
        throw ParseError(fmt::format("unknown identifier '{}'", name), start);
    }

    std::string_view src_;
    const ParameterTable& params_;
    std::size_t pos_ = 0;
};

} // namespace

Expr parse(std::string_view source, const ParameterTable& params) {
    return Parser(source, params).run();
}

} // namespace ndde
