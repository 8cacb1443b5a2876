#pragma once

// Expression language for coefficients, lags, forcing and initial functions.
//
// Grammar (whitespace-insensitive):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?            right-associative
//   primary := number | 't' | 'pi' | 'e' | name | fn '(' args ')' | '(' sum ')'
//
// Functions: sin cos exp log sqrt abs (one argument), min max (two arguments).
// Implicit multiplication is not accepted: "2t" is a syntax error.

#include <cstddef>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ndde {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t position);
    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Raised when an expression is evaluated outside its domain
/// (division by zero, log of a non-positive value, sqrt of a negative value,
/// or any other non-finite result).
class DomainError : public std::runtime_error {
public:
    DomainError(const std::string& message, double t);
    [[nodiscard]] double at() const noexcept { return t_; }

private:
    double t_;
};

enum class NodeKind { Number, Variable, NamedConstant, Negate, Binary, Call };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function { Sin, Cos, Exp, Log, Sqrt, Abs, Min, Max };

/// Immutable expression tree. Copies share structure.
class Expr {
public:
    /// The constant 0.
    Expr();

    static Expr number(double value);
    static Expr variable();
    static Expr pi();
    static Expr euler();
    static Expr negate(Expr operand);
    static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
    static Expr call(Function fn, std::vector<Expr> args);

    [[nodiscard]] double eval(double t) const;
    [[nodiscard]] std::string unparse() const;

    /// True if the value can change with t.
    [[nodiscard]] bool depends_on_t() const;

    [[nodiscard]] NodeKind kind() const;
    [[nodiscard]] double literal() const;
    [[nodiscard]] BinaryOp op() const;
    [[nodiscard]] Function function() const;
    [[nodiscard]] const std::vector<Expr>& children() const;

    friend bool operator==(const Expr& lhs, const Expr& rhs);

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;
};

Expr operator+(Expr lhs, Expr rhs);
Expr operator-(Expr lhs, Expr rhs);
Expr operator*(Expr lhs, Expr rhs);
Expr operator/(Expr lhs, Expr rhs);
Expr exp(Expr arg);

/// Named scalar parameters substituted as literals at parse time.
using ParameterTable = std::map<std::string, double, std::less<>>;

Expr parse(std::string_view source, const ParameterTable& params = {});

[[nodiscard]] std::string_view function_name(Function fn) noexcept;

} // namespace ndde
