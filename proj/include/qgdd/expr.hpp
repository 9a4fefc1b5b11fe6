#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qgdd {

/// Immutable arithmetic expression in one variable `x`.
///
/// Grammar (lowest to highest precedence):
///
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' '-'? integer)?
///   primary := number | 'x' | 'pi' | name '(' sum ')' | '(' sum ')'
///
/// `^` binds tighter than unary minus, so -x^2 == -(x^2). Functions: sin cos exp sqrt abs.
class Expr {
 public:
  struct Node;

  Expr();  // constant 0
  explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  double operator()(double x) const { return eval(x); }
  double eval(double x) const;

  /// Fully parenthesised text that parses back to the same tree.
  std::string to_string() const;

  bool is_constant() const;
  const Node& root() const { return *root_; }

  static Expr constant(double value);

 private:
  std::shared_ptr<const Node> root_;
};

struct Expr::Node {
  enum class Kind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };
  enum class Func { Sin, Cos, Exp, Sqrt, Abs };

  Kind kind = Kind::Number;
  double value = 0.0;  // Number
  int exponent = 0;    // Pow
  Func func = Func::Sin;
  std::shared_ptr<const Node> lhs;  // operand for Neg/Pow/Call
  std::shared_ptr<const Node> rhs;
};

class ExprSyntaxError : public std::runtime_error {
 public:
  ExprSyntaxError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Throws ExprSyntaxError; unknown identifiers are syntax errors at their offset.
Expr parse_expr(std::string_view src);

}  // namespace qgdd
