#pragma once

#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jumpom/core.hpp"

namespace jumpom {

/// Syntax or name error raised by the expression parser. `position` is a
/// zero-based character offset into the source text.
class ExprError : public Error {
 public:
  ExprError(const std::string& message, std::size_t position)
      : Error(ErrorKind::input, "expr", message + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

namespace detail {
struct Node;
}

/// Immutable arithmetic expression over a fixed, ordered list of variables.
///
/// Grammar: numbers, variables, + - * /, integer powers (x^3, x^-2), unary
/// minus, and the functions sin cos exp tanh sqrt abs. `sign` is accepted as
/// well since it appears in derivatives of abs (sign(0) = 0).
/// Precedence is ^ > unary minus > * / > + -, so -x^2 == -(x^2).
class Expr {
 public:
  Expr();

  static Expr parse(std::string_view text, std::vector<std::string> variables);
  static Expr constant(double value, std::vector<std::string> variables = {});
  static Expr variable(std::string_view name, std::vector<std::string> variables);

  double operator()(std::span<const double> values) const;
  double operator()(std::initializer_list<double> values) const {
    return (*this)(std::span<const double>(values.begin(), values.size()));
  }
  double operator()(const Vec& x) const { return (*this)(std::span<const double>(x.data(), static_cast<std::size_t>(x.size()))); }

  /// Symbolic partial derivative. Constant folding only; no algebraic simplification.
  Expr derivative(std::string_view variable) const;
  Expr derivative(std::size_t variable_index) const;

  /// Fully parenthesized text that parses back to an equivalent expression.
  std::string to_string() const;

  const std::vector<std::string>& variables() const noexcept { return variables_; }
  std::size_t variable_index(std::string_view name) const;

  bool is_constant() const noexcept;
  /// True when the tree references the given variable.
  bool depends_on(std::size_t variable_index) const;

  // Composition helpers used to build derived fields (same variable list required).
  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator*(double c, const Expr& a);

 private:
  Expr(std::shared_ptr<const detail::Node> root, std::vector<std::string> variables);

  std::shared_ptr<const detail::Node> root_;
  std::vector<std::string> variables_;
};

Expr parse_expression(std::string_view text, std::vector<std::string> variables);
Expr differentiate(const Expr& e, std::string_view variable);

}  // namespace jumpom
