#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace spdelab {

/// Small arithmetic expression language for user-defined coefficients.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('+' | '-') unary | power
///   power   := primary ('^' unary)?
///   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
///
/// Functions: exp log sqrt sin cos tanh abs (one argument), min max (two).
/// Constants: pi, e. Variables are declared at parse time.
class Expression {
 public:
  /// Throws ConfigError (field "expression") on any syntax error or unknown name.
  static Expression parse(const std::string& text, std::vector<std::string> variables);

  double operator()(std::span<const double> vars) const;

  /// Value and partial derivative with respect to variable `wrt`, computed by
  /// forward-mode differentiation of the syntax tree.
  std::pair<double, double> value_and_derivative(std::span<const double> vars, std::size_t wrt) const;

  const std::string& text() const noexcept { return text_; }
  const std::vector<std::string>& variables() const noexcept { return variables_; }

  /// True if the tree mentions variable `index`.
  bool depends_on(std::size_t index) const;

  struct Node;

 private:
  Expression() = default;

  std::string text_;
  std::vector<std::string> variables_;
  std::shared_ptr<const std::vector<Node>> nodes_;
  int root_ = -1;
};

}  // namespace spdelab
