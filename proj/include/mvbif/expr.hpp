#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace mvbif {

/// A parsed univariate arithmetic expression.
///
/// Grammar: numbers, one variable, binary + - * / ^, unary minus,
/// parentheses and the functions sin cos exp abs. `^` is right
/// associative and binds tighter than unary minus (-x^2 == -(x^2)).
/// Evaluation is pure; copies share the immutable tree.
class Expression {
 public:
  struct Node;

  Expression() = default;

  /// Throws ParseError naming the offending token.
  static Expression parse(std::string_view text, std::string_view variable = "x");
  static Expression constant(double c);

  double operator()(double x) const;

  /// Symbolic derivative with respect to the variable.
  Expression derivative() const;

  std::string to_string() const;
  bool empty() const { return !root_; }

 private:
  explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const Node> root_;
};

}  // namespace mvbif
