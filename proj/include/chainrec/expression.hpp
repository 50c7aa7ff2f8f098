#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <string_view>

namespace chainrec {

/// Compiled arithmetic expression over coordinates.
///
/// Grammar: numbers, the constants `pi` and `e`, coordinate variables `x0`,
/// `x1`, ... (aliases `x`, `y`, `z` for the first three), binary `+ - * / ^`
/// (`^` right-associative), unary minus, parentheses, and the functions
/// sin cos tan exp log sqrt abs floor atan.
///
/// Evaluation is pure and reentrant.
class Expression {
 public:
  /// Throws Error(config) on syntax errors or variables >= `dim`.
  Expression(std::string_view source, int dim);

  double operator()(const Eigen::VectorXd& x) const;
  const std::string& source() const noexcept { return source_; }

  struct Node;

 private:
  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace chainrec
