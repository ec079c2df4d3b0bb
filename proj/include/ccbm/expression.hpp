#pragma once

#include <memory>
#include <string>

#include "ccbm/errors.hpp"

namespace ccbm {

// Minimal arithmetic expressions over x and y with + - * / ^, sin, cos, exp
// and the constant pi. Parsed once, evaluated pointwise; derivatives are
// formed symbolically (power derivatives need a constant exponent or base).
class Expr {
 public:
  struct Node;

  static Expr parse(const std::string& src);  // ParseError with column info

  double eval(double x, double y) const;
  Expr derivative(char var) const;  // var is 'x' or 'y'
  std::string str() const;

 private:
  explicit Expr(std::shared_ptr<const Node> r) : root_(std::move(r)) {}
  std::shared_ptr<const Node> root_;
};

}  // namespace ccbm
