#include "ccbm/expression.hpp"

#include <cctype>
#include <cmath>

namespace ccbm {

enum class Op { Const, X, Y, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp };

struct Expr::Node {
  Op op;
  double value = 0.0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->value = v;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr constant(double v) { return make(Op::Const, nullptr, nullptr, v); }

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

// Light folding keeps derivative trees small.
NodePtr add(NodePtr a, NodePtr b) {
  if (is_const(a, 0)) return b;
  if (is_const(b, 0)) return a;
  if (a->op == Op::Const && b->op == Op::Const) return constant(a->value + b->value);
  return make(Op::Add, a, b);
}
NodePtr sub(NodePtr a, NodePtr b) {
  if (is_const(b, 0)) return a;
  if (a->op == Op::Const && b->op == Op::Const) return constant(a->value - b->value);
  if (is_const(a, 0)) return make(Op::Neg, b);
  return make(Op::Sub, a, b);
}
NodePtr mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0) || is_const(b, 0)) return constant(0);
  if (is_const(a, 1)) return b;
  if (is_const(b, 1)) return a;
  if (a->op == Op::Const && b->op == Op::Const) return constant(a->value * b->value);
  return make(Op::Mul, a, b);
}
NodePtr divide(NodePtr a, NodePtr b) {
  if (is_const(a, 0)) return constant(0);
  if (is_const(b, 1)) return a;
  return make(Op::Div, a, b);
}

double eval_node(const Expr::Node* n, double x, double y) {
  switch (n->op) {
    case Op::Const: return n->value;
    case Op::X: return x;
    case Op::Y: return y;
    case Op::Add: return eval_node(n->a.get(), x, y) + eval_node(n->b.get(), x, y);
    case Op::Sub: return eval_node(n->a.get(), x, y) - eval_node(n->b.get(), x, y);
    case Op::Mul: return eval_node(n->a.get(), x, y) * eval_node(n->b.get(), x, y);
    case Op::Div: return eval_node(n->a.get(), x, y) / eval_node(n->b.get(), x, y);
    case Op::Pow: return std::pow(eval_node(n->a.get(), x, y), eval_node(n->b.get(), x, y));
    case Op::Neg: return -eval_node(n->a.get(), x, y);
    case Op::Sin: return std::sin(eval_node(n->a.get(), x, y));
    case Op::Cos: return std::cos(eval_node(n->a.get(), x, y));
    case Op::Exp: return std::exp(eval_node(n->a.get(), x, y));
  }
  return 0.0;
}

NodePtr diff(const NodePtr& n, char var) {
  switch (n->op) {
    case Op::Const: return constant(0);
    case Op::X: return constant(var == 'x' ? 1 : 0);
    case Op::Y: return constant(var == 'y' ? 1 : 0);
    case Op::Add: return add(diff(n->a, var), diff(n->b, var));
    case Op::Sub: return sub(diff(n->a, var), diff(n->b, var));
    case Op::Mul: return add(mul(diff(n->a, var), n->b), mul(n->a, diff(n->b, var)));
    case Op::Div:
      return divide(sub(mul(diff(n->a, var), n->b), mul(n->a, diff(n->b, var))),
                    make(Op::Pow, n->b, constant(2)));
    case Op::Pow:
      if (n->b->op == Op::Const)
        return mul(mul(constant(n->b->value),
                       make(Op::Pow, n->a, constant(n->b->value - 1))),
                   diff(n->a, var));
      if (n->a->op == Op::Const)  // a^g = exp(g ln a)
        return mul(mul(make(Op::Pow, n->a, n->b), constant(std::log(n->a->value))),
                   diff(n->b, var));
      throw ParseError("cannot differentiate a power with variable base and exponent");
    case Op::Neg: return make(Op::Neg, diff(n->a, var));
    case Op::Sin: return mul(make(Op::Cos, n->a), diff(n->a, var));
    case Op::Cos: return make(Op::Neg, mul(make(Op::Sin, n->a), diff(n->a, var)));
    case Op::Exp: return mul(make(Op::Exp, n->a), diff(n->a, var));
  }
  return constant(0);
}

void print_node(const Expr::Node* n, std::string& out) {
  auto binary = [&](const char* op) {
    out += "(";
    print_node(n->a.get(), out);
    out += op;
    print_node(n->b.get(), out);
    out += ")";
  };
  switch (n->op) {
    case Op::Const: out += std::to_string(n->value); break;
    case Op::X: out += "x"; break;
    case Op::Y: out += "y"; break;
    case Op::Add: binary("+"); break;
    case Op::Sub: binary("-"); break;
    case Op::Mul: binary("*"); break;
    case Op::Div: binary("/"); break;
    case Op::Pow: binary("^"); break;
    case Op::Neg:
      out += "(-";
      print_node(n->a.get(), out);
      out += ")";
      break;
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
      out += n->op == Op::Sin ? "sin(" : n->op == Op::Cos ? "cos(" : "exp(";
      print_node(n->a.get(), out);
      out += ")";
      break;
  }
}

struct Parser {
  const std::string& src;
  size_t pos = 0;

  explicit Parser(const std::string& s) : src(s) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression \"" + src + "\" at column " + std::to_string(pos + 1) +
                     ": " + msg);
  }

  void skip() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  char peek() {
    skip();
    return pos < src.size() ? src[pos] : '\0';
  }

  NodePtr expr() {
    NodePtr n = term();
    while (true) {
      if (eat('+')) n = add(n, term());
      else if (eat('-')) n = sub(n, term());
      else return n;
    }
  }

  NodePtr term() {
    NodePtr n = factor();
    while (true) {
      if (eat('*')) n = mul(n, factor());
      else if (eat('/')) n = divide(n, factor());
      else return n;
    }
  }

  NodePtr factor() {
    if (eat('-')) return make(Op::Neg, factor());
    if (eat('+')) return factor();
    NodePtr base = atom();
    if (eat('^')) return make(Op::Pow, base, factor());  // right associative
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos >= src.size()) fail("unexpected end of input");
    const char c = src[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(src.substr(pos), &used);
      } catch (...) {
        fail("bad number");
      }
      pos += used;
      return constant(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t end = pos;
      while (end < src.size() && std::isalnum(static_cast<unsigned char>(src[end]))) ++end;
      const std::string id = src.substr(pos, end - pos);
      pos = end;
      if (id == "x") return make(Op::X);
      if (id == "y") return make(Op::Y);
      if (id == "pi") return constant(3.14159265358979323846);
      Op fn;
      if (id == "sin") fn = Op::Sin;
      else if (id == "cos") fn = Op::Cos;
      else if (id == "exp") fn = Op::Exp;
      else fail("unknown identifier '" + id + "'");
      if (!eat('(')) fail("expected '(' after " + id);
      NodePtr arg = expr();
      if (!eat(')')) fail("expected ')'");
      return make(fn, arg);
    }
    if (eat('(')) {
      NodePtr n = expr();
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

Expr Expr::parse(const std::string& src) {
  Parser p(src);
  NodePtr root = p.expr();
  p.skip();
  if (p.pos != src.size()) p.fail("trailing input");
  return Expr(root);
}

double Expr::eval(double x, double y) const { return eval_node(root_.get(), x, y); }

Expr Expr::derivative(char var) const { return Expr(diff(root_, var)); }

std::string Expr::str() const {
  std::string out;
  print_node(root_.get(), out);
  return out;
}

}  // namespace ccbm
