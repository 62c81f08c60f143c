#include "spdelab/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "spdelab/errors.hpp"

namespace spdelab {

enum class Op { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Exp, Log, Sqrt, Sin, Cos, Tanh, Abs, Min, Max };

struct Expression::Node {
  Op op = Op::Number;
  double value = 0.0;
  std::size_t variable = 0;
  int lhs = -1;
  int rhs = -1;
};

namespace {

using Node = Expression::Node;

struct Dual {
  double v;
  double d;
};

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& vars, std::vector<Node>& nodes)
      : text_(text), vars_(vars), nodes_(nodes) {}

  int parse() {
    const int root = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression", msg + " at offset " + std::to_string(pos_) + " in \"" + text_ + "\"");
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int push(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int binary(Op op, int a, int b) { return push({.op = op, .lhs = a, .rhs = b}); }

  int expr() {
    int lhs = term();
    for (;;) {
      if (accept('+')) lhs = binary(Op::Add, lhs, term());
      else if (accept('-')) lhs = binary(Op::Sub, lhs, term());
      else return lhs;
    }
  }

  int term() {
    int lhs = unary();
    for (;;) {
      if (accept('*')) lhs = binary(Op::Mul, lhs, unary());
      else if (accept('/')) lhs = binary(Op::Div, lhs, unary());
      else return lhs;
    }
  }

  int unary() {
    if (accept('-')) return push({.op = Op::Neg, .lhs = unary()});
    if (accept('+')) return unary();
    return power();
  }

  int power() {
    const int base = primary();
    if (accept('^')) return binary(Op::Pow, base, unary());
    return base;
  }

  int primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      return push({.op = Op::Number, .value = v});
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      const std::string name = text_.substr(start, pos_ - start);
      if (accept('(')) return call(name);
      for (std::size_t k = 0; k < vars_.size(); ++k)
        if (vars_[k] == name) return push({.op = Op::Variable, .variable = k});
      if (name == "pi") return push({.op = Op::Number, .value = std::numbers::pi});
      if (name == "e") return push({.op = Op::Number, .value = std::numbers::e});
      pos_ = start;
      fail("unknown name '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  int call(const std::string& name) {
    static const std::pair<const char*, Op> unary_fns[] = {
        {"exp", Op::Exp}, {"log", Op::Log}, {"sqrt", Op::Sqrt}, {"sin", Op::Sin},
        {"cos", Op::Cos}, {"tanh", Op::Tanh}, {"abs", Op::Abs}};
    for (const auto& [fn, op] : unary_fns) {
      if (name == fn) {
        const int arg = expr();
        if (!accept(')')) fail("expected ')' after argument of " + name);
        return push({.op = op, .lhs = arg});
      }
    }
    if (name == "min" || name == "max") {
      const int a = expr();
      if (!accept(',')) fail(name + " takes two arguments");
      const int b = expr();
      if (!accept(')')) fail("expected ')' after arguments of " + name);
      return binary(name == "min" ? Op::Min : Op::Max, a, b);
    }
    fail("unknown function '" + name + "'");
  }

  const std::string& text_;
  const std::vector<std::string>& vars_;
  std::vector<Node>& nodes_;
  std::size_t pos_ = 0;
};

Dual eval(const std::vector<Node>& nodes, int idx, std::span<const double> vars, std::size_t wrt) {
  const Node& n = nodes[static_cast<std::size_t>(idx)];
  switch (n.op) {
    case Op::Number: return {n.value, 0.0};
    case Op::Variable: return {vars[n.variable], n.variable == wrt ? 1.0 : 0.0};
    default: break;
  }
  const Dual a = eval(nodes, n.lhs, vars, wrt);
  switch (n.op) {
    case Op::Neg: return {-a.v, -a.d};
    case Op::Exp: {
      const double e = std::exp(a.v);
      return {e, e * a.d};
    }
    case Op::Log: return {std::log(a.v), a.d / a.v};
    case Op::Sqrt: {
      const double s = std::sqrt(a.v);
      return {s, s > 0.0 ? 0.5 * a.d / s : 0.0};
    }
    case Op::Sin: return {std::sin(a.v), std::cos(a.v) * a.d};
    case Op::Cos: return {std::cos(a.v), -std::sin(a.v) * a.d};
    case Op::Tanh: {
      const double th = std::tanh(a.v);
      return {th, (1.0 - th * th) * a.d};
    }
    case Op::Abs: return {std::abs(a.v), a.v < 0.0 ? -a.d : a.d};
    default: break;
  }
  const Dual b = eval(nodes, n.rhs, vars, wrt);
  switch (n.op) {
    case Op::Add: return {a.v + b.v, a.d + b.d};
    case Op::Sub: return {a.v - b.v, a.d - b.d};
    case Op::Mul: return {a.v * b.v, a.d * b.v + a.v * b.d};
    case Op::Div: return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
    case Op::Pow: {
      const double p = std::pow(a.v, b.v);
      double d = 0.0;
      if (a.d != 0.0) d += b.v * std::pow(a.v, b.v - 1.0) * a.d;
      if (b.d != 0.0) d += p * std::log(a.v) * b.d;
      return {p, d};
    }
    case Op::Min: return a.v <= b.v ? a : b;
    case Op::Max: return a.v >= b.v ? a : b;
    default: break;
  }
  return {0.0, 0.0};
}

}  // namespace

Expression Expression::parse(const std::string& text, std::vector<std::string> variables) {
  Expression e;
  e.text_ = text;
  e.variables_ = std::move(variables);
  auto nodes = std::make_shared<std::vector<Node>>();
  Parser parser(e.text_, e.variables_, *nodes);
  e.root_ = parser.parse();
  e.nodes_ = std::move(nodes);
  return e;
}

double Expression::operator()(std::span<const double> vars) const {
  return eval(*nodes_, root_, vars, vars.size()).v;
}

std::pair<double, double> Expression::value_and_derivative(std::span<const double> vars,
                                                           std::size_t wrt) const {
  const Dual d = eval(*nodes_, root_, vars, wrt);
  return {d.v, d.d};
}

bool Expression::depends_on(std::size_t index) const {
  for (const Node& n : *nodes_)
    if (n.op == Op::Variable && n.variable == index) return true;
  return false;
}

}  // namespace spdelab
