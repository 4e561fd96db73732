#include "jumpom/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace jumpom {

namespace detail {

enum class Op { constant, variable, add, sub, mul, div, pow, neg, sin, cos, exp, tanh, sqrt, abs, sign };

using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::constant;
  double value = 0.0;
  std::size_t var = 0;
  int exponent = 0;
  NodePtr lhs;
  NodePtr rhs;
};

namespace {

NodePtr make_constant(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::constant;
  n->value = v;
  return n;
}

NodePtr make_variable(std::size_t index) {
  auto n = std::make_shared<Node>();
  n->op = Op::variable;
  n->var = index;
  return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::constant && n->value == v; }

double eval_node(const Node& n, std::span<const double> x);

double apply_unary(Op op, double a) {
  switch (op) {
    case Op::neg: return -a;
    case Op::sin: return std::sin(a);
    case Op::cos: return std::cos(a);
    case Op::exp: return std::exp(a);
    case Op::tanh: return std::tanh(a);
    case Op::sqrt: return std::sqrt(a);
    case Op::abs: return std::fabs(a);
    case Op::sign: return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
    default: return 0.0;
  }
}

double int_pow(double a, int n) {
  if (n < 0) return 1.0 / int_pow(a, -n);
  double result = 1.0;
  double base = a;
  while (n > 0) {
    if (n & 1) result *= base;
    base *= base;
    n >>= 1;
  }
  return result;
}

double eval_node(const Node& n, std::span<const double> x) {
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::variable: return x[n.var];
    case Op::add: return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
    case Op::sub: return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
    case Op::mul: return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
    case Op::div: return eval_node(*n.lhs, x) / eval_node(*n.rhs, x);
    case Op::pow: return int_pow(eval_node(*n.lhs, x), n.exponent);
    default: return apply_unary(n.op, eval_node(*n.lhs, x));
  }
}

NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
  if (a->op == Op::constant && b->op == Op::constant) {
    Node tmp;
    tmp.op = op;
    tmp.lhs = a;
    tmp.rhs = b;
    return make_constant(eval_node(tmp, {}));
  }
  switch (op) {
    case Op::add:
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      break;
    case Op::sub:
      if (is_const(b, 0.0)) return a;
      break;
    case Op::mul:
      if (is_const(a, 0.0) || is_const(b, 0.0)) return make_constant(0.0);
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      break;
    case Op::div:
      if (is_const(b, 1.0)) return a;
      break;
    default: break;
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

NodePtr make_unary(Op op, NodePtr a) {
  if (a->op == Op::constant) return make_constant(apply_unary(op, a->value));
  if (op == Op::neg && a->op == Op::neg) return a->lhs;
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(a);
  return n;
}

NodePtr make_pow(NodePtr a, int exponent) {
  if (exponent == 0) return make_constant(1.0);
  if (exponent == 1) return a;
  if (a->op == Op::constant) return make_constant(int_pow(a->value, exponent));
  auto n = std::make_shared<Node>();
  n->op = Op::pow;
  n->exponent = exponent;
  n->lhs = std::move(a);
  return n;
}

NodePtr diff(const NodePtr& n, std::size_t v) {
  switch (n->op) {
    case Op::constant: return make_constant(0.0);
    case Op::variable: return make_constant(n->var == v ? 1.0 : 0.0);
    case Op::add: return make_binary(Op::add, diff(n->lhs, v), diff(n->rhs, v));
    case Op::sub: return make_binary(Op::sub, diff(n->lhs, v), diff(n->rhs, v));
    case Op::mul:
      return make_binary(Op::add, make_binary(Op::mul, diff(n->lhs, v), n->rhs),
                         make_binary(Op::mul, n->lhs, diff(n->rhs, v)));
    case Op::div: {
      auto num = make_binary(Op::sub, make_binary(Op::mul, diff(n->lhs, v), n->rhs),
                             make_binary(Op::mul, n->lhs, diff(n->rhs, v)));
      return make_binary(Op::div, num, make_pow(n->rhs, 2));
    }
    case Op::pow:
      return make_binary(Op::mul,
                         make_binary(Op::mul, make_constant(static_cast<double>(n->exponent)),
                                     make_pow(n->lhs, n->exponent - 1)),
                         diff(n->lhs, v));
    case Op::neg: return make_unary(Op::neg, diff(n->lhs, v));
    case Op::sin: return make_binary(Op::mul, make_unary(Op::cos, n->lhs), diff(n->lhs, v));
    case Op::cos:
      return make_binary(Op::mul, make_unary(Op::neg, make_unary(Op::sin, n->lhs)), diff(n->lhs, v));
    case Op::exp: return make_binary(Op::mul, n, diff(n->lhs, v));
    case Op::tanh:
      return make_binary(Op::mul, make_binary(Op::sub, make_constant(1.0), make_pow(n, 2)), diff(n->lhs, v));
    case Op::sqrt:
      return make_binary(Op::div, diff(n->lhs, v), make_binary(Op::mul, make_constant(2.0), n));
    case Op::abs: return make_binary(Op::mul, make_unary(Op::sign, n->lhs), diff(n->lhs, v));
    case Op::sign: return make_constant(0.0);  // a.e. derivative
  }
  return make_constant(0.0);
}

bool node_depends(const Node& n, std::size_t v) {
  switch (n.op) {
    case Op::constant: return false;
    case Op::variable: return n.var == v;
    default:
      return (n.lhs && node_depends(*n.lhs, v)) || (n.rhs && node_depends(*n.rhs, v));
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (v < 0 || s == "-0") return "(" + s + ")";
  return s;
}

const char* function_name(Op op) {
  switch (op) {
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::exp: return "exp";
    case Op::tanh: return "tanh";
    case Op::sqrt: return "sqrt";
    case Op::abs: return "abs";
    case Op::sign: return "sign";
    default: return "";
  }
}

void print_node(const Node& n, const std::vector<std::string>& vars, std::string& out) {
  switch (n.op) {
    case Op::constant: out += format_number(n.value); return;
    case Op::variable: out += vars[n.var]; return;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div: {
      const char* sym = n.op == Op::add ? " + " : n.op == Op::sub ? " - " : n.op == Op::mul ? " * " : " / ";
      out += '(';
      print_node(*n.lhs, vars, out);
      out += sym;
      print_node(*n.rhs, vars, out);
      out += ')';
      return;
    }
    case Op::pow:
      out += "((";
      print_node(*n.lhs, vars, out);
      out += ")^";
      out += n.exponent < 0 ? "(" + std::to_string(n.exponent) + ")" : std::to_string(n.exponent);
      out += ')';
      return;
    case Op::neg:
      out += "(-";
      print_node(*n.lhs, vars, out);
      out += ')';
      return;
    default:
      out += function_name(n.op);
      out += '(';
      print_node(*n.lhs, vars, out);
      out += ')';
      return;
  }
}

// Recursive-descent parser over the grammar documented in expr.hpp.
class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& vars) : text_(text), vars_(vars) {}

  NodePtr parse() {
    skip_ws();
    if (pos_ >= text_.size()) throw ExprError("empty expression", pos_);
    NodePtr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) throw ExprError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) throw ExprError(std::string("expected '") + c + "' but input ended", pos_);
      throw ExprError(std::string("expected '") + c + "'", pos_);
    }
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = make_binary(Op::add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = make_binary(Op::sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_binary(Op::mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = make_binary(Op::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make_unary(Op::neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) {
      const int exponent = parse_integer_exponent();
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '^') throw ExprError("chained '^' is not supported; add parentheses", pos_);
      return make_pow(base, exponent);
    }
    return base;
  }

  int parse_integer_exponent() {
    const bool paren = accept('(');
    const bool negative = accept('-');
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) throw ExprError("exponent must be an integer literal", start);
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
      throw ExprError("exponent must be an integer literal", start);
    int value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc()) throw ExprError("exponent out of range", start);
    if (paren) expect(')');
    return negative ? -value : value;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ExprError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ExprError(std::string("unexpected '") + c + "'", pos_);
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_) throw ExprError("malformed number", start);
    return make_constant(value);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    static const std::pair<const char*, Op> functions[] = {
        {"sin", Op::sin},   {"cos", Op::cos}, {"exp", Op::exp},  {"tanh", Op::tanh},
        {"sqrt", Op::sqrt}, {"abs", Op::abs}, {"sign", Op::sign}};
    for (const auto& [fname, op] : functions) {
      if (name == fname) {
        if (!accept('(')) throw ExprError("function '" + name + "' expects one argument in parentheses", pos_);
        NodePtr arg = parse_sum();
        if (accept(',')) throw ExprError("function '" + name + "' takes exactly one argument", pos_ - 1);
        expect(')');
        return make_unary(op, arg);
      }
    }
    const auto it = std::find(vars_.begin(), vars_.end(), name);
    if (it == vars_.end()) throw ExprError("unknown identifier '" + name + "'", start);
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') throw ExprError("'" + name + "' is not a function", pos_);
    return make_variable(static_cast<std::size_t>(it - vars_.begin()));
  }

  std::string_view text_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace
}  // namespace detail

Expr::Expr() : root_(detail::make_constant(0.0)) {}

Expr::Expr(std::shared_ptr<const detail::Node> root, std::vector<std::string> variables)
    : root_(std::move(root)), variables_(std::move(variables)) {}

Expr Expr::parse(std::string_view text, std::vector<std::string> variables) {
  for (std::size_t i = 0; i < variables.size(); ++i)
    for (std::size_t j = i + 1; j < variables.size(); ++j)
      if (variables[i] == variables[j]) throw Error(ErrorKind::input, "expr", "duplicate variable '" + variables[i] + "'");
  detail::Parser parser(text, variables);
  auto root = parser.parse();
  return Expr(std::move(root), std::move(variables));
}

Expr Expr::constant(double value, std::vector<std::string> variables) {
  return Expr(detail::make_constant(value), std::move(variables));
}

Expr Expr::variable(std::string_view name, std::vector<std::string> variables) {
  Expr probe(detail::make_constant(0.0), variables);
  const std::size_t idx = probe.variable_index(name);
  return Expr(detail::make_variable(idx), std::move(variables));
}

double Expr::operator()(std::span<const double> values) const {
  if (values.size() < variables_.size())
    throw Error(ErrorKind::input, "expr",
                "expression in " + std::to_string(variables_.size()) + " variables evaluated with " +
                    std::to_string(values.size()) + " values");
  return detail::eval_node(*root_, values);
}

std::size_t Expr::variable_index(std::string_view name) const {
  const auto it = std::find(variables_.begin(), variables_.end(), name);
  if (it == variables_.end()) throw Error(ErrorKind::input, "expr", "unknown variable '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - variables_.begin());
}

Expr Expr::derivative(std::string_view variable) const { return derivative(variable_index(variable)); }

Expr Expr::derivative(std::size_t variable_index) const {
  if (variable_index >= variables_.size())
    throw Error(ErrorKind::input, "expr", "variable index out of range");
  return Expr(detail::diff(root_, variable_index), variables_);
}

std::string Expr::to_string() const {
  std::string out;
  detail::print_node(*root_, variables_, out);
  return out;
}

bool Expr::is_constant() const noexcept { return root_->op == detail::Op::constant; }

bool Expr::depends_on(std::size_t variable_index) const { return detail::node_depends(*root_, variable_index); }

namespace {
void require_same_variables(const Expr& a, const Expr& b) {
  if (a.variables() != b.variables())
    throw Error(ErrorKind::input, "expr", "cannot combine expressions over different variable lists");
}
}  // namespace

Expr operator+(const Expr& a, const Expr& b) {
  require_same_variables(a, b);
  return Expr(detail::make_binary(detail::Op::add, a.root_, b.root_), a.variables_);
}

Expr operator-(const Expr& a, const Expr& b) {
  require_same_variables(a, b);
  return Expr(detail::make_binary(detail::Op::sub, a.root_, b.root_), a.variables_);
}

Expr operator*(const Expr& a, const Expr& b) {
  require_same_variables(a, b);
  return Expr(detail::make_binary(detail::Op::mul, a.root_, b.root_), a.variables_);
}

Expr operator*(double c, const Expr& a) {
  return Expr(detail::make_binary(detail::Op::mul, detail::make_constant(c), a.root_), a.variables_);
}

Expr parse_expression(std::string_view text, std::vector<std::string> variables) {
  return Expr::parse(text, std::move(variables));
}

Expr differentiate(const Expr& e, std::string_view variable) { return e.derivative(variable); }

}  // namespace jumpom
