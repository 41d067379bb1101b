#pragma once

// Closed-form expression mini-language used by scenario files: +, -, *, /,
// integer powers, abs(), numeric literals, and variables x1..xN / t.
// Expressions carry analytic derivatives via forward symbolic differentiation,
// so Jacobians and Hessians of declared fields are exact (no finite differences).

#include <cctype>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsoc {

struct ExprParseError : std::runtime_error {
  std::size_t column;
  ExprParseError(const std::string& msg, std::size_t col)
      : std::runtime_error(msg + " (column " + std::to_string(col + 1) + ")"), column(col) {}
};

struct UnsupportedExpression : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

enum class NodeKind { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Abs, Sign };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind;
  double value = 0.0;    // Const
  int var = -1;          // Var index into the evaluation slot array
  int exponent = 0;      // Pow
  NodePtr a, b;

  Node(NodeKind k) : kind(k) {}
};

inline NodePtr make_const(double v) {
  auto n = std::make_shared<Node>(NodeKind::Const);
  n->value = v;
  return n;
}

inline NodePtr make_var(int idx) {
  auto n = std::make_shared<Node>(NodeKind::Var);
  n->var = idx;
  return n;
}

inline bool is_const(const NodePtr& n, double v) {
  return n->kind == NodeKind::Const && n->value == v;
}

inline NodePtr make_unary(NodeKind k, NodePtr a) {
  auto n = std::make_shared<Node>(k);
  n->a = std::move(a);
  return n;
}

inline NodePtr make_add(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (a->kind == NodeKind::Const && b->kind == NodeKind::Const)
    return make_const(a->value + b->value);
  auto n = std::make_shared<Node>(NodeKind::Add);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

inline NodePtr make_sub(NodePtr a, NodePtr b) {
  if (is_const(b, 0.0)) return a;
  if (a->kind == NodeKind::Const && b->kind == NodeKind::Const)
    return make_const(a->value - b->value);
  if (is_const(a, 0.0)) return make_unary(NodeKind::Neg, std::move(b));
  auto n = std::make_shared<Node>(NodeKind::Sub);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

inline NodePtr make_mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (a->kind == NodeKind::Const && b->kind == NodeKind::Const)
    return make_const(a->value * b->value);
  auto n = std::make_shared<Node>(NodeKind::Mul);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

inline NodePtr make_div(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return make_const(0.0);
  if (is_const(b, 1.0)) return a;
  if (a->kind == NodeKind::Const && b->kind == NodeKind::Const && b->value != 0.0)
    return make_const(a->value / b->value);
  auto n = std::make_shared<Node>(NodeKind::Div);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

inline NodePtr make_pow(NodePtr a, int k) {
  if (k == 0) return make_const(1.0);
  if (k == 1) return a;
  if (a->kind == NodeKind::Const) return make_const(std::pow(a->value, k));
  auto n = std::make_shared<Node>(NodeKind::Pow);
  n->a = std::move(a);
  n->exponent = k;
  return n;
}

inline double eval_node(const Node& n, const double* slots) {
  switch (n.kind) {
    case NodeKind::Const: return n.value;
    case NodeKind::Var: return slots[n.var];
    case NodeKind::Add: return eval_node(*n.a, slots) + eval_node(*n.b, slots);
    case NodeKind::Sub: return eval_node(*n.a, slots) - eval_node(*n.b, slots);
    case NodeKind::Mul: return eval_node(*n.a, slots) * eval_node(*n.b, slots);
    case NodeKind::Div: return eval_node(*n.a, slots) / eval_node(*n.b, slots);
    case NodeKind::Neg: return -eval_node(*n.a, slots);
    case NodeKind::Abs: return std::fabs(eval_node(*n.a, slots));
    case NodeKind::Sign: {
      double v = eval_node(*n.a, slots);
      return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
    }
    case NodeKind::Pow: {
      double base = eval_node(*n.a, slots);
      double r = 1.0;
      int k = n.exponent;
      bool inv = k < 0;
      if (inv) k = -k;
      double acc = base;
      while (k > 0) {
        if (k & 1) r *= acc;
        acc *= acc;
        k >>= 1;
      }
      return inv ? 1.0 / r : r;
    }
  }
  return 0.0;
}

inline NodePtr diff_node(const NodePtr& n, int var) {
  switch (n->kind) {
    case NodeKind::Const: return make_const(0.0);
    case NodeKind::Var: return make_const(n->var == var ? 1.0 : 0.0);
    case NodeKind::Add: return make_add(diff_node(n->a, var), diff_node(n->b, var));
    case NodeKind::Sub: return make_sub(diff_node(n->a, var), diff_node(n->b, var));
    case NodeKind::Mul:
      return make_add(make_mul(diff_node(n->a, var), n->b),
                      make_mul(n->a, diff_node(n->b, var)));
    case NodeKind::Div:
      return make_div(make_sub(make_mul(diff_node(n->a, var), n->b),
                               make_mul(n->a, diff_node(n->b, var))),
                      make_pow(n->b, 2));
    case NodeKind::Neg: return make_unary(NodeKind::Neg, diff_node(n->a, var));
    case NodeKind::Abs:
      // d|u| = sign(u)·du; the kink at u=0 is handled by the piecewise layer.
      return make_mul(make_unary(NodeKind::Sign, n->a), diff_node(n->a, var));
    case NodeKind::Sign: return make_const(0.0);
    case NodeKind::Pow:
      return make_mul(make_mul(make_const(double(n->exponent)), make_pow(n->a, n->exponent - 1)),
                      diff_node(n->a, var));
  }
  return make_const(0.0);
}

inline void print_node(const Node& n, std::ostream& os) {
  switch (n.kind) {
    case NodeKind::Const: os << n.value; break;
    case NodeKind::Var: os << "x" << (n.var + 1); break;
    case NodeKind::Add: os << "("; print_node(*n.a, os); os << " + "; print_node(*n.b, os); os << ")"; break;
    case NodeKind::Sub: os << "("; print_node(*n.a, os); os << " - "; print_node(*n.b, os); os << ")"; break;
    case NodeKind::Mul: os << "("; print_node(*n.a, os); os << "*"; print_node(*n.b, os); os << ")"; break;
    case NodeKind::Div: os << "("; print_node(*n.a, os); os << "/"; print_node(*n.b, os); os << ")"; break;
    case NodeKind::Neg: os << "(-"; print_node(*n.a, os); os << ")"; break;
    case NodeKind::Abs: os << "abs("; print_node(*n.a, os); os << ")"; break;
    case NodeKind::Sign: os << "sign("; print_node(*n.a, os); os << ")"; break;
    case NodeKind::Pow: print_node(*n.a, os); os << "^" << n.exponent; break;
  }
}

inline void collect_vars(const Node& n, std::vector<bool>& used) {
  if (n.kind == NodeKind::Var && n.var >= 0 && n.var < int(used.size())) used[n.var] = true;
  if (n.a) collect_vars(*n.a, used);
  if (n.b) collect_vars(*n.b, used);
}

// Recursive-descent parser. Variables: x1..xN (state) and t (slot N).
class Parser {
 public:
  Parser(const std::string& text, int state_dim) : text_(text), dim_(state_dim) {}

  NodePtr parse() {
    NodePtr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) throw ExprParseError("trailing input", pos_);
    return e;
  }

 private:
  const std::string& text_;
  int dim_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  NodePtr parse_sum() {
    NodePtr left = parse_term();
    for (;;) {
      if (consume('+')) left = make_add(left, parse_term());
      else if (consume('-')) left = make_sub(left, parse_term());
      else return left;
    }
  }

  NodePtr parse_term() {
    NodePtr left = parse_factor();
    for (;;) {
      skip_ws();
      char c = peek();
      if (c == '*') { ++pos_; left = make_mul(left, parse_factor()); }
      else if (c == '/') { ++pos_; left = make_div(left, parse_factor()); }
      else return left;
    }
  }

  NodePtr parse_factor() {
    if (consume('-')) return make_sub(make_const(0.0), parse_factor());
    if (consume('+')) return parse_factor();
    NodePtr base = parse_atom();
    skip_ws();
    if (consume('^')) {
      skip_ws();
      bool neg = consume('-');
      std::size_t start = pos_;
      long k = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        k = 10 * k + (text_[pos_++] - '0');
      if (pos_ == start) throw ExprParseError("expected integer exponent", pos_);
      if (k > 64) throw ExprParseError("exponent too large", start);
      return make_pow(base, int(neg ? -k : k));
    }
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ExprParseError("unexpected end of expression", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_sum();
      if (!consume(')')) throw ExprParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    throw ExprParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
            text_[pos_] == 'e' || text_[pos_] == 'E' ||
            ((text_[pos_] == '+' || text_[pos_] == '-') && pos_ > start &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
      ++pos_;
    try {
      std::size_t used = 0;
      double v = std::stod(text_.substr(start, pos_ - start), &used);
      if (used != pos_ - start) throw std::invalid_argument("");
      return make_const(v);
    } catch (const std::exception&) {
      throw ExprParseError("malformed number", start);
    }
  }

  NodePtr parse_ident() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);
    if (name == "abs") {
      if (!consume('(')) throw ExprParseError("expected '(' after abs", pos_);
      NodePtr arg = parse_sum();
      if (!consume(')')) throw ExprParseError("expected ')'", pos_);
      return make_unary(NodeKind::Abs, arg);
    }
    if (name == "t") return make_var(dim_);
    if (name.size() >= 2 && name[0] == 'x') {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
      if (digits) {
        int idx = std::stoi(name.substr(1));
        if (idx < 1 || idx > dim_)
          throw ExprParseError("variable " + name + " out of range for dimension " +
                                   std::to_string(dim_),
                               start);
        return make_var(idx - 1);
      }
    }
    throw UnsupportedExpression("unsupported symbol '" + name + "'");
  }
};

}  // namespace detail

/// A compiled scalar expression over x1..xN (and optionally t in slot N).
/// Values are evaluated against a slot array of length dim+1.
class Expr {
 public:
  Expr() : node_(detail::make_const(0.0)), dim_(0) {}
  Expr(detail::NodePtr node, int dim) : node_(std::move(node)), dim_(dim) {}

  static Expr parse(const std::string& text, int state_dim) {
    detail::Parser p(text, state_dim);
    return Expr(p.parse(), state_dim);
  }

  static Expr constant(double v, int dim = 0) { return Expr(detail::make_const(v), dim); }
  static Expr variable(int idx, int dim) { return Expr(detail::make_var(idx), dim); }

  int dim() const { return dim_; }

  double operator()(const double* slots) const { return detail::eval_node(*node_, slots); }

  double eval_state(const std::vector<double>& x) const {
    std::vector<double> slots(dim_ + 1, 0.0);
    for (int i = 0; i < dim_ && i < int(x.size()); ++i) slots[i] = x[i];
    return (*this)(slots.data());
  }

  /// Partial derivative with respect to slot `var` (0-based; dim_ = t-slot).
  Expr derivative(int var) const { return Expr(detail::diff_node(node_, var), dim_); }

  bool depends_on(int var) const {
    std::vector<bool> used(dim_ + 1, false);
    detail::collect_vars(*node_, used);
    return var >= 0 && var < int(used.size()) && used[var];
  }

  bool is_zero() const { return detail::is_const(node_, 0.0); }
  bool is_constant() const { return node_->kind == detail::NodeKind::Const; }
  double constant_value() const { return node_->value; }

  std::string str() const {
    std::ostringstream os;
    detail::print_node(*node_, os);
    return os.str();
  }

  friend Expr operator+(const Expr& a, const Expr& b) {
    return Expr(detail::make_add(a.node_, b.node_), std::max(a.dim_, b.dim_));
  }
  friend Expr operator-(const Expr& a, const Expr& b) {
    return Expr(detail::make_sub(a.node_, b.node_), std::max(a.dim_, b.dim_));
  }
  friend Expr operator*(const Expr& a, const Expr& b) {
    return Expr(detail::make_mul(a.node_, b.node_), std::max(a.dim_, b.dim_));
  }

  const detail::NodePtr& node() const { return node_; }

 private:
  detail::NodePtr node_;
  int dim_;
};

}  // namespace nsoc
