#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sprayg/errors.hpp"

namespace sprayg {

enum class Op : std::uint8_t {
  constant, variable, negate, add, sub, mul, div, pow,
  sin, cos, tan, exp, log, sqrt, sinh, cosh, tanh
};

using NameList = std::shared_ptr<const std::vector<std::string>>;

inline NameList make_names(std::vector<std::string> names) {
  return std::make_shared<const std::vector<std::string>>(std::move(names));
}

namespace detail {

struct ExprNode {
  Op op = Op::constant;
  double value = 0.0;
  int index = 0;     // variable index or integer exponent
  std::shared_ptr<const ExprNode> a, b;
};

using NodePtr = std::shared_ptr<const ExprNode>;

inline bool is_function(Op op) { return op >= Op::sin; }

inline const char* function_name(Op op) {
  switch (op) {
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::tan: return "tan";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::sqrt: return "sqrt";
    case Op::sinh: return "sinh";
    case Op::cosh: return "cosh";
    case Op::tanh: return "tanh";
    default: return "";
  }
}

inline bool lookup_function(std::string_view name, Op& op) {
  static constexpr std::array<Op, 9> ops{Op::sin, Op::cos, Op::tan, Op::exp, Op::log,
                                         Op::sqrt, Op::sinh, Op::cosh, Op::tanh};
  for (Op o : ops)
    if (name == function_name(o)) {
      op = o;
      return true;
    }
  return false;
}

inline double ipow(double base, int e) {
  double r = 1.0;
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

inline double apply_function(Op op, double v) {
  switch (op) {
    case Op::sin: return std::sin(v);
    case Op::cos: return std::cos(v);
    case Op::tan: return std::tan(v);
    case Op::exp: return std::exp(v);
    case Op::log:
      if (!(v > 0.0)) throw DomainError("log of non-positive value " + std::to_string(v));
      return std::log(v);
    case Op::sqrt:
      if (v < 0.0) throw DomainError("sqrt of negative value " + std::to_string(v));
      return std::sqrt(v);
    case Op::sinh: return std::sinh(v);
    case Op::cosh: return std::cosh(v);
    case Op::tanh: return std::tanh(v);
    default: return v;
  }
}

inline bool function_defined_at(Op op, double v) {
  if (op == Op::log) return v > 0.0;
  if (op == Op::sqrt) return v >= 0.0;
  return true;
}

inline double divide(double a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  return a / b;
}

}  // namespace detail

class Expression {
 public:
  Expression() : Expression(constant(0.0)) {}

  static Expression constant(double c) {
    auto n = std::make_shared<detail::ExprNode>();
    n->op = Op::constant;
    n->value = c;
    return Expression(std::move(n), nullptr);
  }

  static Expression variable(int index, NameList names) {
    auto n = std::make_shared<detail::ExprNode>();
    n->op = Op::variable;
    n->index = index;
    return Expression(std::move(n), std::move(names));
  }

  bool is_constant() const { return node_->op == Op::constant; }
  double constant_value() const { return node_->value; }
  bool is_zero() const { return is_constant() && node_->value == 0.0; }
  bool is_one() const { return is_constant() && node_->value == 1.0; }
  const NameList& names() const { return names_; }
  const detail::ExprNode& node() const { return *node_; }

  double evaluate(std::span<const double> x) const { return eval(*node_, x); }

  Expression differentiate(int index) const { return Expression(diff(node_, index), names_); }

  std::string to_string() const {
    std::string out;
    print(*node_, out);
    return out;
  }

  // Substitutes variable i by replacements[i]; names switch to the replacements'.
  Expression substitute(std::span<const Expression> replacements, NameList new_names) const {
    return Expression(subst(node_, replacements), std::move(new_names));
  }

  friend Expression operator+(const Expression& a, const Expression& b) {
    return Expression(make_add(a.node_, b.node_), pick(a, b));
  }
  friend Expression operator-(const Expression& a, const Expression& b) {
    return Expression(make_sub(a.node_, b.node_), pick(a, b));
  }
  friend Expression operator*(const Expression& a, const Expression& b) {
    return Expression(make_mul(a.node_, b.node_), pick(a, b));
  }
  friend Expression operator/(const Expression& a, const Expression& b) {
    return Expression(make_div(a.node_, b.node_), pick(a, b));
  }
  friend Expression operator-(const Expression& a) { return Expression(make_neg(a.node_), a.names_); }
  friend Expression pow(const Expression& a, int e) { return Expression(make_pow(a.node_, e), a.names_); }
  friend Expression apply(Op f, const Expression& a) { return Expression(make_fn(f, a.node_), a.names_); }

  Expression& operator+=(const Expression& o) { return *this = *this + o; }
  Expression& operator-=(const Expression& o) { return *this = *this - o; }
  Expression& operator*=(const Expression& o) { return *this = *this * o; }

  static Expression from_node(detail::NodePtr n, NameList names) { return Expression(std::move(n), std::move(names)); }

  static detail::NodePtr make_const(double c) {
    auto n = std::make_shared<detail::ExprNode>();
    n->value = c;
    return n;
  }

  static detail::NodePtr make_var(int index) {
    auto n = std::make_shared<detail::ExprNode>();
    n->op = Op::variable;
    n->index = index;
    return n;
  }

  static detail::NodePtr make_neg(const detail::NodePtr& a) {
    if (a->op == Op::constant) return make_const(-a->value);
    return make_node(Op::negate, a, nullptr);
  }

  static detail::NodePtr make_add(const detail::NodePtr& a, const detail::NodePtr& b) {
    if (is_c(a) && is_c(b)) return make_const(a->value + b->value);
    if (is_c(a, 0.0)) return b;
    if (is_c(b, 0.0)) return a;
    return make_node(Op::add, a, b);
  }

  static detail::NodePtr make_sub(const detail::NodePtr& a, const detail::NodePtr& b) {
    if (is_c(a) && is_c(b)) return make_const(a->value - b->value);
    if (is_c(b, 0.0)) return a;
    if (is_c(a, 0.0)) return make_neg(b);
    return make_node(Op::sub, a, b);
  }

  static detail::NodePtr make_mul(const detail::NodePtr& a, const detail::NodePtr& b) {
    if (is_c(a) && is_c(b)) return make_const(a->value * b->value);
    if (is_c(a, 0.0) || is_c(b, 0.0)) return make_const(0.0);
    if (is_c(a, 1.0)) return b;
    if (is_c(b, 1.0)) return a;
    return make_node(Op::mul, a, b);
  }

  static detail::NodePtr make_div(const detail::NodePtr& a, const detail::NodePtr& b) {
    if (is_c(a) && is_c(b) && b->value != 0.0) return make_const(a->value / b->value);
    if (is_c(b, 1.0)) return a;
    if (is_c(a, 0.0) && !is_c(b)) return a;
    return make_node(Op::div, a, b);
  }

  static detail::NodePtr make_pow(const detail::NodePtr& a, int e) {
    if (e == 0) return make_const(1.0);
    if (e == 1) return a;
    if (is_c(a)) return make_const(detail::ipow(a->value, e));
    auto n = std::make_shared<detail::ExprNode>();
    n->op = Op::pow;
    n->index = e;
    n->a = a;
    return n;
  }

  static detail::NodePtr make_fn(Op f, const detail::NodePtr& a) {
    if (is_c(a) && detail::function_defined_at(f, a->value))
      return make_const(detail::apply_function(f, a->value));
    return make_node(f, a, nullptr);
  }

 private:
  Expression(detail::NodePtr n, NameList names) : node_(std::move(n)), names_(std::move(names)) {}

  static const NameList& pick(const Expression& a, const Expression& b) {
    return a.names_ ? a.names_ : b.names_;
  }

  static bool is_c(const detail::NodePtr& n) { return n->op == Op::constant; }
  static bool is_c(const detail::NodePtr& n, double v) { return n->op == Op::constant && n->value == v; }

  static detail::NodePtr make_node(Op op, detail::NodePtr a, detail::NodePtr b) {
    auto n = std::make_shared<detail::ExprNode>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  static double eval(const detail::ExprNode& n, std::span<const double> x) {
    switch (n.op) {
      case Op::constant: return n.value;
      case Op::variable:
        if (static_cast<std::size_t>(n.index) >= x.size())
          throw std::out_of_range("coordinate vector too short");
        return x[n.index];
      case Op::negate: return -eval(*n.a, x);
      case Op::add: return eval(*n.a, x) + eval(*n.b, x);
      case Op::sub: return eval(*n.a, x) - eval(*n.b, x);
      case Op::mul: return eval(*n.a, x) * eval(*n.b, x);
      case Op::div: return detail::divide(eval(*n.a, x), eval(*n.b, x));
      case Op::pow: return detail::ipow(eval(*n.a, x), n.index);
      default: return detail::apply_function(n.op, eval(*n.a, x));
    }
  }

  static detail::NodePtr diff(const detail::NodePtr& p, int i) {
    const detail::ExprNode& n = *p;
    switch (n.op) {
      case Op::constant: return make_const(0.0);
      case Op::variable: return make_const(n.index == i ? 1.0 : 0.0);
      case Op::negate: return make_neg(diff(n.a, i));
      case Op::add: return make_add(diff(n.a, i), diff(n.b, i));
      case Op::sub: return make_sub(diff(n.a, i), diff(n.b, i));
      case Op::mul:
        return make_add(make_mul(diff(n.a, i), n.b), make_mul(n.a, diff(n.b, i)));
      case Op::div: {
        // (a'b - ab') / b^2
        auto num = make_sub(make_mul(diff(n.a, i), n.b), make_mul(n.a, diff(n.b, i)));
        return make_div(num, make_pow(n.b, 2));
      }
      case Op::pow: {
        auto da = diff(n.a, i);
        return make_mul(make_mul(make_const(n.index), make_pow(n.a, n.index - 1)), da);
      }
      default: break;
    }
    auto da = diff(n.a, i);
    if (is_c(da, 0.0)) return da;
    detail::NodePtr outer;
    switch (n.op) {
      case Op::sin: outer = make_fn(Op::cos, n.a); break;
      case Op::cos: outer = make_neg(make_fn(Op::sin, n.a)); break;
      case Op::tan: outer = make_div(make_const(1.0), make_pow(make_fn(Op::cos, n.a), 2)); break;
      case Op::exp: outer = p; break;
      case Op::log: return make_div(da, n.a);
      case Op::sqrt: return make_div(da, make_mul(make_const(2.0), p));
      case Op::sinh: outer = make_fn(Op::cosh, n.a); break;
      case Op::cosh: outer = make_fn(Op::sinh, n.a); break;
      case Op::tanh: outer = make_sub(make_const(1.0), make_pow(p, 2)); break;
      default: break;
    }
    return make_mul(outer, da);
  }

  static detail::NodePtr subst(const detail::NodePtr& p, std::span<const Expression> r) {
    const detail::ExprNode& n = *p;
    switch (n.op) {
      case Op::constant: return p;
      case Op::variable: return r[n.index].node_;
      case Op::negate: return make_neg(subst(n.a, r));
      case Op::add: return make_add(subst(n.a, r), subst(n.b, r));
      case Op::sub: return make_sub(subst(n.a, r), subst(n.b, r));
      case Op::mul: return make_mul(subst(n.a, r), subst(n.b, r));
      case Op::div: return make_div(subst(n.a, r), subst(n.b, r));
      case Op::pow: return make_pow(subst(n.a, r), n.index);
      default: return make_fn(n.op, subst(n.a, r));
    }
  }

  static int precedence(const detail::ExprNode& n) {
    switch (n.op) {
      case Op::constant: return std::signbit(n.value) ? 3 : 5;
      case Op::variable: return 5;
      case Op::negate: return 3;
      case Op::add:
      case Op::sub: return 1;
      case Op::mul:
      case Op::div: return 2;
      case Op::pow: return 4;
      default: return 5;
    }
  }

  void print_child(const detail::ExprNode& c, int min_prec, std::string& out) const {
    if (precedence(c) < min_prec) {
      out += '(';
      print(c, out);
      out += ')';
    } else {
      print(c, out);
    }
  }

  void print(const detail::ExprNode& n, std::string& out) const {
    switch (n.op) {
      case Op::constant: {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof buf, n.value);
        out.append(buf, res.ptr);
        return;
      }
      case Op::variable:
        if (names_ && static_cast<std::size_t>(n.index) < names_->size())
          out += (*names_)[n.index];
        else
          out += "x" + std::to_string(n.index + 1);
        return;
      case Op::negate:
        out += '-';
        print_child(*n.a, 3, out);
        return;
      case Op::add:
      case Op::sub:
        print_child(*n.a, 1, out);
        out += n.op == Op::add ? '+' : '-';
        print_child(*n.b, 2, out);
        return;
      case Op::mul:
      case Op::div:
        print_child(*n.a, 2, out);
        out += n.op == Op::mul ? '*' : '/';
        print_child(*n.b, 3, out);
        return;
      case Op::pow:
        print_child(*n.a, 5, out);
        out += '^';
        out += std::to_string(n.index);
        return;
      default:
        out += detail::function_name(n.op);
        out += '(';
        print(*n.a, out);
        out += ')';
        return;
    }
  }

  detail::NodePtr node_;
  NameList names_;
};

inline Expression operator+(const Expression& a, double b) { return a + Expression::constant(b); }
inline Expression operator*(double a, const Expression& b) { return Expression::constant(a) * b; }

namespace detail {

class Parser {
 public:
  Parser(std::string_view src, const NameList& names) : src_(src), names_(names) {}

  NodePtr parse() {
    skip();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "empty expression");
    NodePtr e = expr();
    skip();
    if (pos_ < src_.size()) throw SyntaxError(pos_, std::string("unexpected '") + src_[pos_] + "'");
    return e;
  }

 private:
  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) throw SyntaxError(pos_, std::string("expected '") + c + "' before end of input");
      throw SyntaxError(pos_, std::string("expected '") + c + "'");
    }
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = Expression::make_add(lhs, term());
      else if (accept('-'))
        lhs = Expression::make_sub(lhs, term());
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = Expression::make_mul(lhs, unary());
      else if (accept('/'))
        lhs = Expression::make_div(lhs, unary());
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return Expression::make_neg(unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) {
      skip();
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (start == pos_) throw SyntaxError(start, "expected non-negative integer exponent");
      int e = 0;
      auto res = std::from_chars(src_.data() + start, src_.data() + pos_, e);
      if (res.ec != std::errc()) throw SyntaxError(start, "exponent out of range");
      return Expression::make_pow(base, e);
    }
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "unexpected end of input");
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      std::string_view id = src_.substr(start, pos_ - start);
      Op f;
      if (lookup_function(id, f)) {
        expect('(');
        NodePtr arg = expr();
        expect(')');
        return Expression::make_fn(f, arg);
      }
      if (names_)
        for (std::size_t i = 0; i < names_->size(); ++i)
          if ((*names_)[i] == id) return Expression::make_var(static_cast<int>(i));
      throw UnknownIdentifier(std::string(id), start);
    }
    if (accept('(')) {
      NodePtr e = expr();
      expect(')');
      return e;
    }
    throw SyntaxError(pos_, std::string("unexpected '") + c + "'");
  }

  NodePtr number() {
    std::size_t start = pos_;
    auto digits = [&] {
      std::size_t s = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return pos_ - s;
    };
    std::size_t n = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) throw SyntaxError(start, "malformed number");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;
    }
    double v = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) throw SyntaxError(start, "malformed number");
    return Expression::make_const(v);
  }

  std::string_view src_;
  const NameList& names_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expression parse_expression(std::string_view source, const NameList& names) {
  detail::Parser p(source, names);
  return Expression::from_node(p.parse(), names);
}

// Flattened postfix programs for evaluating many expressions at one point.
class ExprTable {
 public:
  ExprTable() = default;

  explicit ExprTable(std::span<const Expression> exprs) {
    values_.assign(exprs.size(), 0.0);
    for (std::size_t k = 0; k < exprs.size(); ++k) {
      const Expression& e = exprs[k];
      if (e.is_constant()) {
        values_[k] = e.constant_value();
        continue;
      }
      Program prog;
      prog.slot = k;
      prog.begin = code_.size();
      int depth = 0, max_depth = 0;
      emit(e.node(), depth, max_depth);
      prog.end = code_.size();
      if (max_depth > kStack) throw std::length_error("expression too deep for compiled evaluation");
      programs_.push_back(prog);
    }
  }

  std::size_t size() const { return values_.size(); }
  bool all_constant() const { return programs_.empty(); }

  void evaluate(std::span<const double> x, double* out) const {
    std::memcpy(out, values_.data(), values_.size() * sizeof(double));
    for (const Program& p : programs_) out[p.slot] = run(p, x);
  }

  std::vector<double> evaluate(std::span<const double> x) const {
    std::vector<double> out(size());
    evaluate(x, out.data());
    return out;
  }

 private:
  static constexpr int kStack = 64;
  struct Instr {
    Op op;
    int arg;
    double value;
  };
  struct Program {
    std::size_t slot, begin, end;
  };

  void emit(const detail::ExprNode& n, int& depth, int& max_depth) {
    switch (n.op) {
      case Op::constant:
      case Op::variable:
        code_.push_back({n.op, n.index, n.value});
        max_depth = std::max(max_depth, ++depth);
        return;
      case Op::add:
      case Op::sub:
      case Op::mul:
      case Op::div:
        emit(*n.a, depth, max_depth);
        emit(*n.b, depth, max_depth);
        code_.push_back({n.op, 0, 0.0});
        --depth;
        return;
      default:
        emit(*n.a, depth, max_depth);
        code_.push_back({n.op, n.index, 0.0});
        return;
    }
  }

  double run(const Program& p, std::span<const double> x) const {
    double st[kStack];
    int top = -1;
    for (std::size_t i = p.begin; i < p.end; ++i) {
      const Instr& in = code_[i];
      switch (in.op) {
        case Op::constant: st[++top] = in.value; break;
        case Op::variable:
          if (static_cast<std::size_t>(in.arg) >= x.size()) throw std::out_of_range("coordinate vector too short");
          st[++top] = x[in.arg];
          break;
        case Op::negate: st[top] = -st[top]; break;
        case Op::add: st[top - 1] += st[top]; --top; break;
        case Op::sub: st[top - 1] -= st[top]; --top; break;
        case Op::mul: st[top - 1] *= st[top]; --top; break;
        case Op::div: st[top - 1] = detail::divide(st[top - 1], st[top]); --top; break;
        case Op::pow: st[top] = detail::ipow(st[top], in.arg); break;
        default: st[top] = detail::apply_function(in.op, st[top]); break;
      }
    }
    return st[0];
  }

  std::vector<double> values_;
  std::vector<Program> programs_;
  std::vector<Instr> code_;
};

}  // namespace sprayg
