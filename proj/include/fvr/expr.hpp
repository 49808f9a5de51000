#pragma once

// Tiny arithmetic expression language for coefficients, sources and exact
// solutions: literals, x, y, pi, + - * / ^ (integer exponents), unary minus,
// sin cos exp sqrt.  Supports symbolic differentiation in x and y.

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

namespace fvr {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind { Num, VarX, VarY, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Sqrt };

struct Expr {
  ExprKind kind;
  double num = 0.0;      // Num
  long long ipow = 0;    // Pow exponent
  ExprPtr a, b;

  explicit Expr(ExprKind k) : kind(k) {}
};

class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

namespace detail {

inline ExprPtr make_num(double v) {
  auto e = std::make_shared<Expr>(ExprKind::Num);
  e->num = v;
  return e;
}

inline ExprPtr make1(ExprKind k, ExprPtr a) {
  auto e = std::make_shared<Expr>(k);
  e->a = std::move(a);
  return e;
}

inline ExprPtr make2(ExprKind k, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>(k);
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

inline bool is_num(const ExprPtr& e, double v) {
  return e->kind == ExprKind::Num && e->num == v;
}

class Parser {
 public:
  explicit Parser(std::string src) : src_(std::move(src)) {}

  ExprPtr run() {
    ExprPtr e = expr();
    skip_ws();
    if (pos_ != src_.size())
      throw parse_error("unexpected trailing input, expected operator or end", pos_);
    return e;
  }

 private:
  std::string src_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  ExprPtr expr() {
    ExprPtr e = term();
    for (;;) {
      if (eat('+'))
        e = make2(ExprKind::Add, e, term());
      else if (eat('-'))
        e = make2(ExprKind::Sub, e, term());
      else
        return e;
    }
  }

  ExprPtr term() {
    ExprPtr e = unary();
    for (;;) {
      if (eat('*'))
        e = make2(ExprKind::Mul, e, unary());
      else if (eat('/'))
        e = make2(ExprKind::Div, e, unary());
      else
        return e;
    }
  }

  ExprPtr unary() {
    if (eat('-')) return make1(ExprKind::Neg, unary());
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    if (eat('^')) {
      long long n = integer_literal();
      auto e = std::make_shared<Expr>(ExprKind::Pow);
      e->a = base;
      e->ipow = n;
      return e;
    }
    return base;
  }

  // Exponents are restricted to (possibly negated) integer literals so that
  // differentiation stays closed over the grammar.
  long long integer_literal() {
    skip_ws();
    bool neg = eat('-');
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ == start) throw parse_error("expected integer exponent after '^'", start);
    long long v = std::stoll(src_.substr(start, pos_ - start));
    return neg ? -v : v;
  }

  ExprPtr primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw parse_error("unexpected end of input, expected operand", pos_);
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = expr();
      if (!eat(')')) throw parse_error("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw parse_error(std::string("unexpected character '") + c + "', expected operand", pos_);
  }

  ExprPtr number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
      ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    try {
      return make_num(std::stod(src_.substr(start, pos_ - start)));
    } catch (const std::exception&) {
      throw parse_error("malformed number", start);
    }
  }

  ExprPtr identifier() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    std::string name = src_.substr(start, pos_ - start);
    if (name == "x") return std::make_shared<Expr>(ExprKind::VarX);
    if (name == "y") return std::make_shared<Expr>(ExprKind::VarY);
    if (name == "pi") return make_num(M_PI);
    ExprKind fk;
    if (name == "sin")
      fk = ExprKind::Sin;
    else if (name == "cos")
      fk = ExprKind::Cos;
    else if (name == "exp")
      fk = ExprKind::Exp;
    else if (name == "sqrt")
      fk = ExprKind::Sqrt;
    else
      throw parse_error("unknown identifier '" + name + "'", start);
    if (!eat('(')) throw parse_error("expected '(' after function name", pos_);
    ExprPtr arg = expr();
    if (!eat(')')) throw parse_error("expected ')'", pos_);
    return make1(fk, arg);
  }
};

}  // namespace detail

inline double expr_eval(const ExprPtr& e, double x, double y) {
  switch (e->kind) {
    case ExprKind::Num: return e->num;
    case ExprKind::VarX: return x;
    case ExprKind::VarY: return y;
    case ExprKind::Add: return expr_eval(e->a, x, y) + expr_eval(e->b, x, y);
    case ExprKind::Sub: return expr_eval(e->a, x, y) - expr_eval(e->b, x, y);
    case ExprKind::Mul: return expr_eval(e->a, x, y) * expr_eval(e->b, x, y);
    case ExprKind::Div: return expr_eval(e->a, x, y) / expr_eval(e->b, x, y);
    case ExprKind::Pow: return std::pow(expr_eval(e->a, x, y), static_cast<double>(e->ipow));
    case ExprKind::Neg: return -expr_eval(e->a, x, y);
    case ExprKind::Sin: return std::sin(expr_eval(e->a, x, y));
    case ExprKind::Cos: return std::cos(expr_eval(e->a, x, y));
    case ExprKind::Exp: return std::exp(expr_eval(e->a, x, y));
    case ExprKind::Sqrt: return std::sqrt(expr_eval(e->a, x, y));
  }
  return 0.0;  // unreachable
}

namespace detail {

// 0/1 identity and constant-fold simplification; flags constant division by zero.
inline ExprPtr simplify(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::Num:
    case ExprKind::VarX:
    case ExprKind::VarY: return e;
    case ExprKind::Neg: {
      ExprPtr a = simplify(e->a);
      if (a->kind == ExprKind::Num) return make_num(-a->num);
      return make1(ExprKind::Neg, a);
    }
    case ExprKind::Add: {
      ExprPtr a = simplify(e->a), b = simplify(e->b);
      if (is_num(a, 0.0)) return b;
      if (is_num(b, 0.0)) return a;
      if (a->kind == ExprKind::Num && b->kind == ExprKind::Num) return make_num(a->num + b->num);
      return make2(ExprKind::Add, a, b);
    }
    case ExprKind::Sub: {
      ExprPtr a = simplify(e->a), b = simplify(e->b);
      if (is_num(b, 0.0)) return a;
      if (is_num(a, 0.0)) return make1(ExprKind::Neg, b);
      if (a->kind == ExprKind::Num && b->kind == ExprKind::Num) return make_num(a->num - b->num);
      return make2(ExprKind::Sub, a, b);
    }
    case ExprKind::Mul: {
      ExprPtr a = simplify(e->a), b = simplify(e->b);
      if (is_num(a, 0.0) || is_num(b, 0.0)) return make_num(0.0);
      if (is_num(a, 1.0)) return b;
      if (is_num(b, 1.0)) return a;
      if (a->kind == ExprKind::Num && b->kind == ExprKind::Num) return make_num(a->num * b->num);
      return make2(ExprKind::Mul, a, b);
    }
    case ExprKind::Div: {
      ExprPtr a = simplify(e->a), b = simplify(e->b);
      if (is_num(b, 0.0)) throw std::invalid_argument("expression divides by constant zero");
      if (is_num(a, 0.0)) return make_num(0.0);
      if (is_num(b, 1.0)) return a;
      if (a->kind == ExprKind::Num && b->kind == ExprKind::Num) return make_num(a->num / b->num);
      return make2(ExprKind::Div, a, b);
    }
    case ExprKind::Pow: {
      ExprPtr a = simplify(e->a);
      if (e->ipow == 0) return make_num(1.0);
      if (e->ipow == 1) return a;
      if (a->kind == ExprKind::Num) return make_num(std::pow(a->num, static_cast<double>(e->ipow)));
      auto p = std::make_shared<Expr>(ExprKind::Pow);
      p->a = a;
      p->ipow = e->ipow;
      return p;
    }
    default: {
      ExprPtr a = simplify(e->a);
      if (a->kind == ExprKind::Num) {
        auto tmp = make1(e->kind, a);
        return make_num(expr_eval(tmp, 0, 0));
      }
      return make1(e->kind, a);
    }
  }
}

}  // namespace detail

inline ExprPtr expr_parse(const std::string& src) {
  detail::Parser p(src);
  return detail::simplify(p.run());
}

enum class Var { X, Y };

inline ExprPtr expr_diff(const ExprPtr& e, Var var) {
  using namespace detail;
  auto D = [var](const ExprPtr& q) { return expr_diff(q, var); };
  ExprPtr out;
  switch (e->kind) {
    case ExprKind::Num: out = make_num(0.0); break;
    case ExprKind::VarX: out = make_num(var == Var::X ? 1.0 : 0.0); break;
    case ExprKind::VarY: out = make_num(var == Var::Y ? 1.0 : 0.0); break;
    case ExprKind::Add: out = make2(ExprKind::Add, D(e->a), D(e->b)); break;
    case ExprKind::Sub: out = make2(ExprKind::Sub, D(e->a), D(e->b)); break;
    case ExprKind::Neg: out = make1(ExprKind::Neg, D(e->a)); break;
    case ExprKind::Mul:
      out = make2(ExprKind::Add, make2(ExprKind::Mul, D(e->a), e->b),
                  make2(ExprKind::Mul, e->a, D(e->b)));
      break;
    case ExprKind::Div: {
      // (a'b - ab') / b^2
      auto b2 = std::make_shared<Expr>(ExprKind::Pow);
      b2->a = e->b;
      b2->ipow = 2;
      out = make2(ExprKind::Div,
                  make2(ExprKind::Sub, make2(ExprKind::Mul, D(e->a), e->b),
                        make2(ExprKind::Mul, e->a, D(e->b))),
                  b2);
      break;
    }
    case ExprKind::Pow: {
      // n * a^(n-1) * a'
      auto pm1 = std::make_shared<Expr>(ExprKind::Pow);
      pm1->a = e->a;
      pm1->ipow = e->ipow - 1;
      out = make2(ExprKind::Mul, make_num(static_cast<double>(e->ipow)),
                  make2(ExprKind::Mul, ExprPtr(pm1), D(e->a)));
      break;
    }
    case ExprKind::Sin: out = make2(ExprKind::Mul, make1(ExprKind::Cos, e->a), D(e->a)); break;
    case ExprKind::Cos:
      out = make1(ExprKind::Neg, make2(ExprKind::Mul, make1(ExprKind::Sin, e->a), D(e->a)));
      break;
    case ExprKind::Exp: out = make2(ExprKind::Mul, make1(ExprKind::Exp, e->a), D(e->a)); break;
    case ExprKind::Sqrt:
      out = make2(ExprKind::Div, D(e->a),
                  make2(ExprKind::Mul, make_num(2.0), make1(ExprKind::Sqrt, e->a)));
      break;
  }
  return detail::simplify(out);
}

inline std::string expr_to_string(const ExprPtr& e) {
  auto paren = [](const std::string& s) { return "(" + s + ")"; };
  switch (e->kind) {
    case ExprKind::Num: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", e->num);
      std::string s(buf);
      if (!s.empty() && s[0] == '-') return paren(s);
      return s;
    }
    case ExprKind::VarX: return "x";
    case ExprKind::VarY: return "y";
    case ExprKind::Add: return paren(expr_to_string(e->a) + "+" + expr_to_string(e->b));
    case ExprKind::Sub: return paren(expr_to_string(e->a) + "-" + expr_to_string(e->b));
    case ExprKind::Mul: return paren(expr_to_string(e->a) + "*" + expr_to_string(e->b));
    case ExprKind::Div: return paren(expr_to_string(e->a) + "/" + expr_to_string(e->b));
    case ExprKind::Pow:
      return paren(expr_to_string(e->a) + "^" +
                   (e->ipow < 0 ? "-" + std::to_string(-e->ipow) : std::to_string(e->ipow)));
    case ExprKind::Neg: return paren("-" + expr_to_string(e->a));
    case ExprKind::Sin: return "sin(" + expr_to_string(e->a) + ")";
    case ExprKind::Cos: return "cos(" + expr_to_string(e->a) + ")";
    case ExprKind::Exp: return "exp(" + expr_to_string(e->a) + ")";
    case ExprKind::Sqrt: return "sqrt(" + expr_to_string(e->a) + ")";
  }
  return "";
}

}  // namespace fvr
