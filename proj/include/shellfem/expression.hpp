#pragma once

// Small math-expression language used for loads, charts and manufactured
// solutions.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          (right associative)
//   primary := number | 'x1' | 'x2' | 'pi' | 'e'
//            | func '(' expr ')' | '(' expr ')'
//   func    := sin cos tan exp log sqrt abs
//
// Binary + - * / are left associative. Unary minus binds looser than '^', so
// -x1^2 is -(x1^2).

#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "shellfem/error.hpp"

namespace shellfem {

class Expression {
public:
  enum class Kind : std::uint8_t { Number, Variable, Pi, E, Neg, Add, Sub, Mul, Div, Pow, Call };
  enum class Func : std::uint8_t { Sin, Cos, Tan, Exp, Log, Sqrt, Abs };

  struct Node {
    Kind kind;
    double value = 0.0;  // Number
    int var = 0;         // Variable: 0 -> x1, 1 -> x2
    Func func = Func::Sin;
    std::shared_ptr<const Node> lhs;  // unary operand / call argument / left operand
    std::shared_ptr<const Node> rhs;
  };
  using NodePtr = std::shared_ptr<const Node>;

  Expression() : root_(number_node(0.0)) {}
  explicit Expression(double constant) : root_(number_node(constant)) {}

  static Expression parse(std::string_view text);
  static Expression variable(int index) { return Expression(var_node(index)); }

  double operator()(double x1, double x2) const {
    const double r = eval(*root_, x1, x2);
    if (!std::isfinite(r)) throw DomainError("expression '" + to_string() + "' is not finite at (" +
                                             std::to_string(x1) + ", " + std::to_string(x2) + ")");
    return r;
  }

  /// Symbolic partial derivative with respect to x1 (index 0) or x2 (index 1).
  Expression derivative(int index) const { return Expression(diff(root_, index)); }

  /// Fully parenthesized text that parses back to an identical tree.
  std::string to_string() const {
    std::string out;
    print(*root_, out);
    return out;
  }

  bool depends_on(int index) const { return depends(*root_, index); }
  bool is_zero() const { return root_->kind == Kind::Number && root_->value == 0.0; }
  const Node& root() const { return *root_; }

  friend bool operator==(const Expression& a, const Expression& b) { return same(*a.root_, *b.root_); }

  // Builders with light algebraic simplification (constant folding, 0 and 1
  // identities). Used by the differentiator and by test generators.
  static Expression make_number(double v) { return Expression(number_node(v)); }
  static Expression make_binary(Kind k, const Expression& a, const Expression& b) {
    return Expression(binary(k, a.root_, b.root_));
  }
  static Expression make_neg(const Expression& a) { return Expression(neg(a.root_)); }
  static Expression make_call(Func f, const Expression& a) { return Expression(call(f, a.root_)); }
  static Expression make_constant(Kind k) { return Expression(std::make_shared<const Node>(Node{k})); }

  static Expression raw_binary(Kind k, const Expression& a, const Expression& b) {
    return Expression(std::make_shared<const Node>(Node{k, 0.0, 0, Func::Sin, a.root_, b.root_}));
  }
  static Expression raw_neg(const Expression& a) {
    return Expression(std::make_shared<const Node>(Node{Kind::Neg, 0.0, 0, Func::Sin, a.root_, nullptr}));
  }
  static Expression raw_call(Func f, const Expression& a) {
    return Expression(std::make_shared<const Node>(Node{Kind::Call, 0.0, 0, f, a.root_, nullptr}));
  }

private:
  explicit Expression(NodePtr root) : root_(std::move(root)) {}

  static NodePtr number_node(double v) { return std::make_shared<const Node>(Node{Kind::Number, v}); }
  static NodePtr var_node(int index) {
    return std::make_shared<const Node>(Node{Kind::Variable, 0.0, index});
  }
  static bool is_num(const NodePtr& n, double v) { return n->kind == Kind::Number && n->value == v; }

  static NodePtr neg(const NodePtr& a) {
    if (a->kind == Kind::Number) return number_node(-a->value);
    if (a->kind == Kind::Neg) return a->lhs;
    return std::make_shared<const Node>(Node{Kind::Neg, 0.0, 0, Func::Sin, a, nullptr});
  }

  static NodePtr binary(Kind k, const NodePtr& a, const NodePtr& b) {
    const bool na = a->kind == Kind::Number;
    const bool nb = b->kind == Kind::Number;
    switch (k) {
      case Kind::Add:
        if (na && nb) return number_node(a->value + b->value);
        if (is_num(a, 0.0)) return b;
        if (is_num(b, 0.0)) return a;
        break;
      case Kind::Sub:
        if (na && nb) return number_node(a->value - b->value);
        if (is_num(b, 0.0)) return a;
        if (is_num(a, 0.0)) return neg(b);
        break;
      case Kind::Mul:
        if (na && nb) return number_node(a->value * b->value);
        if (is_num(a, 0.0) || is_num(b, 0.0)) return number_node(0.0);
        if (is_num(a, 1.0)) return b;
        if (is_num(b, 1.0)) return a;
        break;
      case Kind::Div:
        if (is_num(a, 0.0)) return number_node(0.0);
        if (is_num(b, 1.0)) return a;
        if (na && nb && b->value != 0.0) return number_node(a->value / b->value);
        break;
      case Kind::Pow:
        if (is_num(b, 0.0)) return number_node(1.0);
        if (is_num(b, 1.0)) return a;
        break;
      default:
        break;
    }
    return std::make_shared<const Node>(Node{k, 0.0, 0, Func::Sin, a, b});
  }

  static NodePtr call(Func f, const NodePtr& a) {
    return std::make_shared<const Node>(Node{Kind::Call, 0.0, 0, f, a, nullptr});
  }

  static double eval(const Node& n, double x1, double x2) {
    switch (n.kind) {
      case Kind::Number: return n.value;
      case Kind::Variable: return n.var == 0 ? x1 : x2;
      case Kind::Pi: return std::numbers::pi;
      case Kind::E: return std::numbers::e;
      case Kind::Neg: return -eval(*n.lhs, x1, x2);
      case Kind::Add: return eval(*n.lhs, x1, x2) + eval(*n.rhs, x1, x2);
      case Kind::Sub: return eval(*n.lhs, x1, x2) - eval(*n.rhs, x1, x2);
      case Kind::Mul: return eval(*n.lhs, x1, x2) * eval(*n.rhs, x1, x2);
      case Kind::Div: {
        const double d = eval(*n.rhs, x1, x2);
        if (d == 0.0) throw DomainError("division by zero");
        return eval(*n.lhs, x1, x2) / d;
      }
      case Kind::Pow: return std::pow(eval(*n.lhs, x1, x2), eval(*n.rhs, x1, x2));
      case Kind::Call: {
        const double a = eval(*n.lhs, x1, x2);
        switch (n.func) {
          case Func::Sin: return std::sin(a);
          case Func::Cos: return std::cos(a);
          case Func::Tan: return std::tan(a);
          case Func::Exp: return std::exp(a);
          case Func::Log:
            if (a <= 0.0) throw DomainError("log of nonpositive value");
            return std::log(a);
          case Func::Sqrt:
            if (a < 0.0) throw DomainError("sqrt of negative value");
            return std::sqrt(a);
          case Func::Abs: return std::abs(a);
        }
      }
    }
    return 0.0;
  }

  static bool depends(const Node& n, int index) {
    switch (n.kind) {
      case Kind::Variable: return n.var == index;
      case Kind::Number:
      case Kind::Pi:
      case Kind::E: return false;
      default:
        return (n.lhs && depends(*n.lhs, index)) || (n.rhs && depends(*n.rhs, index));
    }
  }

  static NodePtr diff(const NodePtr& np, int index) {
    const Node& n = *np;
    switch (n.kind) {
      case Kind::Number:
      case Kind::Pi:
      case Kind::E: return number_node(0.0);
      case Kind::Variable: return number_node(n.var == index ? 1.0 : 0.0);
      case Kind::Neg: return neg(diff(n.lhs, index));
      case Kind::Add: return binary(Kind::Add, diff(n.lhs, index), diff(n.rhs, index));
      case Kind::Sub: return binary(Kind::Sub, diff(n.lhs, index), diff(n.rhs, index));
      case Kind::Mul:
        return binary(Kind::Add, binary(Kind::Mul, diff(n.lhs, index), n.rhs),
                      binary(Kind::Mul, n.lhs, diff(n.rhs, index)));
      case Kind::Div: {
        auto num = binary(Kind::Sub, binary(Kind::Mul, diff(n.lhs, index), n.rhs),
                          binary(Kind::Mul, n.lhs, diff(n.rhs, index)));
        return binary(Kind::Div, num, binary(Kind::Mul, n.rhs, n.rhs));
      }
      case Kind::Pow: {
        if (!depends(*n.rhs, index)) {
          // d(a^c) = c a^(c-1) a'
          auto cm1 = binary(Kind::Sub, n.rhs, number_node(1.0));
          return binary(Kind::Mul, binary(Kind::Mul, n.rhs, binary(Kind::Pow, n.lhs, cm1)), diff(n.lhs, index));
        }
        // d(a^b) = a^b (b' log a + b a'/a)
        auto t1 = binary(Kind::Mul, diff(n.rhs, index), call(Func::Log, n.lhs));
        auto t2 = binary(Kind::Div, binary(Kind::Mul, n.rhs, diff(n.lhs, index)), n.lhs);
        return binary(Kind::Mul, np, binary(Kind::Add, t1, t2));
      }
      case Kind::Call: {
        auto da = diff(n.lhs, index);
        if (is_num(da, 0.0)) return da;
        NodePtr outer;
        switch (n.func) {
          case Func::Sin: outer = call(Func::Cos, n.lhs); break;
          case Func::Cos: outer = neg(call(Func::Sin, n.lhs)); break;
          case Func::Tan: {
            auto c = call(Func::Cos, n.lhs);
            outer = binary(Kind::Div, number_node(1.0), binary(Kind::Mul, c, c));
            break;
          }
          case Func::Exp: outer = np; break;
          case Func::Log: outer = binary(Kind::Div, number_node(1.0), n.lhs); break;
          case Func::Sqrt: outer = binary(Kind::Div, number_node(0.5), np); break;
          case Func::Abs: outer = binary(Kind::Div, n.lhs, np); break;
        }
        return binary(Kind::Mul, outer, da);
      }
    }
    return number_node(0.0);
  }

  static const char* func_name(Func f) {
    switch (f) {
      case Func::Sin: return "sin";
      case Func::Cos: return "cos";
      case Func::Tan: return "tan";
      case Func::Exp: return "exp";
      case Func::Log: return "log";
      case Func::Sqrt: return "sqrt";
      case Func::Abs: return "abs";
    }
    return "?";
  }

  static void print(const Node& n, std::string& out) {
    switch (n.kind) {
      case Kind::Number: {
        char buf[64];
        const double v = n.value;
        auto res = std::to_chars(buf, buf + sizeof buf, v < 0 ? -v : v);
        std::string s(buf, res.ptr);
        out += v < 0 ? "(-" + s + ")" : s;
        return;
      }
      case Kind::Variable: out += n.var == 0 ? "x1" : "x2"; return;
      case Kind::Pi: out += "pi"; return;
      case Kind::E: out += "e"; return;
      case Kind::Neg:
        out += "(-";
        print(*n.lhs, out);
        out += ")";
        return;
      case Kind::Call:
        out += func_name(n.func);
        out += "(";
        print(*n.lhs, out);
        out += ")";
        return;
      default: {
        const char* op = n.kind == Kind::Add   ? " + "
                         : n.kind == Kind::Sub ? " - "
                         : n.kind == Kind::Mul ? " * "
                         : n.kind == Kind::Div ? " / "
                                               : " ^ ";
        out += "(";
        print(*n.lhs, out);
        out += op;
        print(*n.rhs, out);
        out += ")";
      }
    }
  }

  static bool same(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case Kind::Number: return a.value == b.value;
      case Kind::Variable: return a.var == b.var;
      case Kind::Pi:
      case Kind::E: return true;
      case Kind::Neg: return same(*a.lhs, *b.lhs);
      case Kind::Call: return a.func == b.func && same(*a.lhs, *b.lhs);
      default: return same(*a.lhs, *b.lhs) && same(*a.rhs, *b.rhs);
    }
  }

  NodePtr root_;

  friend class ExpressionParser;
};

class ExpressionParser {
public:
  explicit ExpressionParser(std::string_view text) : s_(text) {}

  Expression::NodePtr parse() {
    auto e = expr();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("unexpected '" + std::string(1, s_[pos_]) + "'", pos_);
    return e;
  }

private:
  using Kind = Expression::Kind;
  using NodePtr = Expression::NodePtr;
  using Node = Expression::Node;

  static NodePtr make(Kind k, NodePtr a, NodePtr b = nullptr) {
    return std::make_shared<const Node>(Node{k, 0.0, 0, Expression::Func::Sin, std::move(a), std::move(b)});
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  NodePtr expr() {
    auto lhs = term();
    while (true) {
      if (peek('+')) {
        ++pos_;
        lhs = make(Kind::Add, lhs, term());
      } else if (peek('-')) {
        ++pos_;
        lhs = make(Kind::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    auto lhs = unary();
    while (true) {
      if (peek('*')) {
        ++pos_;
        lhs = make(Kind::Mul, lhs, unary());
      } else if (peek('/')) {
        ++pos_;
        lhs = make(Kind::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (peek('-')) {
      ++pos_;
      return make(Kind::Neg, unary());
    }
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (peek('^')) {
      ++pos_;
      return make(Kind::Pow, base, unary());
    }
    return base;
  }

  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = expr();
      if (!peek(')')) throw ParseError("expected ')'", pos_);
      ++pos_;
      return e;
    }
    if (is_digit(c) || c == '.') return number();
    if (is_alpha(c)) return identifier();
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && is_digit(s_[p])) {
        pos_ = p;
        while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
      }
    }
    double v = 0.0;
    auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != s_.data() + pos_) throw ParseError("malformed number", start);
    return std::make_shared<const Node>(Node{Kind::Number, v});
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (is_alpha(s_[pos_]) || is_digit(s_[pos_]))) ++pos_;
    const std::string_view id = s_.substr(start, pos_ - start);
    if (id == "x1") return std::make_shared<const Node>(Node{Kind::Variable, 0.0, 0});
    if (id == "x2") return std::make_shared<const Node>(Node{Kind::Variable, 0.0, 1});
    if (id == "pi") return std::make_shared<const Node>(Node{Kind::Pi});
    if (id == "e") return std::make_shared<const Node>(Node{Kind::E});
    using F = Expression::Func;
    static constexpr std::pair<std::string_view, F> funcs[] = {{"sin", F::Sin},   {"cos", F::Cos}, {"tan", F::Tan},
                                                                {"exp", F::Exp},   {"log", F::Log}, {"sqrt", F::Sqrt},
                                                                {"abs", F::Abs}};
    for (const auto& [name, f] : funcs) {
      if (id == name) {
        if (!peek('(')) throw ParseError("expected '(' after " + std::string(name), pos_);
        ++pos_;
        auto arg = expr();
        if (!peek(')')) throw ParseError("expected ')'", pos_);
        ++pos_;
        return std::make_shared<const Node>(Node{Kind::Call, 0.0, 0, f, arg, nullptr});
      }
    }
    throw ParseError("unknown identifier '" + std::string(id) + "'", start);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

inline Expression Expression::parse(std::string_view text) { return Expression(ExpressionParser(text).parse()); }

}  // namespace shellfem
