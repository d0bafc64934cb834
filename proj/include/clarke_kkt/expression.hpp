#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>

#include "clarke_kkt/errors.hpp"

namespace clarke_kkt {

enum class UnaryOp { neg, abs };
enum class BinaryOp { add, sub, mul, div, max, min };

class Expression;

namespace expr {

struct Constant {
  double value;
};

/// 1-based variable index, x1 .. xn.
struct Variable {
  std::size_t index;
};

struct Unary;
struct Binary;
struct Power;

using Node = std::variant<Constant, Variable, Unary, Binary, Power>;

}  // namespace expr

/// Immutable expression tree over the variables x1..xn.
///
/// Nodes are shared, so copies are cheap and evaluation is reentrant.
class Expression {
 public:
  static Expression constant(double value);
  static Expression variable(std::size_t index);
  static Expression unary(UnaryOp op, Expression operand);
  static Expression binary(BinaryOp op, Expression lhs, Expression rhs);
  static Expression power(Expression base, unsigned exponent);

  const expr::Node& node() const;

  /// Evaluates at x (x[0] is x1). Throws EvaluationDomainError on division by zero.
  double evaluate(std::span<const double> x) const;

  /// Largest variable index referenced, 0 for a closed expression.
  std::size_t max_variable_index() const;

  /// True when no abs/max/min node occurs in the tree.
  bool is_smooth() const;

  /// Text in the problem-file grammar; parsing it back yields an equal tree.
  std::string to_string() const;

  friend bool operator==(const Expression& a, const Expression& b);

 private:
  explicit Expression(std::shared_ptr<const expr::Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const expr::Node> node_;
};

namespace expr {

struct Unary {
  UnaryOp op;
  Expression operand;
};

struct Binary {
  BinaryOp op;
  Expression lhs;
  Expression rhs;
};

struct Power {
  Expression base;
  unsigned exponent;
};

}  // namespace expr

inline const expr::Node& Expression::node() const { return *node_; }

inline Expression Expression::constant(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("expression constants must be finite");
  return Expression(std::make_shared<const expr::Node>(expr::Constant{value}));
}

inline Expression Expression::variable(std::size_t index) {
  if (index == 0) throw std::invalid_argument("variable indices are 1-based");
  return Expression(std::make_shared<const expr::Node>(expr::Variable{index}));
}

inline Expression Expression::unary(UnaryOp op, Expression operand) {
  return Expression(std::make_shared<const expr::Node>(expr::Unary{op, std::move(operand)}));
}

inline Expression Expression::binary(BinaryOp op, Expression lhs, Expression rhs) {
  return Expression(std::make_shared<const expr::Node>(expr::Binary{op, std::move(lhs), std::move(rhs)}));
}

inline Expression Expression::power(Expression base, unsigned exponent) {
  return Expression(std::make_shared<const expr::Node>(expr::Power{std::move(base), exponent}));
}

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline double integer_power(double base, unsigned exponent) {
  double result = 1.0;
  while (exponent != 0) {
    if (exponent & 1U) result *= base;
    exponent >>= 1U;
    if (exponent != 0) base *= base;
  }
  return result;
}

inline std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

// Grammar precedence: 1 sum, 2 product, 3 signed factor, 4 atom.
inline int precedence(const expr::Node& node) {
  return std::visit(overloaded{
                        [](const expr::Constant& c) { return std::signbit(c.value) ? 3 : 4; },
                        [](const expr::Variable&) { return 4; },
                        [](const expr::Unary& u) { return u.op == UnaryOp::neg ? 3 : 4; },
                        [](const expr::Binary& b) {
                          switch (b.op) {
                            case BinaryOp::add:
                            case BinaryOp::sub:
                              return 1;
                            case BinaryOp::mul:
                            case BinaryOp::div:
                              return 2;
                            default:
                              return 4;
                          }
                        },
                        [](const expr::Power&) { return 4; },
                    },
                    node);
}

inline void print(const Expression& e, std::string& out);

inline void print_at_least(const Expression& e, int min_precedence, std::string& out) {
  if (precedence(e.node()) < min_precedence) {
    out += '(';
    print(e, out);
    out += ')';
  } else {
    print(e, out);
  }
}

inline void print(const Expression& e, std::string& out) {
  std::visit(overloaded{
                 [&](const expr::Constant& c) { out += format_number(c.value); },
                 [&](const expr::Variable& v) { out += 'x' + std::to_string(v.index); },
                 [&](const expr::Unary& u) {
                   if (u.op == UnaryOp::abs) {
                     out += "abs(";
                     print(u.operand, out);
                     out += ')';
                     return;
                   }
                   out += '-';
                   // "-3" would re-parse as a negative literal, so constants get parentheses.
                   if (std::holds_alternative<expr::Constant>(u.operand.node())) {
                     out += '(';
                     print(u.operand, out);
                     out += ')';
                   } else {
                     print_at_least(u.operand, 4, out);
                   }
                 },
                 [&](const expr::Binary& b) {
                   const char* infix = nullptr;
                   int level = 0;
                   switch (b.op) {
                     case BinaryOp::max:
                     case BinaryOp::min:
                       out += b.op == BinaryOp::max ? "max(" : "min(";
                       print(b.lhs, out);
                       out += ", ";
                       print(b.rhs, out);
                       out += ')';
                       return;
                     case BinaryOp::add: infix = " + "; level = 1; break;
                     case BinaryOp::sub: infix = " - "; level = 1; break;
                     case BinaryOp::mul: infix = "*"; level = 2; break;
                     case BinaryOp::div: infix = "/"; level = 2; break;
                   }
                   // Left-associative: the right operand must bind strictly tighter.
                   print_at_least(b.lhs, level, out);
                   out += infix;
                   print_at_least(b.rhs, level + 1, out);
                 },
                 [&](const expr::Power& p) {
                   out += "pow(";
                   print(p.base, out);
                   out += ", " + std::to_string(p.exponent) + ')';
                 },
             },
             e.node());
}

}  // namespace detail

inline double Expression::evaluate(std::span<const double> x) const {
  using namespace expr;
  return std::visit(detail::overloaded{
                        [](const Constant& c) { return c.value; },
                        [&](const Variable& v) {
                          if (v.index > x.size()) throw std::out_of_range("variable index exceeds point dimension");
                          return x[v.index - 1];
                        },
                        [&](const Unary& u) {
                          const double a = u.operand.evaluate(x);
                          return u.op == UnaryOp::neg ? -a : std::fabs(a);
                        },
                        [&](const Binary& b) {
                          const double l = b.lhs.evaluate(x);
                          const double r = b.rhs.evaluate(x);
                          switch (b.op) {
                            case BinaryOp::add: return l + r;
                            case BinaryOp::sub: return l - r;
                            case BinaryOp::mul: return l * r;
                            case BinaryOp::div:
                              if (r == 0.0) throw EvaluationDomainError("division by zero");
                              return l / r;
                            case BinaryOp::max: return l >= r ? l : r;
                            case BinaryOp::min: return l <= r ? l : r;
                          }
                          return 0.0;
                        },
                        [&](const Power& p) { return detail::integer_power(p.base.evaluate(x), p.exponent); },
                    },
                    *node_);
}

inline std::size_t Expression::max_variable_index() const {
  using namespace expr;
  return std::visit(detail::overloaded{
                        [](const Constant&) -> std::size_t { return 0; },
                        [](const Variable& v) { return v.index; },
                        [](const Unary& u) { return u.operand.max_variable_index(); },
                        [](const Binary& b) { return std::max(b.lhs.max_variable_index(), b.rhs.max_variable_index()); },
                        [](const Power& p) { return p.base.max_variable_index(); },
                    },
                    *node_);
}

inline bool Expression::is_smooth() const {
  using namespace expr;
  return std::visit(detail::overloaded{
                        [](const Constant&) { return true; },
                        [](const Variable&) { return true; },
                        [](const Unary& u) { return u.op != UnaryOp::abs && u.operand.is_smooth(); },
                        [](const Binary& b) {
                          return b.op != BinaryOp::max && b.op != BinaryOp::min && b.lhs.is_smooth() && b.rhs.is_smooth();
                        },
                        [](const Power& p) { return p.base.is_smooth(); },
                    },
                    *node_);
}

inline std::string Expression::to_string() const {
  std::string out;
  detail::print(*this, out);
  return out;
}

inline bool operator==(const Expression& a, const Expression& b) {
  using namespace expr;
  if (a.node_ == b.node_) return true;
  if (a.node_->index() != b.node_->index()) return false;
  return std::visit(
      [&](const auto& lhs) {
        using T = std::decay_t<decltype(lhs)>;
        const auto& rhs = std::get<T>(*b.node_);
        if constexpr (std::is_same_v<T, Constant>) {
          return std::signbit(lhs.value) == std::signbit(rhs.value) && lhs.value == rhs.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return lhs.index == rhs.index;
        } else if constexpr (std::is_same_v<T, Unary>) {
          return lhs.op == rhs.op && lhs.operand == rhs.operand;
        } else if constexpr (std::is_same_v<T, Binary>) {
          return lhs.op == rhs.op && lhs.lhs == rhs.lhs && lhs.rhs == rhs.rhs;
        } else {
          return lhs.exponent == rhs.exponent && lhs.base == rhs.base;
        }
      },
      *a.node_);
}

}  // namespace clarke_kkt
