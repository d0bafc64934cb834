#pragma once

#include <cctype>
#include <charconv>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clarke_kkt/errors.hpp"
#include "clarke_kkt/expression.hpp"

namespace clarke_kkt {

/// Where a variable reference occurred in the source text.
struct VariableUse {
  std::size_t index;
  std::size_t line;
  std::size_t column;
};

namespace detail {

enum class TokenKind { number, integer, variable, identifier, lparen, rparen, comma, plus, minus, star, slash, end };

struct Token {
  TokenKind kind;
  std::string_view text;
  std::size_t column;  // 1-based, relative to the start of the line
  double number = 0.0;
  std::size_t integer = 0;
};

class Lexer {
 public:
  Lexer(std::string_view text, std::size_t line, std::size_t column_offset)
      : text_(text), line_(line), offset_(column_offset) {}

  std::vector<Token> tokenize() {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (true) {
      while (i < text_.size() && std::isspace(static_cast<unsigned char>(text_[i]))) ++i;
      if (i == text_.size()) {
        tokens.push_back({TokenKind::end, {}, column(i)});
        return tokens;
      }
      const char c = text_[i];
      const std::size_t start = i;
      switch (c) {
        case '(': tokens.push_back({TokenKind::lparen, text_.substr(i, 1), column(i)}); ++i; continue;
        case ')': tokens.push_back({TokenKind::rparen, text_.substr(i, 1), column(i)}); ++i; continue;
        case ',': tokens.push_back({TokenKind::comma, text_.substr(i, 1), column(i)}); ++i; continue;
        case '+': tokens.push_back({TokenKind::plus, text_.substr(i, 1), column(i)}); ++i; continue;
        case '-': tokens.push_back({TokenKind::minus, text_.substr(i, 1), column(i)}); ++i; continue;
        case '*': tokens.push_back({TokenKind::star, text_.substr(i, 1), column(i)}); ++i; continue;
        case '/': tokens.push_back({TokenKind::slash, text_.substr(i, 1), column(i)}); ++i; continue;
        default: break;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        tokens.push_back(lex_number(i));
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        while (i < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[i])) || text_[i] == '_')) ++i;
        const auto word = text_.substr(start, i - start);
        if (word.size() >= 2 && word[0] == 'x' && all_digits(word.substr(1))) {
          Token t{TokenKind::variable, word, column(start)};
          t.integer = parse_integer(word.substr(1), column(start + 1));
          tokens.push_back(t);
        } else {
          tokens.push_back({TokenKind::identifier, word, column(start)});
        }
        continue;
      }
      throw ParseError(line_, column(i), std::string("unexpected character '") + c + "'");
    }
  }

 private:
  static bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  }

  std::size_t parse_integer(std::string_view digits, std::size_t col) const {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) throw ParseError(line_, col, "integer out of range");
    return value;
  }

  Token lex_number(std::size_t& i) {
    const std::size_t start = i;
    bool integral = true;
    auto digits = [&] {
      while (i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]))) ++i;
    };
    digits();
    if (i < text_.size() && text_[i] == '.') {
      integral = false;
      ++i;
      digits();
    }
    if (i < text_.size() && (text_[i] == 'e' || text_[i] == 'E')) {
      std::size_t j = i + 1;
      if (j < text_.size() && (text_[j] == '+' || text_[j] == '-')) ++j;
      if (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) {
        integral = false;
        i = j;
        digits();
      }
    }
    const auto text = text_.substr(start, i - start);
    Token t{integral ? TokenKind::integer : TokenKind::number, text, column(start)};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), t.number);
    if (ec != std::errc{} || ptr != text.data() + text.size())
      throw ParseError(line_, column(start), "malformed number '" + std::string(text) + "'");
    if (integral) t.integer = parse_integer(text, column(start));
    return t;
  }

  std::size_t column(std::size_t i) const { return offset_ + i + 1; }

  std::string_view text_;
  std::size_t line_;
  std::size_t offset_;
};

/// Recursive-descent parser for one expression on one line.
class ExpressionParser {
 public:
  ExpressionParser(std::vector<Token> tokens, std::size_t line, std::vector<VariableUse>& uses)
      : tokens_(std::move(tokens)), line_(line), uses_(uses) {}

  Expression parse() {
    Expression e = expression();
    if (peek().kind != TokenKind::end) fail(peek(), "unexpected '" + std::string(peek().text) + "'");
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }

  [[noreturn]] void fail(const Token& t, const std::string& what) const { throw ParseError(line_, t.column, what); }

  const Token& expect(TokenKind kind, const char* what) {
    if (peek().kind != kind) {
      const auto& t = peek();
      fail(t, std::string("expected ") + what + (t.kind == TokenKind::end ? " at end of line" : ", found '" + std::string(t.text) + "'"));
    }
    return advance();
  }

  Expression expression() {
    Expression lhs = term();
    while (peek().kind == TokenKind::plus || peek().kind == TokenKind::minus) {
      const BinaryOp op = advance().kind == TokenKind::plus ? BinaryOp::add : BinaryOp::sub;
      lhs = Expression::binary(op, std::move(lhs), term());
    }
    return lhs;
  }

  Expression term() {
    Expression lhs = factor();
    while (peek().kind == TokenKind::star || peek().kind == TokenKind::slash) {
      const BinaryOp op = advance().kind == TokenKind::star ? BinaryOp::mul : BinaryOp::div;
      lhs = Expression::binary(op, std::move(lhs), factor());
    }
    return lhs;
  }

  Expression factor() {
    if (peek().kind != TokenKind::minus) return atom();
    advance();
    // A sign directly in front of a literal folds into a negative constant.
    if (peek().kind == TokenKind::number || peek().kind == TokenKind::integer)
      return Expression::constant(-advance().number);
    return Expression::unary(UnaryOp::neg, atom());
  }

  Expression atom() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::number:
      case TokenKind::integer:
        advance();
        return Expression::constant(t.number);
      case TokenKind::variable:
        advance();
        if (t.integer == 0) fail(t, "variable indices start at x1");
        uses_.push_back({t.integer, line_, t.column});
        return Expression::variable(t.integer);
      case TokenKind::lparen: {
        advance();
        Expression inner = expression();
        expect(TokenKind::rparen, "')'");
        return inner;
      }
      case TokenKind::identifier:
        return call();
      default:
        fail(t, t.kind == TokenKind::end ? "unexpected end of expression" : "unexpected '" + std::string(t.text) + "'");
    }
  }

  Expression call() {
    const Token& name = advance();
    if (name.text != "abs" && name.text != "max" && name.text != "min" && name.text != "pow")
      fail(name, "unknown function '" + std::string(name.text) + "'");
    expect(TokenKind::lparen, "'('");
    Expression first = expression();
    if (name.text == "abs") {
      expect(TokenKind::rparen, "')'");
      return Expression::unary(UnaryOp::abs, std::move(first));
    }
    expect(TokenKind::comma, "','");
    if (name.text == "pow") {
      const Token& exponent = peek();
      if (exponent.kind != TokenKind::integer) fail(exponent, "pow exponent must be a non-negative integer literal");
      advance();
      expect(TokenKind::rparen, "')'");
      if (exponent.integer > 1024) fail(exponent, "pow exponent too large");
      return Expression::power(std::move(first), static_cast<unsigned>(exponent.integer));
    }
    Expression second = expression();
    expect(TokenKind::rparen, "')'");
    return Expression::binary(name.text == "max" ? BinaryOp::max : BinaryOp::min, std::move(first), std::move(second));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t line_;
  std::vector<VariableUse>& uses_;
};

}  // namespace detail

/// Parses a single expression. Variable references are appended to `uses` when given.
inline Expression parse_expression(std::string_view text, std::size_t line = 1, std::size_t column_offset = 0,
                                   std::vector<VariableUse>* uses = nullptr) {
  std::vector<VariableUse> local;
  detail::Lexer lexer(text, line, column_offset);
  detail::ExpressionParser parser(lexer.tokenize(), line, uses ? *uses : local);
  return parser.parse();
}

}  // namespace clarke_kkt
