#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include "sympres/expr.hpp"

namespace sympres {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr run() {
    Expr e = parse_expr();
    skip_space();
    if (pos_ != text_.size()) fail("end of input");
    return e;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(std::string expected) {
    throw ParseError(pos_, std::move(expected));
  }

  void skip_space() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool consume(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_expr() {
    Expr e = parse_term();
    while (true) {
      if (consume('+')) {
        e = e + parse_term();
      } else if (consume('-')) {
        e = e - parse_term();
      } else {
        return e;
      }
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    while (true) {
      if (consume('*')) {
        e = e * parse_unary();
      } else if (consume('/')) {
        e = e / parse_unary();
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    if (consume('-')) return -parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (consume('^')) return pow(std::move(base), parse_integer());
    return base;
  }

  int parse_integer() {
    skip_space();
    std::size_t start = pos_;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
    std::size_t digits = pos_;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    if (pos_ == digits) fail("integer exponent");
    int value = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc()) {
      pos_ = start;
      fail("integer exponent in range");
    }
    return value;
  }

  Expr parse_atom() {
    char c = peek();
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      if (!consume(')')) fail("')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    fail("number, identifier, or '('");
  }

  Expr parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      std::size_t frac = pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
      if (pos_ == frac) fail("digit after decimal point");
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      std::size_t digits = pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
      if (pos_ == digits) pos_ = mark;  // '2e' is the number 2 followed by ident
    }
    double value = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != text_.data() + pos_) {
      pos_ = start;
      fail("number");
    }
    return Expr::constant(value);
  }

  Expr parse_ident() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_')) {
      ++pos_;
    }
    std::string name(text_.substr(start, pos_ - start));
    if (peek() == '(') {
      ++pos_;
      Expr arg = parse_expr();
      if (!consume(')')) fail("')'");
      if (name == "sin") return sin(std::move(arg));
      if (name == "cos") return cos(std::move(arg));
      if (name == "exp") return exp(std::move(arg));
      if (name == "log") return log(std::move(arg));
      if (name == "sqrt") return sqrt(std::move(arg));
      pos_ = start;
      fail("one of the functions sin, cos, exp, log, sqrt");
    }
    if (name == "pi") return Expr::constant(M_PI);
    return Expr::variable(std::move(name));
  }
};

}  // namespace

Expr parse(std::string_view text) { return Parser(text).run(); }

}  // namespace sympres
