#pragma once

#include <cctype>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsec/grid.hpp"

namespace tsec::expr {

struct Node {
  enum class Kind { number, constant, variable, negate, add, subtract, multiply, divide, power, call, vector };

  Kind kind = Kind::number;
  double number = 0.0;   // literal value, or the integer exponent of a power
  std::string name;      // constant, variable or function name
  std::vector<Node> args;

  bool operator==(const Node&) const = default;
};

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
        line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

inline constexpr double golden = 0.61803398874989484820;

namespace detail {

struct Token {
  enum class Type { number, ident, op, end } type = Type::end;
  std::string text;
  double value = 0.0;
  int line = 1;
  int column = 1;
};

inline std::vector<Token> tokenize(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t k) {
    for (std::size_t m = 0; m < k; ++m, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char ch = src[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isdigit(static_cast<unsigned char>(ch)) || (ch == '.' && i + 1 < src.size() &&
                                                         std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      t.type = Token::Type::number;
      t.text = src.substr(i, j - i);
      std::size_t used = 0;
      try {
        t.value = std::stod(t.text, &used);
      } catch (const std::exception&) {
        throw ParseError("malformed number '" + t.text + "'", line, col);
      }
      if (used != t.text.size()) throw ParseError("malformed number '" + t.text + "'", line, col);
      advance(j - i);
    } else if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.type = Token::Type::ident;
      t.text = src.substr(i, j - i);
      advance(j - i);
    } else if (std::string("+-*/^()[],").find(ch) != std::string::npos) {
      t.type = Token::Type::op;
      t.text = std::string(1, ch);
      advance(1);
    } else {
      throw ParseError(std::string("unexpected character '") + ch + "'", line, col);
    }
    out.push_back(t);
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

class Parser {
public:
  explicit Parser(const std::string& src) : toks_(tokenize(src)) {}

  Node parse() {
    Node n = expression();
    if (peek().type != Token::Type::end) fail("unexpected '" + peek().text + "'");
    return n;
  }

private:
  const Token& peek() const { return toks_[pos_]; }
  bool is_op(const char* s) const { return peek().type == Token::Type::op && peek().text == s; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().line, peek().column); }
  void expect(const char* s) {
    if (!is_op(s)) fail(std::string("expected '") + s + "'");
    ++pos_;
  }

  Node expression() {
    Node lhs = term();
    while (is_op("+") || is_op("-")) {
      Node::Kind k = peek().text == "+" ? Node::Kind::add : Node::Kind::subtract;
      ++pos_;
      Node rhs = term();
      lhs = Node{k, 0.0, {}, {std::move(lhs), std::move(rhs)}};
    }
    return lhs;
  }

  Node term() {
    Node lhs = unary();
    while (is_op("*") || is_op("/")) {
      Node::Kind k = peek().text == "*" ? Node::Kind::multiply : Node::Kind::divide;
      ++pos_;
      Node rhs = unary();
      lhs = Node{k, 0.0, {}, {std::move(lhs), std::move(rhs)}};
    }
    return lhs;
  }

  Node unary() {
    if (is_op("-")) {
      ++pos_;
      return Node{Node::Kind::negate, 0.0, {}, {unary()}};
    }
    return power();
  }

  Node power() {
    Node base = primary();
    if (is_op("^")) {
      ++pos_;
      bool neg = false;
      if (is_op("-")) {
        neg = true;
        ++pos_;
      }
      if (peek().type != Token::Type::number) fail("exponent must be an integer literal");
      double e = peek().value;
      if (e != std::floor(e) || peek().text.find_first_of(".eE") != std::string::npos)
        fail("exponent must be an integer literal");
      ++pos_;
      return Node{Node::Kind::power, neg ? -e : e, {}, {std::move(base)}};
    }
    return base;
  }

  Node primary() {
    const Token& t = peek();
    if (t.type == Token::Type::number) {
      ++pos_;
      return Node{Node::Kind::number, t.value, {}, {}};
    }
    if (t.type == Token::Type::ident) {
      std::string name = t.text;
      ++pos_;
      if (name == "pi" || name == "golden") return Node{Node::Kind::constant, 0.0, name, {}};
      if (name == "x" || name == "y" || name == "z") return Node{Node::Kind::variable, 0.0, name, {}};
      if (name == "sin" || name == "cos" || name == "exp") {
        expect("(");
        Node arg = expression();
        expect(")");
        return Node{Node::Kind::call, 0.0, name, {std::move(arg)}};
      }
      --pos_;
      fail("unknown identifier '" + name + "'");
    }
    if (is_op("(")) {
      ++pos_;
      Node n = expression();
      expect(")");
      return n;
    }
    if (is_op("[")) {
      ++pos_;
      Node v{Node::Kind::vector, 0.0, {}, {}};
      v.args.push_back(expression());
      while (is_op(",")) {
        ++pos_;
        v.args.push_back(expression());
      }
      expect("]");
      return v;
    }
    if (t.type == Token::Type::end) fail("unexpected end of input");
    fail("unexpected '" + t.text + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string to_string(const Node& n);

class PeriodicityError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline int variable_index(const std::string& name) { return name[0] - 'x'; }

/// Affine view of a subexpression: coefficients of the bare variables, and the
/// value when the node is a pure constant. Periodic subterms have zero coefficients.
struct Affine {
  std::array<double, 3> coef{0.0, 0.0, 0.0};
  bool constant = true;
  double value = 0.0;
  bool linear_free() const { return coef[0] == 0.0 && coef[1] == 0.0 && coef[2] == 0.0; }
};

inline Affine affine(const Node& n, int dim);

inline void require_periodic_argument(const Node& call, int dim) {
  Affine a = affine(call.args[0], dim);
  if (call.name == "exp") {
    if (!a.linear_free())
      throw PeriodicityError("non-periodic use of a variable in '" + to_string(call) + "'");
    return;
  }
  const double two_pi = 2.0 * M_PI;
  for (int i = 0; i < 3; ++i) {
    double k = a.coef[i] / two_pi;
    if (std::abs(k - std::round(k)) > 1e-12)
      throw PeriodicityError("non-periodic use of " + std::string(1, static_cast<char>('x' + i)) + " in '" +
                             to_string(call) + "'");
  }
}

inline Affine affine(const Node& n, int dim) {
  Affine r;
  switch (n.kind) {
    case Node::Kind::number:
      r.value = n.number;
      return r;
    case Node::Kind::constant:
      r.value = n.name == "pi" ? M_PI : golden;
      return r;
    case Node::Kind::variable: {
      int i = variable_index(n.name);
      if (i >= dim)
        throw PeriodicityError("variable " + n.name + " is not defined in dimension " + std::to_string(dim));
      r.constant = false;
      r.coef[i] = 1.0;
      return r;
    }
    case Node::Kind::negate: {
      r = affine(n.args[0], dim);
      for (double& c : r.coef) c = -c;
      r.value = -r.value;
      return r;
    }
    case Node::Kind::add:
    case Node::Kind::subtract: {
      Affine a = affine(n.args[0], dim), b = affine(n.args[1], dim);
      double s = n.kind == Node::Kind::add ? 1.0 : -1.0;
      for (int i = 0; i < 3; ++i) r.coef[i] = a.coef[i] + s * b.coef[i];
      r.constant = a.constant && b.constant;
      r.value = a.value + s * b.value;
      return r;
    }
    case Node::Kind::multiply: {
      Affine a = affine(n.args[0], dim), b = affine(n.args[1], dim);
      if (a.constant) {
        for (int i = 0; i < 3; ++i) r.coef[i] = a.value * b.coef[i];
        r.constant = b.constant;
        r.value = a.value * b.value;
      } else if (b.constant) {
        for (int i = 0; i < 3; ++i) r.coef[i] = b.value * a.coef[i];
        r.constant = false;
      } else if (a.linear_free() && b.linear_free()) {
        r.constant = false;
      } else {
        throw PeriodicityError("non-periodic use of a variable in '" + to_string(n) + "'");
      }
      return r;
    }
    case Node::Kind::divide: {
      Affine a = affine(n.args[0], dim), b = affine(n.args[1], dim);
      if (b.constant) {
        if (b.value == 0.0) throw PeriodicityError("division by zero in '" + to_string(n) + "'");
        for (int i = 0; i < 3; ++i) r.coef[i] = a.coef[i] / b.value;
        r.constant = a.constant;
        r.value = a.value / b.value;
      } else if (a.linear_free() && b.linear_free()) {
        r.constant = false;
      } else {
        throw PeriodicityError("non-periodic use of a variable in '" + to_string(n) + "'");
      }
      return r;
    }
    case Node::Kind::power: {
      Affine a = affine(n.args[0], dim);
      if (!a.linear_free()) throw PeriodicityError("non-periodic use of a variable in '" + to_string(n) + "'");
      r.constant = a.constant;
      r.value = std::pow(a.value, n.number);
      return r;
    }
    case Node::Kind::call: {
      require_periodic_argument(n, dim);
      Affine a = affine(n.args[0], dim);
      r.constant = a.constant;
      if (a.constant)
        r.value = n.name == "sin" ? std::sin(a.value) : n.name == "cos" ? std::cos(a.value) : std::exp(a.value);
      return r;
    }
    case Node::Kind::vector:
      throw PeriodicityError("vector literal used as a scalar in '" + to_string(n) + "'");
  }
  return r;
}

inline std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline int precedence(const Node& n) {
  switch (n.kind) {
    case Node::Kind::add:
    case Node::Kind::subtract: return 1;
    case Node::Kind::multiply:
    case Node::Kind::divide: return 2;
    case Node::Kind::negate: return 3;
    case Node::Kind::power: return 4;
    default: return 5;
  }
}

inline void print(std::ostream& os, const Node& n);

inline void print_wrapped(std::ostream& os, const Node& n, bool wrap) {
  if (wrap) os << '(';
  print(os, n);
  if (wrap) os << ')';
}

inline void print(std::ostream& os, const Node& n) {
  switch (n.kind) {
    case Node::Kind::number: os << format_number(n.number); return;
    case Node::Kind::constant:
    case Node::Kind::variable: os << n.name; return;
    case Node::Kind::negate:
      os << '-';
      print_wrapped(os, n.args[0], precedence(n.args[0]) < 3);
      return;
    case Node::Kind::add:
    case Node::Kind::subtract:
    case Node::Kind::multiply:
    case Node::Kind::divide: {
      int p = precedence(n);
      const char* op = n.kind == Node::Kind::add ? " + " : n.kind == Node::Kind::subtract ? " - "
                       : n.kind == Node::Kind::multiply ? "*" : "/";
      print_wrapped(os, n.args[0], precedence(n.args[0]) < p);
      os << op;
      print_wrapped(os, n.args[1], precedence(n.args[1]) <= p);
      return;
    }
    case Node::Kind::power:
      print_wrapped(os, n.args[0], precedence(n.args[0]) < 5);
      os << '^' << format_number(n.number);
      return;
    case Node::Kind::call:
      os << n.name << '(';
      print(os, n.args[0]);
      os << ')';
      return;
    case Node::Kind::vector:
      os << '[';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) os << ", ";
        print(os, n.args[i]);
      }
      os << ']';
      return;
  }
}

}  // namespace detail

/// Pretty-printed form that parses back to the same tree.
inline std::string to_string(const Node& n) {
  std::ostringstream os;
  detail::print(os, n);
  return os.str();
}

/// Parses without the periodicity check.
inline Node parse_syntax(const std::string& text) { return detail::Parser(text).parse(); }

/// Every variable must enter through sin/cos arguments whose linear part has
/// coefficients in 2 pi Z, so the expression is 1-periodic in each variable.
inline void check_periodic(const Node& n, int dim) {
  if (n.kind == Node::Kind::vector) {
    for (const auto& a : n.args) check_periodic(a, dim);
    return;
  }
  detail::Affine a = detail::affine(n, dim);
  if (!a.linear_free()) throw PeriodicityError("non-periodic use of a variable in '" + to_string(n) + "'");
}

inline Node parse_field_expression(const std::string& text, int dim = 3) {
  Node n = parse_syntax(text);
  check_periodic(n, dim);
  return n;
}

inline double evaluate(const Node& n, const Vec& x) {
  switch (n.kind) {
    case Node::Kind::number: return n.number;
    case Node::Kind::constant: return n.name == "pi" ? M_PI : golden;
    case Node::Kind::variable: return x[detail::variable_index(n.name)];
    case Node::Kind::negate: return -evaluate(n.args[0], x);
    case Node::Kind::add: return evaluate(n.args[0], x) + evaluate(n.args[1], x);
    case Node::Kind::subtract: return evaluate(n.args[0], x) - evaluate(n.args[1], x);
    case Node::Kind::multiply: return evaluate(n.args[0], x) * evaluate(n.args[1], x);
    case Node::Kind::divide: return evaluate(n.args[0], x) / evaluate(n.args[1], x);
    case Node::Kind::power: return std::pow(evaluate(n.args[0], x), n.number);
    case Node::Kind::call: {
      double a = evaluate(n.args[0], x);
      return n.name == "sin" ? std::sin(a) : n.name == "cos" ? std::cos(a) : std::exp(a);
    }
    case Node::Kind::vector: throw std::invalid_argument("evaluate: vector literal used as a scalar");
  }
  return 0.0;
}

/// Components of a vector literal; a scalar is a one-component vector.
inline std::vector<Node> components(const Node& n) {
  if (n.kind == Node::Kind::vector) return n.args;
  return {n};
}

}  // namespace tsec::expr
