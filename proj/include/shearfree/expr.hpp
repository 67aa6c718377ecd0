#pragma once

// Arithmetic expressions for scenario files.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?        right-associative
//   primary := number | variable | function '(' expr ')' | '(' expr ')'
//
// Variables: u x y p s. Functions: sin cos tan tanh exp log sqrt abs.
// So "-x^2" is -(x^2) and "2^-x^2" is 2^(-(x^2)).

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "shearfree/error.hpp"

namespace shearfree::expr {

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& detail = {});

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class EvalError : public Error {
 public:
  EvalError(Span span, const std::string& what);
  Span span() const noexcept { return span_; }

 private:
  Span span_;
};

enum class Var : std::uint8_t { U, X, Y, P, S };
enum class Func : std::uint8_t { Sin, Cos, Tan, Tanh, Exp, Log, Sqrt, Abs };
enum class Op : std::uint8_t { Number, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };

struct Env {
  double u = 0.0, x = 0.0, y = 0.0, p = 0.0, s = 0.0;
};

class Expression {
 public:
  struct Node {
    Op op = Op::Number;
    double value = 0.0;
    Var var = Var::U;
    Func func = Func::Sin;
    int lhs = -1;
    int rhs = -1;
    Span span;
  };

  /// Throws SyntaxError with the byte offset and the set of expected tokens.
  static Expression parse(std::string_view source);

  /// Throws EvalError (domain errors and non-finite results) with the span
  /// of the offending subexpression.
  double eval(const Env& env) const;

  /// Minimal-parenthesis rendering; numbers in shortest round-trip form.
  std::string print() const;

  bool uses(Var v) const noexcept { return (used_ & (1u << static_cast<unsigned>(v))) != 0; }
  const std::string& source() const noexcept { return source_; }

  /// Structural equality of the trees (spans and source text ignored).
  friend bool operator==(const Expression& a, const Expression& b);

 private:
  double eval_node(int i, const Env& env) const;
  void print_node(int i, std::string& out) const;
  bool equal_node(int i, const Expression& other, int j) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  unsigned used_ = 0;
  std::string source_;

  friend class Parser;
};

std::string_view to_string(Var v);
std::string_view to_string(Func f);

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

}  // namespace shearfree::expr
