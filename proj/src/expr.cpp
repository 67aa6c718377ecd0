#include "shearfree/expr.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace shearfree::expr {
namespace {

constexpr std::array<std::string_view, 5> kVarNames{"u", "x", "y", "p", "s"};
constexpr std::array<std::string_view, 8> kFuncNames{"sin", "cos", "tan", "tanh", "exp", "log", "sqrt", "abs"};

const std::vector<std::string> kOperand{"number", "variable", "function", "'('", "'-'"};

std::string syntax_message(std::size_t offset, const std::vector<std::string>& expected, const std::string& detail) {
  std::ostringstream os;
  os << "syntax error at offset " << offset << ": expected ";
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i > 0) os << (i + 1 == expected.size() ? " or " : ", ");
    os << expected[i];
  }
  if (!detail.empty()) os << " (" << detail << ")";
  return os.str();
}

// Binding strength used for printing: + - < * / < unary - < ^ < atoms.
int precedence(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Negate:
      return 3;
    case Op::Pow:
      return 4;
    default:
      return 5;
  }
}

}  // namespace

SyntaxError::SyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& detail)
    : Error(ErrorKind::SyntaxError, syntax_message(offset, expected, detail)),
      offset_(offset),
      expected_(std::move(expected)) {}

EvalError::EvalError(Span span, const std::string& what) : Error(ErrorKind::EvalError, what), span_(span) {}

std::string_view to_string(Var v) { return kVarNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Func f) { return kFuncNames[static_cast<std::size_t>(f)]; }

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) { e_.source_ = std::string(src); }

  Expression run() {
    e_.root_ = parse_expr();
    skip_space();
    if (pos_ < src_.size()) {
      throw SyntaxError(pos_, {"operator", "end of input"}, "unexpected '" + std::string(1, src_[pos_]) + "'");
    }
    return std::move(e_);
  }

 private:
  void skip_space() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int add(Expression::Node n) {
    e_.nodes_.push_back(n);
    return static_cast<int>(e_.nodes_.size() - 1);
  }

  int binary(Op op, int lhs, int rhs) {
    Expression::Node n;
    n.op = op;
    n.lhs = lhs;
    n.rhs = rhs;
    n.span = {e_.nodes_[lhs].span.begin, e_.nodes_[rhs].span.end};
    return add(n);
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (accept('+')) lhs = binary(Op::Add, lhs, parse_term());
      else if (accept('-')) lhs = binary(Op::Sub, lhs, parse_term());
      else return lhs;
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = binary(Op::Mul, lhs, parse_unary());
      else if (accept('/')) lhs = binary(Op::Div, lhs, parse_unary());
      else return lhs;
    }
  }

  int parse_unary() {
    skip_space();
    const std::size_t start = pos_;
    if (++depth_ > kMaxDepth) throw SyntaxError(start, kOperand, "nesting too deep");
    struct Leave {
      int& d;
      ~Leave() { --d; }
    } leave{depth_};
    if (accept('-')) {
      const int operand = parse_unary();
      Expression::Node n;
      n.op = Op::Negate;
      n.lhs = operand;
      n.span = {start, e_.nodes_[operand].span.end};
      return add(n);
    }
    return parse_power();
  }

  int parse_power() {
    const int base = parse_primary();
    if (accept('^')) return binary(Op::Pow, base, parse_unary());
    return base;
  }

  int parse_primary() {
    skip_space();
    const std::size_t start = pos_;
    if (pos_ >= src_.size()) throw SyntaxError(pos_, kOperand, "unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = parse_expr();
      if (!accept(')')) throw SyntaxError(at_token(), {"')'"});
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      const std::string_view name = src_.substr(start, pos_ - start);
      for (std::size_t i = 0; i < kVarNames.size(); ++i) {
        if (name != kVarNames[i]) continue;
        Expression::Node n;
        n.op = Op::Variable;
        n.var = static_cast<Var>(i);
        n.span = {start, pos_};
        e_.used_ |= 1u << i;
        return add(n);
      }
      for (std::size_t i = 0; i < kFuncNames.size(); ++i) {
        if (name != kFuncNames[i]) continue;
        if (!accept('(')) throw SyntaxError(at_token(), {"'('"}, "after function " + std::string(name));
        const int arg = parse_expr();
        if (!accept(')')) throw SyntaxError(at_token(), {"')'"});
        Expression::Node n;
        n.op = Op::Call;
        n.func = static_cast<Func>(i);
        n.lhs = arg;
        n.span = {start, pos_};
        return add(n);
      }
      throw SyntaxError(start, {"variable", "function"}, "unknown name '" + std::string(name) + "'");
    }
    throw SyntaxError(start, kOperand, "unexpected '" + std::string(1, c) + "'");
  }

  int parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      const std::size_t from = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return pos_ - from;
    };
    std::size_t count = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) throw SyntaxError(start, {"digit"});
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw SyntaxError(pos_, {"exponent digits"});
    }
    double value = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) {
      throw SyntaxError(start, {"finite number"}, "literal out of range");
    }
    Expression::Node n;
    n.op = Op::Number;
    n.value = value;
    n.span = {start, pos_};
    return add(n);
  }

  std::size_t at_token() {
    skip_space();
    return pos_;
  }

  static constexpr int kMaxDepth = 200;

  std::string_view src_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  Expression e_;
};

Expression Expression::parse(std::string_view source) { return Parser(source).run(); }

double Expression::eval(const Env& env) const { return eval_node(root_, env); }

double Expression::eval_node(int i, const Env& env) const {
  const Node& n = nodes_[static_cast<std::size_t>(i)];
  auto fail = [&](const std::string& what) -> double {
    throw EvalError(n.span, what + " in '" + source_.substr(n.span.begin, n.span.end - n.span.begin) + "' at [" +
                                std::to_string(n.span.begin) + ", " + std::to_string(n.span.end) + ")");
  };
  double r = 0.0;
  switch (n.op) {
    case Op::Number:
      return n.value;
    case Op::Variable:
      switch (n.var) {
        case Var::U: return env.u;
        case Var::X: return env.x;
        case Var::Y: return env.y;
        case Var::P: return env.p;
        case Var::S: return env.s;
      }
      return 0.0;
    case Op::Negate:
      return -eval_node(n.lhs, env);
    case Op::Add:
      r = eval_node(n.lhs, env) + eval_node(n.rhs, env);
      break;
    case Op::Sub:
      r = eval_node(n.lhs, env) - eval_node(n.rhs, env);
      break;
    case Op::Mul:
      r = eval_node(n.lhs, env) * eval_node(n.rhs, env);
      break;
    case Op::Div: {
      const double a = eval_node(n.lhs, env), b = eval_node(n.rhs, env);
      if (b == 0.0) return fail("division by zero");
      r = a / b;
      break;
    }
    case Op::Pow: {
      const double a = eval_node(n.lhs, env), b = eval_node(n.rhs, env);
      if (a < 0.0 && b != std::trunc(b)) return fail("negative base with fractional exponent");
      if (a == 0.0 && b < 0.0) return fail("zero to a negative power");
      r = std::pow(a, b);
      break;
    }
    case Op::Call: {
      const double a = eval_node(n.lhs, env);
      switch (n.func) {
        case Func::Sin: r = std::sin(a); break;
        case Func::Cos: r = std::cos(a); break;
        case Func::Tan: r = std::tan(a); break;
        case Func::Tanh: r = std::tanh(a); break;
        case Func::Exp: r = std::exp(a); break;
        case Func::Log:
          if (!(a > 0.0)) return fail("log of a non-positive value");
          r = std::log(a);
          break;
        case Func::Sqrt:
          if (a < 0.0) return fail("sqrt of a negative value");
          r = std::sqrt(a);
          break;
        case Func::Abs: r = std::abs(a); break;
      }
      break;
    }
  }
  if (!std::isfinite(r)) return fail("non-finite result");
  return r;
}

std::string Expression::print() const {
  std::string out;
  print_node(root_, out);
  return out;
}

void Expression::print_node(int i, std::string& out) const {
  const Node& n = nodes_[static_cast<std::size_t>(i)];
  auto child = [&](int c, bool parens) {
    if (parens) out += '(';
    print_node(c, out);
    if (parens) out += ')';
  };
  auto prec_of = [&](int c) { return precedence(nodes_[static_cast<std::size_t>(c)].op); };
  switch (n.op) {
    case Op::Number:
      out += format_double(n.value);
      return;
    case Op::Variable:
      out += to_string(n.var);
      return;
    case Op::Negate:
      out += '-';
      child(n.lhs, prec_of(n.lhs) < 3);
      return;
    case Op::Call:
      out += to_string(n.func);
      child(n.lhs, true);
      return;
    case Op::Pow:
      child(n.lhs, prec_of(n.lhs) <= 4);
      out += '^';
      child(n.rhs, prec_of(n.rhs) < 3);
      return;
    default: {
      const int p = precedence(n.op);
      child(n.lhs, prec_of(n.lhs) < p);
      out += n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : n.op == Op::Mul ? " * " : " / ";
      child(n.rhs, prec_of(n.rhs) <= p);
      return;
    }
  }
}

bool Expression::equal_node(int i, const Expression& other, int j) const {
  const Node& a = nodes_[static_cast<std::size_t>(i)];
  const Node& b = other.nodes_[static_cast<std::size_t>(j)];
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::Number:
      return std::bit_cast<std::uint64_t>(a.value) == std::bit_cast<std::uint64_t>(b.value);
    case Op::Variable:
      return a.var == b.var;
    case Op::Call:
      return a.func == b.func && equal_node(a.lhs, other, b.lhs);
    case Op::Negate:
      return equal_node(a.lhs, other, b.lhs);
    default:
      return equal_node(a.lhs, other, b.lhs) && equal_node(a.rhs, other, b.rhs);
  }
}

bool operator==(const Expression& a, const Expression& b) {
  if (a.root_ < 0 || b.root_ < 0) return a.root_ == b.root_;
  return a.equal_node(a.root_, b, b.root_);
}

}  // namespace shearfree::expr
