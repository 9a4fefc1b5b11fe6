#include "qgdd/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace qgdd {

namespace {

using Node = Expr::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Number;
  n->value = v;
  return n;
}

NodePtr make_node(Node::Kind kind, NodePtr lhs, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

struct FuncName {
  std::string_view name;
  Node::Func func;
};
constexpr std::array<FuncName, 5> kFunctions{{{"sin", Node::Func::Sin},
                                              {"cos", Node::Func::Cos},
                                              {"exp", Node::Func::Exp},
                                              {"sqrt", Node::Func::Sqrt},
                                              {"abs", Node::Func::Abs}}};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    NodePtr e = sum();
    skip_space();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ExprSyntaxError(msg, pos_); }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  char peek() {
    skip_space();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  NodePtr sum() {
    NodePtr lhs = product();
    for (;;) {
      const char c = peek();
      if (c != '+' && c != '-') return lhs;
      ++pos_;
      lhs = make_node(c == '+' ? Node::Kind::Add : Node::Kind::Sub, lhs, product());
    }
  }

  NodePtr product() {
    NodePtr lhs = unary();
    for (;;) {
      const char c = peek();
      if (c != '*' && c != '/') return lhs;
      ++pos_;
      lhs = make_node(c == '*' ? Node::Kind::Mul : Node::Kind::Div, lhs, unary());
    }
  }

  NodePtr unary() {
    if (peek() == '-') {
      ++pos_;
      return make_node(Node::Kind::Neg, unary());
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (peek() != '^') return base;
    ++pos_;
    bool negative = false;
    if (peek() == '-') {
      negative = true;
      ++pos_;
    }
    skip_space();
    const size_t start = pos_;
    int k = 0;
    auto [end, ec] = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), k);
    if (ec != std::errc()) fail("expected integer exponent");
    pos_ = static_cast<size_t>(end - src_.data());
    if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E')) {
      pos_ = start;
      fail("exponent must be an integer");
    }
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Pow;
    n->lhs = std::move(base);
    n->exponent = negative ? -k : k;
    if (peek() == '^') fail("chained '^' is ambiguous; use parentheses");
    return n;
  }

  NodePtr primary() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      NodePtr e = sum();
      if (peek() != ')') fail("expected ')'");
      ++pos_;
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    if (c == '\0') fail("unexpected end of input");
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    double v = 0.0;
    auto [end, ec] = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), v);
    if (ec != std::errc()) fail("malformed number");
    pos_ = static_cast<size_t>(end - src_.data());
    return make_number(v);
  }

  NodePtr identifier() {
    const size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "x") return make_node(Node::Kind::Variable, nullptr);
    if (name == "pi") return make_number(std::numbers::pi);
    for (const auto& f : kFunctions) {
      if (f.name != name) continue;
      if (peek() != '(') fail("expected '(' after " + std::string(name));
      ++pos_;
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Call;
      n->func = f.func;
      n->lhs = sum();
      if (peek() != ')') fail("expected ')'");
      ++pos_;
      return n;
    }
    pos_ = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  size_t pos_ = 0;
};

double eval_node(const Node& n, double x) {
  switch (n.kind) {
    case Node::Kind::Number: return n.value;
    case Node::Kind::Variable: return x;
    case Node::Kind::Neg: return -eval_node(*n.lhs, x);
    case Node::Kind::Add: return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
    case Node::Kind::Sub: return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
    case Node::Kind::Mul: return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
    case Node::Kind::Div: return eval_node(*n.lhs, x) / eval_node(*n.rhs, x);
    case Node::Kind::Pow: {
      // Repeated squaring keeps integer powers exact where the product is.
      const double base = eval_node(*n.lhs, x);
      unsigned k = static_cast<unsigned>(n.exponent < 0 ? -static_cast<long>(n.exponent) : n.exponent);
      double result = 1.0, b = base;
      while (k != 0) {
        if (k & 1u) result *= b;
        b *= b;
        k >>= 1u;
      }
      return n.exponent < 0 ? 1.0 / result : result;
    }
    case Node::Kind::Call: {
      const double a = eval_node(*n.lhs, x);
      switch (n.func) {
        case Node::Func::Sin: return std::sin(a);
        case Node::Func::Cos: return std::cos(a);
        case Node::Func::Exp: return std::exp(a);
        case Node::Func::Sqrt: return std::sqrt(a);
        case Node::Func::Abs: return std::abs(a);
      }
    }
  }
  return 0.0;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), end);
}

void print_node(const Node& n, std::string& out) {
  auto binary = [&](char op) {
    out += '(';
    print_node(*n.lhs, out);
    out += op;
    print_node(*n.rhs, out);
    out += ')';
  };
  switch (n.kind) {
    case Node::Kind::Number:
      // Literals from the parser are nonnegative; a negative value needs a unary minus.
      if (std::signbit(n.value)) {
        out += "(-" + format_number(-n.value) + ")";
      } else {
        out += format_number(n.value);
      }
      return;
    case Node::Kind::Variable: out += 'x'; return;
    case Node::Kind::Neg:
      out += "(-";
      print_node(*n.lhs, out);
      out += ')';
      return;
    case Node::Kind::Add: binary('+'); return;
    case Node::Kind::Sub: binary('-'); return;
    case Node::Kind::Mul: binary('*'); return;
    case Node::Kind::Div: binary('/'); return;
    case Node::Kind::Pow:
      out += '(';
      print_node(*n.lhs, out);
      out += '^';
      out += std::to_string(n.exponent);
      out += ')';
      return;
    case Node::Kind::Call:
      for (const auto& f : kFunctions)
        if (f.func == n.func) out += f.name;
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      return;
  }
}

bool node_is_constant(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Number: return true;
    case Node::Kind::Variable: return false;
    default: return (!n.lhs || node_is_constant(*n.lhs)) && (!n.rhs || node_is_constant(*n.rhs));
  }
}

}  // namespace

Expr::Expr() : root_(make_number(0.0)) {}

Expr Expr::constant(double value) { return Expr(make_number(value)); }

double Expr::eval(double x) const { return eval_node(*root_, x); }

std::string Expr::to_string() const {
  std::string out;
  print_node(*root_, out);
  return out;
}

bool Expr::is_constant() const { return node_is_constant(*root_); }

Expr parse_expr(std::string_view src) { return Expr(Parser(src).parse()); }

}  // namespace qgdd
