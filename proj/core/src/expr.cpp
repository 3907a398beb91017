#include "diracspec/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <vector>

namespace dirac {
namespace {

enum class Op {
  Const, Var, Add, Sub, Mul, Div, Pow, Neg,
  Sin, Cos, Tan, Sinh, Cosh, Tanh, Exp, Log, Sqrt, Abs, Re, Im, Conj
};

struct Node {
  Op op;
  Cx value{};
  std::unique_ptr<Node> lhs, rhs;
};

Cx eval(const Node& n, double x) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return Cx(x, 0.0);
    case Op::Add: return eval(*n.lhs, x) + eval(*n.rhs, x);
    case Op::Sub: return eval(*n.lhs, x) - eval(*n.rhs, x);
    case Op::Mul: return eval(*n.lhs, x) * eval(*n.rhs, x);
    case Op::Div: return eval(*n.lhs, x) / eval(*n.rhs, x);
    case Op::Pow: return std::pow(eval(*n.lhs, x), eval(*n.rhs, x));
    case Op::Neg: return -eval(*n.lhs, x);
    case Op::Sin: return std::sin(eval(*n.lhs, x));
    case Op::Cos: return std::cos(eval(*n.lhs, x));
    case Op::Tan: return std::tan(eval(*n.lhs, x));
    case Op::Sinh: return std::sinh(eval(*n.lhs, x));
    case Op::Cosh: return std::cosh(eval(*n.lhs, x));
    case Op::Tanh: return std::tanh(eval(*n.lhs, x));
    case Op::Exp: return std::exp(eval(*n.lhs, x));
    case Op::Log: return std::log(eval(*n.lhs, x));
    case Op::Sqrt: return std::sqrt(eval(*n.lhs, x));
    case Op::Abs: return Cx(std::abs(eval(*n.lhs, x)), 0.0);
    case Op::Re: return Cx(eval(*n.lhs, x).real(), 0.0);
    case Op::Im: return Cx(eval(*n.lhs, x).imag(), 0.0);
    case Op::Conj: return std::conj(eval(*n.lhs, x));
  }
  return Cx{};
}

class Parser {
 public:
  explicit Parser(const std::string& src) : src_(src) {}

  std::unique_ptr<Node> parse() {
    auto e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  const std::string& src_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression \"" + src_ + "\": " + what + " at offset " +
                      std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::unique_ptr<Node> expr() {
    auto lhs = term();
    for (;;) {
      if (consume('+')) {
        auto n = std::make_unique<Node>();
        n->op = Op::Add;
        n->lhs = std::move(lhs);
        n->rhs = term();
        lhs = std::move(n);
      } else if (consume('-')) {
        auto n = std::make_unique<Node>();
        n->op = Op::Sub;
        n->lhs = std::move(lhs);
        n->rhs = term();
        lhs = std::move(n);
      } else {
        return lhs;
      }
    }
  }

  std::unique_ptr<Node> term() {
    auto lhs = unary();
    for (;;) {
      if (consume('*')) {
        auto n = std::make_unique<Node>();
        n->op = Op::Mul;
        n->lhs = std::move(lhs);
        n->rhs = unary();
        lhs = std::move(n);
      } else if (consume('/')) {
        auto n = std::make_unique<Node>();
        n->op = Op::Div;
        n->lhs = std::move(lhs);
        n->rhs = unary();
        lhs = std::move(n);
      } else {
        return lhs;
      }
    }
  }

  std::unique_ptr<Node> unary() {
    if (consume('-')) {
      auto n = std::make_unique<Node>();
      n->op = Op::Neg;
      n->lhs = unary();
      return n;
    }
    if (consume('+')) return unary();
    return power();
  }

  std::unique_ptr<Node> power() {
    auto base = primary();
    if (consume('^')) {
      auto n = std::make_unique<Node>();
      n->op = Op::Pow;
      n->lhs = std::move(base);
      n->rhs = unary();  // right associative, allows x^-2
      return n;
    }
    return base;
  }

  std::unique_ptr<Node> primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = expr();
      if (!consume(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return ident();
    fail("unexpected character");
  }

  std::unique_ptr<Node> number() {
    const char* begin = src_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<size_t>(end - begin);
    auto n = std::make_unique<Node>();
    n->op = Op::Const;
    n->value = Cx(v, 0.0);
    return n;
  }

  std::unique_ptr<Node> ident() {
    const size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name = src_.substr(start, pos_ - start);
    auto leaf = [&](Op op, Cx v = Cx{}) {
      auto n = std::make_unique<Node>();
      n->op = op;
      n->value = v;
      return n;
    };
    if (name == "x") return leaf(Op::Var);
    if (name == "i" || name == "j") return leaf(Op::Const, Cx(0.0, 1.0));
    if (name == "pi") return leaf(Op::Const, Cx(PI, 0.0));

    static const std::pair<const char*, Op> fns[] = {
        {"sin", Op::Sin},   {"cos", Op::Cos},   {"tan", Op::Tan},
        {"sinh", Op::Sinh}, {"cosh", Op::Cosh}, {"tanh", Op::Tanh},
        {"exp", Op::Exp},   {"log", Op::Log},   {"sqrt", Op::Sqrt},
        {"abs", Op::Abs},   {"re", Op::Re},     {"im", Op::Im},
        {"conj", Op::Conj}};
    for (const auto& [fname, op] : fns) {
      if (name == fname) {
        if (!consume('(')) fail("expected '(' after function name");
        auto n = std::make_unique<Node>();
        n->op = op;
        n->lhs = expr();
        if (!consume(')')) fail("missing ')'");
        return n;
      }
    }
    if (name == "pow") {
      if (!consume('(')) fail("expected '(' after pow");
      auto n = std::make_unique<Node>();
      n->op = Op::Pow;
      n->lhs = expr();
      if (!consume(',')) fail("pow needs two arguments");
      n->rhs = expr();
      if (!consume(')')) fail("missing ')'");
      return n;
    }
    fail("unknown identifier '" + name + "'");
  }
};

}  // namespace

std::function<Cx(double)> parse_expr(const std::string& src) {
  Parser p(src);
  std::shared_ptr<Node> root(p.parse().release());
  return [root](double x) { return eval(*root, x); };
}

}  // namespace dirac
