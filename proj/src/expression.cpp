#include "chainrec/expression.hpp"

#include "chainrec/errors.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

namespace chainrec {

struct Expression::Node {
  enum class Op { constant, variable, neg, add, sub, mul, div, pow, call };
  enum class Fn { sin, cos, tan, exp, log, sqrt, abs, floor, atan };

  Op op = Op::constant;
  double value = 0.0;
  int var = 0;
  Fn fn = Fn::sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;

  double eval(const Eigen::VectorXd& x) const {
    switch (op) {
      case Op::constant: return value;
      case Op::variable: return x[var];
      case Op::neg: return -lhs->eval(x);
      case Op::add: return lhs->eval(x) + rhs->eval(x);
      case Op::sub: return lhs->eval(x) - rhs->eval(x);
      case Op::mul: return lhs->eval(x) * rhs->eval(x);
      case Op::div: return lhs->eval(x) / rhs->eval(x);
      case Op::pow: return std::pow(lhs->eval(x), rhs->eval(x));
      case Op::call: {
        const double a = lhs->eval(x);
        switch (fn) {
          case Fn::sin: return std::sin(a);
          case Fn::cos: return std::cos(a);
          case Fn::tan: return std::tan(a);
          case Fn::exp: return std::exp(a);
          case Fn::log: return std::log(a);
          case Fn::sqrt: return std::sqrt(a);
          case Fn::abs: return std::abs(a);
          case Fn::floor: return std::floor(a);
          case Fn::atan: return std::atan(a);
        }
      }
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

class Parser {
 public:
  Parser(std::string_view src, int dim) : src_(src), dim_(dim) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::config, "expression",
                what + " at offset " + std::to_string(pos_), std::string(src_));
  }

  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr binary(Node::Op op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  NodePtr expr() {
    NodePtr n = term();
    while (true) {
      if (accept('+')) n = binary(Node::Op::add, n, term());
      else if (accept('-')) n = binary(Node::Op::sub, n, term());
      else return n;
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    while (true) {
      if (accept('*')) n = binary(Node::Op::mul, n, unary());
      else if (accept('/')) n = binary(Node::Op::div, n, unary());
      else return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->op = Node::Op::neg;
      n->lhs = unary();
      return n;
    }
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return binary(Node::Op::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    if (accept('(')) {
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const std::string rest(src_.substr(pos_));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(rest, &used);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ += used;
    auto n = std::make_shared<Node>();
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name(src_.substr(start, pos_ - start));

    auto n = std::make_shared<Node>();
    if (name == "pi") {
      n->value = std::numbers::pi;
      return n;
    }
    if (name == "e") {
      n->value = std::numbers::e;
      return n;
    }
    int var = -1;
    if (name == "x") var = 0;
    else if (name == "y") var = 1;
    else if (name == "z") var = 2;
    else if (name.size() > 1 && name[0] == 'x' &&
             name.find_first_not_of("0123456789", 1) == std::string::npos)
      var = std::stoi(name.substr(1));
    if (var >= 0) {
      if (var >= dim_) fail("variable '" + name + "' exceeds dimension " + std::to_string(dim_));
      n->op = Node::Op::variable;
      n->var = var;
      return n;
    }

    static const std::pair<const char*, Node::Fn> kFunctions[] = {
        {"sin", Node::Fn::sin},   {"cos", Node::Fn::cos},   {"tan", Node::Fn::tan},
        {"exp", Node::Fn::exp},   {"log", Node::Fn::log},   {"sqrt", Node::Fn::sqrt},
        {"abs", Node::Fn::abs},   {"floor", Node::Fn::floor}, {"atan", Node::Fn::atan}};
    for (const auto& [fname, fn] : kFunctions) {
      if (name == fname) {
        if (!accept('(')) fail("expected '(' after " + name);
        n->op = Node::Op::call;
        n->fn = fn;
        n->lhs = expr();
        if (!accept(')')) fail("expected ')'");
        return n;
      }
    }
    fail("unknown identifier '" + name + "'");
  }

  std::string_view src_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(std::string_view source, int dim)
    : source_(source), root_(Parser(source, dim).parse()) {}

double Expression::operator()(const Eigen::VectorXd& x) const { return root_->eval(x); }

}  // namespace chainrec
