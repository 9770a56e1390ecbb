#include "mvbif/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "mvbif/errors.hpp"

namespace mvbif {

enum class Op { Num, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Abs, Sign };

struct Expression::Node {
  Op op;
  double value = 0.0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr num(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->op = Op::Num;
  n->value = v;
  return n;
}

bool is_num(const NodePtr& n, double v) { return n->op == Op::Num && n->value == v; }

// Light constant folding so derivative trees stay small.
NodePtr add(NodePtr a, NodePtr b) {
  if (is_num(a, 0)) return b;
  if (is_num(b, 0)) return a;
  if (a->op == Op::Num && b->op == Op::Num) return num(a->value + b->value);
  return make(Op::Add, a, b);
}
NodePtr sub(NodePtr a, NodePtr b) {
  if (is_num(b, 0)) return a;
  if (a->op == Op::Num && b->op == Op::Num) return num(a->value - b->value);
  if (is_num(a, 0)) return make(Op::Neg, b);
  return make(Op::Sub, a, b);
}
NodePtr mul(NodePtr a, NodePtr b) {
  if (is_num(a, 0) || is_num(b, 0)) return num(0);
  if (is_num(a, 1)) return b;
  if (is_num(b, 1)) return a;
  if (a->op == Op::Num && b->op == Op::Num) return num(a->value * b->value);
  return make(Op::Mul, a, b);
}
NodePtr div(NodePtr a, NodePtr b) {
  if (is_num(a, 0)) return num(0);
  if (is_num(b, 1)) return a;
  return make(Op::Div, a, b);
}
NodePtr neg(NodePtr a) {
  if (a->op == Op::Num) return num(-a->value);
  return make(Op::Neg, a);
}

double eval(const Expression::Node& n, double x) {
  switch (n.op) {
    case Op::Num: return n.value;
    case Op::Var: return x;
    case Op::Add: return eval(*n.a, x) + eval(*n.b, x);
    case Op::Sub: return eval(*n.a, x) - eval(*n.b, x);
    case Op::Mul: return eval(*n.a, x) * eval(*n.b, x);
    case Op::Div: return eval(*n.a, x) / eval(*n.b, x);
    case Op::Pow: {
      // integer exponents go through repeated multiplication so that
      // negative bases stay well defined
      double e = eval(*n.b, x);
      double base = eval(*n.a, x);
      if (n.b->op == Op::Num && e == std::round(e) && std::abs(e) <= 64) {
        int k = static_cast<int>(std::abs(e));
        double r = 1.0;
        for (int i = 0; i < k; ++i) r *= base;
        return e < 0 ? 1.0 / r : r;
      }
      return std::pow(base, e);
    }
    case Op::Neg: return -eval(*n.a, x);
    case Op::Sin: return std::sin(eval(*n.a, x));
    case Op::Cos: return std::cos(eval(*n.a, x));
    case Op::Exp: return std::exp(eval(*n.a, x));
    case Op::Abs: return std::abs(eval(*n.a, x));
    case Op::Sign: {
      double v = eval(*n.a, x);
      return (v > 0) - (v < 0);
    }
  }
  return 0.0;
}

NodePtr diff(const NodePtr& n) {
  switch (n->op) {
    case Op::Num: return num(0);
    case Op::Var: return num(1);
    case Op::Add: return add(diff(n->a), diff(n->b));
    case Op::Sub: return sub(diff(n->a), diff(n->b));
    case Op::Mul: return add(mul(diff(n->a), n->b), mul(n->a, diff(n->b)));
    case Op::Div:
      return div(sub(mul(diff(n->a), n->b), mul(n->a, diff(n->b))), mul(n->b, n->b));
    case Op::Pow: {
      if (n->b->op == Op::Num) {
        double e = n->b->value;
        return mul(mul(num(e), make(Op::Pow, n->a, num(e - 1))), diff(n->a));
      }
      // d(u^v) = u^v (v' log u + v u'/u); log is not in the grammar, so
      // the exponent must be constant.
      throw ParseError("derivative of a non-constant exponent is not supported", "^");
    }
    case Op::Neg: return neg(diff(n->a));
    case Op::Sin: return mul(make(Op::Cos, n->a), diff(n->a));
    case Op::Cos: return neg(mul(make(Op::Sin, n->a), diff(n->a)));
    case Op::Exp: return mul(n, diff(n->a));
    case Op::Abs: return mul(make(Op::Sign, n->a), diff(n->a));
    case Op::Sign: return num(0);
  }
  return num(0);
}

void print(const Expression::Node& n, std::ostream& os) {
  auto fn = [&](const char* name) {
    os << name << '(';
    print(*n.a, os);
    os << ')';
  };
  auto bin = [&](const char* op) {
    os << '(';
    print(*n.a, os);
    os << op;
    print(*n.b, os);
    os << ')';
  };
  switch (n.op) {
    case Op::Num: {
      std::ostringstream s;
      s.precision(17);
      s << n.value;
      os << s.str();
      break;
    }
    case Op::Var: os << 'x'; break;
    case Op::Add: bin("+"); break;
    case Op::Sub: bin("-"); break;
    case Op::Mul: bin("*"); break;
    case Op::Div: bin("/"); break;
    case Op::Pow: bin("^"); break;
    case Op::Neg: os << '-'; fn(""); break;
    case Op::Sin: fn("sin"); break;
    case Op::Cos: fn("cos"); break;
    case Op::Exp: fn("exp"); break;
    case Op::Abs: fn("abs"); break;
    case Op::Sign: fn("sign"); break;
  }
}

class Parser {
 public:
  Parser(std::string_view text, std::string_view var) : s_(text), var_(var) {}

  NodePtr parse() {
    NodePtr e = expression();
    skip();
    if (pos_ != s_.size()) fail("unexpected token '" + std::string(1, s_[pos_]) + "'",
                                std::string(1, s_[pos_]));
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, const std::string& token) {
    std::ostringstream os;
    os << "expression parse error at column " << pos_ << ": " << msg << " in \"" << s_ << "\"";
    throw ParseError(os.str(), token);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make(Op::Add, lhs, term());
      else if (accept('-')) lhs = make(Op::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Op::Mul, lhs, unary());
      else if (accept('/')) lhs = make(Op::Div, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Op::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression", "");
    char c = s_[pos_];
    if (accept('(')) {
      NodePtr e = expression();
      if (!accept(')')) fail("expected ')'", ")");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      std::string id(s_.substr(start, pos_ - start));
      if (id == var_) return make(Op::Var);
      Op op;
      if (id == "sin") op = Op::Sin;
      else if (id == "cos") op = Op::Cos;
      else if (id == "exp") op = Op::Exp;
      else if (id == "abs") op = Op::Abs;
      else {
        pos_ = start;
        fail("unknown identifier '" + id + "'", id);
      }
      if (!accept('(')) fail("expected '(' after " + id, id);
      NodePtr arg = expression();
      if (!accept(')')) fail("expected ')'", ")");
      return make(op, arg);
    }
    fail("unexpected token '" + std::string(1, c) + "'", std::string(1, c));
  }

  NodePtr number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
      ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    std::string tok(s_.substr(start, pos_ - start));
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) fail("malformed number '" + tok + "'", tok);
      return num(v);
    } catch (const std::logic_error&) {
      fail("malformed number '" + tok + "'", tok);
    }
  }

  std::string_view s_;
  std::string_view var_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text, std::string_view variable) {
  return Expression(Parser(text, variable).parse());
}

Expression Expression::constant(double c) { return Expression(num(c)); }

double Expression::operator()(double x) const { return root_ ? eval(*root_, x) : 0.0; }

Expression Expression::derivative() const {
  if (!root_) return constant(0.0);
  return Expression(diff(root_));
}

std::string Expression::to_string() const {
  if (!root_) return "0";
  std::ostringstream os;
  print(*root_, os);
  return os.str();
}

}  // namespace mvbif
