#include "impulse/expr.hpp"

#include "impulse/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace impulse::expr {
namespace {

std::shared_ptr<const Node> make(Node n) { return std::make_shared<const Node>(std::move(n)); }

int precedence(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    default: return 5;
  }
}

double apply(Function f, double x) {
  switch (f) {
    case Function::Sin: return std::sin(x);
    case Function::Cos: return std::cos(x);
    case Function::Sqrt:
      if (x < 0.0) fail(ErrorKind::Evaluation, "sqrt of a negative number");
      return std::sqrt(x);
    case Function::Abs: return std::abs(x);
    case Function::Sign: return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
  }
  return 0.0;
}

double apply(Op op, double a, double b) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div:
      if (b == 0.0) fail(ErrorKind::Evaluation, "division by zero");
      return a / b;
    case Op::Pow: return std::pow(a, b);
    default: return 0.0;
  }
}

double checked(double v) {
  if (!std::isfinite(v)) fail(ErrorKind::Evaluation, "non-finite result");
  return v;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr run() {
    Expr e = expression();
    skip_space();
    if (pos_ < text_.size()) error("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void error(const std::string& message) const { throw ParseError(pos_ + 1, message); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expression() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary(Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = Expr::binary(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(Op::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = Expr::binary(Op::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return Expr::unary(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return Expr::binary(Op::Pow, base, unary());
    return base;
  }

  Expr primary() {
    skip_space();
    if (pos_ >= text_.size()) error("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = expression();
      if (!accept(')')) error("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      std::string ident(text_.substr(start, pos_ - start));
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        Function f = lookup(ident, start);
        ++pos_;
        Expr arg = expression();
        if (!accept(')')) error("expected ')'");
        return Expr::call(f, arg);
      }
      return Expr::variable(std::move(ident));
    }
    error("unexpected '" + std::string(1, c) + "'");
  }

  Function lookup(const std::string& ident, std::size_t start) const {
    if (ident == "sin") return Function::Sin;
    if (ident == "cos") return Function::Cos;
    if (ident == "sqrt") return Function::Sqrt;
    if (ident == "abs") return Function::Abs;
    if (ident == "sign") return Function::Sign;
    throw ParseError(start + 1, "unknown function '" + ident + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        digits();
      } else {
        pos_ = save;
      }
    }
    const std::string token(text_.substr(start, pos_ - start));
    if (token == ".") {
      pos_ = start;
      error("malformed number");
    }
    return Expr::literal(std::strtod(token.c_str(), nullptr));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// Constant-folding constructors used by differentiate.
Expr add(const Expr& a, const Expr& b) {
  if (a.is_literal(0.0)) return b;
  if (b.is_literal(0.0)) return a;
  if (a.op() == Op::Literal && b.op() == Op::Literal) return Expr::literal(a.value() + b.value());
  return Expr::binary(Op::Add, a, b);
}

Expr neg(const Expr& a) {
  if (a.op() == Op::Literal) return Expr::literal(-a.value());
  if (a.op() == Op::Neg) return a.lhs();
  return Expr::unary(Op::Neg, a);
}

Expr sub(const Expr& a, const Expr& b) {
  if (b.is_literal(0.0)) return a;
  if (a.is_literal(0.0)) return neg(b);
  if (a.op() == Op::Literal && b.op() == Op::Literal) return Expr::literal(a.value() - b.value());
  return Expr::binary(Op::Sub, a, b);
}

Expr mul(const Expr& a, const Expr& b) {
  if (a.is_literal(0.0) || b.is_literal(0.0)) return Expr::literal(0.0);
  if (a.is_literal(1.0)) return b;
  if (b.is_literal(1.0)) return a;
  if (a.op() == Op::Literal && b.op() == Op::Literal) return Expr::literal(a.value() * b.value());
  return Expr::binary(Op::Mul, a, b);
}

Expr div(const Expr& a, const Expr& b) {
  if (a.is_literal(0.0)) return Expr::literal(0.0);
  if (b.is_literal(1.0)) return a;
  return Expr::binary(Op::Div, a, b);
}

Expr pow(const Expr& a, const Expr& b) {
  if (b.is_literal(1.0)) return a;
  if (b.is_literal(0.0)) return Expr::literal(1.0);
  return Expr::binary(Op::Pow, a, b);
}

void collect(const Expr& e, std::set<std::string>& out) {
  switch (e.op()) {
    case Op::Literal: return;
    case Op::Variable: out.insert(e.name()); return;
    case Op::Neg:
    case Op::Call: collect(e.lhs(), out); return;
    default:
      collect(e.lhs(), out);
      collect(e.rhs(), out);
  }
}

void print_to(const Expr& e, std::string& out, int parent, bool right_side) {
  const int prec = precedence(e.op());
  switch (e.op()) {
    case Op::Literal: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", e.value());
      if (e.value() < 0.0 || std::signbit(e.value())) {
        out += '(';
        out += buf;
        out += ')';
      } else {
        out += buf;
      }
      return;
    }
    case Op::Variable: out += e.name(); return;
    case Op::Call:
      out += to_string(e.function());
      out += '(';
      print_to(e.lhs(), out, 0, false);
      out += ')';
      return;
    case Op::Neg: {
      const bool paren = parent > prec;
      if (paren) out += '(';
      out += '-';
      print_to(e.lhs(), out, prec, true);
      if (paren) out += ')';
      return;
    }
    default: break;
  }
  // Left-associative ops need parentheses on an equal-precedence right operand;
  // '^' needs them on an equal-precedence left operand.
  const bool paren = parent > prec || (parent == prec && (e.op() == Op::Pow ? !right_side : right_side));
  if (paren) out += '(';
  const char* sym = e.op() == Op::Add   ? " + "
                    : e.op() == Op::Sub ? " - "
                    : e.op() == Op::Mul ? " * "
                    : e.op() == Op::Div ? " / "
                                        : "^";
  print_to(e.lhs(), out, prec, false);
  out += sym;
  print_to(e.rhs(), out, prec, true);
  if (paren) out += ')';
}

}  // namespace

std::string_view to_string(Function f) {
  switch (f) {
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Sqrt: return "sqrt";
    case Function::Abs: return "abs";
    case Function::Sign: return "sign";
  }
  return "?";
}

Expr::Expr() : node_(make(Node{Op::Literal, 0.0, {}, {}, {}, {}})) {}

Expr Expr::literal(double value) { return Expr(make(Node{Op::Literal, value, {}, {}, {}, {}})); }

Expr Expr::variable(std::string name) {
  return Expr(make(Node{Op::Variable, 0.0, std::move(name), {}, {}, {}}));
}

Expr Expr::unary(Op op, Expr operand) {
  return Expr(make(Node{op, 0.0, {}, {}, std::move(operand.node_), {}}));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  return Expr(make(Node{op, 0.0, {}, {}, std::move(lhs.node_), std::move(rhs.node_)}));
}

Expr Expr::call(Function f, Expr argument) {
  return Expr(make(Node{Op::Call, 0.0, {}, f, std::move(argument.node_), {}}));
}

Op Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
Function Expr::function() const { return node_->function; }
Expr Expr::lhs() const { return Expr(node_->a); }
Expr Expr::rhs() const { return Expr(node_->b); }

bool Expr::is_literal(double v) const { return node_->op == Op::Literal && node_->value == v; }

std::set<std::string> Expr::variables() const {
  std::set<std::string> out;
  collect(*this, out);
  return out;
}

Expr parse(std::string_view text) { return Parser(text).run(); }

double evaluate(const Expr& e, const Environment& env) {
  switch (e.op()) {
    case Op::Literal: return e.value();
    case Op::Variable: {
      auto it = env.find(e.name());
      if (it == env.end()) fail(ErrorKind::Evaluation, "unbound variable '" + e.name() + "'");
      return it->second;
    }
    case Op::Neg: return -evaluate(e.lhs(), env);
    case Op::Call: return checked(apply(e.function(), evaluate(e.lhs(), env)));
    default: return checked(apply(e.op(), evaluate(e.lhs(), env), evaluate(e.rhs(), env)));
  }
}

Expr differentiate(const Expr& e, std::string_view var) {
  switch (e.op()) {
    case Op::Literal: return Expr::literal(0.0);
    case Op::Variable: return Expr::literal(e.name() == var ? 1.0 : 0.0);
    case Op::Neg: return neg(differentiate(e.lhs(), var));
    case Op::Add: return add(differentiate(e.lhs(), var), differentiate(e.rhs(), var));
    case Op::Sub: return sub(differentiate(e.lhs(), var), differentiate(e.rhs(), var));
    case Op::Mul: {
      const Expr u = e.lhs();
      const Expr v = e.rhs();
      return add(mul(differentiate(u, var), v), mul(u, differentiate(v, var)));
    }
    case Op::Div: {
      const Expr u = e.lhs();
      const Expr v = e.rhs();
      const Expr num = sub(mul(differentiate(u, var), v), mul(u, differentiate(v, var)));
      return div(num, pow(v, Expr::literal(2.0)));
    }
    case Op::Pow: {
      const Expr u = e.lhs();
      const Expr k = e.rhs();
      if (k.variables().contains(std::string(var))) {
        fail(ErrorKind::Evaluation, "unsupported construct: exponent depends on '" + std::string(var) + "'");
      }
      const Expr km1 = k.op() == Op::Literal ? Expr::literal(k.value() - 1.0) : sub(k, Expr::literal(1.0));
      return mul(mul(k, pow(u, km1)), differentiate(u, var));
    }
    case Op::Call: {
      const Expr u = e.lhs();
      const Expr du = differentiate(u, var);
      if (du.is_literal(0.0)) return du;
      switch (e.function()) {
        case Function::Sin: return mul(Expr::call(Function::Cos, u), du);
        case Function::Cos: return neg(mul(Expr::call(Function::Sin, u), du));
        case Function::Sqrt: return div(du, mul(Expr::literal(2.0), Expr::call(Function::Sqrt, u)));
        case Function::Abs: return mul(Expr::call(Function::Sign, u), du);
        case Function::Sign: return Expr::literal(0.0);
      }
    }
  }
  return Expr::literal(0.0);
}

std::string print(const Expr& e) {
  std::string out;
  print_to(e, out, 0, false);
  return out;
}

BoundExpr::BoundExpr(const Expr& e, const std::vector<std::string>& slots) : slots_(slots.size()) {
  auto emit = [&](auto&& self, const Expr& x) -> void {
    switch (x.op()) {
      case Op::Literal: program_.push_back({Op::Literal, Function::Sin, x.value(), -1}); return;
      case Op::Variable: {
        for (std::size_t i = 0; i < slots.size(); ++i) {
          if (slots[i] == x.name()) {
            program_.push_back({Op::Variable, Function::Sin, 0.0, static_cast<int>(i)});
            return;
          }
        }
        fail(ErrorKind::Evaluation, "unbound variable '" + x.name() + "'");
      }
      case Op::Neg:
      case Op::Call:
        self(self, x.lhs());
        program_.push_back({x.op(), x.function(), 0.0, -1});
        return;
      default:
        self(self, x.lhs());
        self(self, x.rhs());
        program_.push_back({x.op(), Function::Sin, 0.0, -1});
    }
  };
  emit(emit, e);
}

double BoundExpr::operator()(std::span<const double> values) const {
  if (values.size() != slots_) fail(ErrorKind::Contract, "wrong number of variable values");
  double stack[64] = {};
  std::vector<double> heap;
  double* sp = stack;
  if (program_.size() > 64) {
    heap.resize(program_.size());
    sp = heap.data();
  }
  std::size_t top = 0;
  for (const Instr& ins : program_) {
    switch (ins.op) {
      case Op::Literal: sp[top++] = ins.value; break;
      case Op::Variable: sp[top++] = values[static_cast<std::size_t>(ins.slot)]; break;
      case Op::Neg: sp[top - 1] = -sp[top - 1]; break;
      case Op::Call: sp[top - 1] = checked(apply(ins.function, sp[top - 1])); break;
      default:
        sp[top - 2] = checked(apply(ins.op, sp[top - 2], sp[top - 1]));
        --top;
    }
  }
  return sp[0];
}

}  // namespace impulse::expr
