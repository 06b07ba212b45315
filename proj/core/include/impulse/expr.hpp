#pragma once

// Scalar arithmetic expressions over named variables, used for user-defined
// metrics, surfaces and stick rows in scenario files.
//
// Grammar (whitespace-insensitive):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | ident | ident '(' expr ')' | '(' expr ')'
//
// Functions: sin, cos, sqrt, abs, sign (sign(0) = 0; produced by
// differentiating abs).

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace impulse::expr {

enum class Op { Literal, Variable, Add, Sub, Mul, Div, Pow, Neg, Call };
enum class Function { Sin, Cos, Sqrt, Abs, Sign };

std::string_view to_string(Function f);

struct Node;

// Immutable expression tree handle. Cheap to copy; subtrees are shared.
class Expr {
 public:
  Expr();  // literal 0

  static Expr literal(double value);
  static Expr variable(std::string name);
  static Expr unary(Op op, Expr operand);
  static Expr binary(Op op, Expr lhs, Expr rhs);
  static Expr call(Function f, Expr argument);

  Op op() const;
  double value() const;             // Literal
  const std::string& name() const;  // Variable
  Function function() const;        // Call
  Expr lhs() const;                 // binary lhs, unary/call operand
  Expr rhs() const;                 // binary rhs

  bool is_literal(double v) const;
  std::set<std::string> variables() const;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Node {
  Op op;
  double value = 0.0;
  std::string name;
  Function function = Function::Sin;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

using Environment = std::map<std::string, double, std::less<>>;

// Throws ParseError (with 1-based column) on malformed input or unknown
// function names.
Expr parse(std::string_view text);

// Throws ErrorKind::Evaluation on unbound variables, division by zero, and
// non-finite results.
double evaluate(const Expr& e, const Environment& env);

// Symbolic derivative with constant folding. Powers need an exponent free of
// `var`.
Expr differentiate(const Expr& e, std::string_view var);

// Re-parseable text form; literals keep 17 significant digits.
std::string print(const Expr& e);

// Expression with variables resolved to slots for repeated evaluation.
class BoundExpr {
 public:
  // Unknown variable names throw ErrorKind::Evaluation.
  BoundExpr(const Expr& e, const std::vector<std::string>& slots);

  double operator()(std::span<const double> values) const;

 private:
  struct Instr {
    Op op;
    Function function;
    double value;
    int slot;
  };
  std::vector<Instr> program_;  // postfix
  std::size_t slots_ = 0;
};

}  // namespace impulse::expr
