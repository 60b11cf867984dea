#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tnilm/error.hpp"
#include "tnilm/population.hpp"

namespace tnilm {

// Risk functions are written in a small expression language:
//
//   expr    := sum
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?              (right-associative)
//   primary := number | 'theta' '[' int ']'
//            | 'risk' '.' name | 'risk_src' '.' name
//            | 'dist' '(' ('i'|'k') ',' ('i'|'k') ',' int ')'
//            | 'ind' '(' expr cmp expr ')'      cmp := < <= == >= >
//            | function '(' expr (',' expr)* ')'
//            | '(' expr ')'
//
// `risk` refers to the subject individual i. `risk_src` and `dist` need a
// second individual k (the transmission source) and are only legal in pair
// context, i.e. for infectivity kernels. Parameter indices are 1-based.

enum class ExprContext { single, pair };

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& message, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Raised when an expression cannot produce a finite, non-negative rate.
class RiskEvalError : public InferenceError {
 public:
  using InferenceError::InferenceError;
};

// Built-in pure functions callable from expressions.
struct RiskFunctionInfo {
  std::string_view name;
  std::size_t min_arity;
  std::size_t max_arity;  // 0 = unbounded
  double (*apply)(std::span<const double> args);
};
std::span<const RiskFunctionInfo> risk_function_registry();

class RiskExpr {
 public:
  enum class Op : std::uint8_t {
    literal,
    param,
    covariate,
    source_covariate,
    distance,
    negate,
    add,
    sub,
    mul,
    div,
    pow,
    call,
    indicator,
  };
  enum class Cmp : std::uint8_t { lt, le, eq, ge, gt };

  struct Node {
    Op op = Op::literal;
    double value = 0.0;
    std::size_t index = 0;  // parameter (0-based), distance component (0-based), or function id
    bool reversed = false;  // dist(k, i, c)
    Cmp cmp = Cmp::lt;
    std::string name;       // covariate column
    std::vector<std::size_t> children;
  };

  ExprContext context() const { return context_; }
  std::size_t param_count() const { return param_count_; }
  const std::string& source_text() const { return source_; }

  // Canonical, fully parenthesized text that parses back to the same tree.
  std::string to_string() const;

  // Covariate columns referenced anywhere in the expression.
  std::vector<std::string> covariates() const;
  // Highest distance component referenced (1-based), 0 if none.
  std::size_t max_distance_component() const;

  double evaluate(std::span<const double> params, const Population& pop, std::size_t i,
                  std::optional<std::size_t> k = std::nullopt) const;

  friend bool operator==(const RiskExpr& a, const RiskExpr& b);

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t root() const { return root_; }

 private:
  friend class RiskExprParser;
  double eval_node(std::size_t idx, std::span<const double> params, const Population& pop,
                   std::size_t i, std::size_t k) const;
  void print_node(std::size_t idx, std::string& out) const;

  std::vector<Node> nodes_;
  std::size_t root_ = 0;
  ExprContext context_ = ExprContext::single;
  std::size_t param_count_ = 0;
  std::string source_;
};

RiskExpr parse_risk_expr(std::string_view text, ExprContext context);

// Evaluates a parsed expression for subject i (and source k in pair context).
// The result is a finite, non-negative rate; anything else raises RiskEvalError.
double eval_risk_expr(const RiskExpr& expr, std::span<const double> params, const Population& pop,
                      std::size_t i, std::optional<std::size_t> k = std::nullopt);

}  // namespace tnilm
