#include "tnilm/riskdsl.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>

namespace tnilm {

ParseError::ParseError(const std::string& message, std::size_t offset)
    : ValidationError(fmt::format("{} (at byte {})", message, offset)), offset_(offset) {}

namespace {

double fn_exp(std::span<const double> a) { return std::exp(a[0]); }

double fn_log(std::span<const double> a) {
  if (!(a[0] > 0.0)) {
    throw RiskEvalError(fmt::format("log of non-positive argument {}", a[0]));
  }
  return std::log(a[0]);
}

double fn_min(std::span<const double> a) { return *std::min_element(a.begin(), a.end()); }
double fn_max(std::span<const double> a) { return *std::max_element(a.begin(), a.end()); }

constexpr std::array<RiskFunctionInfo, 4> kFunctions{{
    {"exp", 1, 1, &fn_exp},
    {"log", 1, 1, &fn_log},
    {"min", 2, 0, &fn_min},
    {"max", 2, 0, &fn_max},
}};

enum class Tok { number, ident, punct, end };

struct Token {
  Tok kind = Tok::end;
  std::string_view text;
  double number = 0.0;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    current_ = Token{};
    current_.offset = pos_;
    if (pos_ >= text_.size()) {
      current_.kind = Tok::end;
      return;
    }
    const char c = text_[pos_];
    const bool leading_dot = c == '.' && pos_ + 1 < text_.size() &&
                             std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]));
    if (std::isdigit(static_cast<unsigned char>(c)) || leading_dot) {
      const char* first = text_.data() + pos_;
      const char* last = text_.data() + text_.size();
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc{} || ptr == first) {
        throw ParseError("malformed number", pos_);
      }
      current_.kind = Tok::number;
      current_.number = value;
      current_.text = text_.substr(pos_, static_cast<std::size_t>(ptr - first));
      pos_ += current_.text.size();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) {
        ++end;
      }
      current_.kind = Tok::ident;
      current_.text = text_.substr(pos_, end - pos_);
      pos_ = end;
      return;
    }
    static constexpr std::array<std::string_view, 3> two_char{"<=", ">=", "=="};
    for (const auto op : two_char) {
      if (text_.substr(pos_, 2) == op) {
        current_.kind = Tok::punct;
        current_.text = text_.substr(pos_, 2);
        pos_ += 2;
        return;
      }
    }
    static constexpr std::string_view single = "()[],.+-*/^<>";
    if (single.find(c) != std::string_view::npos) {
      current_.kind = Tok::punct;
      current_.text = text_.substr(pos_, 1);
      ++pos_;
      return;
    }
    throw ParseError(fmt::format("unexpected character '{}'", c), pos_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Token current_;
};

}  // namespace

std::span<const RiskFunctionInfo> risk_function_registry() { return kFunctions; }

class RiskExprParser {
 public:
  RiskExprParser(std::string_view text, ExprContext context) : lexer_(text), context_(context) {
    expr_.context_ = context;
    expr_.source_ = std::string(text);
  }

  RiskExpr run() {
    if (lexer_.peek().kind == Tok::end) {
      throw ParseError("empty expression", 0);
    }
    expr_.root_ = parse_sum();
    if (lexer_.peek().kind != Tok::end) {
      throw ParseError(fmt::format("unexpected '{}'", lexer_.peek().text), lexer_.peek().offset);
    }
    finish_params();
    return std::move(expr_);
  }

 private:
  using Op = RiskExpr::Op;

  std::size_t add(RiskExpr::Node node) {
    expr_.nodes_.push_back(std::move(node));
    return expr_.nodes_.size() - 1;
  }

  std::size_t binary(Op op, std::size_t lhs, std::size_t rhs) {
    RiskExpr::Node n;
    n.op = op;
    n.children = {lhs, rhs};
    return add(std::move(n));
  }

  bool accept(std::string_view punct) {
    const auto& t = lexer_.peek();
    if (t.kind == Tok::punct && t.text == punct) {
      lexer_.take();
      return true;
    }
    return false;
  }

  void expect(std::string_view punct) {
    const auto& t = lexer_.peek();
    if (!accept(punct)) {
      throw ParseError(fmt::format("expected '{}' but found '{}'", punct,
                                   t.kind == Tok::end ? std::string_view("end of input") : t.text),
                       t.offset);
    }
  }

  std::size_t expect_index(std::string_view what) {
    const auto t = lexer_.take();
    if (t.kind != Tok::number || t.number < 1.0 || t.number != std::floor(t.number) ||
        t.text.find_first_of(".eE") != std::string_view::npos) {
      throw ParseError(fmt::format("{} must be a positive integer", what), t.offset);
    }
    return static_cast<std::size_t>(t.number);
  }

  std::size_t parse_sum() {
    std::size_t lhs = parse_product();
    while (true) {
      if (accept("+")) {
        lhs = binary(Op::add, lhs, parse_product());
      } else if (accept("-")) {
        lhs = binary(Op::sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  std::size_t parse_product() {
    std::size_t lhs = parse_unary();
    while (true) {
      if (accept("*")) {
        lhs = binary(Op::mul, lhs, parse_unary());
      } else if (accept("/")) {
        lhs = binary(Op::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  std::size_t parse_unary() {
    if (accept("-")) {
      RiskExpr::Node n;
      n.op = Op::negate;
      n.children = {parse_unary()};
      return add(std::move(n));
    }
    return parse_power();
  }

  std::size_t parse_power() {
    const std::size_t base = parse_primary();
    if (accept("^")) {
      return binary(Op::pow, base, parse_unary());
    }
    return base;
  }

  void require_pair(const Token& t) {
    if (context_ != ExprContext::pair) {
      throw ParseError(fmt::format("'{}' needs a source individual and is only allowed in an "
                                   "infectivity kernel",
                                   t.text),
                       t.offset);
    }
  }

  std::size_t parse_primary() {
    const Token t = lexer_.take();
    if (t.kind == Tok::number) {
      RiskExpr::Node n;
      n.op = Op::literal;
      n.value = t.number;
      return add(std::move(n));
    }
    if (t.kind == Tok::punct && t.text == "(") {
      const std::size_t inner = parse_sum();
      expect(")");
      return inner;
    }
    if (t.kind != Tok::ident) {
      throw ParseError(fmt::format("unexpected '{}'",
                                   t.kind == Tok::end ? std::string_view("end of input") : t.text),
                       t.offset);
    }
    if (t.text == "theta") {
      expect("[");
      const std::size_t j = expect_index("parameter index");
      expect("]");
      RiskExpr::Node n;
      n.op = Op::param;
      n.index = j - 1;
      used_params_.push_back(j - 1);
      return add(std::move(n));
    }
    if (t.text == "risk" || t.text == "risk_src") {
      if (t.text == "risk_src") require_pair(t);
      expect(".");
      const Token name = lexer_.take();
      if (name.kind != Tok::ident) {
        throw ParseError("expected covariate name after '.'", name.offset);
      }
      RiskExpr::Node n;
      n.op = t.text == "risk" ? Op::covariate : Op::source_covariate;
      n.name = std::string(name.text);
      return add(std::move(n));
    }
    if (t.text == "dist") {
      require_pair(t);
      expect("(");
      const Token a = lexer_.take();
      expect(",");
      const Token b = lexer_.take();
      expect(",");
      const std::size_t c = expect_index("distance component");
      expect(")");
      const bool ik = a.text == "i" && b.text == "k";
      const bool ki = a.text == "k" && b.text == "i";
      if (!ik && !ki) {
        throw ParseError("dist() takes the individual names i and k", a.offset);
      }
      RiskExpr::Node n;
      n.op = Op::distance;
      n.index = c - 1;
      n.reversed = ki;
      return add(std::move(n));
    }
    if (t.text == "ind") {
      expect("(");
      const std::size_t lhs = parse_sum();
      const Token cmp = lexer_.take();
      RiskExpr::Cmp which{};
      if (cmp.kind == Tok::punct && cmp.text == "<") which = RiskExpr::Cmp::lt;
      else if (cmp.kind == Tok::punct && cmp.text == "<=") which = RiskExpr::Cmp::le;
      else if (cmp.kind == Tok::punct && cmp.text == "==") which = RiskExpr::Cmp::eq;
      else if (cmp.kind == Tok::punct && cmp.text == ">=") which = RiskExpr::Cmp::ge;
      else if (cmp.kind == Tok::punct && cmp.text == ">") which = RiskExpr::Cmp::gt;
      else throw ParseError("ind() expects a comparison", cmp.offset);
      const std::size_t rhs = parse_sum();
      expect(")");
      RiskExpr::Node n;
      n.op = Op::indicator;
      n.cmp = which;
      n.children = {lhs, rhs};
      return add(std::move(n));
    }
    const auto fn = std::find_if(kFunctions.begin(), kFunctions.end(),
                                 [&](const auto& f) { return f.name == t.text; });
    if (fn == kFunctions.end()) {
      if (lexer_.peek().kind == Tok::punct && lexer_.peek().text == "(") {
        throw ParseError(fmt::format("unknown function '{}'", t.text), t.offset);
      }
      throw ParseError(fmt::format("unknown name '{}'", t.text), t.offset);
    }
    expect("(");
    RiskExpr::Node n;
    n.op = Op::call;
    n.index = static_cast<std::size_t>(fn - kFunctions.begin());
    n.children.push_back(parse_sum());
    while (accept(",")) {
      n.children.push_back(parse_sum());
    }
    expect(")");
    if (n.children.size() < fn->min_arity || (fn->max_arity != 0 && n.children.size() > fn->max_arity)) {
      throw ParseError(fmt::format("wrong number of arguments to {}()", fn->name), t.offset);
    }
    return add(std::move(n));
  }

  void finish_params() {
    std::sort(used_params_.begin(), used_params_.end());
    used_params_.erase(std::unique(used_params_.begin(), used_params_.end()), used_params_.end());
    for (std::size_t j = 0; j < used_params_.size(); ++j) {
      if (used_params_[j] != j) {
        throw ParseError(fmt::format("parameter indices must be contiguous from 1; theta[{}] is "
                                     "never used",
                                     j + 1),
                         0);
      }
    }
    expr_.param_count_ = used_params_.size();
  }

  Lexer lexer_;
  ExprContext context_;
  RiskExpr expr_;
  std::vector<std::size_t> used_params_;
};

RiskExpr parse_risk_expr(std::string_view text, ExprContext context) {
  return RiskExprParser(text, context).run();
}

double RiskExpr::eval_node(std::size_t idx, std::span<const double> params, const Population& pop,
                           std::size_t i, std::size_t k) const {
  const Node& n = nodes_[idx];
  switch (n.op) {
    case Op::literal:
      return n.value;
    case Op::param:
      return params[n.index];
    case Op::covariate:
    case Op::source_covariate: {
      const auto col = pop.column_index(n.name);
      if (!col) {
        throw RiskEvalError(fmt::format("population has no risk column '{}'", n.name));
      }
      return pop.risk(n.op == Op::covariate ? i : k, *col);
    }
    case Op::distance:
      if (n.index >= pop.distance_dims()) {
        throw RiskEvalError(fmt::format("dist component {} requested but population has {}",
                                        n.index + 1, pop.distance_dims()));
      }
      return n.reversed ? pop.distance_unchecked(k, i, n.index)
                        : pop.distance_unchecked(i, k, n.index);
    case Op::negate:
      return -eval_node(n.children[0], params, pop, i, k);
    case Op::add:
      return eval_node(n.children[0], params, pop, i, k) + eval_node(n.children[1], params, pop, i, k);
    case Op::sub:
      return eval_node(n.children[0], params, pop, i, k) - eval_node(n.children[1], params, pop, i, k);
    case Op::mul:
      return eval_node(n.children[0], params, pop, i, k) * eval_node(n.children[1], params, pop, i, k);
    case Op::div:
      return eval_node(n.children[0], params, pop, i, k) / eval_node(n.children[1], params, pop, i, k);
    case Op::pow: {
      const double base = eval_node(n.children[0], params, pop, i, k);
      const double exponent = eval_node(n.children[1], params, pop, i, k);
      if (exponent == 0.0 && (base == 0.0 || std::isinf(base))) {
        throw RiskEvalError(fmt::format("indeterminate power {}^0", base));
      }
      return std::pow(base, exponent);
    }
    case Op::call: {
      std::array<double, 8> small{};
      std::vector<double> large;
      std::span<double> args;
      if (n.children.size() <= small.size()) {
        args = std::span<double>(small.data(), n.children.size());
      } else {
        large.resize(n.children.size());
        args = large;
      }
      for (std::size_t c = 0; c < n.children.size(); ++c) {
        args[c] = eval_node(n.children[c], params, pop, i, k);
      }
      return kFunctions[n.index].apply(args);
    }
    case Op::indicator: {
      const double a = eval_node(n.children[0], params, pop, i, k);
      const double b = eval_node(n.children[1], params, pop, i, k);
      bool r = false;
      switch (n.cmp) {
        case Cmp::lt: r = a < b; break;
        case Cmp::le: r = a <= b; break;
        case Cmp::eq: r = a == b; break;
        case Cmp::ge: r = a >= b; break;
        case Cmp::gt: r = a > b; break;
      }
      return r ? 1.0 : 0.0;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double RiskExpr::evaluate(std::span<const double> params, const Population& pop, std::size_t i,
                          std::optional<std::size_t> k) const {
  if (params.size() != param_count_) {
    throw RiskEvalError(fmt::format("expression '{}' takes {} parameters, got {}", source_,
                                    param_count_, params.size()));
  }
  if ((context_ == ExprContext::pair) != k.has_value()) {
    throw RiskEvalError(fmt::format("expression '{}' evaluated with wrong arity", source_));
  }
  if (i >= pop.size() || (k && *k >= pop.size())) {
    throw RiskEvalError("individual index out of range");
  }
  const double value = eval_node(root_, params, pop, i, k.value_or(0));
  if (std::isnan(value)) {
    throw RiskEvalError(fmt::format("'{}' evaluated to NaN for individual {}", source_, i + 1));
  }
  if (std::isinf(value)) {
    throw RiskEvalError(fmt::format("'{}' evaluated to an infinite rate for individual {}{}",
                                    source_, i + 1,
                                    k ? fmt::format(" and source {}", *k + 1) : std::string{}));
  }
  if (value < 0.0) {
    throw RiskEvalError(fmt::format("'{}' evaluated to negative rate {} for individual {}",
                                    source_, value, i + 1));
  }
  return value;
}

double eval_risk_expr(const RiskExpr& expr, std::span<const double> params, const Population& pop,
                      std::size_t i, std::optional<std::size_t> k) {
  return expr.evaluate(params, pop, i, k);
}

void RiskExpr::print_node(std::size_t idx, std::string& out) const {
  const Node& n = nodes_[idx];
  auto bin = [&](std::string_view op) {
    out += '(';
    print_node(n.children[0], out);
    out += ' ';
    out += op;
    out += ' ';
    print_node(n.children[1], out);
    out += ')';
  };
  switch (n.op) {
    case Op::literal:
      out += fmt::format("{}", n.value);
      break;
    case Op::param:
      out += fmt::format("theta[{}]", n.index + 1);
      break;
    case Op::covariate:
      out += "risk." + n.name;
      break;
    case Op::source_covariate:
      out += "risk_src." + n.name;
      break;
    case Op::distance:
      out += fmt::format("dist({},{},{})", n.reversed ? "k" : "i", n.reversed ? "i" : "k",
                         n.index + 1);
      break;
    case Op::negate:
      out += "(-";
      print_node(n.children[0], out);
      out += ')';
      break;
    case Op::add: bin("+"); break;
    case Op::sub: bin("-"); break;
    case Op::mul: bin("*"); break;
    case Op::div: bin("/"); break;
    case Op::pow: bin("^"); break;
    case Op::call:
      out += kFunctions[n.index].name;
      out += '(';
      for (std::size_t c = 0; c < n.children.size(); ++c) {
        if (c) out += ", ";
        print_node(n.children[c], out);
      }
      out += ')';
      break;
    case Op::indicator: {
      static constexpr std::array<std::string_view, 5> names{"<", "<=", "==", ">=", ">"};
      out += "ind(";
      print_node(n.children[0], out);
      out += ' ';
      out += names[static_cast<std::size_t>(n.cmp)];
      out += ' ';
      print_node(n.children[1], out);
      out += ')';
      break;
    }
  }
}

std::string RiskExpr::to_string() const {
  std::string out;
  print_node(root_, out);
  return out;
}

std::vector<std::string> RiskExpr::covariates() const {
  std::vector<std::string> names;
  for (const auto& n : nodes_) {
    if ((n.op == Op::covariate || n.op == Op::source_covariate) &&
        std::find(names.begin(), names.end(), n.name) == names.end()) {
      names.push_back(n.name);
    }
  }
  return names;
}

std::size_t RiskExpr::max_distance_component() const {
  std::size_t m = 0;
  for (const auto& n : nodes_) {
    if (n.op == Op::distance) m = std::max(m, n.index + 1);
  }
  return m;
}

bool operator==(const RiskExpr& a, const RiskExpr& b) {
  if (a.context_ != b.context_) return false;
  std::function<bool(std::size_t, std::size_t)> same = [&](std::size_t x, std::size_t y) {
    const auto& p = a.nodes_[x];
    const auto& q = b.nodes_[y];
    if (p.op != q.op || p.children.size() != q.children.size()) return false;
    switch (p.op) {
      case RiskExpr::Op::literal:
        if (p.value != q.value) return false;
        break;
      case RiskExpr::Op::param:
      case RiskExpr::Op::call:
        if (p.index != q.index) return false;
        break;
      case RiskExpr::Op::distance:
        if (p.index != q.index || p.reversed != q.reversed) return false;
        break;
      case RiskExpr::Op::covariate:
      case RiskExpr::Op::source_covariate:
        if (p.name != q.name) return false;
        break;
      case RiskExpr::Op::indicator:
        if (p.cmp != q.cmp) return false;
        break;
      default:
        break;
    }
    for (std::size_t c = 0; c < p.children.size(); ++c) {
      if (!same(p.children[c], q.children[c])) return false;
    }
    return true;
  };
  return same(a.root_, b.root_);
}

}  // namespace tnilm
