#include "kbudget/tools/budget_expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "kbudget/errors.hpp"

namespace kbudget::tools {
namespace {

class Parser {
 public:
  Parser(const std::string& text, const BudgetVariables& vars) : s_(text), vars_(vars) {}

  double parse() {
    const double v = expr();
    skip_space();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ContractViolation("budget expression \"" + s_ + "\": " + why + " at offset " +
                            std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  double expr() {
    double v = term();
    for (;;) {
      if (accept('+')) {
        v += term();
      } else if (accept('-')) {
        v -= term();
      } else {
        return v;
      }
    }
  }

  double term() {
    double v = factor();
    for (;;) {
      if (accept('*')) {
        v *= factor();
      } else if (accept('/')) {
        const double d = factor();
        if (d == 0.0) fail("division by zero");
        v /= d;
      } else {
        return v;
      }
    }
  }

  double factor() {
    if (accept('-')) return -factor();
    if (accept('(')) {
      const double v = expr();
      if (!accept(')')) fail("expected ')'");
      return v;
    }
    skip_space();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  double number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("bad number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  double identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string name = s_.substr(start, pos_ - start);
    if (const auto it = vars_.find(name); it != vars_.end()) return it->second;
    // Concatenated names multiply: longest known prefix first.
    double product = 1.0;
    std::size_t i = 0;
    while (i < name.size()) {
      std::size_t best = 0;
      double value = 0.0;
      for (const auto& [var, v] : vars_) {
        if (var.size() > best && name.compare(i, var.size(), var) == 0) {
          best = var.size();
          value = v;
        }
      }
      if (best == 0) fail("unknown variable '" + name + "'");
      product *= value;
      i += best;
    }
    return product;
  }

  const std::string& s_;
  const BudgetVariables& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

double eval_budget_expr(const std::string& expr, const BudgetVariables& vars) {
  return Parser(expr, vars).parse();
}

std::uint64_t budget_from_expr(const std::string& expr, const BudgetVariables& vars) {
  const double v = eval_budget_expr(expr, vars);
  if (!std::isfinite(v) || v < 0.0) {
    throw ContractViolation("budget expression \"" + expr + "\" is not a non-negative count");
  }
  return static_cast<std::uint64_t>(std::floor(v + 1e-9));
}

}  // namespace kbudget::tools
