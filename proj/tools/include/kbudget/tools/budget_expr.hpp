#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace kbudget::tools {

/// Values for the budget-expression variables n, k, J, eps, m, t.
using BudgetVariables = std::map<std::string, double>;

/// Evaluates an arithmetic expression over numbers and the bound variables
/// with + - * / and parentheses. Adjacent variable names multiply, so "nJ"
/// means n*J. Throws ContractViolation on a syntax error or an unbound name.
double eval_budget_expr(const std::string& expr, const BudgetVariables& vars);

/// eval_budget_expr rounded to a non-negative count of distinct entries.
std::uint64_t budget_from_expr(const std::string& expr, const BudgetVariables& vars);

}  // namespace kbudget::tools
