#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace fairsplit {

enum class LpStatus { Optimal, Infeasible, Unbounded };

std::string to_string(LpStatus status);

struct EqualityRow {
  std::vector<double> coeffs;
  double rhs = 0.0;
};

// Small dense LP: maximize objective . x subject to the equality rows,
// optional per-variable upper bounds and x >= 0.
struct LpProblem {
  std::size_t num_vars = 0;
  std::vector<double> objective;
  std::vector<EqualityRow> eq_constraints;
  std::vector<std::optional<double>> upper_bounds;
  std::vector<std::string> var_names;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> values;
  double objective_value = 0.0;
};

// Instance data are small integers; loose-but-safe tolerances suffice.
inline constexpr double kLpPivotTol = 1e-9;
inline constexpr double kLpFeasibilityTol = 1e-6;

// Structural check. Empty result iff the problem is well formed; each entry
// names one violated rule.
std::vector<std::string> validate(const LpProblem& problem);

// Two-phase dense simplex with Bland's rule (terminates under the degeneracy
// this model family produces). Ties break to the lowest variable index, so
// identical inputs give identical outputs. Throws ValidationError on
// malformed input.
LpSolution solve(const LpProblem& problem);

// Test oracle: enumerates every basic solution of the standard form and keeps
// the best feasible one; detects unbounded rays per feasible basis. Throws
// ValidationError when the basis count is intractable.
LpSolution enumerate_vertices(const LpProblem& problem);

// Debug dump (objective, rows, rhs, bounds, names).
nlohmann::json to_json(const LpProblem& problem);

}  // namespace fairsplit
