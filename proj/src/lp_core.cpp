#include "fairsplit/lp_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

#include "fairsplit/errors.hpp"

namespace fairsplit {

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

std::vector<std::string> validate(const LpProblem& problem) {
  std::vector<std::string> violations;
  if (problem.num_vars < 1) {
    violations.push_back("num_vars must be at least 1");
  }
  if (problem.objective.size() != problem.num_vars) {
    violations.push_back("objective length " + std::to_string(problem.objective.size()) +
                         " does not match num_vars " + std::to_string(problem.num_vars));
  }
  for (std::size_t i = 0; i < problem.eq_constraints.size(); ++i) {
    const auto& row = problem.eq_constraints[i];
    if (row.coeffs.size() != problem.num_vars) {
      violations.push_back("equality row " + std::to_string(i) + " has length " +
                           std::to_string(row.coeffs.size()) + ", expected " +
                           std::to_string(problem.num_vars));
    }
    if (!std::isfinite(row.rhs) || row.rhs < 0.0) {
      violations.push_back("equality row " + std::to_string(i) +
                           " rhs must be finite and non-negative");
    }
    for (const double c : row.coeffs) {
      if (!std::isfinite(c)) {
        violations.push_back("equality row " + std::to_string(i) +
                             " contains a non-finite coefficient");
        break;
      }
    }
  }
  if (!problem.upper_bounds.empty() && problem.upper_bounds.size() != problem.num_vars) {
    violations.push_back("upper_bounds length does not match num_vars");
  }
  for (std::size_t j = 0; j < problem.upper_bounds.size(); ++j) {
    const auto& bound = problem.upper_bounds[j];
    if (bound && (!std::isfinite(*bound) || *bound < 0.0)) {
      const std::string name =
          j < problem.var_names.size() ? problem.var_names[j] : "var " + std::to_string(j);
      violations.push_back("upper bound of " + name + " must be finite and non-negative");
    }
  }
  if (!problem.var_names.empty() && problem.var_names.size() != problem.num_vars) {
    violations.push_back("var_names length does not match num_vars");
  }
  for (const double c : problem.objective) {
    if (!std::isfinite(c)) {
      violations.push_back("objective contains a non-finite coefficient");
      break;
    }
  }
  return violations;
}

namespace {

void require_valid(const LpProblem& problem) {
  const auto violations = validate(problem);
  if (!violations.empty()) {
    std::string message = "malformed LP problem:";
    for (const auto& v : violations) message += "\n  - " + v;
    throw ValidationError(message);
  }
}

// Standard form: maximize c.x subject to A x = b, x >= 0, where each finite
// upper bound x_j <= u becomes a row x_j + s = u with its own slack column.
struct StandardForm {
  std::size_t num_cols = 0;   // original variables + slacks
  std::size_t num_orig = 0;   // original variables
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  std::vector<double> cost;
};

StandardForm build_standard_form(const LpProblem& problem) {
  StandardForm form;
  form.num_orig = problem.num_vars;
  std::vector<std::size_t> bounded;
  for (std::size_t j = 0; j < problem.upper_bounds.size(); ++j) {
    if (problem.upper_bounds[j]) bounded.push_back(j);
  }
  form.num_cols = problem.num_vars + bounded.size();
  for (const auto& eq : problem.eq_constraints) {
    std::vector<double> row(form.num_cols, 0.0);
    std::copy(eq.coeffs.begin(), eq.coeffs.end(), row.begin());
    form.rows.push_back(std::move(row));
    form.rhs.push_back(eq.rhs);
  }
  for (std::size_t k = 0; k < bounded.size(); ++k) {
    std::vector<double> row(form.num_cols, 0.0);
    row[bounded[k]] = 1.0;
    row[problem.num_vars + k] = 1.0;
    form.rows.push_back(std::move(row));
    form.rhs.push_back(*problem.upper_bounds[bounded[k]]);
  }
  form.cost.assign(form.num_cols, 0.0);
  std::copy(problem.objective.begin(), problem.objective.end(), form.cost.begin());
  return form;
}

// Dense tableau over B^-1 A with an explicit basis. Pivot selection follows
// Bland's rule throughout.
class Tableau {
 public:
  Tableau(std::vector<std::vector<double>> rows, std::vector<double> rhs,
          std::vector<std::size_t> basis, std::size_t num_cols)
      : num_cols_(num_cols), rows_(std::move(rows)), rhs_(std::move(rhs)),
        basis_(std::move(basis)) {}

  std::size_t num_rows() const { return rows_.size(); }
  std::size_t num_cols() const { return num_cols_; }
  const std::vector<std::size_t>& basis() const { return basis_; }
  double rhs(std::size_t i) const { return rhs_[i]; }
  double at(std::size_t i, std::size_t j) const { return rows_[i][j]; }

  void pivot(std::size_t pivot_row, std::size_t entering) {
    const double pivot_value = rows_[pivot_row][entering];
    for (double& v : rows_[pivot_row]) v /= pivot_value;
    rhs_[pivot_row] /= pivot_value;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i == pivot_row) continue;
      const double factor = rows_[i][entering];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < rows_[i].size(); ++j) {
        rows_[i][j] -= factor * rows_[pivot_row][j];
      }
      rhs_[i] -= factor * rhs_[pivot_row];
    }
    basis_[pivot_row] = entering;
  }

  void drop_row(std::size_t i) {
    rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(i));
    rhs_.erase(rhs_.begin() + static_cast<std::ptrdiff_t>(i));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
  }

  void drop_columns_from(std::size_t first) {
    for (auto& row : rows_) row.resize(first);
    num_cols_ = first;
  }

  // Maximizes `cost` from the current basis. Returns false when an
  // unbounded improving ray is found.
  bool maximize(const std::vector<double>& cost) {
    std::vector<double> reduced = reduced_costs(cost);
    for (std::size_t iteration = 0;; ++iteration) {
      if (iteration > 1000000) {
        throw ContractError("simplex failed to terminate");
      }
      std::size_t entering = num_cols();
      for (std::size_t j = 0; j < num_cols(); ++j) {
        if (reduced[j] > kLpPivotTol) {
          entering = j;
          break;
        }
      }
      if (entering == num_cols()) return true;

      std::size_t pivot_row = num_rows();
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < num_rows(); ++i) {
        if (rows_[i][entering] > kLpPivotTol) {
          const double ratio = rhs_[i] / rows_[i][entering];
          if (ratio < best_ratio - kLpPivotTol ||
              (std::abs(ratio - best_ratio) <= kLpPivotTol &&
               (pivot_row == num_rows() || basis_[i] < basis_[pivot_row]))) {
            best_ratio = ratio;
            pivot_row = i;
          }
        }
      }
      if (pivot_row == num_rows()) return false;

      const double factor = reduced[entering];
      pivot(pivot_row, entering);
      for (std::size_t j = 0; j < num_cols(); ++j) {
        reduced[j] -= factor * rows_[pivot_row][j];
      }
      reduced[entering] = 0.0;
    }
  }

  std::vector<double> reduced_costs(const std::vector<double>& cost) const {
    std::vector<double> reduced = cost;
    for (std::size_t i = 0; i < num_rows(); ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < num_cols(); ++j) {
        reduced[j] -= cb * rows_[i][j];
      }
    }
    return reduced;
  }

  std::vector<double> basic_solution(std::size_t num_cols_total) const {
    std::vector<double> x(num_cols_total, 0.0);
    for (std::size_t i = 0; i < num_rows(); ++i) {
      x[basis_[i]] = rhs_[i];
    }
    return x;
  }

 private:
  std::size_t num_cols_;
  std::vector<std::vector<double>> rows_;
  std::vector<double> rhs_;
  std::vector<std::size_t> basis_;
};

void check_residuals(const LpProblem& problem, const std::vector<double>& x) {
  for (std::size_t j = 0; j < problem.num_vars; ++j) {
    if (x[j] < -1e-9) {
      throw ContractError("solver produced a negative value");
    }
    if (j < problem.upper_bounds.size() && problem.upper_bounds[j] &&
        x[j] > *problem.upper_bounds[j] + 1e-9) {
      throw ContractError("solver violated an upper bound");
    }
  }
  for (const auto& eq : problem.eq_constraints) {
    const double lhs = std::inner_product(eq.coeffs.begin(), eq.coeffs.end(), x.begin(), 0.0);
    if (std::abs(lhs - eq.rhs) > kLpFeasibilityTol) {
      throw ContractError("solver violated an equality constraint");
    }
  }
}

LpSolution finish(const LpProblem& problem, const std::vector<double>& full_x) {
  LpSolution solution;
  solution.status = LpStatus::Optimal;
  solution.values.assign(full_x.begin(),
                         full_x.begin() + static_cast<std::ptrdiff_t>(problem.num_vars));
  for (double& v : solution.values) {
    if (v < 0.0 && v > -1e-9) v = 0.0;
  }
  solution.objective_value = std::inner_product(
      problem.objective.begin(), problem.objective.end(), solution.values.begin(), 0.0);
  check_residuals(problem, solution.values);
  return solution;
}

}  // namespace

LpSolution solve(const LpProblem& problem) {
  require_valid(problem);
  const StandardForm form = build_standard_form(problem);
  const std::size_t num_eq = problem.eq_constraints.size();
  const std::size_t num_rows = form.rows.size();
  const std::size_t num_art = num_eq;
  const std::size_t total_cols = form.num_cols + num_art;

  // Phase 1: slacks start basic on the bound rows; equality rows get one
  // artificial column each.
  std::vector<std::vector<double>> rows(num_rows, std::vector<double>(total_cols, 0.0));
  std::vector<std::size_t> basis(num_rows);
  for (std::size_t i = 0; i < num_rows; ++i) {
    std::copy(form.rows[i].begin(), form.rows[i].end(), rows[i].begin());
    if (i < num_eq) {
      rows[i][form.num_cols + i] = 1.0;
      basis[i] = form.num_cols + i;
    } else {
      basis[i] = problem.num_vars + (i - num_eq);
    }
  }
  Tableau tableau(std::move(rows), form.rhs, std::move(basis), total_cols);

  if (num_art > 0) {
    std::vector<double> phase1_cost(total_cols, 0.0);
    for (std::size_t k = 0; k < num_art; ++k) phase1_cost[form.num_cols + k] = -1.0;
    tableau.maximize(phase1_cost);
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < tableau.num_rows(); ++i) {
      if (tableau.basis()[i] >= form.num_cols) infeasibility += tableau.rhs(i);
    }
    if (infeasibility > kLpFeasibilityTol) {
      return LpSolution{LpStatus::Infeasible, {}, 0.0};
    }
    // Drive leftover artificials out of the basis; rows with no eligible
    // pivot are redundant and dropped.
    for (std::size_t i = tableau.num_rows(); i-- > 0;) {
      if (tableau.basis()[i] < form.num_cols) continue;
      std::size_t entering = form.num_cols;
      for (std::size_t j = 0; j < form.num_cols; ++j) {
        if (std::abs(tableau.at(i, j)) > kLpPivotTol) {
          entering = j;
          break;
        }
      }
      if (entering == form.num_cols) {
        tableau.drop_row(i);
      } else {
        tableau.pivot(i, entering);
      }
    }
    tableau.drop_columns_from(form.num_cols);
  }

  if (!tableau.maximize(form.cost)) {
    return LpSolution{LpStatus::Unbounded, {}, 0.0};
  }
  return finish(problem, tableau.basic_solution(form.num_cols));
}

namespace {

// Plain LU with partial pivoting for the oracle's basis systems.
class LuFactors {
 public:
  LuFactors(const std::vector<std::vector<double>>& matrix, std::size_t n) : n_(n), a_(n * n), piv_(n) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a_[i * n + j] = matrix[i][j];
      piv_[i] = i;
    }
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t best = k;
      for (std::size_t i = k + 1; i < n; ++i) {
        if (std::abs(a_[i * n + k]) > std::abs(a_[best * n + k])) best = i;
      }
      if (std::abs(a_[best * n + k]) < 1e-10) {
        singular_ = true;
        return;
      }
      if (best != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(a_[k * n + j], a_[best * n + j]);
        std::swap(piv_[k], piv_[best]);
      }
      for (std::size_t i = k + 1; i < n; ++i) {
        a_[i * n + k] /= a_[k * n + k];
        const double factor = a_[i * n + k];
        for (std::size_t j = k + 1; j < n; ++j) a_[i * n + j] -= factor * a_[k * n + j];
      }
    }
  }

  bool singular() const { return singular_; }

  std::vector<double> solve(const std::vector<double>& b) const {
    std::vector<double> x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[i] = b[piv_[i]];
    for (std::size_t i = 1; i < n_; ++i) {
      for (std::size_t j = 0; j < i; ++j) x[i] -= a_[i * n_ + j] * x[j];
    }
    for (std::size_t i = n_; i-- > 0;) {
      for (std::size_t j = i + 1; j < n_; ++j) x[i] -= a_[i * n_ + j] * x[j];
      x[i] /= a_[i * n_ + i];
    }
    return x;
  }

  // Solves A^T y = c (for reduced costs).
  std::vector<double> solve_transposed(const std::vector<double>& c) const {
    std::vector<double> y(n_);
    // U^T z = c (forward), then L^T w = z (backward), then undo pivoting.
    for (std::size_t i = 0; i < n_; ++i) {
      y[i] = c[i];
      for (std::size_t j = 0; j < i; ++j) y[i] -= a_[j * n_ + i] * y[j];
      y[i] /= a_[i * n_ + i];
    }
    for (std::size_t i = n_; i-- > 0;) {
      for (std::size_t j = i + 1; j < n_; ++j) y[i] -= a_[j * n_ + i] * y[j];
    }
    std::vector<double> result(n_);
    for (std::size_t i = 0; i < n_; ++i) result[piv_[i]] = y[i];
    return result;
  }

 private:
  std::size_t n_;
  std::vector<double> a_;
  std::vector<std::size_t> piv_;
  bool singular_ = false;
};

// Gauss-Jordan on [A|b]: returns the independent rows, or nullopt when the
// system is inconsistent.
std::optional<std::pair<std::vector<std::vector<double>>, std::vector<double>>> row_reduce(
    std::vector<std::vector<double>> rows, std::vector<double> rhs) {
  const std::size_t num_rows = rows.size();
  const std::size_t num_cols = rows.empty() ? 0 : rows.front().size();
  std::size_t rank = 0;
  for (std::size_t col = 0; col < num_cols && rank < num_rows; ++col) {
    std::size_t best = rank;
    for (std::size_t i = rank + 1; i < num_rows; ++i) {
      if (std::abs(rows[i][col]) > std::abs(rows[best][col])) best = i;
    }
    if (std::abs(rows[best][col]) < 1e-10) continue;
    std::swap(rows[rank], rows[best]);
    std::swap(rhs[rank], rhs[best]);
    const double pivot = rows[rank][col];
    for (double& v : rows[rank]) v /= pivot;
    rhs[rank] /= pivot;
    for (std::size_t i = 0; i < num_rows; ++i) {
      if (i == rank) continue;
      const double factor = rows[i][col];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < num_cols; ++j) rows[i][j] -= factor * rows[rank][j];
      rhs[i] -= factor * rhs[rank];
    }
    ++rank;
  }
  for (std::size_t i = rank; i < num_rows; ++i) {
    if (std::abs(rhs[i]) > kLpFeasibilityTol) return std::nullopt;
  }
  rows.resize(rank);
  rhs.resize(rank);
  return std::make_pair(std::move(rows), std::move(rhs));
}

double binomial_count(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double result = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    result *= static_cast<double>(n - i) / static_cast<double>(i + 1);
    if (result > 1e12) return result;
  }
  return result;
}

}  // namespace

LpSolution enumerate_vertices(const LpProblem& problem) {
  require_valid(problem);
  const StandardForm form = build_standard_form(problem);

  auto reduced = row_reduce(form.rows, form.rhs);
  if (!reduced) {
    return LpSolution{LpStatus::Infeasible, {}, 0.0};
  }
  const auto& [rows, rhs] = *reduced;
  const std::size_t m = rows.size();
  const std::size_t n = form.num_cols;

  if (m == 0) {
    // Only x >= 0 remains; unbounded iff any objective coefficient is
    // positive, otherwise the origin is optimal.
    for (const double c : form.cost) {
      if (c > kLpPivotTol) return LpSolution{LpStatus::Unbounded, {}, 0.0};
    }
    return finish(problem, std::vector<double>(n, 0.0));
  }

  constexpr double kMaxBases = 2e6;
  if (binomial_count(n, m) > kMaxBases) {
    throw ValidationError("enumerate_vertices: instance too large (" + std::to_string(n) +
                          " columns choose " + std::to_string(m) + " rows exceeds basis budget)");
  }

  bool found_feasible = false;
  bool found_ray = false;
  double best_objective = -std::numeric_limits<double>::infinity();
  std::vector<double> best_x;

  std::vector<std::size_t> combo(m);
  for (std::size_t i = 0; i < m; ++i) combo[i] = i;
  const auto advance = [&]() {
    std::size_t i = m;
    while (i-- > 0) {
      if (combo[i] + (m - i) < n + 0) {
        ++combo[i];
        for (std::size_t j = i + 1; j < m; ++j) combo[j] = combo[j - 1] + 1;
        return true;
      }
    }
    return false;
  };

  std::vector<std::vector<double>> basis_matrix(m, std::vector<double>(m));
  do {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < m; ++k) basis_matrix[i][k] = rows[i][combo[k]];
    }
    LuFactors lu(basis_matrix, m);
    if (lu.singular()) continue;

    const std::vector<double> xb = lu.solve(rhs);
    bool feasible = true;
    for (const double v : xb) {
      if (v < -1e-9) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    found_feasible = true;

    std::vector<double> x(n, 0.0);
    for (std::size_t k = 0; k < m; ++k) x[combo[k]] = std::max(0.0, xb[k]);
    const double objective =
        std::inner_product(form.cost.begin(), form.cost.end(), x.begin(), 0.0);
    if (objective > best_objective + 1e-12 || best_x.empty()) {
      best_objective = objective;
      best_x = x;
    }

    // Improving ray check: reduced cost > 0 with a non-positive basis
    // direction means the LP is unbounded.
    std::vector<double> cb(m);
    for (std::size_t k = 0; k < m; ++k) cb[k] = form.cost[combo[k]];
    const std::vector<double> y = lu.solve_transposed(cb);
    for (std::size_t j = 0; j < n && !found_ray; ++j) {
      if (std::find(combo.begin(), combo.end(), j) != combo.end()) continue;
      double reduced_cost = form.cost[j];
      std::vector<double> column(m);
      for (std::size_t i = 0; i < m; ++i) column[i] = rows[i][j];
      for (std::size_t i = 0; i < m; ++i) reduced_cost -= y[i] * column[i];
      if (reduced_cost <= kLpPivotTol) continue;
      const std::vector<double> direction = lu.solve(column);
      bool all_non_positive = true;
      for (const double d : direction) {
        if (d > kLpPivotTol) {
          all_non_positive = false;
          break;
        }
      }
      if (all_non_positive) found_ray = true;
    }
    if (found_ray) break;
  } while (advance());

  if (found_ray) return LpSolution{LpStatus::Unbounded, {}, 0.0};
  if (!found_feasible) return LpSolution{LpStatus::Infeasible, {}, 0.0};
  return finish(problem, best_x);
}

nlohmann::json to_json(const LpProblem& problem) {
  nlohmann::json rows = nlohmann::json::array();
  nlohmann::json rhs = nlohmann::json::array();
  for (const auto& eq : problem.eq_constraints) {
    rows.push_back(eq.coeffs);
    rhs.push_back(eq.rhs);
  }
  nlohmann::json bounds = nlohmann::json::array();
  for (const auto& bound : problem.upper_bounds) {
    if (bound) {
      bounds.push_back(*bound);
    } else {
      bounds.push_back(nullptr);
    }
  }
  return nlohmann::json{{"num_vars", problem.num_vars},
                        {"objective", problem.objective},
                        {"rows", rows},
                        {"rhs", rhs},
                        {"upper_bounds", bounds},
                        {"var_names", problem.var_names}};
}

}  // namespace fairsplit
