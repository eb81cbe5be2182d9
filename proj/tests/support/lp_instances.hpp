#pragma once

#include <cstdint>
#include <vector>

#include "fairsplit/lp_core.hpp"
#include "fairsplit/rng.hpp"

namespace fairsplit::testing {

// Random feasible instance: draw an anchor point x0 >= 0, then rows whose
// rhs is a.x0, so x0 is feasible by construction. Every variable gets an
// upper bound, so the instance is never unbounded.
inline LpProblem random_feasible_instance(Rng& rng) {
  LpProblem problem;
  problem.num_vars = 1 + rng.below(6);
  const std::size_t num_eq = rng.below(std::min<std::size_t>(problem.num_vars, 6) + 1);

  std::vector<double> anchor(problem.num_vars);
  for (double& v : anchor) v = static_cast<double>(rng.below(5));

  problem.objective.resize(problem.num_vars);
  for (double& c : problem.objective) c = static_cast<double>(rng.below(9)) - 4.0;

  for (std::size_t i = 0; i < num_eq; ++i) {
    EqualityRow row;
    row.coeffs.resize(problem.num_vars);
    double rhs = 0.0;
    for (std::size_t j = 0; j < problem.num_vars; ++j) {
      row.coeffs[j] = static_cast<double>(rng.below(4));
      rhs += row.coeffs[j] * anchor[j];
    }
    row.rhs = rhs;
    problem.eq_constraints.push_back(std::move(row));
  }

  problem.upper_bounds.resize(problem.num_vars);
  for (std::size_t j = 0; j < problem.num_vars; ++j) {
    problem.upper_bounds[j] = anchor[j] + static_cast<double>(rng.below(6));
  }
  return problem;
}

}  // namespace fairsplit::testing
