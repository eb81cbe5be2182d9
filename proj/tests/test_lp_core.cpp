#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "fairsplit/errors.hpp"
#include "fairsplit/lp_core.hpp"
#include "fairsplit/rng.hpp"
#include "support/lp_instances.hpp"

using namespace fairsplit;

namespace {

LpProblem single_var_bounded() {
  LpProblem problem;
  problem.num_vars = 1;
  problem.objective = {1.0};
  problem.upper_bounds = {5.0};
  problem.var_names = {"x"};
  return problem;
}

void check_feasible(const LpProblem& problem, const LpSolution& solution) {
  REQUIRE(solution.status == LpStatus::Optimal);
  for (std::size_t j = 0; j < problem.num_vars; ++j) {
    CHECK(solution.values[j] >= -1e-9);
    if (j < problem.upper_bounds.size() && problem.upper_bounds[j]) {
      CHECK(solution.values[j] <= *problem.upper_bounds[j] + 1e-9);
    }
  }
  for (const auto& eq : problem.eq_constraints) {
    const double lhs = std::inner_product(eq.coeffs.begin(), eq.coeffs.end(),
                                          solution.values.begin(), 0.0);
    CHECK(std::abs(lhs - eq.rhs) < 1e-6);
  }
  const double dot = std::inner_product(problem.objective.begin(), problem.objective.end(),
                                        solution.values.begin(), 0.0);
  CHECK(std::abs(dot - solution.objective_value) < 1e-9);
}

}  // namespace

TEST_CASE("single bound binds") {
  const auto solution = solve(single_var_bounded());
  REQUIRE(solution.status == LpStatus::Optimal);
  CHECK(solution.values[0] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(solution.objective_value == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("equality propagates the tighter bound") {
  LpProblem problem;
  problem.num_vars = 2;
  problem.objective = {1.0, 0.0};
  problem.eq_constraints = {{{1.0, -1.0}, 0.0}};
  problem.upper_bounds = {3.0, 7.0};
  for (auto* fn : {&solve, &enumerate_vertices}) {
    const auto solution = fn(problem);
    REQUIRE(solution.status == LpStatus::Optimal);
    CHECK(solution.values[0] == doctest::Approx(3.0));
    CHECK(solution.values[1] == doctest::Approx(3.0));
  }
}

TEST_CASE("unbounded variable reported") {
  LpProblem problem;
  problem.num_vars = 1;
  problem.objective = {1.0};
  CHECK(solve(problem).status == LpStatus::Unbounded);
  CHECK(enumerate_vertices(problem).status == LpStatus::Unbounded);
}

TEST_CASE("infeasible equalities reported") {
  LpProblem problem;
  problem.num_vars = 2;
  problem.objective = {1.0, 1.0};
  problem.eq_constraints = {{{1.0, 1.0}, 5.0}};
  problem.upper_bounds = {1.0, 1.0};
  CHECK(solve(problem).status == LpStatus::Infeasible);
  CHECK(enumerate_vertices(problem).status == LpStatus::Infeasible);
}

TEST_CASE("redundant rows tolerated") {
  LpProblem problem;
  problem.num_vars = 2;
  problem.objective = {1.0, 1.0};
  problem.eq_constraints = {{{1.0, 1.0}, 4.0}, {{2.0, 2.0}, 8.0}};
  problem.upper_bounds = {3.0, 3.0};
  const auto solution = solve(problem);
  check_feasible(problem, solution);
  CHECK(solution.objective_value == doctest::Approx(4.0));
}

TEST_CASE("validate reports every structural problem") {
  CHECK(validate(single_var_bounded()).empty());

  LpProblem bad = single_var_bounded();
  bad.eq_constraints.push_back({{1.0, 2.0}, 0.0});
  auto report = validate(bad);
  REQUIRE(report.size() == 1);
  CHECK(report[0].find("row 0") != std::string::npos);

  LpProblem negative = single_var_bounded();
  negative.upper_bounds[0] = -2.0;
  report = validate(negative);
  REQUIRE(report.size() == 1);
  CHECK(report[0].find("x") != std::string::npos);

  CHECK_THROWS_AS(solve(negative), ValidationError);
}

TEST_CASE("solve matches vertex enumeration on random feasible instances") {
  Rng rng(20240601);
  for (int trial = 0; trial < 100; ++trial) {
    const auto problem = testing::random_feasible_instance(rng);
    const auto fast = solve(problem);
    const auto oracle = enumerate_vertices(problem);
    REQUIRE(fast.status == LpStatus::Optimal);
    REQUIRE(oracle.status == LpStatus::Optimal);
    check_feasible(problem, fast);
    CHECK(std::abs(fast.objective_value - oracle.objective_value) < 1e-9);
  }
}

TEST_CASE("positive objective scaling preserves the argmax") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    auto problem = testing::random_feasible_instance(rng);
    const auto base = solve(problem);
    const double scale = 0.25 + rng.uniform() * 8.0;
    for (double& c : problem.objective) c *= scale;
    const auto scaled = solve(problem);
    REQUIRE(base.status == LpStatus::Optimal);
    REQUIRE(scaled.status == LpStatus::Optimal);
    CHECK(scaled.objective_value ==
          doctest::Approx(base.objective_value * scale).epsilon(1e-9));
    for (std::size_t j = 0; j < problem.num_vars; ++j) {
      CHECK(scaled.values[j] == doctest::Approx(base.values[j]).epsilon(1e-6));
    }
  }
}

TEST_CASE("permuting variables permutes the solution") {
  Rng rng(4242);
  for (int trial = 0; trial < 20; ++trial) {
    const auto problem = testing::random_feasible_instance(rng);
    std::vector<std::size_t> perm(problem.num_vars);
    for (std::size_t j = 0; j < perm.size(); ++j) perm[j] = j;
    rng.shuffle(perm);

    LpProblem permuted = problem;
    for (std::size_t j = 0; j < perm.size(); ++j) {
      permuted.objective[perm[j]] = problem.objective[j];
      permuted.upper_bounds[perm[j]] = problem.upper_bounds[j];
    }
    for (std::size_t i = 0; i < problem.eq_constraints.size(); ++i) {
      for (std::size_t j = 0; j < perm.size(); ++j) {
        permuted.eq_constraints[i].coeffs[perm[j]] = problem.eq_constraints[i].coeffs[j];
      }
    }

    const auto base = solve(problem);
    const auto shuffled = solve(permuted);
    REQUIRE(base.status == LpStatus::Optimal);
    REQUIRE(shuffled.status == LpStatus::Optimal);
    CHECK(shuffled.objective_value == doctest::Approx(base.objective_value).epsilon(1e-9));
  }
}

TEST_CASE("deterministic output for identical input") {
  Rng rng(99);
  const auto problem = testing::random_feasible_instance(rng);
  const auto first = solve(problem);
  const auto second = solve(problem);
  CHECK(first.status == second.status);
  CHECK(first.objective_value == second.objective_value);
  CHECK(first.values == second.values);
}

TEST_CASE("enumeration rejects oversized instances") {
  LpProblem problem;
  problem.num_vars = 30;
  problem.objective.assign(30, 1.0);
  problem.upper_bounds.assign(30, 1.0);
  EqualityRow row;
  row.coeffs.assign(30, 1.0);
  row.rhs = 10.0;
  for (int i = 0; i < 14; ++i) {
    problem.eq_constraints.push_back(row);
    problem.eq_constraints.back().coeffs[static_cast<std::size_t>(i)] += 1.0;
  }
  CHECK_THROWS_AS(enumerate_vertices(problem), ValidationError);
}

TEST_CASE("problem dump carries all fields") {
  const auto dump = to_json(single_var_bounded());
  CHECK(dump["num_vars"] == 1);
  CHECK(dump["objective"][0] == 1.0);
  CHECK(dump["upper_bounds"][0] == 5.0);
  CHECK(dump["var_names"][0] == "x");
}
