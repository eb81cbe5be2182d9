#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "fairsplit/errors.hpp"
#include "fairsplit/reference_data.hpp"
#include "fairsplit/rng.hpp"
#include "fairsplit/scenario.hpp"
#include "support/snapshot.hpp"

using namespace fairsplit;

namespace {

ScenarioSpec spec_for(double female_fraction) {
  ScenarioSpec spec;
  spec.female_fraction = female_fraction;
  return spec;
}

CohortTable post_reservation_bounds() { return reference_bounds().minus_per_cell(158); }

}  // namespace

TEST_CASE("derive_ratios maps fractions to male/female ratios") {
  CHECK(derive_ratios(spec_for(0.5)).r == doctest::Approx(1.0));
  CHECK(derive_ratios(spec_for(0.5)).w == doctest::Approx(1.0));
  CHECK(derive_ratios(spec_for(0.25)).r == doctest::Approx(3.0));
  const auto male_only = derive_ratios(spec_for(0.0));
  CHECK(male_only.male_only);
  CHECK_FALSE(male_only.female_only);
  const auto female_only = derive_ratios(spec_for(1.0));
  CHECK(female_only.female_only);
}

TEST_CASE("derive_ratios validates the spec") {
  ScenarioSpec bad = spec_for(0.5);
  bad.age_ratio = 0.0;
  CHECK_THROWS_AS(derive_ratios(bad), ValidationError);
  bad = spec_for(0.5);
  bad.seeds = {1, 1};
  CHECK_THROWS_AS(derive_ratios(bad), ValidationError);
  bad = spec_for(1.5);
  CHECK_THROWS_AS(derive_ratios(bad), ValidationError);
}

TEST_CASE("scenario names follow the female percentage") {
  CHECK(spec_for(0.0).name() == "M100");
  CHECK(spec_for(0.25).name() == "F25M75");
  CHECK(spec_for(0.5).name() == "F50M50");
  CHECK(spec_for(0.75).name() == "F75M25");
  CHECK(spec_for(1.0).name() == "F100");
}

TEST_CASE("balanced scenario model solves to the published composition") {
  const auto problem = build_lp(post_reservation_bounds(), derive_ratios(spec_for(0.5)));
  CHECK(problem.eq_constraints.size() == 13);
  const auto solution = solve(problem);
  REQUIRE(solution.status == LpStatus::Optimal);
  CHECK(solution.objective_value == doctest::Approx(4412.0).epsilon(1e-9));
  CHECK(solution.values[kMalMale] == doctest::Approx(2206.0));
  CHECK(solution.values[kMalFemale] == doctest::Approx(2206.0));
}

TEST_CASE("male-only scenario model forces female counts to zero") {
  const auto problem = build_lp(post_reservation_bounds(), derive_ratios(spec_for(0.0)));
  CHECK(problem.eq_constraints.size() == 13);
  const auto solution = solve(problem);
  REQUIRE(solution.status == LpStatus::Optimal);
  CHECK(solution.objective_value == doctest::Approx(2206.0));
  CHECK(solution.values[kMalFemale] == doctest::Approx(0.0));
  CHECK(solution.values[kBenFemale] == doctest::Approx(0.0));
}

TEST_CASE("all-zero malignant cells give the all-zero optimum") {
  CohortTable table = post_reservation_bounds();
  table.at(Label::Malignant, Sex::Male, AgeBand::Under60) = 0;
  table.at(Label::Malignant, Sex::Male, AgeBand::AtLeast60) = 0;
  table.at(Label::Malignant, Sex::Female, AgeBand::Under60) = 0;
  table.at(Label::Malignant, Sex::Female, AgeBand::AtLeast60) = 0;
  const auto solution = solve(build_lp(table, derive_ratios(spec_for(0.5))));
  REQUIRE(solution.status == LpStatus::Optimal);
  CHECK(solution.objective_value == doctest::Approx(0.0));
}

TEST_CASE("solve and enumerate agree on all five scenario instances") {
  for (const auto& composition : reference_compositions()) {
    const auto problem =
        build_lp(post_reservation_bounds(), derive_ratios(spec_for(composition.female_fraction)));
    const auto fast = solve(problem);
    const auto oracle = enumerate_vertices(problem);
    REQUIRE(fast.status == LpStatus::Optimal);
    REQUIRE(oracle.status == LpStatus::Optimal);
    CHECK(fast.objective_value == doctest::Approx(oracle.objective_value).epsilon(1e-9));
  }
}

TEST_CASE("rounding reproduces the published sex-level counts") {
  for (const auto& composition : reference_compositions()) {
    const auto ratios = derive_ratios(spec_for(composition.female_fraction));
    const auto solution = solve(build_lp(post_reservation_bounds(), ratios));
    REQUIRE(solution.status == LpStatus::Optimal);
    const auto targets = round_solution(solution, ratios);
    CHECK(targets.sex_total(Label::Malignant, Sex::Male) == composition.malignant_male);
    CHECK(targets.sex_total(Label::Malignant, Sex::Female) == composition.malignant_female);
    CHECK(targets.sex_total(Label::Benign, Sex::Male) == composition.malignant_male);
    CHECK(targets.sex_total(Label::Benign, Sex::Female) == composition.malignant_female);
    CHECK(targets.label_total(Label::Malignant) == targets.label_total(Label::Benign));
  }
}

TEST_CASE("odd sex totals put the extra unit in the under-60 band") {
  const auto ratios = derive_ratios(spec_for(0.75));
  const auto solution = solve(build_lp(post_reservation_bounds(), ratios));
  const auto targets = round_solution(solution, ratios);
  CHECK(targets.sex_total(Label::Malignant, Sex::Male) == 809);
  CHECK(targets.at(Label::Malignant, Sex::Male, AgeBand::Under60) == 405);
  CHECK(targets.at(Label::Malignant, Sex::Male, AgeBand::AtLeast60) == 404);
}

TEST_CASE("integral solutions round to themselves") {
  LpSolution solution;
  solution.status = LpStatus::Optimal;
  solution.values.assign(kNumScenarioVars, 0.0);
  solution.values[kMalMale] = 100.0;
  solution.values[kMalFemale] = 100.0;
  solution.values[kBenMale] = 100.0;
  solution.values[kBenFemale] = 100.0;
  const auto targets = round_solution(solution, derive_ratios(spec_for(0.5)));
  CHECK(targets.sex_total(Label::Malignant, Sex::Male) == 100);
  CHECK(targets.at(Label::Malignant, Sex::Male, AgeBand::Under60) == 50);
}

TEST_CASE("reserve_test_cells draws a balanced test set") {
  const auto cohort = testing::reference_snapshot_cohort();
  const auto reservation = reserve_test_cells(cohort, 158, 1);
  CHECK(reservation.test_ids.size() == 1264);
  CHECK(reservation.remaining.size() == cohort.size() - 1264);
  const auto table = tabulate(reservation.remaining, 60);
  CHECK(table.at(Label::Malignant, Sex::Male, AgeBand::Under60) == 1261 - 158);

  const auto again = reserve_test_cells(cohort, 158, 1);
  CHECK(again.test_ids == reservation.test_ids);

  CHECK(reserve_test_cells(cohort, 0, 1).test_ids.empty());
  CHECK(reserve_test_cells(cohort, 0, 1).remaining.size() == cohort.size());
}

TEST_CASE("reserve_test_cells names the deficient cell") {
  Cohort tiny;
  for (int k = 0; k < 3; ++k) {
    LesionRecord record;
    record.image_id = "i" + std::to_string(k);
    record.patient_id = "p" + std::to_string(k);
    record.age = 40;
    record.sex = Sex::Male;
    record.label = Label::Malignant;
    tiny.records.push_back(record);
  }
  try {
    reserve_test_cells(tiny, 1, 1);
    FAIL("expected CapacityError");
  } catch (const CapacityError& e) {
    CHECK(std::string(e.what()).find("malignant/male/atLeast60") != std::string::npos);
  }
}

TEST_CASE("sample_dataset draws the exact targets deterministically") {
  const auto cohort = testing::reference_snapshot_cohort();
  const auto reservation = reserve_test_cells(cohort, 158, 2);
  const auto ratios = derive_ratios(spec_for(0.5));
  const auto solution = solve(build_lp(tabulate(reservation.remaining, 60), ratios));
  const auto targets = round_solution(solution, ratios);

  const auto sample = sample_dataset(reservation.remaining, targets, 9);
  CHECK(static_cast<std::int64_t>(sample.size()) == targets.total());
  CHECK(targets.total() == 8824);
  const auto table = tabulate(sample, 60);
  for (std::size_t c = 0; c < CohortTable::kNumCells; ++c) {
    CHECK(table.counts[c] == targets.cells[c]);
  }

  const auto again = sample_dataset(reservation.remaining, targets, 9);
  REQUIRE(again.size() == sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    CHECK(again.records[i].image_id == sample.records[i].image_id);
  }

  CellTargets zero;
  CHECK(sample_dataset(reservation.remaining, zero, 9).size() == 0);

  CellTargets excessive = targets;
  excessive.cells[0] = 100000;
  CHECK_THROWS_AS(sample_dataset(reservation.remaining, excessive, 9), CapacityError);
}

TEST_CASE("split_train_val reproduces the published 3528/884 split") {
  const auto cohort = testing::reference_snapshot_cohort();
  const auto reservation = reserve_test_cells(cohort, 158, 3);
  const auto ratios = derive_ratios(spec_for(0.0));
  const auto solution = solve(build_lp(tabulate(reservation.remaining, 60), ratios));
  const auto targets = round_solution(solution, ratios);
  const auto sample = sample_dataset(reservation.remaining, targets, 3);
  REQUIRE(sample.size() == 4412);

  const auto split = split_train_val(sample, 3);
  CHECK(split.train_ids.size() == 3528);
  CHECK(split.val_ids.size() == 884);

  const auto again = split_train_val(sample, 3);
  CHECK(again.train_ids == split.train_ids);
  CHECK(again.val_ids == split.val_ids);
}

TEST_CASE("ten balanced records split 8/2") {
  Cohort toy;
  for (int k = 0; k < 10; ++k) {
    LesionRecord record;
    record.image_id = "t" + std::to_string(k);
    record.patient_id = "q" + std::to_string(k);
    record.age = k < 5 ? 40 : 70;
    record.sex = Sex::Male;
    record.label = Label::Benign;
    toy.records.push_back(record);
  }
  const auto split = split_train_val(toy, 4);
  CHECK(split.train_ids.size() == 8);
  CHECK(split.val_ids.size() == 2);
}

TEST_CASE("build_all_scenarios matches the published table for every seed") {
  const auto cohort = testing::reference_snapshot_cohort();
  std::vector<ScenarioSpec> specs;
  for (const auto& composition : reference_compositions()) {
    specs.push_back(spec_for(composition.female_fraction));
  }
  const auto plans = build_all_scenarios(cohort, specs);
  REQUIRE(plans.size() == 25);

  std::size_t index = 0;
  for (const auto& composition : reference_compositions()) {
    for (std::size_t s = 0; s < 5; ++s, ++index) {
      const auto& plan = plans[index];
      CHECK(plan.scenario == composition.name);
      CHECK(plan.targets.sex_total(Label::Malignant, Sex::Male) == composition.malignant_male);
      CHECK(plan.targets.sex_total(Label::Malignant, Sex::Female) ==
            composition.malignant_female);
      CHECK(plan.targets.sex_total(Label::Benign, Sex::Male) == composition.malignant_male);
      CHECK(plan.targets.sex_total(Label::Benign, Sex::Female) == composition.malignant_female);
      CHECK(plan.test_ids.size() == 1264);
      CHECK(plan.train_ids.size() + plan.val_ids.size() ==
            static_cast<std::size_t>(plan.targets.total()));
    }
  }

  // Same seed, same balanced test set across scenarios.
  CHECK(plans[0].test_ids == plans[5].test_ids);
  CHECK(plans[0].seed == plans[5].seed);

  // Manifests are pairwise disjoint.
  for (const auto& plan : {plans[0], plans[12], plans[24]}) {
    std::set<std::string> test(plan.test_ids.begin(), plan.test_ids.end());
    std::set<std::string> train(plan.train_ids.begin(), plan.train_ids.end());
    std::set<std::string> val(plan.val_ids.begin(), plan.val_ids.end());
    CHECK(test.size() == plan.test_ids.size());
    CHECK(train.size() == plan.train_ids.size());
    CHECK(val.size() == plan.val_ids.size());
    for (const auto& id : train) {
      CHECK(test.count(id) == 0);
      CHECK(val.count(id) == 0);
    }
    for (const auto& id : val) CHECK(test.count(id) == 0);
  }

  CHECK(build_all_scenarios(cohort, {}).empty());
}

TEST_CASE("F100 plan carries 2426 female malignant records") {
  const auto cohort = testing::reference_snapshot_cohort();
  ScenarioSpec spec = spec_for(1.0);
  spec.seeds = {1};
  const auto plans = build_all_scenarios(cohort, {spec});
  REQUIRE(plans.size() == 1);
  CHECK(plans[0].targets.sex_total(Label::Malignant, Sex::Female) == 2426);
  CHECK(plans[0].targets.sex_total(Label::Malignant, Sex::Male) == 0);
  CHECK(plans[0].targets.label_total(Label::Malignant) == 2426);
}

TEST_CASE("non-degenerate rounding deviates from r by less than one unit") {
  for (const double f : {0.25, 0.5, 0.75, 0.4, 0.6}) {
    const auto ratios = derive_ratios(spec_for(f));
    const auto solution = solve(build_lp(post_reservation_bounds(), ratios));
    REQUIRE(solution.status == LpStatus::Optimal);
    const auto targets = round_solution(solution, ratios);
    const auto male = static_cast<double>(targets.sex_total(Label::Malignant, Sex::Male));
    const auto female = static_cast<double>(targets.sex_total(Label::Malignant, Sex::Female));
    CHECK(std::abs(male - ratios.r * female) < 1.0 + 1e-9);
  }
}

TEST_CASE("raising one cell bound never lowers the objective") {
  Rng rng(314);
  for (int trial = 0; trial < 25; ++trial) {
    CohortTable table;
    for (auto& count : table.counts) count = static_cast<std::int64_t>(rng.below(400));
    const double f = 0.25 * static_cast<double>(1 + rng.below(3));
    const auto ratios = derive_ratios(spec_for(f));
    const auto base = solve(build_lp(table, ratios));
    REQUIRE(base.status == LpStatus::Optimal);

    CohortTable bumped = table;
    bumped.counts[rng.below(CohortTable::kNumCells)] += 1 + static_cast<std::int64_t>(rng.below(100));
    const auto improved = solve(build_lp(bumped, ratios));
    REQUIRE(improved.status == LpStatus::Optimal);
    CHECK(improved.objective_value >= base.objective_value - 1e-9);
  }
}

TEST_CASE("manifest writer emits stable columns and roles") {
  DatasetPlan plan;
  plan.scenario = "F50M50";
  plan.seed = 3;
  plan.test_ids = {"t1"};
  plan.train_ids = {"r1", "r2"};
  plan.val_ids = {"v1"};
  std::ostringstream out;
  write_manifest(out, plan);
  CHECK(out.str() ==
        "image_id,scenario,seed,role\n"
        "t1,F50M50,3,test\n"
        "r1,F50M50,3,train\n"
        "r2,F50M50,3,train\n"
        "v1,F50M50,3,val\n");
}

TEST_CASE("plan summaries carry the solver output and prng id") {
  const auto cohort = testing::reference_snapshot_cohort();
  ScenarioSpec spec = spec_for(0.5);
  spec.seeds = {1};
  const auto plans = build_all_scenarios(cohort, {spec});
  REQUIRE(plans.size() == 1);
  const auto summary = plans[0].summary();
  CHECK(summary["prng"] == "mt19937_64");
  CHECK(summary["lp"]["status"] == "optimal");
  CHECK(summary["lp"]["objective_value"].get<double>() == doctest::Approx(4412.0));
  CHECK(summary["targets"]["malignant_total"] == 4412);
  CHECK(summary["counts"]["test"] == 1264);
}
