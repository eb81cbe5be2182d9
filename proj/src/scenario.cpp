#include "fairsplit/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

#include "fairsplit/csv.hpp"
#include "fairsplit/errors.hpp"
#include "fairsplit/rng.hpp"

namespace fairsplit {

namespace {

void require_valid(const ScenarioSpec& spec) {
  if (spec.female_fraction < 0.0 || spec.female_fraction > 1.0) {
    throw ValidationError("female_fraction must lie in [0, 1]");
  }
  if (!(spec.age_ratio > 0.0)) {
    throw ValidationError("age_ratio must be positive");
  }
  if (spec.seeds.empty()) {
    throw ValidationError("seeds must be non-empty");
  }
  std::set<std::uint64_t> distinct(spec.seeds.begin(), spec.seeds.end());
  if (distinct.size() != spec.seeds.size()) {
    throw ValidationError("seeds must be distinct");
  }
  if (spec.test_cell_size < 0) {
    throw ValidationError("test_cell_size must be non-negative");
  }
}

struct CellGroups {
  std::array<std::vector<std::size_t>, CohortTable::kNumCells> indices;
};

CellGroups group_by_cell(const Cohort& cohort, int cutoff) {
  CellGroups groups;
  for (std::size_t i = 0; i < cohort.records.size(); ++i) {
    groups.indices[cell_index_of(cohort.records[i], cutoff)].push_back(i);
  }
  return groups;
}

// Splits an integer sex total into (under60, atLeast60) per the ratio
// under/over = ratio; an odd leftover unit lands in the under-60 band.
std::pair<std::int64_t, std::int64_t> split_by_age(std::int64_t total, double ratio) {
  const double under_exact = static_cast<double>(total) * ratio / (1.0 + ratio);
  const double over_exact = static_cast<double>(total) / (1.0 + ratio);
  std::int64_t under = static_cast<std::int64_t>(std::floor(under_exact + 1e-9));
  std::int64_t over = static_cast<std::int64_t>(std::floor(over_exact + 1e-9));
  under += total - under - over;
  return {under, over};
}

}  // namespace

std::string ScenarioSpec::name() const {
  const long female_pct = std::lround(female_fraction * 100.0);
  if (female_pct == 0) return "M100";
  if (female_pct == 100) return "F100";
  return "F" + std::to_string(female_pct) + "M" + std::to_string(100 - female_pct);
}

RatioSet derive_ratios(const ScenarioSpec& spec) {
  require_valid(spec);
  RatioSet ratios;
  ratios.s = ratios.t = ratios.u = ratios.v = spec.age_ratio;
  if (spec.female_fraction == 0.0) {
    ratios.male_only = true;
  } else if (spec.female_fraction == 1.0) {
    ratios.female_only = true;
  } else {
    ratios.r = ratios.w = (1.0 - spec.female_fraction) / spec.female_fraction;
  }
  return ratios;
}

std::vector<std::string> scenario_var_names() {
  return {"mal_total",     "ben_total",     "mal_male",      "mal_female",
          "ben_male",      "ben_female",    "mal_male_u60",  "mal_male_o60",
          "mal_female_u60", "mal_female_o60", "ben_male_u60",  "ben_male_o60",
          "ben_female_u60", "ben_female_o60"};
}

LpProblem build_lp(const CohortTable& table, const RatioSet& ratios) {
  LpProblem problem;
  problem.num_vars = kNumScenarioVars;
  problem.var_names = scenario_var_names();
  problem.objective.assign(kNumScenarioVars, 0.0);
  problem.objective[kMalTotal] = 1.0;

  const auto cell = [&table](Label label, Sex sex, AgeBand band) {
    return static_cast<double>(table.at(label, sex, band));
  };
  problem.upper_bounds.assign(kNumScenarioVars, std::nullopt);
  problem.upper_bounds[kMalMaleUnder60] = cell(Label::Malignant, Sex::Male, AgeBand::Under60);
  problem.upper_bounds[kMalMaleAtLeast60] = cell(Label::Malignant, Sex::Male, AgeBand::AtLeast60);
  problem.upper_bounds[kMalFemaleUnder60] = cell(Label::Malignant, Sex::Female, AgeBand::Under60);
  problem.upper_bounds[kMalFemaleAtLeast60] =
      cell(Label::Malignant, Sex::Female, AgeBand::AtLeast60);
  problem.upper_bounds[kBenMaleUnder60] = cell(Label::Benign, Sex::Male, AgeBand::Under60);
  problem.upper_bounds[kBenMaleAtLeast60] = cell(Label::Benign, Sex::Male, AgeBand::AtLeast60);
  problem.upper_bounds[kBenFemaleUnder60] = cell(Label::Benign, Sex::Female, AgeBand::Under60);
  problem.upper_bounds[kBenFemaleAtLeast60] =
      cell(Label::Benign, Sex::Female, AgeBand::AtLeast60);

  const double mal_male_cap = *problem.upper_bounds[kMalMaleUnder60] +
                              *problem.upper_bounds[kMalMaleAtLeast60];
  const double mal_female_cap = *problem.upper_bounds[kMalFemaleUnder60] +
                                *problem.upper_bounds[kMalFemaleAtLeast60];
  const double ben_male_cap = *problem.upper_bounds[kBenMaleUnder60] +
                              *problem.upper_bounds[kBenMaleAtLeast60];
  const double ben_female_cap = *problem.upper_bounds[kBenFemaleUnder60] +
                                *problem.upper_bounds[kBenFemaleAtLeast60];
  problem.upper_bounds[kMalMale] = mal_male_cap;
  problem.upper_bounds[kMalFemale] = mal_female_cap;
  problem.upper_bounds[kBenMale] = ben_male_cap;
  problem.upper_bounds[kBenFemale] = ben_female_cap;
  problem.upper_bounds[kMalTotal] = mal_male_cap + mal_female_cap;
  problem.upper_bounds[kBenTotal] = ben_male_cap + ben_female_cap;

  const auto row = [&problem](std::initializer_list<std::pair<ScenarioVar, double>> terms) {
    EqualityRow eq;
    eq.coeffs.assign(kNumScenarioVars, 0.0);
    for (const auto& [var, coeff] : terms) eq.coeffs[var] = coeff;
    eq.rhs = 0.0;
    problem.eq_constraints.push_back(std::move(eq));
  };

  // Balanced classes.
  row({{kMalTotal, 1.0}, {kBenTotal, -1.0}});
  // Malignant male/female ratio, or the zero-forcing replacement.
  if (ratios.male_only) {
    row({{kMalFemale, 1.0}});
  } else if (ratios.female_only) {
    row({{kMalMale, 1.0}});
  } else {
    row({{kMalFemale, ratios.r}, {kMalMale, -1.0}});
  }
  // Age ratios inside the malignant sexes.
  row({{kMalMaleAtLeast60, ratios.s}, {kMalMaleUnder60, -1.0}});
  row({{kMalFemaleAtLeast60, ratios.t}, {kMalFemaleUnder60, -1.0}});
  // Aggregation identities, malignant side.
  row({{kMalTotal, 1.0}, {kMalMale, -1.0}, {kMalFemale, -1.0}});
  row({{kMalMale, 1.0}, {kMalMaleUnder60, -1.0}, {kMalMaleAtLeast60, -1.0}});
  row({{kMalFemale, 1.0}, {kMalFemaleUnder60, -1.0}, {kMalFemaleAtLeast60, -1.0}});
  // Age ratios inside the benign sexes.
  row({{kBenMaleAtLeast60, ratios.u}, {kBenMaleUnder60, -1.0}});
  row({{kBenFemaleAtLeast60, ratios.v}, {kBenFemaleUnder60, -1.0}});
  // Aggregation identities, benign side.
  row({{kBenTotal, 1.0}, {kBenMale, -1.0}, {kBenFemale, -1.0}});
  row({{kBenFemale, 1.0}, {kBenFemaleUnder60, -1.0}, {kBenFemaleAtLeast60, -1.0}});
  row({{kBenMale, 1.0}, {kBenMaleUnder60, -1.0}, {kBenMaleAtLeast60, -1.0}});
  // Benign male/female ratio, or the zero-forcing replacement.
  if (ratios.male_only) {
    row({{kBenFemale, 1.0}});
  } else if (ratios.female_only) {
    row({{kBenMale, 1.0}});
  } else {
    row({{kBenFemale, ratios.w}, {kBenMale, -1.0}});
  }

  return problem;
}

ReserveResult reserve_test_cells(const Cohort& cohort, std::int64_t per_cell,
                                 std::uint64_t seed, int cutoff) {
  if (per_cell < 0) {
    throw ValidationError("per_cell must be non-negative");
  }
  const CellGroups groups = group_by_cell(cohort, cutoff);
  for (std::size_t c = 0; c < CohortTable::kNumCells; ++c) {
    if (static_cast<std::int64_t>(groups.indices[c].size()) < per_cell) {
      throw CapacityError("cell " + CohortTable::cell_name(c) + " holds " +
                          std::to_string(groups.indices[c].size()) +
                          " records, cannot reserve " + std::to_string(per_cell));
    }
  }

  Rng rng(seed_for(seed, "reserve_test"));
  std::vector<bool> reserved(cohort.records.size(), false);
  ReserveResult result;
  for (std::size_t c = 0; c < CohortTable::kNumCells; ++c) {
    const auto& pool = groups.indices[c];
    const auto chosen = rng.sample_indices(pool.size(), static_cast<std::size_t>(per_cell));
    for (const auto k : chosen) {
      reserved[pool[k]] = true;
      result.test_ids.push_back(cohort.records[pool[k]].image_id);
    }
  }
  result.remaining.provenance = cohort.provenance + "; test-reserved(seed=" +
                                std::to_string(seed) + ", per_cell=" +
                                std::to_string(per_cell) + ")";
  for (std::size_t i = 0; i < cohort.records.size(); ++i) {
    if (!reserved[i]) result.remaining.records.push_back(cohort.records[i]);
  }
  return result;
}

std::int64_t CellTargets::sex_total(Label label, Sex sex) const {
  return at(label, sex, AgeBand::Under60) + at(label, sex, AgeBand::AtLeast60);
}

std::int64_t CellTargets::label_total(Label label) const {
  return sex_total(label, Sex::Male) + sex_total(label, Sex::Female);
}

std::int64_t CellTargets::total() const {
  return label_total(Label::Malignant) + label_total(Label::Benign);
}

nlohmann::json CellTargets::to_json() const {
  nlohmann::json cells;
  for (std::size_t i = 0; i < CohortTable::kNumCells; ++i) {
    cells[CohortTable::cell_name(i)] = this->cells[i];
  }
  return nlohmann::json{
      {"cells", cells},
      {"malignant_male", sex_total(Label::Malignant, Sex::Male)},
      {"malignant_female", sex_total(Label::Malignant, Sex::Female)},
      {"benign_male", sex_total(Label::Benign, Sex::Male)},
      {"benign_female", sex_total(Label::Benign, Sex::Female)},
      {"malignant_total", label_total(Label::Malignant)},
      {"benign_total", label_total(Label::Benign)},
  };
}

CellTargets round_solution(const LpSolution& solution, const RatioSet& ratios) {
  if (solution.status != LpStatus::Optimal) {
    throw ContractError("round_solution requires an optimal solution");
  }
  if (solution.values.size() != kNumScenarioVars) {
    throw ContractError("round_solution expects the scenario variable layout");
  }
  const auto rounded = [&solution](ScenarioVar var) {
    return static_cast<std::int64_t>(std::llround(solution.values[var]));
  };

  CellTargets targets;
  const auto assign = [&targets](Label label, Sex sex, std::int64_t total, double age_ratio) {
    const auto [under, over] = split_by_age(total, age_ratio);
    targets.cells[CohortTable::cell_index(label, sex, AgeBand::Under60)] = under;
    targets.cells[CohortTable::cell_index(label, sex, AgeBand::AtLeast60)] = over;
  };
  assign(Label::Malignant, Sex::Male, rounded(kMalMale), ratios.s);
  assign(Label::Malignant, Sex::Female, rounded(kMalFemale), ratios.t);
  assign(Label::Benign, Sex::Male, rounded(kBenMale), ratios.u);
  assign(Label::Benign, Sex::Female, rounded(kBenFemale), ratios.v);
  return targets;
}

Cohort sample_dataset(const Cohort& remaining, const CellTargets& targets,
                      std::uint64_t seed, int cutoff) {
  const CellGroups groups = group_by_cell(remaining, cutoff);
  for (std::size_t c = 0; c < CohortTable::kNumCells; ++c) {
    if (static_cast<std::int64_t>(groups.indices[c].size()) < targets.cells[c]) {
      throw CapacityError("cell " + CohortTable::cell_name(c) + " holds " +
                          std::to_string(groups.indices[c].size()) + " records, target is " +
                          std::to_string(targets.cells[c]));
    }
    if (targets.cells[c] < 0) {
      throw ContractError("negative target for cell " + CohortTable::cell_name(c));
    }
  }

  Rng rng(seed_for(seed, "sample_cells"));
  std::vector<std::size_t> selected;
  for (std::size_t c = 0; c < CohortTable::kNumCells; ++c) {
    const auto& pool = groups.indices[c];
    const auto chosen =
        rng.sample_indices(pool.size(), static_cast<std::size_t>(targets.cells[c]));
    for (const auto k : chosen) selected.push_back(pool[k]);
  }
  std::sort(selected.begin(), selected.end());

  Cohort sample;
  sample.provenance = remaining.provenance + "; sampled(seed=" + std::to_string(seed) + ")";
  sample.records.reserve(selected.size());
  for (const auto i : selected) sample.records.push_back(remaining.records[i]);
  return sample;
}

SplitResult split_train_val(const Cohort& sample, std::uint64_t seed, int cutoff) {
  const CellGroups groups = group_by_cell(sample, cutoff);
  Rng rng(seed_for(seed, "split_train_val"));
  std::vector<bool> in_train(sample.records.size(), false);
  for (std::size_t c = 0; c < CohortTable::kNumCells; ++c) {
    const auto& pool = groups.indices[c];
    const std::size_t train_count = pool.size() * 4 / 5;
    const auto chosen = rng.sample_indices(pool.size(), train_count);
    for (const auto k : chosen) in_train[pool[k]] = true;
  }
  SplitResult result;
  for (std::size_t i = 0; i < sample.records.size(); ++i) {
    (in_train[i] ? result.train_ids : result.val_ids).push_back(sample.records[i].image_id);
  }
  return result;
}

nlohmann::json DatasetPlan::summary() const {
  nlohmann::json lp;
  lp["status"] = to_string(lp_solution.status);
  lp["objective_value"] = lp_solution.objective_value;
  const auto names = scenario_var_names();
  nlohmann::json values;
  for (std::size_t i = 0; i < lp_solution.values.size() && i < names.size(); ++i) {
    values[names[i]] = lp_solution.values[i];
  }
  lp["values"] = values;
  return nlohmann::json{{"scenario", scenario},
                        {"seed", seed},
                        {"prng", std::string(Rng::kAlgorithm)},
                        {"counts",
                         {{"test", test_ids.size()},
                          {"train", train_ids.size()},
                          {"val", val_ids.size()}}},
                        {"lp", lp},
                        {"targets", targets.to_json()}};
}

std::vector<DatasetPlan> build_all_scenarios(const Cohort& cohort,
                                             const std::vector<ScenarioSpec>& specs,
                                             int cutoff) {
  std::vector<DatasetPlan> plans;
  if (specs.empty()) return plans;
  for (const auto& spec : specs) require_valid(spec);
  const std::int64_t per_cell = specs.front().test_cell_size;
  for (const auto& spec : specs) {
    if (spec.test_cell_size != per_cell) {
      throw ValidationError(
          "all scenarios of one run must share test_cell_size so the per-seed "
          "test set can be shared");
    }
  }

  // One balanced test set per seed, shared by every scenario under it.
  std::map<std::uint64_t, ReserveResult> reservations;
  const auto reservation_for = [&](std::uint64_t seed) -> const ReserveResult& {
    auto it = reservations.find(seed);
    if (it == reservations.end()) {
      it = reservations.emplace(seed, reserve_test_cells(cohort, per_cell, seed, cutoff)).first;
    }
    return it->second;
  };

  for (const auto& spec : specs) {
    const RatioSet ratios = derive_ratios(spec);
    const std::string name = spec.name();
    for (const auto seed : spec.seeds) {
      const ReserveResult& reservation = reservation_for(seed);
      const CohortTable table = tabulate(reservation.remaining, cutoff);
      const LpProblem problem = build_lp(table, ratios);
      const LpSolution solution = solve(problem);
      if (solution.status != LpStatus::Optimal) {
        throw CapacityError("scenario " + name + " seed " + std::to_string(seed) +
                            ": LP is " + to_string(solution.status));
      }
      DatasetPlan plan;
      plan.scenario = name;
      plan.seed = seed;
      plan.lp_solution = solution;
      plan.targets = round_solution(solution, ratios);
      plan.test_ids = reservation.test_ids;
      try {
        const Cohort sample = sample_dataset(reservation.remaining, plan.targets,
                                             seed_for(seed, "scenario:" + name), cutoff);
        auto split = split_train_val(sample, seed_for(seed, "scenario:" + name), cutoff);
        plan.train_ids = std::move(split.train_ids);
        plan.val_ids = std::move(split.val_ids);
      } catch (const CapacityError& e) {
        throw CapacityError("scenario " + name + " seed " + std::to_string(seed) + ": " +
                            e.what());
      }
      plans.push_back(std::move(plan));
    }
  }
  return plans;
}

void write_manifest(std::ostream& out, const DatasetPlan& plan, char delimiter) {
  Table table;
  table.header = {"image_id", "scenario", "seed", "role"};
  const auto append = [&](const std::vector<std::string>& ids, const char* role) {
    for (const auto& id : ids) {
      table.rows.push_back({id, plan.scenario, std::to_string(plan.seed), role});
    }
  };
  append(plan.test_ids, "test");
  append(plan.train_ids, "train");
  append(plan.val_ids, "val");
  write_delimited(out, table, delimiter);
}

}  // namespace fairsplit
