#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "fairsplit/cohort.hpp"
#include "fairsplit/lp_core.hpp"

namespace fairsplit {

// Target composition for one dataset family: a female patient fraction,
// per-sex age ratios, the seeds to instantiate and the balanced test cell
// size.
struct ScenarioSpec {
  double female_fraction = 0.5;
  double age_ratio = 1.0;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::int64_t test_cell_size = 158;

  std::string name() const;
};

// Equality-row ratios of the scenario model. r ties malignant male counts to
// female ones, s/t/u/v tie the under-60 bands to the at-least-60 bands, and
// w mirrors r on the benign side. The degenerate single-sex scenarios set a
// flag instead of an infinite ratio.
struct RatioSet {
  double r = 1.0;
  double s = 1.0;
  double t = 1.0;
  double u = 1.0;
  double v = 1.0;
  double w = 1.0;
  bool female_only = false;
  bool male_only = false;
};

// Positions of the fourteen decision variables in the scenario model.
enum ScenarioVar : std::size_t {
  kMalTotal = 0,
  kBenTotal,
  kMalMale,
  kMalFemale,
  kBenMale,
  kBenFemale,
  kMalMaleUnder60,
  kMalMaleAtLeast60,
  kMalFemaleUnder60,
  kMalFemaleAtLeast60,
  kBenMaleUnder60,
  kBenMaleAtLeast60,
  kBenFemaleUnder60,
  kBenFemaleAtLeast60,
  kNumScenarioVars
};

// Integer per-cell targets for sampling, derived from a continuous optimum.
struct CellTargets {
  std::array<std::int64_t, CohortTable::kNumCells> cells{};

  std::int64_t at(Label label, Sex sex, AgeBand band) const {
    return cells[CohortTable::cell_index(label, sex, band)];
  }
  std::int64_t sex_total(Label label, Sex sex) const;
  std::int64_t label_total(Label label) const;
  std::int64_t total() const;

  nlohmann::json to_json() const;
};

// Everything needed to materialise one (scenario, seed) dataset instance.
struct DatasetPlan {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<std::string> test_ids;
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  CellTargets targets;
  LpSolution lp_solution;

  nlohmann::json summary() const;
};

// f in (0,1) fixes r = w = (1-f)/f; the age ratios all take the configured
// value. f = 0 and f = 1 set the degenerate flags.
RatioSet derive_ratios(const ScenarioSpec& spec);

// Builds the scenario LP: maximize the malignant total under the thirteen
// equality rows (ratio rows replaced by zero-forcing rows in degenerate
// scenarios), cell bounds from `table`, and implied bounds on the sums.
LpProblem build_lp(const CohortTable& table, const RatioSet& ratios);

std::vector<std::string> scenario_var_names();

struct ReserveResult {
  std::vector<std::string> test_ids;
  Cohort remaining;
};

// Draws `per_cell` records from each of the eight cells into the balanced
// test set. Throws CapacityError naming the first deficient cell.
ReserveResult reserve_test_cells(const Cohort& cohort, std::int64_t per_cell,
                                 std::uint64_t seed, int cutoff = 60);

// Nearest-integer rounding at the sex level (half away from zero); age-cell
// targets split each rounded sex total per the age ratio, with the extra
// unit of an odd total assigned to the under-60 band.
CellTargets round_solution(const LpSolution& solution, const RatioSet& ratios);

// Uniform seeded draw of exactly the target count per cell.
Cohort sample_dataset(const Cohort& remaining, const CellTargets& targets,
                      std::uint64_t seed, int cutoff = 60);

struct SplitResult {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
};

// Stratified 80/20 split over the eight cells; the validation side receives
// the remainder of each cell after the 80% floor.
SplitResult split_train_val(const Cohort& sample, std::uint64_t seed, int cutoff = 60);

// Full pipeline for a list of scenario specs. The balanced test set of a
// given seed is reserved once and shared by all scenarios run under that
// seed.
std::vector<DatasetPlan> build_all_scenarios(const Cohort& cohort,
                                             const std::vector<ScenarioSpec>& specs,
                                             int cutoff = 60);

// Manifest rows: image_id, scenario, seed, role.
void write_manifest(std::ostream& out, const DatasetPlan& plan, char delimiter = ',');

}  // namespace fairsplit
