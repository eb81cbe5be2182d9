#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairsplit/cohort.hpp"

namespace fairsplit {

// Cell counts of the bundled reference archive snapshot (dermoscopic
// benign/malignant query after the defined-age, dedup and one-per-patient
// steps). Used as the default bounds table for `solve` and as the golden
// input of `reproduce-table1`.
CohortTable reference_bounds();

// Expected per-scenario composition after reserving 158 records per cell,
// solving each scenario model and rounding. Benign counts mirror malignant
// ones in every scenario.
struct ScenarioComposition {
  std::string name;
  double female_fraction;
  std::int64_t malignant_male;
  std::int64_t malignant_female;
};

const std::vector<ScenarioComposition>& reference_compositions();

}  // namespace fairsplit
