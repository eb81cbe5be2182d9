#pragma once

#include <string>

#include "fairsplit/cohort.hpp"
#include "fairsplit/reference_data.hpp"

namespace fairsplit::testing {

// Synthetic cohort whose cell counts match `table`; one patient per record,
// ages spread inside each band.
inline Cohort cohort_from_table(const CohortTable& table) {
  Cohort cohort;
  cohort.provenance = "synthetic-snapshot";
  for (std::size_t c = 0; c < CohortTable::kNumCells; ++c) {
    const bool malignant = c < 4;
    const bool male = (c % 4) < 2;
    const bool under60 = (c % 2) == 0;
    for (std::int64_t k = 0; k < table.counts[c]; ++k) {
      LesionRecord record;
      record.image_id = "img_c" + std::to_string(c) + "_" + std::to_string(k);
      record.patient_id = "pat_c" + std::to_string(c) + "_" + std::to_string(k);
      record.age = under60 ? static_cast<int>(30 + k % 30) : static_cast<int>(60 + k % 30);
      record.sex = male ? Sex::Male : Sex::Female;
      record.label = malignant ? Label::Malignant : Label::Benign;
      cohort.records.push_back(std::move(record));
    }
  }
  return cohort;
}

inline Cohort reference_snapshot_cohort() { return cohort_from_table(reference_bounds()); }

}  // namespace fairsplit::testing
