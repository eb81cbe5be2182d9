#include "fairsplit/reference_data.hpp"

namespace fairsplit {

CohortTable reference_bounds() {
  CohortTable table;
  table.median_age_cutoff = 60;
  table.at(Label::Malignant, Sex::Female, AgeBand::Under60) = 1371;
  table.at(Label::Malignant, Sex::Female, AgeBand::AtLeast60) = 1641;
  table.at(Label::Malignant, Sex::Male, AgeBand::Under60) = 1261;
  table.at(Label::Malignant, Sex::Male, AgeBand::AtLeast60) = 2801;
  table.at(Label::Benign, Sex::Female, AgeBand::Under60) = 10810;
  table.at(Label::Benign, Sex::Female, AgeBand::AtLeast60) = 2397;
  table.at(Label::Benign, Sex::Male, AgeBand::Under60) = 12239;
  table.at(Label::Benign, Sex::Male, AgeBand::AtLeast60) = 3364;
  return table;
}

const std::vector<ScenarioComposition>& reference_compositions() {
  static const std::vector<ScenarioComposition> expected = {
      {"M100", 0.0, 2206, 0},
      {"F25M75", 0.25, 2206, 735},
      {"F50M50", 0.5, 2206, 2206},
      {"F75M25", 0.75, 809, 2426},
      {"F100", 1.0, 0, 2426},
  };
  return expected;
}

}  // namespace fairsplit
