#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace fairsplit {

enum class Sex { Female, Male, Unknown };
enum class Label { Benign, Malignant };
enum class AgeBand { Under60, AtLeast60 };

std::string to_string(Sex sex);
std::string to_string(Label label);
std::string to_string(AgeBand band);

struct LesionRecord {
  std::string image_id;
  std::string patient_id;
  std::optional<int> age;
  Sex sex = Sex::Unknown;
  Label label = Label::Benign;
};

struct Cohort {
  std::vector<LesionRecord> records;
  std::string provenance;

  std::size_t size() const { return records.size(); }
};

// Row-level bookkeeping for everything the ingest and filter steps dropped
// or normalised.
struct SkipReport {
  std::size_t rows_total = 0;
  std::size_t rows_kept = 0;
  std::size_t rejected_label = 0;      // label outside {benign, malignant}
  std::size_t unparseable_age = 0;     // kept, age recorded as absent
  std::size_t unknown_sex = 0;         // kept with sex = Unknown
  std::size_t dropped_unknown_sex = 0; // dropped at tabulation time
  std::vector<std::string> notes;      // e.g. conflicting metadata per patient

  nlohmann::json to_json() const;
};

// Which header names carry each logical column.
struct ColumnMap {
  std::string image_id = "image_id";
  std::string patient_id = "patient_id";
  std::string age = "age";
  std::string sex = "sex";
  std::string label = "label";
};

// One image per (class, sex, age-band) cell; the age band splits at
// `median_age_cutoff` with the convention under60 = age < cutoff.
struct CohortTable {
  static constexpr std::size_t kNumCells = 8;

  std::array<std::int64_t, kNumCells> counts{};
  int median_age_cutoff = 60;

  static std::size_t cell_index(Label label, Sex sex, AgeBand band);
  static std::string cell_name(std::size_t index);

  std::int64_t& at(Label label, Sex sex, AgeBand band);
  std::int64_t at(Label label, Sex sex, AgeBand band) const;
  std::int64_t total() const;

  // Per-cell subtraction, clamped at zero by validation: throws
  // CapacityError when any cell is smaller than `n`.
  CohortTable minus_per_cell(std::int64_t n) const;

  nlohmann::json to_json() const;
  static CohortTable from_json(const nlohmann::json& j);
};

struct ParseResult {
  Cohort cohort;
  SkipReport report;
};

// Reads delimited text with a header row. Unparseable ages become absent,
// unrecognised sex strings become Unknown, rows with labels other than
// benign/malignant are rejected and counted.
ParseResult parse_metadata(std::istream& in, const ColumnMap& columns = {},
                           char delimiter = ',');

// Step 1: keep only records with a defined age.
Cohort filter_defined_age(const Cohort& cohort);

// Step 2: drop exact image_id duplicates (first occurrence wins) plus the
// second element of every externally supplied duplicate pair.
Cohort dedup(const Cohort& cohort,
             const std::vector<std::pair<std::string, std::string>>& duplicate_pairs = {});

// Step 3: keep one uniformly chosen image per patient; the draw is
// deterministic per seed.
Cohort one_per_patient(const Cohort& cohort, std::uint64_t seed);

// Counts the eight (class, sex, age-band) cells. Every record must have a
// defined age and a known sex.
CohortTable tabulate(const Cohort& cohort, int cutoff = 60);

// As above, but records with Unknown sex are dropped and counted instead of
// rejected (the model has no cell for them).
CohortTable tabulate(const Cohort& cohort, int cutoff, SkipReport& report);

// Re-emits a cohort in the ingest format.
void write_cohort(std::ostream& out, const Cohort& cohort, char delimiter = ',');

std::size_t cell_index_of(const LesionRecord& record, int cutoff);

}  // namespace fairsplit
