#include "fairsplit/cohort.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "fairsplit/csv.hpp"
#include "fairsplit/errors.hpp"
#include "fairsplit/rng.hpp"

namespace fairsplit {

std::string to_string(Sex sex) {
  switch (sex) {
    case Sex::Female: return "female";
    case Sex::Male: return "male";
    case Sex::Unknown: return "unknown";
  }
  return "unknown";
}

std::string to_string(Label label) {
  return label == Label::Malignant ? "malignant" : "benign";
}

std::string to_string(AgeBand band) {
  return band == AgeBand::Under60 ? "under60" : "atLeast60";
}

std::size_t CohortTable::cell_index(Label label, Sex sex, AgeBand band) {
  if (sex == Sex::Unknown) {
    throw ContractError("CohortTable has no cell for unknown sex");
  }
  const std::size_t label_part = label == Label::Malignant ? 0 : 1;
  const std::size_t sex_part = sex == Sex::Male ? 0 : 1;
  const std::size_t band_part = band == AgeBand::Under60 ? 0 : 1;
  return label_part * 4 + sex_part * 2 + band_part;
}

std::string CohortTable::cell_name(std::size_t index) {
  static const std::array<std::string, kNumCells> names = {
      "malignant/male/under60",   "malignant/male/atLeast60",
      "malignant/female/under60", "malignant/female/atLeast60",
      "benign/male/under60",      "benign/male/atLeast60",
      "benign/female/under60",    "benign/female/atLeast60"};
  return names.at(index);
}

std::int64_t& CohortTable::at(Label label, Sex sex, AgeBand band) {
  return counts[cell_index(label, sex, band)];
}

std::int64_t CohortTable::at(Label label, Sex sex, AgeBand band) const {
  return counts[cell_index(label, sex, band)];
}

std::int64_t CohortTable::total() const {
  std::int64_t sum = 0;
  for (const auto c : counts) sum += c;
  return sum;
}

CohortTable CohortTable::minus_per_cell(std::int64_t n) const {
  CohortTable result = *this;
  for (std::size_t i = 0; i < kNumCells; ++i) {
    if (counts[i] < n) {
      throw CapacityError("cell " + cell_name(i) + " holds " + std::to_string(counts[i]) +
                          " records, cannot subtract " + std::to_string(n));
    }
    result.counts[i] = counts[i] - n;
  }
  return result;
}

nlohmann::json CohortTable::to_json() const {
  nlohmann::json cells;
  for (std::size_t i = 0; i < kNumCells; ++i) {
    cells[cell_name(i)] = counts[i];
  }
  return nlohmann::json{{"cells", cells}, {"median_age_cutoff", median_age_cutoff}};
}

CohortTable CohortTable::from_json(const nlohmann::json& j) {
  CohortTable table;
  const auto& cells = j.at("cells");
  for (std::size_t i = 0; i < kNumCells; ++i) {
    table.counts[i] = cells.at(cell_name(i)).get<std::int64_t>();
  }
  if (j.contains("median_age_cutoff")) {
    table.median_age_cutoff = j.at("median_age_cutoff").get<int>();
  }
  return table;
}

nlohmann::json SkipReport::to_json() const {
  return nlohmann::json{{"rows_total", rows_total},
                        {"rows_kept", rows_kept},
                        {"rejected_label", rejected_label},
                        {"unparseable_age", unparseable_age},
                        {"unknown_sex", unknown_sex},
                        {"dropped_unknown_sex", dropped_unknown_sex},
                        {"notes", notes}};
}

namespace {

std::string lower(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return text;
}

std::optional<int> parse_age(const std::string& text) {
  const std::string trimmed = text;
  if (trimmed.empty()) return std::nullopt;
  int value = 0;
  const auto* begin = trimmed.data();
  const auto* end = trimmed.data() + trimmed.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{}) return std::nullopt;
  // Accept a trailing ".0" style fraction, reject anything else.
  if (result.ptr != end) {
    std::string_view rest(result.ptr, static_cast<std::size_t>(end - result.ptr));
    if (rest.size() < 2 || rest.front() != '.') return std::nullopt;
    for (const char c : rest.substr(1)) {
      if (c != '0') return std::nullopt;
    }
  }
  if (value < 0 || value > 130) return std::nullopt;
  return value;
}

Sex parse_sex(const std::string& text) {
  const std::string s = lower(text);
  if (s == "female" || s == "f") return Sex::Female;
  if (s == "male" || s == "m") return Sex::Male;
  return Sex::Unknown;
}

std::size_t column_of(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw DataError("missing mandatory column: " + name);
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

ParseResult parse_metadata(std::istream& in, const ColumnMap& columns, char delimiter) {
  const Table table = read_delimited(in, delimiter);
  const std::size_t idx_image = column_of(table.header, columns.image_id);
  const std::size_t idx_patient = column_of(table.header, columns.patient_id);
  const std::size_t idx_age = column_of(table.header, columns.age);
  const std::size_t idx_sex = column_of(table.header, columns.sex);
  const std::size_t idx_label = column_of(table.header, columns.label);

  ParseResult result;
  result.report.rows_total = table.rows.size();
  std::unordered_set<std::string> seen_ids;
  seen_ids.reserve(table.rows.size());

  for (const auto& row : table.rows) {
    if (row.size() <= std::max({idx_image, idx_patient, idx_age, idx_sex, idx_label})) {
      throw DataError("row has fewer fields than the header");
    }
    const std::string label_text = lower(row[idx_label]);
    if (label_text != "benign" && label_text != "malignant") {
      ++result.report.rejected_label;
      continue;
    }
    LesionRecord record;
    record.image_id = row[idx_image];
    record.patient_id = row[idx_patient];
    record.label = label_text == "malignant" ? Label::Malignant : Label::Benign;
    record.age = parse_age(row[idx_age]);
    if (!record.age) ++result.report.unparseable_age;
    record.sex = parse_sex(row[idx_sex]);
    if (record.sex == Sex::Unknown) ++result.report.unknown_sex;
    if (record.image_id.empty()) {
      throw DataError("empty image_id");
    }
    if (!seen_ids.insert(record.image_id).second) {
      throw DataError("duplicate image_id: " + record.image_id);
    }
    result.cohort.records.push_back(std::move(record));
  }
  result.report.rows_kept = result.cohort.records.size();
  result.cohort.provenance = "parsed";
  return result;
}

Cohort filter_defined_age(const Cohort& cohort) {
  Cohort filtered;
  filtered.provenance = cohort.provenance + "; defined-age";
  for (const auto& record : cohort.records) {
    if (record.age) filtered.records.push_back(record);
  }
  return filtered;
}

Cohort dedup(const Cohort& cohort,
             const std::vector<std::pair<std::string, std::string>>& duplicate_pairs) {
  std::unordered_set<std::string> known_ids;
  known_ids.reserve(cohort.records.size());
  for (const auto& record : cohort.records) known_ids.insert(record.image_id);

  std::unordered_set<std::string> flagged;
  for (const auto& [keep, remove] : duplicate_pairs) {
    if (!known_ids.count(keep)) {
      throw DataError("duplicate list references unknown image_id: " + keep);
    }
    if (!known_ids.count(remove)) {
      throw DataError("duplicate list references unknown image_id: " + remove);
    }
    flagged.insert(remove);
  }

  Cohort deduped;
  deduped.provenance = cohort.provenance + "; dedup";
  std::unordered_set<std::string> seen;
  seen.reserve(cohort.records.size());
  for (const auto& record : cohort.records) {
    if (flagged.count(record.image_id)) continue;
    if (!seen.insert(record.image_id).second) continue;
    deduped.records.push_back(record);
  }
  return deduped;
}

Cohort one_per_patient(const Cohort& cohort, std::uint64_t seed) {
  // Group by patient in first-appearance order, then draw one index per
  // patient from a single seeded stream.
  std::vector<std::string> patient_order;
  std::unordered_map<std::string, std::vector<std::size_t>> by_patient;
  for (std::size_t i = 0; i < cohort.records.size(); ++i) {
    const auto& pid = cohort.records[i].patient_id;
    auto [it, inserted] = by_patient.try_emplace(pid);
    if (inserted) patient_order.push_back(pid);
    it->second.push_back(i);
  }

  Rng rng(seed_for(seed, "one_per_patient"));
  std::vector<std::size_t> chosen;
  chosen.reserve(patient_order.size());
  for (const auto& pid : patient_order) {
    const auto& indices = by_patient[pid];
    chosen.push_back(indices[rng.below(indices.size())]);
  }
  std::sort(chosen.begin(), chosen.end());

  Cohort picked;
  picked.provenance = cohort.provenance + "; one-per-patient(seed=" + std::to_string(seed) + ")";
  picked.records.reserve(chosen.size());
  for (const auto i : chosen) picked.records.push_back(cohort.records[i]);
  return picked;
}

std::size_t cell_index_of(const LesionRecord& record, int cutoff) {
  if (!record.age) {
    throw ContractError("record " + record.image_id + " has no age");
  }
  const AgeBand band = *record.age < cutoff ? AgeBand::Under60 : AgeBand::AtLeast60;
  return CohortTable::cell_index(record.label, record.sex, band);
}

CohortTable tabulate(const Cohort& cohort, int cutoff) {
  CohortTable table;
  table.median_age_cutoff = cutoff;
  for (const auto& record : cohort.records) {
    if (record.sex == Sex::Unknown) {
      throw ContractError("record " + record.image_id + " has unknown sex");
    }
    ++table.counts[cell_index_of(record, cutoff)];
  }
  return table;
}

CohortTable tabulate(const Cohort& cohort, int cutoff, SkipReport& report) {
  CohortTable table;
  table.median_age_cutoff = cutoff;
  for (const auto& record : cohort.records) {
    if (record.sex == Sex::Unknown) {
      ++report.dropped_unknown_sex;
      continue;
    }
    ++table.counts[cell_index_of(record, cutoff)];
  }
  return table;
}

void write_cohort(std::ostream& out, const Cohort& cohort, char delimiter) {
  Table table;
  table.header = {"image_id", "patient_id", "age", "sex", "label"};
  table.rows.reserve(cohort.records.size());
  for (const auto& record : cohort.records) {
    table.rows.push_back({record.image_id, record.patient_id,
                          record.age ? std::to_string(*record.age) : "",
                          to_string(record.sex), to_string(record.label)});
  }
  write_delimited(out, table, delimiter);
}

}  // namespace fairsplit
