#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fairsplit/cohort.hpp"
#include "fairsplit/csv.hpp"

namespace fairsplit {

struct PredictionRow {
  std::string id;
  double score = 0.0;
  int label = 0;
  Sex sex = Sex::Unknown;
};

// One run's scored test set: a single (scenario, seed, strategy) cell.
struct PredictionSet {
  std::vector<PredictionRow> rows;
  std::string scenario;
  std::uint64_t seed = 0;
  std::string strategy;
};

// Probability that a random positive outranks a random negative, ties
// counted one half (the normalised U statistic). Throws ContractError when
// either class is missing.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// AUC over the rows matching `subgroup` (nullopt = overall); errors name the
// subgroup.
double subgroup_auc(const PredictionSet& predictions, std::optional<Sex> subgroup);

enum class MwMethod { Exact, NormalApprox, Auto };
enum class StarBand { FourStars, ThreeStars, TwoStars, OneStar, NotSignificant };
enum class Direction { FemaleLower, FemaleHigher, Comparable };

std::string to_string(StarBand band);
std::string to_string(Direction direction);

struct SignificanceResult {
  double u_statistic = 0.0;  // the smaller of the two U statistics
  double p_value = 1.0;
  MwMethod method = MwMethod::Exact;
  StarBand band = StarBand::NotSignificant;
  Direction direction = Direction::Comparable;
};

// Two-sided Mann-Whitney U test. Exact mode enumerates every assignment of
// the pooled values (guarded to a combined size of 16); NormalApprox applies
// the tie-corrected normal approximation with a 0.5 continuity correction.
// Auto picks Exact whenever both samples have at most 8 values. The
// two-sided p doubles the lower tail and caps at 1.
SignificanceResult mann_whitney(const std::vector<double>& sample_a,
                                const std::vector<double>& sample_b,
                                MwMethod mode = MwMethod::Auto);

// Fig-style star bands: **** p <= 1e-4, *** p <= 1e-3, ** p <= 1e-2,
// * p <= 0.1, ns above.
StarBand star_band(double p);

struct SubgroupReport {
  double auc_overall = 0.0;  // mean of the per-seed values below
  double auc_female = 0.0;
  double auc_male = 0.0;
  std::size_t n_overall = 0;
  std::size_t n_female = 0;
  std::size_t n_male = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> per_seed_overall;
  std::vector<double> per_seed_female;
  std::vector<double> per_seed_male;
};

struct GroupReport {
  std::string scenario;
  std::string strategy;
  SubgroupReport subgroups;
  SignificanceResult significance;

  nlohmann::json to_json() const;
};

// Per-seed female and male AUCs for one scenario x strategy group, then a
// Mann-Whitney test across the two per-seed vectors. Requires at least two
// distinct seeds. The optional per-lesion mode pools every row and compares
// female scores against male scores directly instead.
enum class ComparisonMode { PerSeedAuc, PerLesionScore };
GroupReport compare_subgroups(const std::vector<PredictionSet>& runs,
                              ComparisonMode mode = ComparisonMode::PerSeedAuc);

// Groups prediction sets by (scenario, strategy) and compares each group.
std::vector<GroupReport> evaluate_groups(const std::vector<PredictionSet>& sets,
                                         ComparisonMode mode = ComparisonMode::PerSeedAuc);

// Long-format rows (scenario, strategy, subgroup, seed, auc) in stable order
// for external plotting.
Table emit_boxplot_data(const std::vector<GroupReport>& reports);

// Reads prediction rows (id, score, label, sex, scenario, seed, strategy)
// and groups them into per-(scenario, strategy, seed) sets.
std::vector<PredictionSet> parse_predictions(std::istream& in, char delimiter = ',');

void write_predictions(std::ostream& out, const PredictionSet& predictions,
                       char delimiter = ',');

}  // namespace fairsplit
