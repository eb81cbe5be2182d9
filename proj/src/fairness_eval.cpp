#include "fairsplit/fairness_eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <set>
#include <tuple>

#include "fairsplit/errors.hpp"

namespace fairsplit {

namespace {

// Midranks (1-based, ties averaged) of the given values.
std::vector<double> midranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&values](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double shared = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = shared;
    i = j;
  }
  return ranks;
}

double u_from_ranks(const std::vector<double>& pooled_ranks,
                    const std::vector<std::size_t>& subset_indices) {
  double rank_sum = 0.0;
  for (const auto i : subset_indices) rank_sum += pooled_ranks[i];
  const double n_a = static_cast<double>(subset_indices.size());
  return rank_sum - n_a * (n_a + 1.0) / 2.0;
}

}  // namespace

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw ContractError("auc: scores and labels differ in length");
  }
  std::size_t positives = 0;
  for (const int label : labels) {
    if (label != 0 && label != 1) {
      throw ContractError("auc: labels must be 0 or 1");
    }
    positives += static_cast<std::size_t>(label);
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw ContractError("auc: needs at least one positive and one negative");
  }

  const std::vector<double> ranks = midranks(scores);
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1) positive_rank_sum += ranks[i];
  }
  const double n1 = static_cast<double>(positives);
  const double n0 = static_cast<double>(negatives);
  const double u = positive_rank_sum - n1 * (n1 + 1.0) / 2.0;
  return u / (n1 * n0);
}

double subgroup_auc(const PredictionSet& predictions, std::optional<Sex> subgroup) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& row : predictions.rows) {
    if (subgroup && row.sex != *subgroup) continue;
    scores.push_back(row.score);
    labels.push_back(row.label);
  }
  const std::string name = subgroup ? to_string(*subgroup) : "overall";
  if (scores.empty()) {
    throw ContractError("AUC undefined for empty subgroup " + name);
  }
  try {
    return auc(scores, labels);
  } catch (const ContractError&) {
    throw ContractError("AUC undefined for subgroup " + name + " (scenario " +
                        predictions.scenario + ", seed " + std::to_string(predictions.seed) +
                        ", strategy " + predictions.strategy + "): needs both classes");
  }
}

std::string to_string(StarBand band) {
  switch (band) {
    case StarBand::FourStars: return "****";
    case StarBand::ThreeStars: return "***";
    case StarBand::TwoStars: return "**";
    case StarBand::OneStar: return "*";
    case StarBand::NotSignificant: return "ns";
  }
  return "ns";
}

std::string to_string(Direction direction) {
  switch (direction) {
    case Direction::FemaleLower: return "femaleLower";
    case Direction::FemaleHigher: return "femaleHigher";
    case Direction::Comparable: return "comparable";
  }
  return "comparable";
}

StarBand star_band(double p) {
  if (!(p > 0.0) || p > 1.0) {
    throw ContractError("star_band: p must lie in (0, 1]");
  }
  if (p <= 0.0001) return StarBand::FourStars;
  if (p <= 0.001) return StarBand::ThreeStars;
  if (p <= 0.01) return StarBand::TwoStars;
  if (p <= 0.1) return StarBand::OneStar;
  return StarBand::NotSignificant;
}

SignificanceResult mann_whitney(const std::vector<double>& sample_a,
                                const std::vector<double>& sample_b, MwMethod mode) {
  if (sample_a.empty() || sample_b.empty()) {
    throw ContractError("mann_whitney: both samples must be non-empty");
  }
  const std::size_t n_a = sample_a.size();
  const std::size_t n_b = sample_b.size();
  const std::size_t n = n_a + n_b;

  MwMethod method = mode;
  if (mode == MwMethod::Auto) {
    method = (n_a <= 8 && n_b <= 8) ? MwMethod::Exact : MwMethod::NormalApprox;
  } else if (mode == MwMethod::Exact && n > 16) {
    throw ContractError("mann_whitney: exact mode is guarded to a combined size of 16");
  }

  std::vector<double> pooled = sample_a;
  pooled.insert(pooled.end(), sample_b.begin(), sample_b.end());
  const std::vector<double> ranks = midranks(pooled);

  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < n_a; ++i) rank_sum_a += ranks[i];
  const double u_a = rank_sum_a - static_cast<double>(n_a) * (static_cast<double>(n_a) + 1.0) / 2.0;
  const double u_b = static_cast<double>(n_a) * static_cast<double>(n_b) - u_a;
  const double u_min = std::min(u_a, u_b);

  SignificanceResult result;
  result.u_statistic = u_min;
  result.method = method;

  const double mean_u = static_cast<double>(n_a) * static_cast<double>(n_b) / 2.0;
  const double deviation = std::abs(u_a - mean_u);

  if (method == MwMethod::Exact) {
    // Permutation null: every size-n_a subset of the pooled values is
    // equally likely. The two-sided p counts the subsets whose U deviates
    // from the mean at least as far as observed; for tie-free data this
    // equals doubling the one-sided tail, and it stays symmetric in the two
    // samples when ties skew the permutation distribution.
    std::vector<std::size_t> combo(n_a);
    std::iota(combo.begin(), combo.end(), 0);
    std::size_t total = 0;
    std::size_t as_extreme = 0;
    while (true) {
      ++total;
      if (std::abs(u_from_ranks(ranks, combo) - mean_u) >= deviation - 1e-12) ++as_extreme;

      std::size_t i = n_a;
      bool advanced = false;
      while (i-- > 0) {
        if (combo[i] + (n_a - i) < n) {
          ++combo[i];
          for (std::size_t j = i + 1; j < n_a; ++j) combo[j] = combo[j - 1] + 1;
          advanced = true;
          break;
        }
      }
      if (!advanced) break;
    }
    result.p_value = static_cast<double>(as_extreme) / static_cast<double>(total);
  } else {
    // The rank sum of sample a is the sum of n_a draws without replacement
    // from the midrank population, so its central moments follow the finite
    // population sampling formulas (which absorb the tie correction). The
    // kurtosis term of the Edgeworth expansion sharpens the plain
    // continuity-corrected normal tail, whose error peaks around 0.011 at
    // 8 vs 8; skewness terms cancel in the symmetric two-sided sum.
    const double dm = static_cast<double>(n_a);
    const double dn = static_cast<double>(n);
    double pop_mean = 0.0;
    for (const double r : ranks) pop_mean += r;
    pop_mean /= dn;
    double m2 = 0.0;
    double m4 = 0.0;
    for (const double r : ranks) {
      const double d = r - pop_mean;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    m2 /= dn;
    m4 /= dn;
    const double variance = dm * (dn - dm) / (dn - 1.0) * m2;
    if (variance <= 0.0) {
      result.p_value = 1.0;
    } else {
      double excess_kurtosis = 0.0;
      if (n >= 4) {
        const double mu4 = dm * (dn - dm) / ((dn - 1.0) * (dn - 2.0) * (dn - 3.0)) *
                           ((dn * dn - 6.0 * dm * dn + dn + 6.0 * dm * dm) * m4 +
                            3.0 * dn * (dm - 1.0) * (dn - dm - 1.0) * m2 * m2);
        excess_kurtosis = mu4 / (variance * variance) - 3.0;
      }
      const double z = std::max(0.0, deviation - 0.5) / std::sqrt(variance);
      const double normal_density = std::exp(-z * z / 2.0) / std::sqrt(2.0 * std::numbers::pi);
      double tail = 0.5 * std::erfc(z / std::sqrt(2.0)) +
                    normal_density * excess_kurtosis / 24.0 * (z * z * z - 3.0 * z);
      tail = std::max(tail, 0.0);
      result.p_value = std::min(1.0, 2.0 * tail);
      result.p_value = std::max(result.p_value, 1e-300);
    }
  }

  result.band = star_band(result.p_value);
  return result;
}

namespace {

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

double mean(const std::vector<double>& values) {
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

}  // namespace

GroupReport compare_subgroups(const std::vector<PredictionSet>& runs, ComparisonMode mode) {
  if (runs.empty()) {
    throw ContractError("compare_subgroups: no runs given");
  }
  std::set<std::uint64_t> seeds;
  for (const auto& run : runs) {
    if (run.scenario != runs.front().scenario || run.strategy != runs.front().strategy) {
      throw ContractError("compare_subgroups: runs span multiple scenario/strategy groups");
    }
    if (!seeds.insert(run.seed).second) {
      throw ContractError("compare_subgroups: duplicate seed " + std::to_string(run.seed) +
                          " in group " + run.scenario + "/" + run.strategy);
    }
  }
  if (seeds.size() < 2) {
    throw ContractError("compare_subgroups: needs at least 2 seeds, got " +
                        std::to_string(seeds.size()));
  }

  std::vector<const PredictionSet*> ordered;
  for (const auto& run : runs) ordered.push_back(&run);
  std::sort(ordered.begin(), ordered.end(),
            [](const PredictionSet* a, const PredictionSet* b) { return a->seed < b->seed; });

  GroupReport report;
  report.scenario = runs.front().scenario;
  report.strategy = runs.front().strategy;
  auto& sub = report.subgroups;
  for (const auto* run : ordered) {
    sub.seeds.push_back(run->seed);
    sub.per_seed_overall.push_back(subgroup_auc(*run, std::nullopt));
    sub.per_seed_female.push_back(subgroup_auc(*run, Sex::Female));
    sub.per_seed_male.push_back(subgroup_auc(*run, Sex::Male));
    for (const auto& row : run->rows) {
      ++sub.n_overall;
      if (row.sex == Sex::Female) ++sub.n_female;
      if (row.sex == Sex::Male) ++sub.n_male;
    }
  }
  sub.auc_overall = mean(sub.per_seed_overall);
  sub.auc_female = mean(sub.per_seed_female);
  sub.auc_male = mean(sub.per_seed_male);

  double median_female = 0.0;
  double median_male = 0.0;
  if (mode == ComparisonMode::PerSeedAuc) {
    report.significance = mann_whitney(sub.per_seed_female, sub.per_seed_male, MwMethod::Auto);
    median_female = median(sub.per_seed_female);
    median_male = median(sub.per_seed_male);
  } else {
    std::vector<double> female_scores;
    std::vector<double> male_scores;
    for (const auto* run : ordered) {
      for (const auto& row : run->rows) {
        if (row.sex == Sex::Female) female_scores.push_back(row.score);
        if (row.sex == Sex::Male) male_scores.push_back(row.score);
      }
    }
    if (female_scores.empty() || male_scores.empty()) {
      throw ContractError("compare_subgroups: per-lesion mode needs both sexes");
    }
    report.significance = mann_whitney(female_scores, male_scores, MwMethod::Auto);
    median_female = median(female_scores);
    median_male = median(male_scores);
  }

  if (median_female < median_male) {
    report.significance.direction = Direction::FemaleLower;
  } else if (median_female > median_male) {
    report.significance.direction = Direction::FemaleHigher;
  } else {
    report.significance.direction = Direction::Comparable;
  }
  return report;
}

std::vector<GroupReport> evaluate_groups(const std::vector<PredictionSet>& sets,
                                         ComparisonMode mode) {
  std::map<std::pair<std::string, std::string>, std::vector<PredictionSet>> groups;
  for (const auto& set : sets) {
    groups[{set.scenario, set.strategy}].push_back(set);
  }
  std::vector<GroupReport> reports;
  reports.reserve(groups.size());
  for (const auto& [key, runs] : groups) {
    reports.push_back(compare_subgroups(runs, mode));
  }
  return reports;
}

nlohmann::json GroupReport::to_json() const {
  return nlohmann::json{
      {"scenario", scenario},
      {"strategy", strategy},
      {"auc_overall", subgroups.auc_overall},
      {"auc_female", subgroups.auc_female},
      {"auc_male", subgroups.auc_male},
      {"n_overall", subgroups.n_overall},
      {"n_female", subgroups.n_female},
      {"n_male", subgroups.n_male},
      {"seeds", subgroups.seeds},
      {"per_seed_overall", subgroups.per_seed_overall},
      {"per_seed_female", subgroups.per_seed_female},
      {"per_seed_male", subgroups.per_seed_male},
      {"u_statistic", significance.u_statistic},
      {"p_value", significance.p_value},
      {"method", significance.method == MwMethod::Exact ? "exact" : "normal_approx"},
      {"band", to_string(significance.band)},
      {"direction", to_string(significance.direction)},
  };
}

Table emit_boxplot_data(const std::vector<GroupReport>& reports) {
  struct Row {
    std::string scenario;
    std::string strategy;
    std::string subgroup;
    std::uint64_t seed;
    double auc;
  };
  std::vector<Row> rows;
  for (const auto& report : reports) {
    for (std::size_t i = 0; i < report.subgroups.seeds.size(); ++i) {
      rows.push_back({report.scenario, report.strategy, "female", report.subgroups.seeds[i],
                      report.subgroups.per_seed_female[i]});
      rows.push_back({report.scenario, report.strategy, "male", report.subgroups.seeds[i],
                      report.subgroups.per_seed_male[i]});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.scenario, a.strategy, a.subgroup, a.seed) <
           std::tie(b.scenario, b.strategy, b.subgroup, b.seed);
  });

  Table table;
  table.header = {"scenario", "strategy", "subgroup", "seed", "auc"};
  for (const auto& row : rows) {
    table.rows.push_back({row.scenario, row.strategy, row.subgroup,
                          std::to_string(row.seed), format_double(row.auc)});
  }
  return table;
}

std::vector<PredictionSet> parse_predictions(std::istream& in, char delimiter) {
  const Table table = read_delimited(in, delimiter);
  const auto column = [&table](const std::string& name) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
      throw DataError("predictions file misses column: " + name);
    }
    return static_cast<std::size_t>(it - table.header.begin());
  };
  const std::size_t idx_id = column("id");
  const std::size_t idx_score = column("score");
  const std::size_t idx_label = column("label");
  const std::size_t idx_sex = column("sex");
  const std::size_t idx_scenario = column("scenario");
  const std::size_t idx_seed = column("seed");
  const std::size_t idx_strategy = column("strategy");

  std::map<std::tuple<std::string, std::string, std::uint64_t>, PredictionSet> groups;
  for (const auto& row : table.rows) {
    if (row.size() < table.header.size()) {
      throw DataError("prediction row has fewer fields than the header");
    }
    PredictionRow prediction;
    prediction.id = row[idx_id];
    try {
      prediction.score = std::stod(row[idx_score]);
      prediction.label = std::stoi(row[idx_label]);
    } catch (const std::exception&) {
      throw DataError("unparseable score/label for id " + prediction.id);
    }
    if (prediction.label != 0 && prediction.label != 1) {
      throw DataError("label must be 0 or 1 for id " + prediction.id);
    }
    const std::string sex_text = row[idx_sex];
    if (sex_text == "female" || sex_text == "F" || sex_text == "f") {
      prediction.sex = Sex::Female;
    } else if (sex_text == "male" || sex_text == "M" || sex_text == "m") {
      prediction.sex = Sex::Male;
    } else {
      throw DataError("unknown sex '" + sex_text + "' for id " + prediction.id);
    }
    std::uint64_t seed = 0;
    try {
      seed = static_cast<std::uint64_t>(std::stoull(row[idx_seed]));
    } catch (const std::exception&) {
      throw DataError("unparseable seed for id " + prediction.id);
    }
    auto& set = groups[{row[idx_scenario], row[idx_strategy], seed}];
    set.scenario = row[idx_scenario];
    set.strategy = row[idx_strategy];
    set.seed = seed;
    set.rows.push_back(std::move(prediction));
  }

  std::vector<PredictionSet> sets;
  sets.reserve(groups.size());
  for (auto& [key, set] : groups) {
    std::set<std::string> ids;
    for (const auto& row : set.rows) {
      if (!ids.insert(row.id).second) {
        throw DataError("duplicate prediction id " + row.id + " in " + set.scenario + "/" +
                        set.strategy + "/seed " + std::to_string(set.seed));
      }
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

void write_predictions(std::ostream& out, const PredictionSet& predictions, char delimiter) {
  Table table;
  table.header = {"id", "score", "label", "sex", "scenario", "seed", "strategy"};
  for (const auto& row : predictions.rows) {
    table.rows.push_back({row.id, format_double(row.score), std::to_string(row.label),
                          to_string(row.sex), predictions.scenario,
                          std::to_string(predictions.seed), predictions.strategy});
  }
  write_delimited(out, table, delimiter);
}

}  // namespace fairsplit
