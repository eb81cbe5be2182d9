#include "fairsplit/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairsplit/errors.hpp"
#include "fairsplit/rng.hpp"

namespace fairsplit {

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::Base: return "base";
    case Strategy::Reinforce: return "reinforce";
    case Strategy::Adversarial: return "adversarial";
  }
  return "base";
}

Strategy strategy_from_string(const std::string& name) {
  if (name == "base") return Strategy::Base;
  if (name == "reinforce") return Strategy::Reinforce;
  if (name == "adversarial") return Strategy::Adversarial;
  throw ValidationError("unknown strategy: " + name);
}

namespace {

double clamp_probability(double p) {
  return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void require_config(const StrategyConfig& config) {
  if (config.lambda < 0.0) throw ValidationError("lambda must be non-negative");
  if (!(config.learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (config.batch_size == 0) throw ValidationError("batch_size must be positive");
  if (config.max_epochs == 0) throw ValidationError("max_epochs must be positive");
  if (config.patience > config.max_epochs) {
    throw ValidationError("patience must not exceed max_epochs");
  }
}

}  // namespace

double bce(int y, double y_hat) {
  if (y != 0 && y != 1) {
    throw ContractError("bce: label must be 0 or 1");
  }
  const double p = clamp_probability(y_hat);
  return -(static_cast<double>(y) * std::log(p) +
           (1.0 - static_cast<double>(y)) * std::log(1.0 - p));
}

double bce_batch(const std::vector<int>& labels, const std::vector<double>& probabilities) {
  if (labels.size() != probabilities.size()) {
    throw ContractError("bce_batch: labels and probabilities differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    total += bce(labels[i], probabilities[i]);
  }
  return total;
}

double bias_loss(double l_c, double lambda) {
  if (l_c < 0.0) throw ContractError("bias_loss: l_c must be non-negative");
  if (lambda < 0.0) throw ContractError("bias_loss: lambda must be non-negative");
  return lambda * l_c;
}

Network init_network(const NetworkConfig& config) {
  if (config.feature_dim == 0 || config.hidden_dim == 0) {
    throw ValidationError("network dimensions must be positive");
  }
  Network net;
  net.input_dim = config.feature_dim;
  net.hidden_dim = config.hidden_dim;
  Rng rng(seed_for(config.seed, "init_network"));
  const double encoder_range = 1.0 / std::sqrt(static_cast<double>(config.feature_dim));
  net.encoder_weights.resize(config.hidden_dim * config.feature_dim);
  for (double& w : net.encoder_weights) w = rng.uniform(-encoder_range, encoder_range);
  net.encoder_bias.assign(config.hidden_dim, 0.0);
  const double head_range = 1.0 / std::sqrt(static_cast<double>(config.hidden_dim));
  net.diagnosis_weights.resize(config.hidden_dim);
  for (double& w : net.diagnosis_weights) w = rng.uniform(-head_range, head_range);
  net.diagnosis_bias = 0.0;
  net.sex_weights.resize(config.hidden_dim);
  for (double& w : net.sex_weights) w = rng.uniform(-head_range, head_range);
  net.sex_bias = 0.0;
  return net;
}

ForwardResult forward(const Network& net, const std::vector<Example>& batch) {
  ForwardResult result;
  result.hidden.resize(batch.size() * net.hidden_dim);
  result.diagnosis_probs.resize(batch.size());
  result.sex_probs.resize(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& x = batch[i].features;
    if (x.size() != net.input_dim) {
      throw ContractError("forward: feature length " + std::to_string(x.size()) +
                          " does not match input dim " + std::to_string(net.input_dim));
    }
    double* z = result.hidden.data() + i * net.hidden_dim;
    for (std::size_t k = 0; k < net.hidden_dim; ++k) {
      double pre = net.encoder_bias[k];
      const double* row = net.encoder_weights.data() + k * net.input_dim;
      for (std::size_t j = 0; j < net.input_dim; ++j) pre += row[j] * x[j];
      z[k] = pre > 0.0 ? pre : 0.0;
    }
    double u = net.diagnosis_bias;
    double v = net.sex_bias;
    for (std::size_t k = 0; k < net.hidden_dim; ++k) {
      u += net.diagnosis_weights[k] * z[k];
      v += net.sex_weights[k] * z[k];
    }
    result.diagnosis_probs[i] = clamp_probability(logistic(u));
    result.sex_probs[i] = clamp_probability(logistic(v));
  }
  return result;
}

Gradients grad(const Network& net, const std::vector<Example>& batch,
               const StrategyConfig& config) {
  require_config(config);
  const ForwardResult fwd = forward(net, batch);

  Gradients g;
  g.encoder_weights.assign(net.encoder_weights.size(), 0.0);
  g.encoder_bias.assign(net.hidden_dim, 0.0);
  g.diagnosis_weights.assign(net.hidden_dim, 0.0);
  g.sex_weights.assign(net.hidden_dim, 0.0);

  const bool sex_head_active = config.strategy != Strategy::Base;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double* z = fwd.hidden.data() + i * net.hidden_dim;
    const double diag_delta = fwd.diagnosis_probs[i] - static_cast<double>(batch[i].diagnosis);
    const double sex_delta = fwd.sex_probs[i] - static_cast<double>(batch[i].sex);

    g.diagnosis_bias += diag_delta;
    for (std::size_t k = 0; k < net.hidden_dim; ++k) {
      g.diagnosis_weights[k] += diag_delta * z[k];
    }
    if (sex_head_active) {
      g.sex_bias += sex_delta;
      for (std::size_t k = 0; k < net.hidden_dim; ++k) {
        g.sex_weights[k] += sex_delta * z[k];
      }
    }

    for (std::size_t k = 0; k < net.hidden_dim; ++k) {
      if (z[k] <= 0.0) continue;
      double upstream = diag_delta * net.diagnosis_weights[k];
      if (config.strategy == Strategy::Reinforce) {
        upstream += sex_delta * net.sex_weights[k];
      } else if (config.strategy == Strategy::Adversarial) {
        upstream -= config.lambda * sex_delta * net.sex_weights[k];
      }
      g.encoder_bias[k] += upstream;
      double* row = g.encoder_weights.data() + k * net.input_dim;
      const auto& x = batch[i].features;
      for (std::size_t j = 0; j < net.input_dim; ++j) row[j] += upstream * x[j];
    }
  }
  return g;
}

void apply_gradients(Network& net, const Gradients& gradients, double learning_rate) {
  for (std::size_t i = 0; i < net.encoder_weights.size(); ++i) {
    net.encoder_weights[i] -= learning_rate * gradients.encoder_weights[i];
  }
  for (std::size_t k = 0; k < net.hidden_dim; ++k) {
    net.encoder_bias[k] -= learning_rate * gradients.encoder_bias[k];
    net.diagnosis_weights[k] -= learning_rate * gradients.diagnosis_weights[k];
    net.sex_weights[k] -= learning_rate * gradients.sex_weights[k];
  }
  net.diagnosis_bias -= learning_rate * gradients.diagnosis_bias;
  net.sex_bias -= learning_rate * gradients.sex_bias;
}

namespace {

std::pair<double, double> mean_losses(const Network& net, const std::vector<Example>& examples) {
  const ForwardResult fwd = forward(net, examples);
  double diag = 0.0;
  double sex = 0.0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    diag += bce(examples[i].diagnosis, fwd.diagnosis_probs[i]);
    sex += bce(examples[i].sex, fwd.sex_probs[i]);
  }
  const double n = static_cast<double>(examples.size());
  return {diag / n, sex / n};
}

}  // namespace

TrainResult train(const Network& net, const std::vector<Example>& train_set,
                  const std::vector<Example>& val_set, const StrategyConfig& config) {
  require_config(config);
  if (train_set.empty() || val_set.empty()) {
    throw ContractError("train: train and validation sets must be non-empty");
  }

  TrainResult result;
  result.network = net;
  Network current = net;

  Rng shuffle_rng(seed_for(config.seed, "train_shuffle"));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  double best_val = std::numeric_limits<double>::infinity();
  std::size_t epochs_without_improvement = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_diag = 0.0;
    double epoch_sex = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<Example> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);

      const ForwardResult fwd = forward(current, batch);
      double batch_diag = 0.0;
      double batch_sex = 0.0;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        batch_diag += bce(batch[i].diagnosis, fwd.diagnosis_probs[i]);
        batch_sex += bce(batch[i].sex, fwd.sex_probs[i]);
      }
      if (!std::isfinite(batch_diag) || !std::isfinite(batch_sex)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch));
      }
      epoch_diag += batch_diag;
      epoch_sex += batch_sex;

      if (config.strategy == Strategy::Adversarial &&
          config.adversarial_mode == AdversarialMode::Alternating) {
        // First the encoder and diagnosis head against the reversed sex
        // gradient, then the sex head on refreshed activations.
        Gradients joint = grad(current, batch, config);
        joint.sex_weights.assign(current.hidden_dim, 0.0);
        joint.sex_bias = 0.0;
        apply_gradients(current, joint, config.learning_rate);

        StrategyConfig head_only = config;
        head_only.strategy = Strategy::Adversarial;
        Gradients sex_grad = grad(current, batch, head_only);
        sex_grad.encoder_weights.assign(current.encoder_weights.size(), 0.0);
        sex_grad.encoder_bias.assign(current.hidden_dim, 0.0);
        sex_grad.diagnosis_weights.assign(current.hidden_dim, 0.0);
        sex_grad.diagnosis_bias = 0.0;
        apply_gradients(current, sex_grad, config.learning_rate);
      } else {
        apply_gradients(current, grad(current, batch, config), config.learning_rate);
      }
    }

    const auto [val_diag, val_sex] = mean_losses(current, val_set);
    if (!std::isfinite(val_diag) || !std::isfinite(val_sex)) {
      throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    EpochStats stats;
    stats.train_diagnosis_loss = epoch_diag / static_cast<double>(train_set.size());
    stats.train_sex_loss = epoch_sex / static_cast<double>(train_set.size());
    stats.val_diagnosis_loss = val_diag;
    stats.val_sex_loss = val_sex;
    result.log.epochs.push_back(stats);
    result.log.stopping_epoch = epoch;

    if (val_diag < best_val - config.min_delta) {
      best_val = val_diag;
      result.network = current;
      result.log.best_epoch = epoch;
      epochs_without_improvement = 0;
    } else {
      ++epochs_without_improvement;
      if (epochs_without_improvement >= config.patience) break;
    }
  }

  if (result.log.best_epoch == 0) {
    // No epoch improved on the initial infinity guard's first update; keep
    // the first epoch's parameters implicitly held in `result.network`.
    result.log.best_epoch = 1;
  }
  result.log.snapshot_id = "epoch-" + std::to_string(result.log.best_epoch);
  return result;
}

std::vector<Example> generate_synthetic(const SyntheticConfig& config) {
  if (config.feature_dim == 0 || config.n_samples == 0) {
    throw ValidationError("synthetic config needs positive dimensions");
  }
  if (std::abs(config.sex_label_correlation) > 1.0) {
    throw ValidationError("sex_label_correlation must lie in [-1, 1]");
  }
  if (!(config.noise_scale > 0.0)) {
    throw ValidationError("noise_scale must be positive");
  }
  if (config.sex_signal != 0.0 && config.feature_dim < 2) {
    throw ValidationError("sex_signal needs at least two feature dimensions");
  }

  const std::size_t n = config.n_samples;
  const std::size_t n_malignant = n / 2;
  const std::size_t n_benign = n - n_malignant;
  const double rho = config.sex_label_correlation;

  // P(female | malignant) = (1 + rho) / 2, P(female | benign) = (1 - rho) / 2
  // keeps both margins at one half while corr(sex, diagnosis) tracks rho.
  // Quotas instead of Bernoulli draws pin the empirical correlation.
  const auto female_quota = [](std::size_t group, double probability) {
    return static_cast<std::size_t>(
        std::llround(static_cast<double>(group) * probability));
  };
  const std::size_t females_malignant = female_quota(n_malignant, (1.0 + rho) / 2.0);
  const std::size_t females_benign = female_quota(n_benign, (1.0 - rho) / 2.0);

  std::vector<std::pair<int, int>> assignments;
  assignments.reserve(n);
  for (std::size_t i = 0; i < n_malignant; ++i) {
    assignments.emplace_back(1, i < females_malignant ? 1 : 0);
  }
  for (std::size_t i = 0; i < n_benign; ++i) {
    assignments.emplace_back(0, i < females_benign ? 1 : 0);
  }

  Rng rng(seed_for(config.seed, "synthetic"));
  rng.shuffle(assignments);

  std::vector<Example> examples;
  examples.reserve(n);
  for (const auto& [diagnosis, sex] : assignments) {
    Example example;
    example.diagnosis = diagnosis;
    example.sex = sex;
    example.features.resize(config.feature_dim);
    for (double& f : example.features) f = config.noise_scale * rng.gaussian();
    example.features[0] += (diagnosis == 1 ? 1.0 : -1.0) * config.class_signal;
    if (config.feature_dim >= 2) {
      example.features[1] += (sex == 1 ? 1.0 : -1.0) * config.sex_signal;
    }
    examples.push_back(std::move(example));
  }
  return examples;
}

std::vector<std::vector<double>> encode(const Network& net,
                                        const std::vector<Example>& examples) {
  const ForwardResult fwd = forward(net, examples);
  std::vector<std::vector<double>> features(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    features[i].assign(fwd.hidden.begin() + static_cast<std::ptrdiff_t>(i * net.hidden_dim),
                       fwd.hidden.begin() + static_cast<std::ptrdiff_t>((i + 1) * net.hidden_dim));
  }
  return features;
}

std::vector<double> diagnosis_scores(const Network& net, const std::vector<Example>& examples) {
  return forward(net, examples).diagnosis_probs;
}

std::vector<double> sex_scores(const Network& net, const std::vector<Example>& examples) {
  return forward(net, examples).sex_probs;
}

nlohmann::json TrainLog::to_json() const {
  nlohmann::json epoch_rows = nlohmann::json::array();
  for (const auto& stats : epochs) {
    epoch_rows.push_back({{"train_diagnosis_loss", stats.train_diagnosis_loss},
                          {"train_sex_loss", stats.train_sex_loss},
                          {"val_diagnosis_loss", stats.val_diagnosis_loss},
                          {"val_sex_loss", stats.val_sex_loss}});
  }
  return nlohmann::json{{"epochs", epoch_rows},
                        {"stopping_epoch", stopping_epoch},
                        {"best_epoch", best_epoch},
                        {"snapshot_id", snapshot_id}};
}

}  // namespace fairsplit
