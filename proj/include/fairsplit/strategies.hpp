#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace fairsplit {

// Stand-in for the image data: a class direction, an orthogonal sex
// direction, isotropic noise, and a controllable sex-label correlation rho.
struct SyntheticConfig {
  std::size_t feature_dim = 6;
  std::size_t n_samples = 1000;
  double class_signal = 1.0;
  double sex_signal = 1.0;
  double sex_label_correlation = 0.0;
  double noise_scale = 1.0;
  std::uint64_t seed = 1;
};

struct Example {
  std::vector<double> features;
  int diagnosis = 0;  // 1 malignant, 0 benign
  int sex = 0;        // 1 female, 0 male
};

// One ReLU hidden layer shared by both heads; each head is affine plus a
// logistic output.
struct Network {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::vector<double> encoder_weights;  // hidden_dim x input_dim, row-major
  std::vector<double> encoder_bias;
  std::vector<double> diagnosis_weights;
  double diagnosis_bias = 0.0;
  std::vector<double> sex_weights;
  double sex_bias = 0.0;
};

struct NetworkConfig {
  std::size_t feature_dim = 6;
  std::size_t hidden_dim = 8;
  std::uint64_t seed = 1;
};

enum class Strategy { Base, Reinforce, Adversarial };
enum class AdversarialMode { JointStep, Alternating };

std::string to_string(Strategy strategy);
Strategy strategy_from_string(const std::string& name);

struct StrategyConfig {
  Strategy strategy = Strategy::Base;
  double lambda = 5.0;
  double learning_rate = 2.0e-5;
  std::size_t batch_size = 20;
  std::size_t max_epochs = 40;
  std::size_t patience = 10;
  double min_delta = 1e-4;
  std::uint64_t seed = 1;
  AdversarialMode adversarial_mode = AdversarialMode::JointStep;
};

struct EpochStats {
  double train_diagnosis_loss = 0.0;  // per-example means
  double train_sex_loss = 0.0;
  double val_diagnosis_loss = 0.0;
  double val_sex_loss = 0.0;
};

struct TrainLog {
  std::vector<EpochStats> epochs;
  std::size_t stopping_epoch = 0;  // number of epochs actually run
  std::size_t best_epoch = 0;      // 1-based epoch whose parameters were kept
  std::string snapshot_id;

  nlohmann::json to_json() const;
};

inline constexpr double kProbabilityClamp = 1e-12;

// Binary cross-entropy of one prediction; y_hat is clamped into
// [1e-12, 1 - 1e-12] first. Throws ContractError unless y is 0 or 1.
double bce(int y, double y_hat);

// Batch form: sum over the examples.
double bce_batch(const std::vector<int>& labels, const std::vector<double>& probabilities);

// The adversarial penalty: lambda * l_c.
double bias_loss(double l_c, double lambda);

struct ForwardResult {
  std::vector<double> hidden;           // n x hidden_dim, row-major
  std::vector<double> diagnosis_probs;  // clamped
  std::vector<double> sex_probs;        // clamped
};

Network init_network(const NetworkConfig& config);

ForwardResult forward(const Network& net, const std::vector<Example>& batch);

struct Gradients {
  std::vector<double> encoder_weights;
  std::vector<double> encoder_bias;
  std::vector<double> diagnosis_weights;
  double diagnosis_bias = 0.0;
  std::vector<double> sex_weights;
  double sex_bias = 0.0;
};

// Gradients of the batch-sum losses under the chosen strategy. Base touches
// only the encoder and diagnosis head; Reinforce adds the sex head with
// equal weight; Adversarial trains the sex head on its own loss while the
// encoder receives the diagnosis gradient minus lambda times the sex-loss
// gradient.
Gradients grad(const Network& net, const std::vector<Example>& batch,
               const StrategyConfig& config);

void apply_gradients(Network& net, const Gradients& gradients, double learning_rate);

struct TrainResult {
  Network network;  // parameters of the best validation epoch
  TrainLog log;
};

// Mini-batch gradient descent with seeded shuffling. Stops after
// `max_epochs`, or once the validation diagnosis loss has failed to improve
// by `min_delta` for `patience` consecutive epochs. Throws TrainingError
// (with the epoch index) when a loss leaves the finite domain.
TrainResult train(const Network& net, const std::vector<Example>& train_set,
                  const std::vector<Example>& val_set, const StrategyConfig& config);

// Balanced diagnosis labels; sex assigned per group so that corr(sex,
// diagnosis) tracks rho; features are the two signal shifts plus noise.
std::vector<Example> generate_synthetic(const SyntheticConfig& config);

// Frozen encoder features of each example.
std::vector<std::vector<double>> encode(const Network& net, const std::vector<Example>& examples);

std::vector<double> diagnosis_scores(const Network& net, const std::vector<Example>& examples);
std::vector<double> sex_scores(const Network& net, const std::vector<Example>& examples);

}  // namespace fairsplit
