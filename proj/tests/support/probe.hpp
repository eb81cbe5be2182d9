#pragma once

#include <cmath>
#include <vector>

namespace fairsplit::testing {

// Logistic regression on frozen features, full-batch gradient descent from a
// zero start (deterministic without any seed).
struct LinearProbe {
  std::vector<double> weights;
  double bias = 0.0;
};

inline LinearProbe train_probe(const std::vector<std::vector<double>>& features,
                               const std::vector<int>& labels, std::size_t epochs = 300,
                               double learning_rate = 0.5) {
  LinearProbe probe;
  probe.weights.assign(features.empty() ? 0 : features.front().size(), 0.0);
  const double n = static_cast<double>(features.size());
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::vector<double> weight_grad(probe.weights.size(), 0.0);
    double bias_grad = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
      double u = probe.bias;
      for (std::size_t j = 0; j < probe.weights.size(); ++j) {
        u += probe.weights[j] * features[i][j];
      }
      const double delta = 1.0 / (1.0 + std::exp(-u)) - static_cast<double>(labels[i]);
      for (std::size_t j = 0; j < probe.weights.size(); ++j) {
        weight_grad[j] += delta * features[i][j];
      }
      bias_grad += delta;
    }
    for (std::size_t j = 0; j < probe.weights.size(); ++j) {
      probe.weights[j] -= learning_rate * weight_grad[j] / n;
    }
    probe.bias -= learning_rate * bias_grad / n;
  }
  return probe;
}

inline std::vector<double> probe_scores(const LinearProbe& probe,
                                        const std::vector<std::vector<double>>& features) {
  std::vector<double> scores(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    double u = probe.bias;
    for (std::size_t j = 0; j < probe.weights.size(); ++j) {
      u += probe.weights[j] * features[i][j];
    }
    scores[i] = 1.0 / (1.0 + std::exp(-u));
  }
  return scores;
}

}  // namespace fairsplit::testing
