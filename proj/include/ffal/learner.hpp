#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ffal/dataset.hpp"
#include "ffal/strategies.hpp"

namespace ffal {

enum class LearnerKind { Logistic, Mlp };

std::string_view to_string(LearnerKind kind) noexcept;
std::optional<LearnerKind> parse_learner(std::string_view name) noexcept;

struct LearnerConfig {
  LearnerKind kind = LearnerKind::Logistic;
  std::size_t hidden_units = 16;
  double learning_rate = 0.1;
  std::size_t epochs = 2000;
  double l2 = 1e-4;
  std::uint64_t init_seed = 0;

  /// Throws InvalidConfig on out-of-range fields.
  void validate() const;
};

/// Softmax classifier. Logistic: logits = x W + b. Mlp: one rectifier hidden
/// layer, logits = relu(x W1 + b1) W2 + b2.
///
/// Parameters live in one flat vector so gradients share the same layout:
/// logistic [W (d x k), b (k)], mlp [W1 (d x h), b1 (h), W2 (h x k), b2 (k)],
/// matrices row-major.
struct Model {
  LearnerKind kind = LearnerKind::Logistic;
  std::size_t input_dim = 0;
  std::size_t hidden = 0;
  std::size_t classes = 0;
  std::vector<double> params;

  std::size_t epochs_run = 0;
  double final_loss = 0.0;
  /// Objective value before each gradient step.
  std::vector<double> loss_history;

  std::size_t parameter_count() const noexcept;
};

/// Zero-parameter model with the right shape.
Model make_model(LearnerKind kind, std::size_t input_dim, std::size_t hidden, std::size_t classes);
/// Weights uniform in +-1/sqrt(fan_in), biases zero.
Model init_model(LearnerKind kind, std::size_t input_dim, std::size_t hidden, std::size_t classes,
                 std::uint64_t seed);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

/// Mean cross-entropy over `train` plus l2 * ||weights||^2 / 2 (biases excluded),
/// with its gradient. Examples are summed in row order.
LossGradient loss_and_gradient(const Model& model, const EmbeddingDataset& train, double l2);
double objective(const Model& model, const EmbeddingDataset& train, double l2);

/// Full-batch gradient descent from a fresh cfg.init_seed initialization.
Model fit(const EmbeddingDataset& train, const LearnerConfig& cfg);

ProbabilityMatrix predict_proba(const Model& model, const EmbeddingDataset& ds);

/// Class with the largest logit, ties to the lower class id.
std::vector<Label> predict(const Model& model, const EmbeddingDataset& ds);

struct EvaluationRecord {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t n_eval = 0;
};

EvaluationRecord evaluate_accuracy(const Model& model, const EmbeddingDataset& test);

/// Hidden-layer activations of an mlp, one row per input, labels carried through.
EmbeddingDataset extract_representation(const Model& model, const EmbeddingDataset& inputs);

}  // namespace ffal
