#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "json.hpp"

#include "bifid/model/hyperparams.hpp"
#include "bifid/model/observation.hpp"
#include "bifid/nn/dense_net.hpp"

namespace bifid::model {

struct Prediction {
  double mean = 0.0;
  double sigma = 1.0;
  Fidelity tag = Fidelity::Cheap;
};

/// Inputs and targets already in the model's normalized units.
struct TrainingBatch {
  Matrix x;
  Vector y;
};

struct LossBreakdown {
  double total = 0.0;
  double nll_exp = 0.0;
  double nll_cheap = 0.0;
  double reg_bias = 0.0;    // lambda_bias * (|theta_P|^2 + |theta_T|^2)
  double reg_latent = 0.0;  // lambda_latent * |theta_L|^2
};

struct ModelGradients {
  nn::Gradients fbias;
  nn::Gradients latent;
  nn::Gradients tbias;

  std::vector<std::span<const double>> blocks() const;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double loss_exp = 0.0;
  double loss_cheap = 0.0;
  double monitor = 0.0;  // holdout loss, or full training loss without a holdout
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  bool early_stopped = false;

  /// CSV with header `epoch,L,L_exp,L_cheap,monitor`.
  void write_csv(std::ostream& os) const;
};

/// Sum over rows of 0.5 * ((y - mu)^2 / sigma^2 + log sigma^2).
double gaussian_nll(double y, double mu, double sigma);

/// Twin-branch bias-correction model.
///
/// The cheap branch is `latent(x)`. The expensive branch shifts the parameters
/// with `fbias`, runs them through the shared latent net and adds a target
/// correction: `h = latent(x + fbias(x)); out = h + tbias(h)`. Both outputs are
/// split into a mean and a raw scale mapped to sigma = logistic(raw) + floor.
class DualFidelityModel {
public:
  DualFidelityModel(Index param_dim, ModelHyperparams hyper, std::uint64_t init_seed);

  Index param_dim() const { return param_dim_; }
  const ModelHyperparams& hyper() const { return hyper_; }

  nn::DenseNet& fbias() { return fbias_; }
  nn::DenseNet& latent() { return latent_; }
  nn::DenseNet& tbias() { return tbias_; }
  const nn::DenseNet& fbias() const { return fbias_; }
  const nn::DenseNet& latent() const { return latent_; }
  const nn::DenseNet& tbias() const { return tbias_; }

  /// A model predicts once it has normalization statistics (set by train(),
  /// from_json() or explicitly).
  bool is_ready() const { return normalization_.has_value(); }
  void set_normalization(Normalization n);
  const Normalization& normalization() const;

  /// Predictions in original target units; throw StateError before training.
  std::vector<Prediction> predict_cheap(const Matrix& x) const;
  std::vector<Prediction> predict_expensive(const Matrix& x) const;

  /// Raw two-column network outputs (mean, raw scale) for normalized inputs.
  Matrix cheap_output(const Matrix& x_normalized) const;
  Matrix expensive_output(const Matrix& x_normalized) const;

  /// Composite loss on normalized batches. Train mode uses batch statistics
  /// and advances the batch-norm running estimates.
  LossBreakdown loss(const TrainingBatch& cheap, const TrainingBatch& exp, nn::Mode mode);

  /// Train-mode loss plus gradients for every parameter block.
  LossBreakdown loss_and_gradients(const TrainingBatch& cheap, const TrainingBatch& exp,
                                   ModelGradients& grads);

  /// Train-mode loss plus the update direction used by train(): the same as
  /// loss_and_gradients() except that NLL terms are weighted by sigma^(2 beta)
  /// with beta = hyper().nll_beta.
  LossBreakdown training_gradients(const TrainingBatch& cheap, const TrainingBatch& exp,
                                   ModelGradients& grads);

  /// Blocks of fbias, latent and tbias in that order (matches ModelGradients).
  std::vector<nn::ParamBlock> parameters();

  /// Adam on the composite loss with holdout early stopping; the best
  /// parameters seen on the monitor loss are restored at the end.
  TrainingHistory train(const Dataset& data, std::uint64_t seed);

  nlohmann::json to_json() const;
  static DualFidelityModel from_json(const nlohmann::json& j);

private:
  LossBreakdown evaluate(const TrainingBatch& cheap, const TrainingBatch& exp, nn::Mode mode,
                         ModelGradients* grads, double beta);
  std::vector<Prediction> to_predictions(const Matrix& out, Fidelity tag) const;

  Index param_dim_ = 0;
  ModelHyperparams hyper_;
  nn::DenseNet fbias_;
  nn::DenseNet latent_;
  nn::DenseNet tbias_;
  std::optional<Normalization> normalization_;
};

}  // namespace bifid::model
