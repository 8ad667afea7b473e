#pragma once

#include "json.hpp"

#include "bifid/nn/activation.hpp"

namespace bifid::model {

/// Architecture, loss and training settings of the dual-fidelity model.
///
/// Defaults are the tuned "out of the box" configuration: batch 50,
/// learning rate 2.72e-4, softplus bias networks (depth 1, widths P and 3),
/// a 3 x 96 leaky-ReLU latent network, linear output layers, cheap-loss
/// weight 0.5, latent L2 1e-3 and bias-network L2 0.0894.
struct ModelHyperparams {
  int batch_size = 50;
  double learning_rate = 0.000272;

  nn::Activation act_fbias = nn::Activation::Softplus;
  nn::Activation act_fbias_out = nn::Activation::Linear;
  nn::Activation act_latent = nn::Activation::LeakyRelu;
  nn::Activation act_latent_out = nn::Activation::Linear;
  nn::Activation act_tbias = nn::Activation::Softplus;
  nn::Activation act_tbias_out = nn::Activation::Linear;

  int depth_fbias = 1;
  int depth_latent = 3;
  int depth_tbias = 1;

  int hidden_fbias = 0;  // 0 means "same as the parameter dimension"
  int hidden_latent = 96;
  int hidden_tbias = 3;

  double coeff_both = 0.5;   // weight of the cheap-branch NLL
  double reg_latent = 1e-3;
  double reg_bias = 0.0894;

  // Heteroscedastic head: sigma = logistic(raw) + floor.
  double sigma_floor_cheap = 0.01;
  double sigma_floor_exp = 0.1;

  // Training-time gradient weighting of each NLL term by sigma^(2 beta),
  // held constant (beta = 0 is the plain likelihood gradient). Without it the
  // heteroscedastic head tends to inflate sigma over hard regions and stop
  // fitting their means. Reported losses are always the plain likelihood.
  double nll_beta = 0.5;

  bool batch_norm_latent = false;
  bool batch_norm_bias = false;
  double batch_norm_momentum = 0.99;
  double batch_norm_epsilon = 1e-5;

  // Epochs at the start of training that fit only the cheap branch (the bias
  // networks are frozen). Ignored unless both fidelities are present.
  int warmup_epochs = 0;

  int max_epochs = 30000;
  int patience = 500;
  double holdout_fraction = 0.1;

  int resolved_hidden_fbias(int param_dim) const {
    return hidden_fbias > 0 ? hidden_fbias : param_dim;
  }

  /// Throws ConfigError naming the offending field.
  void validate() const;

  nlohmann::json to_json() const;

  /// Starts from defaults and overrides the keys present; unknown keys throw.
  static ModelHyperparams from_json(const nlohmann::json& j);
};

}  // namespace bifid::model
