#pragma once

#include <Eigen/Dense>
#include "json.hpp"
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bifid/nn/activation.hpp"

namespace bifid::nn {

using Index = Eigen::Index;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Batch normalization applied to a layer's input, one channel per feature.
struct BatchNormState {
  Vector gamma;
  Vector beta;
  Vector running_mean;
  Vector running_var;
  double momentum = 0.99;
  double epsilon = 1e-5;

  static BatchNormState fresh(Index features, double momentum = 0.99, double epsilon = 1e-5);
};

/// One dense layer: optional batch norm on the input, then act(in * W + b).
struct DenseLayer {
  Matrix weights;  // in x out
  Vector bias;     // out
  Activation activation = Activation::Linear;
  std::optional<BatchNormState> batch_norm;

  Index in_dim() const { return weights.rows(); }
  Index out_dim() const { return weights.cols(); }
};

struct LayerSpec {
  Index units = 1;
  Activation activation = Activation::Linear;
  bool batch_norm = false;
};

enum class Mode { Train, Eval };

struct LayerTrace {
  Matrix bn_input;       // raw layer input (only kept when batch norm is on)
  Matrix normalized;     // (x - mean) / sqrt(var + eps), before gamma/beta
  Vector inv_std;        // per-feature 1/sqrt(var + eps) used for this pass
  Matrix dense_input;    // what was multiplied by W
  Matrix pre_activation; // dense_input * W + b
};

/// Intermediates cached by a forward pass, consumed by backward().
struct ForwardTrace {
  std::vector<LayerTrace> layers;
  Mode mode = Mode::Eval;
  bool valid = false;
};

struct LayerGradients {
  Matrix weights;
  Vector bias;
  Vector gamma;
  Vector beta;
};

struct Gradients {
  std::vector<LayerGradients> layers;
  Matrix input;  // dLoss/dInput, same shape as the forward input

  /// Flat views in the same order as DenseNet::parameters().
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;
  void set_zero();
};

/// A named contiguous run of trainable parameters.
struct ParamBlock {
  std::string name;
  std::span<double> values;
};

/// Static feed-forward stack with hand-derived backprop.
///
/// Every layer may carry batch normalization on its input. Train-mode passes
/// normalize with batch statistics and update the running estimates; eval-mode
/// passes use the running estimates and are pure.
class DenseNet {
public:
  DenseNet() = default;

  /// Glorot-uniform weights, zero biases, fresh batch-norm state.
  DenseNet(Index input_dim, const std::vector<LayerSpec>& specs, std::mt19937_64& rng);

  /// Takes ownership of explicit layers; checks that dimensions chain.
  DenseNet(Index input_dim, std::vector<DenseLayer> layers);

  Index input_dim() const { return input_dim_; }
  Index output_dim() const;
  bool empty() const { return layers_.empty(); }

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  /// Eval-mode pass; const and deterministic.
  Matrix predict(const Matrix& x) const;

  /// Forward pass. Train mode uses batch statistics and updates running stats.
  Matrix forward(const Matrix& x, Mode mode, ForwardTrace* trace = nullptr);

  /// Reverse pass for a trace produced by forward(). Throws StateError on an
  /// invalid trace.
  Gradients backward(const ForwardTrace& trace, const Matrix& output_grad) const;

  Gradients zero_gradients() const;

  std::vector<ParamBlock> parameters();

  /// Sum of squared weights and biases (batch-norm affine terms excluded).
  double weight_norm_squared() const;

  /// grad += 2 * coeff * theta for weights and biases.
  void add_weight_decay(Gradients& grads, double coeff) const;

  void zero_parameters();
  bool all_finite() const;

  nlohmann::json to_json() const;
  static DenseNet from_json(const nlohmann::json& j);

private:
  void validate() const;

  Index input_dim_ = 0;
  std::vector<DenseLayer> layers_;
};

}  // namespace bifid::nn
