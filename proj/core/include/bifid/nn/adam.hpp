#pragma once

#include <span>
#include <vector>

#include "bifid/nn/dense_net.hpp"

namespace bifid::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment accumulators, shaped like the parameter blocks on first use.
struct AdamState {
  AdamConfig config;
  std::vector<Vector> first_moment;
  std::vector<Vector> second_moment;
  long step = 0;

  AdamState() = default;
  explicit AdamState(AdamConfig cfg) : config(cfg) {}
};

/// One bias-corrected Adam update of `params` in place.
///
/// Throws DivergenceError naming the block when a gradient is not finite and
/// ArgumentError when block shapes disagree with the gradients or state.
void adam_step(std::span<const ParamBlock> params,
               std::span<const std::span<const double>> grads,
               AdamState& state);

}  // namespace bifid::nn
