#include "bifid/nn/adam.hpp"

#include <cmath>

#include "bifid/errors.hpp"

namespace bifid::nn {

void adam_step(std::span<const ParamBlock> params,
               std::span<const std::span<const double>> grads,
               AdamState& state) {
  if (params.size() != grads.size()) {
    throw ArgumentError("adam_step: " + std::to_string(params.size()) + " parameter blocks but " +
                        std::to_string(grads.size()) + " gradient blocks");
  }
  if (state.first_moment.empty()) {
    state.first_moment.reserve(params.size());
    state.second_moment.reserve(params.size());
    for (const auto& p : params) {
      state.first_moment.push_back(Vector::Zero(static_cast<Index>(p.values.size())));
      state.second_moment.push_back(Vector::Zero(static_cast<Index>(p.values.size())));
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw ArgumentError("adam_step: optimizer state has a different number of blocks");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].values.size() != grads[b].size() ||
        static_cast<Index>(grads[b].size()) != state.first_moment[b].size()) {
      throw ArgumentError("adam_step: shape mismatch in block '" + params[b].name + "'");
    }
    for (double g : grads[b]) {
      if (!std::isfinite(g)) {
        throw DivergenceError("adam_step: non-finite gradient in block '" + params[b].name + "'");
      }
    }
  }

  const auto& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& m = state.first_moment[b];
    auto& v = state.second_moment[b];
    auto values = params[b].values;
    const auto g = grads[b];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto k = static_cast<Index>(i);
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[i];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[i] * g[i];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      values[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace bifid::nn
