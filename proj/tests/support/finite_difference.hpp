#pragma once

// Central finite-difference oracle shared by the gradient tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bifid/nn/dense_net.hpp"

namespace bifid::testing {

struct GradientMismatch {
  std::string block;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares analytic gradients with (f(p + h) - f(p - h)) / 2h for every entry
/// of every block. Passes when |a - n| <= max(rel_tol * max(|a|, |n|), abs_floor).
inline std::vector<GradientMismatch> check_gradients(
    std::span<const nn::ParamBlock> params, std::span<const std::span<const double>> analytic,
    const std::function<double()>& loss, double h, double rel_tol, double abs_floor) {
  std::vector<GradientMismatch> bad;
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto values = params[b].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = loss();
      values[i] = saved - h;
      const double down = loss();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[b][i];
      const double scale = std::max(std::abs(a), std::abs(numeric));
      if (std::abs(a - numeric) > std::max(rel_tol * scale, abs_floor)) {
        bad.push_back({params[b].name, i, a, numeric});
      }
    }
  }
  return bad;
}

}  // namespace bifid::testing
