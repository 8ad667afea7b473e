#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bifid/model/hyperparams.hpp"
#include "bifid/model/observation.hpp"

namespace bifid::model {

/// Pearson correlation. Zero variance in either argument yields 0.
double pearson(std::span<const double> a, std::span<const double> b);

/// Splits [0, n) into at most `k` shuffled folds of at least two indices each.
/// Fewer folds are used when n < 2k; n < 2 throws ArgumentError.
std::vector<std::vector<std::size_t>> cv_folds(std::size_t n, int k, std::uint64_t seed);

/// Trains on `train` and returns expensive-branch predictions at `x_validation`.
using FoldPredictor = std::function<Vector(const Dataset& train, const Matrix& x_validation)>;

struct RhoEstimate {
  double rho = 0.0;
  std::vector<double> fold_rho;
  std::vector<std::vector<std::size_t>> folds;
};

/// Cross-validated correlation between predictions and held-out expensive
/// targets, averaged over folds. Every cheap observation stays in every
/// training set. Returns nullopt ("undefined") with fewer than two expensive
/// observations.
std::optional<RhoEstimate> rho_cv(const Dataset& data, const FoldPredictor& predictor,
                                  int k_folds, std::uint64_t seed);

/// FoldPredictor that trains a fresh dual-fidelity model per fold.
FoldPredictor model_fold_predictor(ModelHyperparams hyper, std::uint64_t seed);

}  // namespace bifid::model
