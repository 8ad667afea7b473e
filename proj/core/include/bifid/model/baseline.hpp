#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bifid/model/dual_fidelity_model.hpp"

namespace bifid::model {

/// Single-network reference models for learning-curve comparisons.
///   nn_exp   - trained on expensive observations only
///   nn_cheap - trained on cheap observations only, evaluated on expensive targets
///   nn_both  - trained on the pooled observations with no bias correction
enum class BaselineVariant { NnExp, NnCheap, NnBoth };

std::string to_string(BaselineVariant v);
BaselineVariant baseline_from_string(const std::string& name);

/// A plain heteroscedastic network with the latent-net topology.
class BaselineModel {
public:
  BaselineVariant variant() const { return variant_; }
  std::vector<Prediction> predict(const Matrix& x) const;
  const TrainingHistory& history() const { return history_; }

private:
  friend BaselineModel baseline_train(BaselineVariant, const Dataset&, const ModelHyperparams&,
                                      std::uint64_t);
  BaselineModel(BaselineVariant v, DualFidelityModel m, TrainingHistory h)
      : variant_(v), model_(std::move(m)), history_(std::move(h)) {}

  BaselineVariant variant_;
  DualFidelityModel model_;
  TrainingHistory history_;
};

/// Throws ArgumentError when the selected subset is empty.
BaselineModel baseline_train(BaselineVariant variant, const Dataset& data,
                             const ModelHyperparams& hyper, std::uint64_t seed);

}  // namespace bifid::model
