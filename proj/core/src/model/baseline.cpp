#include "bifid/model/baseline.hpp"

#include "bifid/errors.hpp"

namespace bifid::model {

std::string to_string(BaselineVariant v) {
  switch (v) {
    case BaselineVariant::NnExp:
      return "nn_exp";
    case BaselineVariant::NnCheap:
      return "nn_cheap";
    case BaselineVariant::NnBoth:
      return "nn_both";
  }
  return "nn_exp";
}

BaselineVariant baseline_from_string(const std::string& name) {
  if (name == "nn_exp") return BaselineVariant::NnExp;
  if (name == "nn_cheap") return BaselineVariant::NnCheap;
  if (name == "nn_both") return BaselineVariant::NnBoth;
  throw ArgumentError("unknown baseline '" + name + "'");
}

std::vector<Prediction> BaselineModel::predict(const Matrix& x) const {
  auto preds = model_.predict_cheap(x);
  for (auto& p : preds) p.tag = Fidelity::Expensive;
  return preds;
}

BaselineModel baseline_train(BaselineVariant variant, const Dataset& data,
                             const ModelHyperparams& hyper, std::uint64_t seed) {
  // The selected rows all flow through the latent network's cheap branch, so
  // the bias networks never see data.
  Dataset selected;
  switch (variant) {
    case BaselineVariant::NnExp:
      selected = data.only(Fidelity::Expensive).retagged(Fidelity::Cheap);
      break;
    case BaselineVariant::NnCheap:
      selected = data.only(Fidelity::Cheap);
      break;
    case BaselineVariant::NnBoth:
      selected = data.retagged(Fidelity::Cheap);
      break;
  }
  if (selected.empty()) {
    throw ArgumentError("baseline_train: no observations for variant " + to_string(variant));
  }
  ModelHyperparams h = hyper;
  h.coeff_both = 1.0;
  if (variant == BaselineVariant::NnExp) h.sigma_floor_cheap = hyper.sigma_floor_exp;
  DualFidelityModel m(data.dim(), h, seed);
  auto history = m.train(selected, seed + 1);
  return BaselineModel(variant, std::move(m), std::move(history));
}

}  // namespace bifid::model
