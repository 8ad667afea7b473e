#include "bifid/model/hyperparams.hpp"

#include <set>
#include <string>

#include "bifid/errors.hpp"

namespace bifid::model {

void ModelHyperparams::validate() const {
  auto require = [](bool ok, const char* field, const char* why) {
    if (!ok) throw ConfigError(std::string("model.") + field + ": " + why);
  };
  require(batch_size >= 1, "batch_size", "must be >= 1");
  require(learning_rate > 0.0, "learning_rate", "must be positive");
  require(depth_fbias >= 0, "depth_fbias", "must be >= 0");
  require(depth_latent >= 0, "depth_latent", "must be >= 0");
  require(depth_tbias >= 0, "depth_tbias", "must be >= 0");
  require(hidden_fbias >= 0, "hidden_fbias", "must be >= 0");
  require(hidden_latent >= 1, "hidden_latent", "must be >= 1");
  require(hidden_tbias >= 1, "hidden_tbias", "must be >= 1");
  require(coeff_both >= 0.0, "coeff_both", "must be >= 0");
  require(nll_beta >= 0.0 && nll_beta <= 1.0, "nll_beta", "must be in [0, 1]");
  require(reg_latent >= 0.0, "reg_latent", "must be >= 0");
  require(reg_bias >= 0.0, "reg_bias", "must be >= 0");
  require(sigma_floor_cheap > 0.0, "sigma_floor_cheap", "must be positive");
  require(sigma_floor_exp > 0.0, "sigma_floor_exp", "must be positive");
  require(batch_norm_momentum >= 0.0 && batch_norm_momentum < 1.0, "batch_norm_momentum",
          "must be in [0,1)");
  require(batch_norm_epsilon > 0.0, "batch_norm_epsilon", "must be positive");
  require(max_epochs >= 1, "max_epochs", "must be >= 1");
  require(patience >= 1, "patience", "must be >= 1");
  require(warmup_epochs >= 0, "warmup_epochs", "must be >= 0");
  require(holdout_fraction >= 0.0 && holdout_fraction < 1.0, "holdout_fraction",
          "must be in [0,1)");
}

nlohmann::json ModelHyperparams::to_json() const {
  using nn::to_string;
  return {
      {"batch_size", batch_size},
      {"learning_rate", learning_rate},
      {"act_fbias", to_string(act_fbias)},
      {"act_fbias_out", to_string(act_fbias_out)},
      {"act_latent", to_string(act_latent)},
      {"act_latent_out", to_string(act_latent_out)},
      {"act_tbias", to_string(act_tbias)},
      {"act_tbias_out", to_string(act_tbias_out)},
      {"depth_fbias", depth_fbias},
      {"depth_latent", depth_latent},
      {"depth_tbias", depth_tbias},
      {"hidden_fbias", hidden_fbias},
      {"hidden_latent", hidden_latent},
      {"hidden_tbias", hidden_tbias},
      {"coeff_both", coeff_both},
      {"nll_beta", nll_beta},
      {"reg_latent", reg_latent},
      {"reg_bias", reg_bias},
      {"sigma_floor_cheap", sigma_floor_cheap},
      {"sigma_floor_exp", sigma_floor_exp},
      {"batch_norm_latent", batch_norm_latent},
      {"batch_norm_bias", batch_norm_bias},
      {"batch_norm_momentum", batch_norm_momentum},
      {"batch_norm_epsilon", batch_norm_epsilon},
      {"max_epochs", max_epochs},
      {"patience", patience},
      {"holdout_fraction", holdout_fraction},
      {"warmup_epochs", warmup_epochs},
  };
}

ModelHyperparams ModelHyperparams::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("model: expected an object");
  ModelHyperparams h;
  const auto known = h.to_json();
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("model." + key + ": unknown key");
  }
  auto get = [&j](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      field = j.at(key).get<std::decay_t<decltype(field)>>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string("model.") + key + ": wrong type");
    }
  };
  auto get_act = [&j](const char* key, nn::Activation& field) {
    if (!j.contains(key)) return;
    try {
      field = nn::activation_from_string(j.at(key).get<std::string>());
    } catch (const std::exception&) {
      throw ConfigError(std::string("model.") + key + ": unknown activation");
    }
  };
  get("batch_size", h.batch_size);
  get("learning_rate", h.learning_rate);
  get_act("act_fbias", h.act_fbias);
  get_act("act_fbias_out", h.act_fbias_out);
  get_act("act_latent", h.act_latent);
  get_act("act_latent_out", h.act_latent_out);
  get_act("act_tbias", h.act_tbias);
  get_act("act_tbias_out", h.act_tbias_out);
  get("depth_fbias", h.depth_fbias);
  get("depth_latent", h.depth_latent);
  get("depth_tbias", h.depth_tbias);
  get("hidden_fbias", h.hidden_fbias);
  get("hidden_latent", h.hidden_latent);
  get("hidden_tbias", h.hidden_tbias);
  get("coeff_both", h.coeff_both);
  get("nll_beta", h.nll_beta);
  get("reg_latent", h.reg_latent);
  get("reg_bias", h.reg_bias);
  get("sigma_floor_cheap", h.sigma_floor_cheap);
  get("sigma_floor_exp", h.sigma_floor_exp);
  get("batch_norm_latent", h.batch_norm_latent);
  get("batch_norm_bias", h.batch_norm_bias);
  get("batch_norm_momentum", h.batch_norm_momentum);
  get("batch_norm_epsilon", h.batch_norm_epsilon);
  get("max_epochs", h.max_epochs);
  get("patience", h.patience);
  get("holdout_fraction", h.holdout_fraction);
  get("warmup_epochs", h.warmup_epochs);
  h.validate();
  return h;
}

}  // namespace bifid::model
