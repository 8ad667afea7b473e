#include "bifid/planner/planner.hpp"

#include <algorithm>
#include <numeric>

#include <spdlog/spdlog.h>

#include "bifid/errors.hpp"

namespace bifid::planner {

namespace {

const std::vector<std::string> kConfigKeys = {"lambdas",      "bandwidth",     "n_samples",
                                              "refine_starts", "refine_steps", "refine_step",
                                              "simplex_dim",  "seed"};

}  // namespace

void PlannerConfig::validate() const {
  AcquisitionConfig{lambdas, std::nullopt, {}}.validate();
  bandwidth.validate();
  if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
  if (refine_starts < 0 || refine_starts > n_samples) {
    throw ConfigError("refine_starts must be in [0, n_samples]");
  }
  if (refine_steps < 0) throw ConfigError("refine_steps must be >= 0");
  if (!(refine_step > 0.0 && refine_step <= 1.0)) throw ConfigError("refine_step must be in (0, 1]");
  if (simplex_dim == 1 || simplex_dim < 0) throw ConfigError("simplex_dim must be 0 or >= 2");
}

nlohmann::json PlannerConfig::to_json() const {
  return {{"lambdas", lambdas},
          {"bandwidth",
           {{"scale", bandwidth.scale}, {"min", bandwidth.min}, {"max", bandwidth.max}, {"fixed", bandwidth.fixed}}},
          {"n_samples", n_samples},
          {"refine_starts", refine_starts},
          {"refine_steps", refine_steps},
          {"refine_step", refine_step},
          {"simplex_dim", simplex_dim},
          {"seed", seed}};
}

PlannerConfig PlannerConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("planner config must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end()) {
      throw ConfigError("planner: unknown key '" + key + "'");
    }
  }
  PlannerConfig c;
  try {
    if (j.contains("lambdas")) c.lambdas = j.at("lambdas").get<std::vector<double>>();
    if (j.contains("bandwidth")) {
      const auto& b = j.at("bandwidth");
      for (const auto& [key, _] : b.items()) {
        if (key != "scale" && key != "min" && key != "max" && key != "fixed") {
          throw ConfigError("planner.bandwidth: unknown key '" + key + "'");
        }
      }
      c.bandwidth.scale = b.value("scale", c.bandwidth.scale);
      c.bandwidth.min = b.value("min", c.bandwidth.min);
      c.bandwidth.max = b.value("max", c.bandwidth.max);
      c.bandwidth.fixed = b.value("fixed", c.bandwidth.fixed);
    }
    c.n_samples = j.value("n_samples", c.n_samples);
    c.refine_starts = j.value("refine_starts", c.refine_starts);
    c.refine_steps = j.value("refine_steps", c.refine_steps);
    c.refine_step = j.value("refine_step", c.refine_step);
    c.simplex_dim = j.value("simplex_dim", c.simplex_dim);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("planner: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json Proposal::to_json() const {
  return {{"iteration", iteration}, {"lambda", lambda},         {"x", x},
          {"transformed_x", transformed_x}, {"acquisition", acquisition}, {"random", random}};
}

Planner::Planner(Index dim, PlannerConfig config)
    : dim_(dim), config_(std::move(config)), surrogate_(dim, config_.bandwidth), rng_(config_.seed) {
  config_.validate();
  if (config_.simplex_dim >= 2) {
    if (config_.simplex_dim - 1 != dim) throw ArgumentError("planner: simplex_dim must equal dim + 1");
    simplex_.emplace(config_.simplex_dim);
  }
  acq_.lambdas = config_.lambdas;
}

void Planner::set_observations(const Matrix& x, const Vector& f) {
  if (x.rows() > 0 && ((x.array() < 0.0).any() || (x.array() > 1.0).any())) {
    throw ArgumentError("planner: observations must lie in the unit hypercube");
  }
  f_min_ = f.size() > 0 ? f.minCoeff() : 0.0;
  const double range = f.size() > 0 ? f.maxCoeff() - f_min_ : 0.0;
  f_range_ = range > 0.0 ? range : 1.0;
  surrogate_.set_observations(x, (f.array() - f_min_) / f_range_);
  if (raw_predictor_) set_gemini(acq_.rho, raw_predictor_);
}

void Planner::set_gemini(std::optional<double> rho, GeminiPredictor predictor) {
  raw_predictor_ = std::move(predictor);
  acq_.rho = rho;
  if (!raw_predictor_) {
    acq_.gemini = nullptr;
    return;
  }
  const double lo = f_min_;
  const double range = f_range_;
  GeminiPredictor raw = raw_predictor_;
  acq_.gemini = [raw, lo, range](const Matrix& x) -> Vector { return (raw(x).array() - lo) / range; };
  acq_.validate();
}

void Planner::clear_gemini() {
  raw_predictor_ = nullptr;
  acq_.rho.reset();
  acq_.gemini = nullptr;
}

std::vector<double> Planner::transform(const std::vector<double>& x) const {
  return simplex_ ? simplex_->to_simplex(x) : x;
}

Proposal Planner::search(double lambda) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix cand(config_.n_samples, dim_);
  for (Index i = 0; i < cand.size(); ++i) cand.data()[i] = unit(rng_);

  Proposal p;
  p.lambda = lambda;
  auto random_point = [&] {
    p.x.resize(static_cast<std::size_t>(dim_));
    for (auto& v : p.x) v = unit(rng_);
    p.random = true;
    return p;
  };
  if (surrogate_.size() == 0) return random_point();

  const Vector alpha = acquisition(cand, surrogate_, acq_, lambda);
  if (!alpha.allFinite()) throw ArgumentError("planner: acquisition is not finite");
  if (alpha.maxCoeff() - alpha.minCoeff() <= 1e-15 * std::max(1.0, alpha.cwiseAbs().maxCoeff())) {
    spdlog::info("planner: flat acquisition, proposing a uniform random point");
    return random_point();
  }

  std::vector<Index> order(static_cast<std::size_t>(cand.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  const auto starts = static_cast<std::size_t>(std::max(config_.refine_starts, 1));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(starts), order.end(),
                    [&](Index a, Index b) { return alpha[a] < alpha[b] || (alpha[a] == alpha[b] && a < b); });

  Vector best_x = cand.row(order[0]).transpose();
  double best = alpha[order[0]];
  for (std::size_t s = 0; s < static_cast<std::size_t>(config_.refine_starts); ++s) {
    Vector x = cand.row(order[s]).transpose();
    double value = alpha[order[s]];
    double step = config_.refine_step;
    // Each step tries +/- step along every coordinate (one batched evaluation)
    // and moves to the best improvement; without one the step is halved.
    Matrix trial(2 * dim_, dim_);
    for (int it = 0; it < config_.refine_steps; ++it) {
      for (Index k = 0; k < dim_; ++k) {
        trial.row(2 * k) = x.transpose();
        trial.row(2 * k + 1) = x.transpose();
        trial(2 * k, k) = std::min(1.0, x[k] + step);
        trial(2 * k + 1, k) = std::max(0.0, x[k] - step);
      }
      const Vector a = acquisition(trial, surrogate_, acq_, lambda);
      Index arg = 0;
      const double m = a.minCoeff(&arg);
      if (m < value) {
        value = m;
        x = trial.row(arg).transpose();
      } else {
        step *= 0.5;
      }
    }
    if (value < best) {
      best = value;
      best_x = x;
    }
  }
  p.x.assign(best_x.data(), best_x.data() + best_x.size());
  p.acquisition = best;
  return p;
}

std::vector<Proposal> Planner::propose(int batch_size) {
  if (batch_size < 1) throw ArgumentError("propose: batch_size must be >= 1");
  std::vector<Proposal> out;
  for (int b = 0; b < batch_size; ++b) {
    const double lambda = config_.lambdas[lambda_cursor_ % config_.lambdas.size()];
    ++lambda_cursor_;
    Proposal p = search(lambda);
    p.iteration = iteration_;
    p.transformed_x = transform(p.x);
    out.push_back(std::move(p));
  }
  ++iteration_;
  return out;
}

std::optional<double> update_rho(const model::Dataset& data, const model::FoldPredictor& predictor,
                                 int k_folds, std::uint64_t seed) {
  const auto est = model::rho_cv(data, predictor, k_folds, seed);
  if (!est) return std::nullopt;
  return est->rho;
}

}  // namespace bifid::planner
