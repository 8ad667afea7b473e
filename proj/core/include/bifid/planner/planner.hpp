#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "json.hpp"

#include "bifid/model/cross_validation.hpp"
#include "bifid/planner/acquisition.hpp"
#include "bifid/planner/simplex.hpp"

namespace bifid::planner {

struct PlannerConfig {
  std::vector<double> lambdas = {1.0, -1.0};
  BandwidthPolicy bandwidth;
  /// Uniform random candidates per proposal.
  int n_samples = 1024;
  /// The best candidates that are refined coordinate by coordinate.
  int refine_starts = 4;
  int refine_steps = 100;
  double refine_step = 0.05;
  /// When >= 2, proposals are also reported on the standard simplex of this
  /// dimension (the search space is then [0,1]^(simplex_dim - 1)).
  int simplex_dim = 0;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  nlohmann::json to_json() const;
  /// Starts from defaults; unknown keys throw ConfigError.
  static PlannerConfig from_json(const nlohmann::json& j);
};

struct Proposal {
  int iteration = 0;
  double lambda = 0.0;
  std::vector<double> x;              // in [0,1]^P
  std::vector<double> transformed_x;  // on the simplex, or equal to x
  double acquisition = 0.0;
  /// True when the point is uniform random (no observations, or a flat
  /// acquisition landscape).
  bool random = false;

  nlohmann::json to_json() const;
};

/// Minimizing kernel-density planner with the optional model term.
///
/// Observed objective values and model predictions are min-max normalized
/// with the range of the observed values before entering the acquisition.
class Planner {
public:
  Planner(Index dim, PlannerConfig config);

  Index dim() const { return dim_; }
  const PlannerConfig& config() const { return config_; }

  /// Expensive observations (x in [0,1]^P, raw objective values).
  void set_observations(const Matrix& x, const Vector& f);
  /// Model term: `rho` (nullopt = undefined) and raw-unit predictions.
  void set_gemini(std::optional<double> rho, GeminiPredictor predictor);
  void clear_gemini();

  const KdeSurrogate& surrogate() const { return surrogate_; }
  /// The acquisition configuration in normalized units.
  const AcquisitionConfig& acquisition_config() const { return acq_; }

  /// One proposal per slot, cycling through the lambdas across calls.
  std::vector<Proposal> propose(int batch_size);
  int iteration() const { return iteration_; }

private:
  Proposal search(double lambda);
  std::vector<double> transform(const std::vector<double>& x) const;

  Index dim_;
  PlannerConfig config_;
  KdeSurrogate surrogate_;
  AcquisitionConfig acq_;
  GeminiPredictor raw_predictor_;
  double f_min_ = 0.0;
  double f_range_ = 1.0;
  std::optional<SimplexTransform> simplex_;
  std::mt19937_64 rng_;
  int iteration_ = 0;
  std::size_t lambda_cursor_ = 0;
};

/// Correlation gate: nullopt with fewer than two expensive observations,
/// otherwise the cross-validated correlation of `predictor`.
std::optional<double> update_rho(const model::Dataset& data, const model::FoldPredictor& predictor,
                                 int k_folds, std::uint64_t seed);

}  // namespace bifid::planner
