#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bifid/campaign/campaign.hpp"
#include "bifid/io/regression.hpp"
#include "bifid/surface/surface_pair.hpp"

namespace bifid::io {

/// `gen_surfaces` section: a binned pool of GP surface pairs.
struct GenSurfacesConfig {
  surface::PoolSpec pool;

  static GenSurfacesConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Where learning-curve data comes from.
struct RegressionSource {
  enum class Kind { Trig, Analytic, Gp, Surface, Descriptors };
  Kind kind = Kind::Trig;
  surface::TrigKind trig = surface::TrigKind::Linear;
  int points = 100;  // trig grid size
  surface::AnalyticName cheap = surface::AnalyticName::HyperEllipsoid;
  surface::AnalyticName expensive = surface::AnalyticName::Dejong;
  int dim = 1;
  int points_per_dim = 100;
  surface::DomainSpec domain;
  surface::RbfKernel kernel;
  int n_train = 20;
  std::filesystem::path path;

  static RegressionSource from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Materializes the pools; `seed` drives GP sampling.
  FidelityPools load(std::uint64_t seed) const;
};

struct RegressConfig {
  RegressionSource source;
  LearningCurveConfig curve;

  static RegressConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Evaluator description for the optimize command.
struct EvaluatorSpec {
  enum class Kind { Analytic, Trig, Surface, Descriptors };
  Kind kind = Kind::Analytic;
  surface::AnalyticName name = surface::AnalyticName::Dejong;
  int dim = 2;
  surface::TrigKind trig = surface::TrigKind::Constant;
  std::filesystem::path path;
  double cost = 1.0;

  static EvaluatorSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  campaign::Evaluator build(campaign::Fidelity fidelity) const;
};

struct OptimizeConfig {
  EvaluatorSpec expensive;
  std::optional<EvaluatorSpec> cheap;
  /// Each entry: {"strategy": ..., "r": ...}; the shared settings below apply
  /// to all of them.
  std::vector<campaign::CampaignConfig> strategies;
  /// Absolute target, or (when target_percentile is set) the given percentile
  /// of the expensive surface on a regular grid of grid_points_per_dim^P.
  std::optional<double> target;
  std::optional<double> target_percentile;
  int grid_points_per_dim = 100;
  int n_repeats = 20;

  static OptimizeConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  double resolve_target() const;
};

/// Whole configuration file. Top-level keys: seed, out, threads and one
/// section per command (gen_surfaces, regress, optimize). Unknown keys are
/// rejected everywhere; seeds are only set at the top level.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out = "results";
  int threads = 1;
  std::optional<GenSurfacesConfig> gen_surfaces;
  std::optional<RegressConfig> regress;
  std::optional<OptimizeConfig> optimize;

  /// Throws ConfigError naming the offending field.
  static RunConfig from_json(const nlohmann::json& j);
  /// Throws ConfigError for unreadable or malformed files.
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

}  // namespace bifid::io
