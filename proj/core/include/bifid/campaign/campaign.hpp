#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bifid/campaign/evaluator.hpp"
#include "bifid/campaign/stats.hpp"
#include "bifid/model/hyperparams.hpp"
#include "bifid/planner/planner.hpp"

namespace bifid::campaign {

enum class Strategy { Random, BoOnly, BoGemini };
std::string to_string(Strategy s);
/// "random", "bo_only" or "bo_gemini"; throws ConfigError otherwise.
Strategy strategy_from_string(const std::string& s);

enum class CampaignStatus { Running, TargetReached, BudgetExhausted, Error };
std::string to_string(CampaignStatus s);
CampaignStatus status_from_string(const std::string& s);

/// Model settings used for retraining inside a campaign: the default
/// hyperparameters with a short budget so every iteration stays fast.
model::ModelHyperparams campaign_model_defaults();

struct CampaignConfig {
  Strategy strategy = Strategy::BoOnly;
  /// Cheap evaluations per expensive evaluation (bo_gemini only).
  int r = 0;
  double target = 0.0;
  int max_expensive = 100;
  std::uint64_t seed = 0;
  planner::PlannerConfig planner;
  model::ModelHyperparams model = campaign_model_defaults();
  int rho_folds = 3;
  /// Optimizer steps per model training. Each retraining runs
  /// ceil(model_steps / steps_per_epoch) epochs, so the cost per iteration
  /// stays flat as cheap data accumulates; 0 uses model.max_epochs as is.
  int model_steps = 300;

  /// e.g. "bo_gemini_r2"; "random" and "bo_only" for the others.
  std::string label() const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
  nlohmann::json to_json() const;
  /// Starts from defaults; unknown keys throw ConfigError.
  static CampaignConfig from_json(const nlohmann::json& j);
};

struct CheapSample {
  std::vector<double> x;
  double y = 0.0;
};

/// One loop iteration: the expensive proposal and its measurement, the cheap
/// samples taken in the same iteration and the state after it.
struct IterationRecord {
  int iteration = 0;
  double lambda = 0.0;
  std::vector<double> x;
  std::vector<double> transformed_x;
  double y = 0.0;
  std::vector<CheapSample> cheap;
  std::optional<double> rho;  // after this iteration's update
  double best_so_far = 0.0;
  double cumulative_cost = 0.0;
  int expensive_evals = 0;
  int cheap_evals = 0;
  CampaignStatus status = CampaignStatus::Running;

  nlohmann::json to_json() const;
  static IterationRecord from_json(const nlohmann::json& j);
};

struct CampaignRecord {
  std::string label;
  Strategy strategy = Strategy::BoOnly;
  int r = 0;
  double target = 0.0;
  int repeat = 0;
  std::uint64_t seed = 0;
  std::vector<IterationRecord> iterations;
  CampaignStatus status = CampaignStatus::Running;
  std::string error;

  int expensive_evals() const;
  int cheap_evals() const;
  double best() const;
  /// Expensive evaluations until the target was met; the full count when the
  /// budget ran out (right-censored).
  double evals_to_target() const { return expensive_evals(); }

  /// JSON lines, one per iteration; every line carries the run identity and
  /// the last line the terminal status (and error message, if any).
  void write_jsonl(std::ostream& os) const;
  static CampaignRecord read_jsonl(std::istream& is);
};

/// Runs one closed-loop campaign. Each iteration proposes one expensive point
/// (random, or from the planner with lambdas cycling across iterations),
/// evaluates `r` uniformly random cheap points (bo_gemini), evaluates the
/// expensive point, retrains the model and the correlation gate once there
/// are two expensive observations, and stops when a measured expensive value
/// is <= target or the budget is spent. An evaluator failure ends the run with
/// status Error and the partial record. Throws ArgumentError when bo_gemini
/// has no cheap evaluator or dimensions disagree.
/// Hyperparameters for one retraining on `data` under the step budget.
model::ModelHyperparams budgeted_hyper(const CampaignConfig& config, const model::Dataset& data);

CampaignRecord run_campaign(const CampaignConfig& config, Evaluator* cheap, Evaluator& expensive,
                            int repeat = 0);

/// Seed of repeat `i`; identical across configurations with the same base
/// seed, so repeats are paired.
std::uint64_t repeat_seed(std::uint64_t base_seed, int repeat);

struct SuiteRow {
  std::string strategy;
  int r = 0;
  double target = 0.0;
  Summary summary;
  std::optional<double> p_vs_previous;
  int censored = 0;
};

struct SuiteResult {
  std::vector<CampaignConfig> configs;
  std::vector<std::vector<CampaignRecord>> runs;  // per config, per repeat

  /// One row per configuration; the p-value compares evals-to-target with the
  /// previous row, paired by repeat. Throws ArgumentError when the repeat
  /// counts of adjacent rows differ.
  std::vector<SuiteRow> rows() const;
};

/// CSV with header `strategy,r,target,mean,sem,q1,median,q3,p_vs_previous`.
void write_suite_csv(const std::vector<SuiteRow>& rows, std::ostream& os);

/// Runs every configuration `n_repeats` times (repeat i uses repeat_seed(seed,
/// i)) on fresh copies of the evaluators. Repeats run on `threads` workers;
/// results do not depend on the thread count. Throws ArgumentError when
/// n_repeats < 2.
SuiteResult run_suite(const std::vector<CampaignConfig>& configs, const Evaluator* cheap,
                      const Evaluator& expensive, int n_repeats, int threads = 1);

}  // namespace bifid::campaign
