#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "bifid/io/descriptor_dataset.hpp"
#include "bifid/model/hyperparams.hpp"
#include "bifid/surface/surface_pair.hpp"

namespace bifid::io {

using nn::Matrix;
using nn::Vector;

/// Candidate observations of each fidelity from which training sets are drawn.
/// Every expensive row not used for training is a validation row.
struct FidelityPools {
  Matrix x_cheap;
  Vector y_cheap;
  Matrix x_exp;
  Vector y_exp;

  static FidelityPools from_pair(const surface::SurfacePair& pair);
  static FidelityPools from_descriptors(const DescriptorDataset& data);
};

/// Model settings for learning curves: the tuned defaults with a fixed budget
/// of 4000 epochs, no early stopping and a 1000-epoch cheap-only warm-up.
/// On small 1D benchmarks a learning rate of 1e-3 converges markedly better
/// within this budget (see kFastLearningRate).
model::ModelHyperparams regression_model_defaults();

/// Learning rate used by the bundled learning-curve benchmarks.
inline constexpr double kFastLearningRate = 1e-3;

struct LearningCurveConfig {
  std::vector<int> sizes = {2, 3, 5, 10, 20, 50, 75};
  /// Cheap training points; when cheap_ratio > 0 it is cheap_ratio times the
  /// expensive size instead. Either way capped at the cheap pool size.
  int n_cheap = 75;
  int cheap_ratio = 0;
  int n_splits = 40;
  std::vector<std::string> models = {"gemini", "nn_exp", "nn_cheap", "nn_both"};
  model::ModelHyperparams hyper = regression_model_defaults();
  std::uint64_t seed = 0;

  int cheap_count(int n_exp, std::size_t pool) const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
  nlohmann::json to_json() const;
  /// Starts from defaults; `hyper` overrides apply on top of the regression
  /// defaults; unknown keys throw ConfigError.
  static LearningCurveConfig from_json(const nlohmann::json& j);
};

struct SplitMetric {
  int size = 0;
  int split = 0;
  std::string model;
  int n_cheap = 0;
  int n_validation = 0;
  double rmsd = 0.0;
  double r2 = 0.0;
  double pearson = 0.0;
};

/// Root-mean-square deviation, coefficient of determination
/// (1 - SS_res / SS_tot) and Pearson correlation of predictions vs truth.
struct FitMetrics {
  double rmsd = 0.0;
  double r2 = 0.0;
  double pearson = 0.0;
};
FitMetrics fit_metrics(const Vector& truth, const Vector& prediction);

/// Split `s` of training size `n_exp`: random expensive training rows (the
/// rest validate) and random cheap rows. Throws ArgumentError when n_exp
/// leaves no validation rows.
struct Split {
  std::vector<std::size_t> exp_train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> cheap_train;
};
Split make_split(const FidelityPools& pools, int n_exp, int n_cheap, std::uint64_t seed, int size_index,
                 int split);

/// Trains every configured model on one split and scores it on the
/// validation rows.
std::vector<SplitMetric> evaluate_split(const FidelityPools& pools, const LearningCurveConfig& config,
                                        int size_index, int split);

/// All sizes x splits x models, ordered by (size, split, model). Jobs run on
/// `threads` workers; the output does not depend on the thread count.
std::vector<SplitMetric> run_learning_curve(const FidelityPools& pools, const LearningCurveConfig& config,
                                            int threads = 1);

/// Raw per-split CSV: `size,split,model,n_cheap,n_validation,rmsd,r2,pearson`.
void write_split_csv(const std::vector<SplitMetric>& metrics, std::ostream& os);
/// Quartiles per (size, model):
/// `size,model,n_cheap,n_splits,rmsd_q1,rmsd_median,rmsd_q3,r2_q1,r2_median,r2_q3,pearson_q1,pearson_median,pearson_q3`.
void write_curve_summary_csv(const std::vector<SplitMetric>& metrics, const LearningCurveConfig& config,
                             std::ostream& os);

}  // namespace bifid::io
