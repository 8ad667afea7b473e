#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "bifid/model/observation.hpp"
#include "bifid/surface/fixtures.hpp"
#include "bifid/surface/gp.hpp"
#include "bifid/surface/rank_stats.hpp"

namespace bifid::surface {

enum class Provenance { GpSampled, TrigFixture, Analytic };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

/// Cheap and expensive scalar fields over one shared finite domain.
struct SurfacePair {
  Matrix domain;  // one row per point
  Vector y_cheap;
  Vector y_exp;
  double spearman = 0.0;
  Provenance provenance = Provenance::GpSampled;
  nlohmann::json meta = nlohmann::json::object();

  Index size() const { return domain.rows(); }
  Index dim() const { return domain.cols(); }

  /// Checks lengths and that the stored coefficient matches a recomputation
  /// within 1e-12. Throws ArgumentError.
  void validate() const;
};

/// Builds a pair and computes its Spearman coefficient. Throws ArgumentError
/// on mismatched lengths or when the coefficient is undefined.
SurfacePair make_surface_pair(Matrix domain, Vector y_cheap, Vector y_exp, Provenance provenance,
                              nlohmann::json meta = nlohmann::json::object());

/// Two independent GP draws (expensive first, then cheap) over the domain.
SurfacePair gp_sample_pair(const DomainSpec& domain, const RbfKernel& kernel, std::size_t n_train,
                           std::uint64_t seed);

/// Trig fixture sampled on `n_points` evenly spaced points of [0, 1].
SurfacePair trig_surface_pair(TrigKind kind, int n_points = 100);

/// Analytic pair on a regular grid of [0, 1]^dim.
SurfacePair analytic_surface_pair(AnalyticName cheap, AnalyticName expensive, int dim,
                                  int points_per_dim);

/// Regular grid over [0, 1]^dim (endpoints included).
Matrix unit_grid(int dim, int points_per_dim);

/// Pool of GP pairs grouped by correlation bin. The same expensive surfaces
/// are reused in every bin; cheap surfaces are drawn until their coefficient
/// with the expensive surface lands in an unfilled bin.
struct BinnedPool {
  struct Entry {
    SurfacePair pair;
    int bin = 0;
    int expensive_index = 0;
  };
  std::vector<Entry> entries;
  std::vector<std::string> warnings;  // unreachable (expensive surface, bin) cells
};

struct PoolSpec {
  DomainSpec domain;
  RbfKernel kernel;
  std::size_t n_train = 20;
  int n_expensive = 20;
  /// Cheap draws allowed per requested bin before giving up on it.
  int max_attempts = 500;
  std::vector<int> bins = {0, 1, 2, 3, 4, 5, 6, 7};
};

/// Deterministic in `seed`; expensive surface i uses its own random stream,
/// so surfaces can be generated independently (and in parallel) by index.
std::vector<BinnedPool::Entry> generate_bin_cells(const PoolSpec& spec, int expensive_index,
                                                  std::uint64_t seed,
                                                  std::vector<std::string>* warnings);
BinnedPool generate_binned_pool(const PoolSpec& spec, std::uint64_t seed);

/// One cross-validation-like split of a pair's domain.
struct Fold {
  std::vector<Index> cheap_train;
  std::vector<Index> exp_train;
  std::vector<Index> validation;  // every expensive point not in exp_train
};

/// Independent random training subsets per fold. Throws ArgumentError when a
/// size exceeds the domain or the validation set would be empty.
std::vector<Fold> make_folds(const SurfacePair& pair, int n_folds, std::size_t n_cheap_train,
                             std::size_t n_exp_train, std::uint64_t seed);

/// Training observations of one fold.
model::Dataset fold_dataset(const SurfacePair& pair, const Fold& fold);

/// CSV `x1..xd,y_cheap,y_exp` plus a `<path>.json` sidecar holding the
/// coefficient, provenance and metadata.
void write_surface_pair(const SurfacePair& pair, const std::filesystem::path& csv_path);
SurfacePair read_surface_pair(const std::filesystem::path& csv_path);

}  // namespace bifid::surface
