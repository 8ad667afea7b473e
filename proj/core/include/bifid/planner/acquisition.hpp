#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bifid/nn/dense_net.hpp"

namespace bifid::planner {

using nn::Index;
using nn::Matrix;
using nn::Vector;

/// Kernel bandwidth rule: scale * N^(-1/(P+4)) clipped to [min, max], or a
/// fixed value when `fixed > 0`.
struct BandwidthPolicy {
  double scale = 0.5;
  double min = 0.02;
  double max = 0.5;
  double fixed = 0.0;

  double bandwidth(std::size_t n_observations, Index dim) const;
  void validate() const;
};

/// Isotropic Gaussian kernel densities centred on the observations, each
/// carrying its objective value f_k. The uniform density on [0,1]^P is 1.
class KdeSurrogate {
public:
  explicit KdeSurrogate(Index dim, BandwidthPolicy policy = {});

  /// Replaces the observations; rows of `x` lie in [0,1]^P. The bandwidth is
  /// recomputed from the policy.
  void set_observations(Matrix x, Vector f);
  /// Overrides the bandwidth (e.g. for hand-evaluated examples).
  void set_bandwidth(double h);

  Index dim() const { return dim_; }
  std::size_t size() const { return static_cast<std::size_t>(x_.rows()); }
  double bandwidth() const { return bandwidth_; }
  const Matrix& x() const { return x_; }
  const Vector& f() const { return f_; }

  /// p_k(q) for every query row q and observation k (rows x observations):
  ///   (2 pi h^2)^(-P/2) exp(-|q - x_k|^2 / (2 h^2)).
  Matrix densities(const Matrix& queries) const;

private:
  Index dim_;
  BandwidthPolicy policy_;
  double bandwidth_;
  Matrix x_;
  Vector f_;
};

/// Model prediction g(x) for a batch of points (one row each), already in the
/// same units as the surrogate's f_k.
using GeminiPredictor = std::function<Vector(const Matrix& x)>;

struct AcquisitionConfig {
  std::vector<double> lambdas = {1.0, -1.0};
  /// nullopt means "undefined": the model term is dropped.
  std::optional<double> rho;
  GeminiPredictor gemini;

  bool uses_gemini() const { return rho.has_value() && static_cast<bool>(gemini); }
  void validate() const;
};

/// Augmented acquisition for minimization,
///   alpha(x) = [sum_k f_k p_k(x) + lambda + rho g(x)] / [sum_k p_k(x) + 1 + 1],
/// evaluated for every row of `x`. The rho g term is present only when
/// config.uses_gemini().
Vector acquisition(const Matrix& x, const KdeSurrogate& surrogate, const AcquisitionConfig& config,
                   double lambda);
double acquisition(std::span<const double> x, const KdeSurrogate& surrogate,
                   const AcquisitionConfig& config, double lambda);

/// Acquisition without the model term: [sum f_k p_k + lambda] / [sum p_k + 2].
Vector base_acquisition(const Matrix& x, const KdeSurrogate& surrogate, double lambda);

}  // namespace bifid::planner
