#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "bifid/nn/dense_net.hpp"

namespace bifid::surface {

using nn::Index;
using nn::Matrix;
using nn::Vector;

/// Squared-exponential covariance k(x, x') = variance * exp(-|x - x'|^2 / (2 lengthscale^2)).
struct RbfKernel {
  double variance = 2.0;
  double lengthscale = 1.0;

  void validate() const;
};

/// Throws ArgumentError on length mismatch or non-finite input.
double rbf(std::span<const double> a, std::span<const double> b, const RbfKernel& kernel);

/// Covariance between the rows of `a` and the rows of `b`.
Matrix kernel_matrix(const Matrix& a, const Matrix& b, const RbfKernel& kernel);

/// Regular grid over [lo, hi]^dim with `points_per_dim` points per axis
/// (endpoints included). Row r enumerates axis 0 slowest.
struct DomainSpec {
  int dim = 1;
  int points_per_dim = 100;
  double lo = -5.0;
  double hi = 5.0;

  Index size() const;
  Matrix points() const;
  void validate() const;
};

/// Relative diagonal jitter, scaled by the kernel variance.
inline constexpr double kJitter = 1e-6;

struct GpPosterior {
  Vector mean;
  Matrix covariance;
};

/// Noise-free zero-mean posterior at `x_query` given anchors (x_train, y_train):
///   mean = K_qt K_tt^{-1} y_t,  cov = K_qq - K_qt K_tt^{-1} K_tq
/// with jitter * variance added to K_tt. Throws LinearAlgebraError when K_tt
/// is not positive definite after jitter.
GpPosterior gp_posterior(const Matrix& x_train, const Vector& y_train, const Matrix& x_query,
                         const RbfKernel& kernel);

/// Posterior mean only; the query set is processed in blocks so large
/// domains never form a dense query covariance.
Vector gp_posterior_mean(const Matrix& x_train, const Vector& y_train, const Matrix& x_query,
                         const RbfKernel& kernel);

/// One exact zero-mean prior draw over a grid domain. The RBF kernel factorizes
/// over axes, so the draw applies a 1D Cholesky factor along every axis.
Vector gp_prior_sample_grid(const DomainSpec& domain, const RbfKernel& kernel,
                            std::mt19937_64& rng);

/// Anchors and values used to generate one surface.
struct SurfaceDraw {
  std::vector<Index> anchor_rows;
  Vector anchor_values;
  Vector values;  // over the whole domain
};

/// Samples anchor targets y_t ~ N(0, K_tt) on `n_train` distinct random
/// domain rows, then draws the surface from the posterior conditioned on them
/// (prior draw plus the pathwise correction K_dt K_tt^{-1} (y_t - f_t)).
SurfaceDraw gp_sample_surface(const DomainSpec& domain, const RbfKernel& kernel,
                              std::size_t n_train, std::mt19937_64& rng);

}  // namespace bifid::surface
