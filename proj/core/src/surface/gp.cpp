#include "bifid/surface/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>

#include "bifid/errors.hpp"

namespace bifid::surface {

namespace {

constexpr Index kQueryBlock = 2048;

Eigen::LLT<Eigen::MatrixXd> factorize(const Matrix& k, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw LinearAlgebraError(std::string(what) + ": covariance is not positive definite after jitter");
  }
  return llt;
}

Matrix jittered_train_cov(const Matrix& x_train, const RbfKernel& kernel) {
  Matrix k = kernel_matrix(x_train, x_train, kernel);
  k.diagonal().array() += kJitter * kernel.variance;
  return k;
}

// K^{-1} y with two refinement steps whose residuals are accumulated in
// extended precision; the plain Cholesky solve loses about cond(K) * eps,
// which the jitter alone leaves near 1e-8 for smooth 1D kernels.
Eigen::VectorXd refined_solve(const Eigen::LLT<Eigen::MatrixXd>& llt, const Matrix& k, const Vector& y) {
  Eigen::VectorXd alpha = llt.solve(Eigen::VectorXd(y));
  for (int step = 0; step < 2; ++step) {
    Eigen::VectorXd residual(y.size());
    for (Index i = 0; i < k.rows(); ++i) {
      long double r = y[i];
      for (Index j = 0; j < k.cols(); ++j) r -= static_cast<long double>(k(i, j)) * alpha[j];
      residual[i] = static_cast<double>(r);
    }
    alpha += llt.solve(residual);
  }
  return alpha;
}

void check_anchor_shapes(const Matrix& x_train, const Vector& y_train, const Matrix& x_query) {
  if (x_train.rows() != y_train.size()) throw ArgumentError("gp: anchor count does not match targets");
  if (x_train.rows() == 0) throw ArgumentError("gp: need at least one anchor");
  if (x_query.cols() != x_train.cols()) throw InputShapeError("gp: query dimension mismatch");
}

}  // namespace

void RbfKernel::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance)) throw ArgumentError("rbf: variance must be positive");
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw ArgumentError("rbf: lengthscale must be positive");
  }
}

double rbf(std::span<const double> a, std::span<const double> b, const RbfKernel& kernel) {
  if (a.size() != b.size()) throw ArgumentError("rbf: vectors differ in length");
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) throw ArgumentError("rbf: non-finite input");
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return kernel.variance * std::exp(-d2 / (2.0 * kernel.lengthscale * kernel.lengthscale));
}

Matrix kernel_matrix(const Matrix& a, const Matrix& b, const RbfKernel& kernel) {
  if (a.cols() != b.cols()) throw InputShapeError("kernel_matrix: dimension mismatch");
  if (!a.allFinite() || !b.allFinite()) throw ArgumentError("kernel_matrix: non-finite input");
  kernel.validate();
  // Direct differences: the expanded |a|^2 + |b|^2 - 2ab form cancels badly
  // for nearby points, and those errors are amplified by cond(K).
  Matrix d2(a.rows(), b.rows());
  for (Index j = 0; j < b.rows(); ++j) d2.col(j) = (a.rowwise() - b.row(j)).rowwise().squaredNorm();
  const double scale = -1.0 / (2.0 * kernel.lengthscale * kernel.lengthscale);
  return kernel.variance * (d2.array() * scale).exp().matrix();
}

Index DomainSpec::size() const {
  Index n = 1;
  for (int i = 0; i < dim; ++i) n *= points_per_dim;
  return n;
}

void DomainSpec::validate() const {
  if (dim < 1) throw ArgumentError("domain: dim must be >= 1");
  if (points_per_dim < 2) throw ArgumentError("domain: points_per_dim must be >= 2");
  if (!(hi > lo)) throw ArgumentError("domain: hi must exceed lo");
}

Matrix DomainSpec::points() const {
  validate();
  const Index n = size();
  Matrix x(n, dim);
  const double step = (hi - lo) / static_cast<double>(points_per_dim - 1);
  for (Index r = 0; r < n; ++r) {
    Index rem = r;
    for (int k = dim - 1; k >= 0; --k) {
      x(r, k) = lo + step * static_cast<double>(rem % points_per_dim);
      rem /= points_per_dim;
    }
  }
  return x;
}

GpPosterior gp_posterior(const Matrix& x_train, const Vector& y_train, const Matrix& x_query,
                         const RbfKernel& kernel) {
  check_anchor_shapes(x_train, y_train, x_query);
  const Matrix k_tt = jittered_train_cov(x_train, kernel);
  const auto llt = factorize(k_tt, "gp_posterior");
  const Eigen::MatrixXd k_tq = kernel_matrix(x_train, x_query, kernel);
  GpPosterior post;
  post.mean = k_tq.transpose() * refined_solve(llt, k_tt, y_train);
  const Eigen::MatrixXd v = llt.matrixL().solve(k_tq);
  post.covariance = kernel_matrix(x_query, x_query, kernel) - Matrix(v.transpose() * v);
  return post;
}

Vector gp_posterior_mean(const Matrix& x_train, const Vector& y_train, const Matrix& x_query,
                         const RbfKernel& kernel) {
  check_anchor_shapes(x_train, y_train, x_query);
  const Matrix k_tt = jittered_train_cov(x_train, kernel);
  const auto llt = factorize(k_tt, "gp_posterior_mean");
  const Vector alpha = refined_solve(llt, k_tt, y_train);
  Vector mean(x_query.rows());
  for (Index start = 0; start < x_query.rows(); start += kQueryBlock) {
    const Index len = std::min(kQueryBlock, x_query.rows() - start);
    mean.segment(start, len) = kernel_matrix(x_query.middleRows(start, len), x_train, kernel) * alpha;
  }
  return mean;
}

Vector gp_prior_sample_grid(const DomainSpec& domain, const RbfKernel& kernel,
                            std::mt19937_64& rng) {
  domain.validate();
  kernel.validate();
  const Index n = domain.points_per_dim;
  Matrix axis(n, 1);
  const double step = (domain.hi - domain.lo) / static_cast<double>(n - 1);
  for (Index i = 0; i < n; ++i) axis(i, 0) = domain.lo + step * static_cast<double>(i);
  // Unit-variance factor per axis; the variance is applied once at the end.
  Matrix k1 = kernel_matrix(axis, axis, RbfKernel{1.0, kernel.lengthscale});
  k1.diagonal().array() += kJitter;
  const auto llt = factorize(k1, "gp_prior_sample_grid");
  const Eigen::MatrixXd l = llt.matrixL();

  std::normal_distribution<double> normal(0.0, 1.0);
  const Index total = domain.size();
  Vector values(total);
  for (Index i = 0; i < total; ++i) values[i] = normal(rng);

  // Multiply by L along every axis of the n x n x ... tensor.
  Index stride = 1;
  Eigen::VectorXd fiber(n);
  for (int axis_k = domain.dim - 1; axis_k >= 0; --axis_k) {
    const Index block = stride * n;
    for (Index base = 0; base < total; base += block) {
      for (Index offset = 0; offset < stride; ++offset) {
        for (Index i = 0; i < n; ++i) fiber[i] = values[base + offset + i * stride];
        const Eigen::VectorXd out = l * fiber;
        for (Index i = 0; i < n; ++i) values[base + offset + i * stride] = out[i];
      }
    }
    stride = block;
  }
  return std::sqrt(kernel.variance) * values;
}

SurfaceDraw gp_sample_surface(const DomainSpec& domain, const RbfKernel& kernel,
                              std::size_t n_train, std::mt19937_64& rng) {
  domain.validate();
  kernel.validate();
  const Index total = domain.size();
  if (n_train < 1 || static_cast<Index>(n_train) > total) {
    throw ArgumentError("gp_sample_surface: n_train must be in [1, domain size]");
  }
  const Matrix x = domain.points();

  SurfaceDraw draw;
  std::vector<Index> rows(static_cast<std::size_t>(total));
  std::iota(rows.begin(), rows.end(), Index{0});
  for (std::size_t i = 0; i < n_train; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, rows.size() - 1);
    std::swap(rows[i], rows[pick(rng)]);
  }
  draw.anchor_rows.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::sort(draw.anchor_rows.begin(), draw.anchor_rows.end());

  Matrix x_train(static_cast<Index>(n_train), domain.dim);
  for (std::size_t i = 0; i < n_train; ++i) x_train.row(static_cast<Index>(i)) = x.row(draw.anchor_rows[i]);
  const auto llt = factorize(jittered_train_cov(x_train, kernel), "gp_sample_surface");

  // Anchor targets from the prior.
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(static_cast<Index>(n_train));
  for (Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  draw.anchor_values = llt.matrixL() * z;

  // Posterior draw: prior sample plus the pathwise correction toward the anchors.
  Vector prior = gp_prior_sample_grid(domain, kernel, rng);
  Eigen::VectorXd residual(static_cast<Index>(n_train));
  for (std::size_t i = 0; i < n_train; ++i) {
    residual[static_cast<Index>(i)] = draw.anchor_values[static_cast<Index>(i)] - prior[draw.anchor_rows[i]];
  }
  const Vector alpha = llt.solve(residual);
  draw.values = prior;
  for (Index start = 0; start < total; start += kQueryBlock) {
    const Index len = std::min(kQueryBlock, total - start);
    draw.values.segment(start, len) += kernel_matrix(x.middleRows(start, len), x_train, kernel) * alpha;
  }
  return draw;
}

}  // namespace bifid::surface
