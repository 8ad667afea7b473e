#include "bifid/planner/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bifid/errors.hpp"

namespace bifid::planner {

double BandwidthPolicy::bandwidth(std::size_t n_observations, Index dim) const {
  if (fixed > 0.0) return fixed;
  const double n = static_cast<double>(std::max<std::size_t>(n_observations, 1));
  return std::clamp(scale * std::pow(n, -1.0 / (static_cast<double>(dim) + 4.0)), min, max);
}

void BandwidthPolicy::validate() const {
  if (!(scale > 0.0)) throw ConfigError("bandwidth.scale must be positive");
  if (!(min > 0.0) || !(max >= min)) throw ConfigError("bandwidth.min/max must satisfy 0 < min <= max");
  if (fixed < 0.0) throw ConfigError("bandwidth.fixed must be >= 0");
}

KdeSurrogate::KdeSurrogate(Index dim, BandwidthPolicy policy)
    : dim_(dim), policy_(policy), bandwidth_(policy.bandwidth(0, dim)), x_(0, dim), f_(0) {
  if (dim < 1) throw ArgumentError("kde: dimension must be >= 1");
  policy_.validate();
}

void KdeSurrogate::set_observations(Matrix x, Vector f) {
  if (x.cols() != dim_) throw InputShapeError("kde: observation dimension mismatch");
  if (x.rows() != f.size()) throw ArgumentError("kde: observation and value counts differ");
  if (!x.allFinite() || !f.allFinite()) throw ArgumentError("kde: non-finite observation");
  x_ = std::move(x);
  f_ = std::move(f);
  bandwidth_ = policy_.bandwidth(size(), dim_);
}

void KdeSurrogate::set_bandwidth(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ArgumentError("kde: bandwidth must be positive");
  bandwidth_ = h;
}

Matrix KdeSurrogate::densities(const Matrix& queries) const {
  if (queries.cols() != dim_) throw InputShapeError("kde: query dimension mismatch");
  const double h2 = bandwidth_ * bandwidth_;
  const double norm = std::pow(2.0 * std::numbers::pi * h2, -0.5 * static_cast<double>(dim_));
  Matrix p(queries.rows(), x_.rows());
  for (Index k = 0; k < x_.rows(); ++k) {
    p.col(k) = ((queries.rowwise() - x_.row(k)).rowwise().squaredNorm().array() * (-0.5 / h2)).exp() * norm;
  }
  return p;
}

void AcquisitionConfig::validate() const {
  if (lambdas.empty()) throw ConfigError("lambdas must not be empty");
  for (double l : lambdas) {
    if (!(l >= -1.0 && l <= 1.0)) throw ConfigError("lambdas must lie in [-1, 1]");
  }
  if (rho && !(*rho >= -1.0 && *rho <= 1.0)) throw ConfigError("rho must lie in [-1, 1]");
}

Vector acquisition(const Matrix& x, const KdeSurrogate& surrogate, const AcquisitionConfig& config,
                   double lambda) {
  const Matrix p = surrogate.densities(x);
  Vector num = p * surrogate.f();
  num.array() += lambda;
  if (config.uses_gemini()) {
    const Vector g = config.gemini(x);
    if (g.size() != x.rows()) throw InputShapeError("acquisition: model returned the wrong number of values");
    num += *config.rho * g;
  }
  const Vector den = p.rowwise().sum().array() + 2.0;
  return num.cwiseQuotient(den);
}

double acquisition(std::span<const double> x, const KdeSurrogate& surrogate,
                   const AcquisitionConfig& config, double lambda) {
  Matrix q(1, static_cast<Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) q(0, static_cast<Index>(i)) = x[i];
  return acquisition(q, surrogate, config, lambda)[0];
}

Vector base_acquisition(const Matrix& x, const KdeSurrogate& surrogate, double lambda) {
  const Matrix p = surrogate.densities(x);
  Vector out(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    double num = lambda;
    double den = 2.0;
    for (Index k = 0; k < p.cols(); ++k) {
      num += surrogate.f()[k] * p(i, k);
      den += p(i, k);
    }
    out[i] = num / den;
  }
  return out;
}

}  // namespace bifid::planner
