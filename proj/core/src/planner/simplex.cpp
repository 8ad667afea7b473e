#include "bifid/planner/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bifid/errors.hpp"

namespace bifid::planner {

SimplexTransform::SimplexTransform(int n) : n_(n) {
  if (n < 2) throw ArgumentError("simplex: dimension must be >= 2");
}

std::vector<double> SimplexTransform::to_simplex(std::span<const double> u) const {
  if (static_cast<int>(u.size()) != cube_dim()) throw ArgumentError("to_simplex: expected n - 1 coordinates");
  std::vector<double> t(static_cast<std::size_t>(n_));
  double rest = 1.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] >= 0.0 && u[i] <= 1.0)) throw ArgumentError("to_simplex: coordinates must lie in [0, 1]");
    t[i] = rest * u[i];
    rest = std::max(0.0, rest - t[i]);
  }
  t.back() = rest;
  return t;
}

std::vector<double> SimplexTransform::from_simplex(std::span<const double> t) const {
  if (static_cast<int>(t.size()) != n_) throw ArgumentError("from_simplex: expected n components");
  for (double v : t) {
    if (!std::isfinite(v) || v < 0.0) throw ArgumentError("from_simplex: components must be nonnegative");
  }
  const double sum = std::accumulate(t.begin(), t.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-8) throw ArgumentError("from_simplex: components must sum to 1");
  std::vector<double> u(static_cast<std::size_t>(cube_dim()));
  double rest = 1.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = rest > 0.0 ? std::clamp(t[i] / rest, 0.0, 1.0) : 0.0;
    rest = std::max(0.0, rest - t[i]);
  }
  return u;
}

}  // namespace bifid::planner
