#pragma once

#include <span>
#include <vector>

namespace bifid::planner {

/// Stick-breaking map between the unit hypercube [0,1]^(n-1) and the standard
/// simplex {t in R^n : t_i >= 0, sum t_i = 1}.
///   t_i = u_i * (1 - t_0 - ... - t_{i-1})  for i < n - 1,  t_{n-1} = remainder.
/// u = 0 maps to the vertex (0, ..., 0, 1).
class SimplexTransform {
public:
  /// `n` is the simplex dimension (number of components), n >= 2.
  explicit SimplexTransform(int n);
  int simplex_dim() const { return n_; }
  int cube_dim() const { return n_ - 1; }

  /// Throws ArgumentError for a wrong length or values outside [0, 1].
  std::vector<double> to_simplex(std::span<const double> u) const;
  /// Throws ArgumentError for a wrong length, negative components or a sum
  /// that differs from 1 by more than 1e-8.
  std::vector<double> from_simplex(std::span<const double> t) const;

private:
  int n_;
};

}  // namespace bifid::planner
