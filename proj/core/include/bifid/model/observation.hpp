#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bifid/nn/dense_net.hpp"

namespace bifid::model {

using nn::Index;
using nn::Matrix;
using nn::Vector;

enum class Fidelity { Cheap, Expensive };

std::string to_string(Fidelity f);

struct Observation {
  std::vector<double> x;
  double y = 0.0;
  Fidelity tag = Fidelity::Cheap;
};

/// Fidelity-tagged observations sharing one parameter dimension.
class Dataset {
public:
  Dataset() = default;
  explicit Dataset(Index dim) : dim_(dim) {}

  Index dim() const { return dim_; }

  /// Appends one observation; the first one fixes dim() if it was unset.
  void add(Observation obs);
  void add(std::span<const double> x, double y, Fidelity tag);

  std::size_t size() const { return cheap_.size() + expensive_.size(); }
  std::size_t size(Fidelity f) const { return rows(f).size(); }
  bool empty() const { return size() == 0; }

  const std::vector<Observation>& rows(Fidelity f) const {
    return f == Fidelity::Cheap ? cheap_ : expensive_;
  }

  Matrix x(Fidelity f) const;
  Vector y(Fidelity f) const;

  /// Keeps only the listed rows of one fidelity; the other is copied whole.
  Dataset select(Fidelity f, std::span<const std::size_t> keep) const;

  /// Dataset containing only one fidelity.
  Dataset only(Fidelity f) const;

  /// Same observations with every tag replaced by `tag`.
  Dataset retagged(Fidelity tag) const;

private:
  Index dim_ = 0;
  std::vector<Observation> cheap_;
  std::vector<Observation> expensive_;
};

/// Per-dimension min-max input scaling and a shared target z-score.
struct Normalization {
  Vector x_min;
  Vector x_range;
  double y_mean = 0.0;
  double y_std = 1.0;

  static Normalization identity(Index dim);

  /// Inputs scaled to [0,1] from all rows; targets z-scored with the cheap
  /// rows (the expensive rows when there are fewer than two cheap ones).
  static Normalization fit(const Dataset& data);

  Matrix normalize_x(const Matrix& x) const;
  Vector normalize_y(const Vector& y) const;
  double denormalize_y(double y) const { return y * y_std + y_mean; }
};

}  // namespace bifid::model
