#include "bifid/model/observation.hpp"

#include <cmath>

#include "bifid/errors.hpp"

namespace bifid::model {

std::string to_string(Fidelity f) {
  return f == Fidelity::Cheap ? "cheap" : "expensive";
}

void Dataset::add(Observation obs) {
  if (dim_ == 0) dim_ = static_cast<Index>(obs.x.size());
  if (static_cast<Index>(obs.x.size()) != dim_ || dim_ == 0) {
    throw ArgumentError("Dataset::add: observation has " + std::to_string(obs.x.size()) +
                        " parameters, expected " + std::to_string(dim_));
  }
  for (double v : obs.x) {
    if (!std::isfinite(v)) throw ArgumentError("Dataset::add: non-finite parameter value");
  }
  if (!std::isfinite(obs.y)) throw ArgumentError("Dataset::add: non-finite target value");
  (obs.tag == Fidelity::Cheap ? cheap_ : expensive_).push_back(std::move(obs));
}

void Dataset::add(std::span<const double> x, double y, Fidelity tag) {
  add(Observation{std::vector<double>(x.begin(), x.end()), y, tag});
}

Matrix Dataset::x(Fidelity f) const {
  const auto& r = rows(f);
  Matrix m(static_cast<Index>(r.size()), dim_);
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (Index j = 0; j < dim_; ++j) m(static_cast<Index>(i), j) = r[i].x[static_cast<std::size_t>(j)];
  }
  return m;
}

Vector Dataset::y(Fidelity f) const {
  const auto& r = rows(f);
  Vector v(static_cast<Index>(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i) v[static_cast<Index>(i)] = r[i].y;
  return v;
}

Dataset Dataset::select(Fidelity f, std::span<const std::size_t> keep) const {
  Dataset out(dim_);
  const Fidelity other = f == Fidelity::Cheap ? Fidelity::Expensive : Fidelity::Cheap;
  for (const auto& o : rows(other)) out.add(o);
  const auto& r = rows(f);
  for (std::size_t i : keep) {
    if (i >= r.size()) throw ArgumentError("Dataset::select: index out of range");
    out.add(r[i]);
  }
  return out;
}

Dataset Dataset::only(Fidelity f) const {
  Dataset out(dim_);
  for (const auto& o : rows(f)) out.add(o);
  return out;
}

Dataset Dataset::retagged(Fidelity tag) const {
  Dataset out(dim_);
  for (const auto* set : {&cheap_, &expensive_}) {
    for (auto o : *set) {
      o.tag = tag;
      out.add(std::move(o));
    }
  }
  return out;
}

Normalization Normalization::identity(Index dim) {
  Normalization n;
  n.x_min = Vector::Zero(dim);
  n.x_range = Vector::Ones(dim);
  return n;
}

Normalization Normalization::fit(const Dataset& data) {
  if (data.empty()) throw ArgumentError("Normalization::fit: empty dataset");
  Normalization n = identity(data.dim());
  Vector lo = Vector::Constant(data.dim(), std::numeric_limits<double>::infinity());
  Vector hi = -lo;
  for (auto f : {Fidelity::Cheap, Fidelity::Expensive}) {
    for (const auto& o : data.rows(f)) {
      for (Index j = 0; j < data.dim(); ++j) {
        lo[j] = std::min(lo[j], o.x[static_cast<std::size_t>(j)]);
        hi[j] = std::max(hi[j], o.x[static_cast<std::size_t>(j)]);
      }
    }
  }
  for (Index j = 0; j < data.dim(); ++j) {
    const double r = hi[j] - lo[j];
    n.x_min[j] = lo[j];
    n.x_range[j] = r > 1e-12 ? r : 1.0;
  }
  const Fidelity ref = data.size(Fidelity::Cheap) >= 2 ? Fidelity::Cheap : Fidelity::Expensive;
  const Vector y = data.size(ref) > 0 ? data.y(ref) : data.y(Fidelity::Cheap);
  if (y.size() > 0) {
    n.y_mean = y.mean();
    if (y.size() >= 2) {
      const double sd = std::sqrt((y.array() - n.y_mean).square().sum() / static_cast<double>(y.size()));
      n.y_std = sd > 1e-12 ? sd : 1.0;
    }
  }
  return n;
}

Matrix Normalization::normalize_x(const Matrix& x) const {
  if (x.cols() != x_min.size()) {
    throw InputShapeError("Normalization: input has " + std::to_string(x.cols()) +
                          " columns, expected " + std::to_string(x_min.size()));
  }
  return ((x.rowwise() - x_min.transpose()).array().rowwise() / x_range.transpose().array()).matrix();
}

Vector Normalization::normalize_y(const Vector& y) const {
  return ((y.array() - y_mean) / y_std).matrix();
}

}  // namespace bifid::model
