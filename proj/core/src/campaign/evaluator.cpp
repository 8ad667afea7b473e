#include "bifid/campaign/evaluator.hpp"

#include <cmath>
#include <limits>

#include "bifid/errors.hpp"

namespace bifid::campaign {

Evaluator::Evaluator(std::string name, Index dim, Fidelity fidelity, double cost_per_eval, Function f)
    : name_(std::move(name)), dim_(dim), fidelity_(fidelity), cost_(cost_per_eval), f_(std::move(f)) {
  if (dim < 1) throw ArgumentError("evaluator: dimension must be >= 1");
  if (!(cost_per_eval > 0.0)) throw ArgumentError("evaluator: cost must be positive");
  if (!f_) throw ArgumentError("evaluator: missing function");
}

double Evaluator::operator()(std::span<const double> unit_x) {
  if (static_cast<Index>(unit_x.size()) != dim_) throw InputShapeError("evaluator '" + name_ + "': dimension mismatch");
  for (double v : unit_x) {
    if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("evaluator '" + name_ + "': point outside the unit hypercube");
  }
  ++calls_;
  const double y = f_(unit_x);
  if (!std::isfinite(y)) throw ArgumentError("evaluator '" + name_ + "': non-finite value");
  return y;
}

Evaluator analytic_evaluator(surface::AnalyticName name, int dim, Fidelity fidelity, double cost) {
  const surface::AnalyticSurface s(name, dim);
  return Evaluator(surface::to_string(name), dim, fidelity, cost,
                   [s](std::span<const double> x) { return s(x); });
}

Evaluator trig_evaluator(surface::TrigKind kind, Fidelity fidelity, double cost) {
  const auto t = surface::trig_pair(kind);
  const bool cheap = fidelity == Fidelity::Cheap;
  return Evaluator("trig_" + surface::to_string(kind), 1, fidelity, cost,
                   [t, cheap](std::span<const double> x) { return cheap ? t.cheap(x[0]) : t.expensive(x[0]); });
}

Evaluator lookup_evaluator(std::string name, Matrix domain, Vector values, Fidelity fidelity, double cost) {
  if (domain.rows() == 0 || domain.rows() != values.size()) {
    throw ArgumentError("lookup evaluator: domain and values must be nonempty and equally long");
  }
  const Vector lo = domain.colwise().minCoeff().transpose();
  Vector span = domain.colwise().maxCoeff().transpose() - lo;
  for (Index k = 0; k < span.size(); ++k) {
    if (span[k] <= 0.0) span[k] = 1.0;
  }
  const Index dim = domain.cols();
  auto data = std::make_shared<const std::pair<Matrix, Vector>>(std::move(domain), std::move(values));
  return Evaluator(std::move(name), dim, fidelity, cost, [data, lo, span](std::span<const double> x) {
    const auto& [pts, vals] = *data;
    Eigen::RowVectorXd q(pts.cols());
    for (Index k = 0; k < pts.cols(); ++k) q[k] = lo[k] + x[static_cast<std::size_t>(k)] * span[k];
    Index best = 0;
    (pts.rowwise() - q).rowwise().squaredNorm().minCoeff(&best);
    return vals[best];
  });
}

std::pair<Evaluator, Evaluator> pair_evaluators(const surface::SurfacePair& pair, double cheap_cost,
                                                double exp_cost) {
  return {lookup_evaluator("cheap", pair.domain, pair.y_cheap, Fidelity::Cheap, cheap_cost),
          lookup_evaluator("expensive", pair.domain, pair.y_exp, Fidelity::Expensive, exp_cost)};
}

}  // namespace bifid::campaign
