#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>

#include "bifid/model/observation.hpp"
#include "bifid/surface/fixtures.hpp"
#include "bifid/surface/surface_pair.hpp"

namespace bifid::campaign {

using model::Fidelity;
using nn::Index;
using nn::Matrix;
using nn::Vector;

/// One measurement channel over the unit hypercube [0,1]^P. Deterministic per
/// x; counts its calls and accumulated cost.
class Evaluator {
public:
  using Function = std::function<double(std::span<const double> unit_x)>;

  Evaluator(std::string name, Index dim, Fidelity fidelity, double cost_per_eval, Function f);

  const std::string& name() const { return name_; }
  Index dim() const { return dim_; }
  Fidelity fidelity() const { return fidelity_; }
  double cost_per_eval() const { return cost_; }

  /// Throws InputShapeError on a dimension mismatch and ArgumentError for
  /// points outside the unit hypercube or a non-finite result.
  double operator()(std::span<const double> unit_x);
  long calls() const { return calls_; }
  double total_cost() const { return cost_ * static_cast<double>(calls_); }

private:
  std::string name_;
  Index dim_;
  Fidelity fidelity_;
  double cost_;
  Function f_;
  long calls_ = 0;
};

Evaluator analytic_evaluator(surface::AnalyticName name, int dim, Fidelity fidelity, double cost = 1.0);
Evaluator trig_evaluator(surface::TrigKind kind, Fidelity fidelity, double cost = 1.0);

/// Lookup surface: unit inputs are mapped affinely onto the bounding box of
/// `domain` and answered with the value at the nearest domain point.
Evaluator lookup_evaluator(std::string name, Matrix domain, Vector values, Fidelity fidelity,
                           double cost = 1.0);

/// The cheap and expensive fields of a pair as lookup evaluators.
std::pair<Evaluator, Evaluator> pair_evaluators(const surface::SurfacePair& pair,
                                                double cheap_cost = 1.0, double exp_cost = 1.0);

}  // namespace bifid::campaign
