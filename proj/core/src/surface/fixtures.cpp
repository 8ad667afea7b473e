#include "bifid/surface/fixtures.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "bifid/errors.hpp"

namespace bifid::surface {

namespace {

constexpr double kPi = std::numbers::pi;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::string to_string(TrigKind k) {
  switch (k) {
    case TrigKind::Constant:
      return "constant";
    case TrigKind::Linear:
      return "linear";
    case TrigKind::Nonlinear:
      return "nonlinear";
  }
  return "constant";
}

TrigKind trig_kind_from_string(const std::string& name) {
  const auto n = lower(name);
  if (n == "constant") return TrigKind::Constant;
  if (n == "linear") return TrigKind::Linear;
  if (n == "nonlinear" || n == "non-linear") return TrigKind::Nonlinear;
  throw ArgumentError("unknown trig pair kind '" + name + "'");
}

double TrigPair::cheap(double x) const {
  switch (kind) {
    case TrigKind::Constant:
      return std::cos(4.0 * kPi * x) + 2.0;
    case TrigKind::Linear:
      return std::sin(2.0 * kPi * x);
    case TrigKind::Nonlinear:
      return std::sin(3.0 * kPi * x);
  }
  return 0.0;
}

double TrigPair::expensive(double x) const {
  switch (kind) {
    case TrigKind::Constant:
      return std::sin(4.0 * kPi * x);
    case TrigKind::Linear:
      return std::sin(4.0 * kPi * x) + 2.0 * x;
    case TrigKind::Nonlinear:
      return std::sin(3.0 * kPi * (x + x * x)) + x * x * x;
  }
  return 0.0;
}

double TrigPair::parameter_bias(double x) const {
  switch (kind) {
    case TrigKind::Constant:
      return 3.0 / 8.0;
    case TrigKind::Linear:
      return x;
    case TrigKind::Nonlinear:
      return x * x;
  }
  return 0.0;
}

double TrigPair::target_bias(double x) const {
  switch (kind) {
    case TrigKind::Constant:
      return -2.0;
    case TrigKind::Linear:
      return 2.0 * x;
    case TrigKind::Nonlinear:
      return x * x * x;
  }
  return 0.0;
}

TrigPair trig_pair(TrigKind kind) { return TrigPair{kind}; }

std::string to_string(AnalyticName n) {
  switch (n) {
    case AnalyticName::Dejong:
      return "Dejong";
    case AnalyticName::HyperEllipsoid:
      return "HyperEllipsoid";
    case AnalyticName::AckleyPath:
      return "AckleyPath";
    case AnalyticName::Rastrigin:
      return "Rastrigin";
    case AnalyticName::Michalewicz:
      return "Michalewicz";
    case AnalyticName::Schwefel:
      return "Schwefel";
  }
  return "Dejong";
}

AnalyticName analytic_name_from_string(const std::string& name) {
  const auto n = lower(name);
  for (auto v : {AnalyticName::Dejong, AnalyticName::HyperEllipsoid, AnalyticName::AckleyPath,
                 AnalyticName::Rastrigin, AnalyticName::Michalewicz, AnalyticName::Schwefel}) {
    if (lower(to_string(v)) == n) return v;
  }
  throw ArgumentError("unknown analytic surface '" + name + "'");
}

AnalyticSurface::AnalyticSurface(AnalyticName name, int dim) : name_(name), dim_(dim) {
  if (dim < 1) throw ArgumentError("analytic surface: dimension must be >= 1");
}

double AnalyticSurface::lower() const {
  switch (name_) {
    case AnalyticName::AckleyPath:
      return -32.0;
    case AnalyticName::Michalewicz:
      return 0.0;
    case AnalyticName::Schwefel:
      return -500.0;
    default:
      return -5.0;
  }
}

double AnalyticSurface::upper() const {
  switch (name_) {
    case AnalyticName::AckleyPath:
      return 32.0;
    case AnalyticName::Michalewicz:
      return kPi;
    case AnalyticName::Schwefel:
      return 500.0;
    default:
      return 5.0;
  }
}

double AnalyticSurface::operator()(std::span<const double> unit_x) const {
  if (static_cast<int>(unit_x.size()) != dim_) {
    throw InputShapeError("analytic surface: expected " + std::to_string(dim_) + " inputs, got " +
                          std::to_string(unit_x.size()));
  }
  const double lo = lower();
  const double span = upper() - lo;
  double acc = 0.0;
  double acc2 = 0.0;
  for (int i = 0; i < dim_; ++i) {
    const double u = unit_x[static_cast<std::size_t>(i)];
    if (!std::isfinite(u)) throw ArgumentError("analytic surface: non-finite input");
    const double x = lo + span * u;
    const double idx = static_cast<double>(i + 1);
    switch (name_) {
      case AnalyticName::Dejong:
        acc += x * x;
        break;
      case AnalyticName::HyperEllipsoid:
        acc += idx * idx * x * x;
        break;
      case AnalyticName::AckleyPath:
        acc += x * x;
        acc2 += std::cos(2.0 * kPi * x);
        break;
      case AnalyticName::Rastrigin:
        acc += x * x - 10.0 * std::cos(2.0 * kPi * x);
        break;
      case AnalyticName::Michalewicz:
        acc -= std::sin(x) * std::pow(std::sin(idx * x * x / kPi), 20);
        break;
      case AnalyticName::Schwefel:
        acc -= x * std::sin(std::sqrt(std::abs(x)));
        break;
    }
  }
  const double d = static_cast<double>(dim_);
  switch (name_) {
    case AnalyticName::AckleyPath:
      return 20.0 + std::numbers::e - 20.0 * std::exp(-0.2 * std::sqrt(acc / d)) - std::exp(acc2 / d);
    case AnalyticName::Rastrigin:
      return 10.0 * d + acc;
    case AnalyticName::Schwefel:
      return 418.9829 * d + acc;
    default:
      return acc;
  }
}

AnalyticSurface analytic_surface(const std::string& name, int dim) {
  return AnalyticSurface(analytic_name_from_string(name), dim);
}

}  // namespace bifid::surface
