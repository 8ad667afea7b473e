#pragma once

#include <span>
#include <string>
#include <vector>

namespace bifid::surface {

/// One-dimensional cheap/expensive pairs on [0, 1] related by closed-form
/// biases: f_exp(x) = f_cheap(x + f_p(x)) + f_t(x).
///   constant:  cos(4 pi x) + 2  ->  sin(4 pi x),              f_p = 3/8, f_t = -2
///   linear:    sin(2 pi x)      ->  sin(4 pi x) + 2x,         f_p = x,   f_t = 2x
///   nonlinear: sin(3 pi x)      ->  sin(3 pi (x + x^2)) + x^3, f_p = x^2, f_t = x^3
enum class TrigKind { Constant, Linear, Nonlinear };

std::string to_string(TrigKind k);
/// Throws ArgumentError for unknown names.
TrigKind trig_kind_from_string(const std::string& name);

struct TrigPair {
  TrigKind kind = TrigKind::Constant;

  double cheap(double x) const;
  double expensive(double x) const;
  double parameter_bias(double x) const;
  double target_bias(double x) const;
};

TrigPair trig_pair(TrigKind kind);

/// Canonical benchmark functions evaluated on inputs in [0, 1]^d that are
/// affinely mapped to each function's conventional domain:
///   Dejong          sum x_i^2                                   [-5, 5]
///   HyperEllipsoid  sum i^2 x_i^2 (i = 1..d)                    [-5, 5]
///   AckleyPath      20 + e - 20 exp(-0.2 rms(x)) - exp(mean cos 2 pi x_i)   [-32, 32]
///   Rastrigin       10 d + sum (x_i^2 - 10 cos 2 pi x_i)        [-5, 5]
///   Michalewicz     -sum sin(x_i) sin(i x_i^2 / pi)^20          [0, pi]
///   Schwefel        418.9829 d - sum x_i sin(sqrt|x_i|)         [-500, 500]
enum class AnalyticName { Dejong, HyperEllipsoid, AckleyPath, Rastrigin, Michalewicz, Schwefel };

std::string to_string(AnalyticName n);
/// Accepts the names above (case-insensitive); throws ArgumentError otherwise.
AnalyticName analytic_name_from_string(const std::string& name);

class AnalyticSurface {
public:
  AnalyticSurface(AnalyticName name, int dim);

  AnalyticName name() const { return name_; }
  int dim() const { return dim_; }

  /// Throws InputShapeError on a dimension mismatch and ArgumentError for
  /// non-finite input.
  double operator()(std::span<const double> unit_x) const;

  /// Conventional domain bounds of the underlying function.
  double lower() const;
  double upper() const;

private:
  AnalyticName name_;
  int dim_;
};

AnalyticSurface analytic_surface(const std::string& name, int dim);

}  // namespace bifid::surface
