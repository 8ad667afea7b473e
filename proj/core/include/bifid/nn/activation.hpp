#pragma once

#include <string>
#include <string_view>

namespace bifid::nn {

enum class Activation { LeakyRelu, Softplus, Relu, Linear, Logistic };

/// Negative-side slope of the leaky ReLU used throughout the toolkit.
inline constexpr double kLeakyReluSlope = 0.2;

double activate(Activation kind, double z) noexcept;

/// d activate(kind, z) / dz
double activation_derivative(Activation kind, double z) noexcept;

double logistic(double z) noexcept;
double softplus(double z) noexcept;

std::string to_string(Activation kind);
Activation activation_from_string(std::string_view name);

}  // namespace bifid::nn
