#include "bifid/nn/activation.hpp"

#include <cmath>

#include "bifid/errors.hpp"

namespace bifid::nn {

double logistic(double z) noexcept {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) noexcept {
  // log(1 + e^z) without overflow for large |z|
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

double activate(Activation kind, double z) noexcept {
  switch (kind) {
    case Activation::LeakyRelu:
      return z > 0.0 ? z : kLeakyReluSlope * z;
    case Activation::Softplus:
      return softplus(z);
    case Activation::Relu:
      return z > 0.0 ? z : 0.0;
    case Activation::Linear:
      return z;
    case Activation::Logistic:
      return logistic(z);
  }
  return z;
}

double activation_derivative(Activation kind, double z) noexcept {
  switch (kind) {
    case Activation::LeakyRelu:
      return z > 0.0 ? 1.0 : kLeakyReluSlope;
    case Activation::Softplus:
      return logistic(z);
    case Activation::Relu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::Linear:
      return 1.0;
    case Activation::Logistic: {
      const double s = logistic(z);
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

std::string to_string(Activation kind) {
  switch (kind) {
    case Activation::LeakyRelu:
      return "leaky_relu";
    case Activation::Softplus:
      return "softplus";
    case Activation::Relu:
      return "relu";
    case Activation::Linear:
      return "linear";
    case Activation::Logistic:
      return "logistic";
  }
  return "linear";
}

Activation activation_from_string(std::string_view name) {
  if (name == "leaky_relu") return Activation::LeakyRelu;
  if (name == "softplus") return Activation::Softplus;
  if (name == "relu") return Activation::Relu;
  if (name == "linear") return Activation::Linear;
  if (name == "logistic") return Activation::Logistic;
  throw ArgumentError("unknown activation '" + std::string(name) + "'");
}

}  // namespace bifid::nn
