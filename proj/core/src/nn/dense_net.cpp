#include "bifid/nn/dense_net.hpp"

#include <cmath>

#include "bifid/errors.hpp"

namespace bifid::nn {

namespace {

constexpr int kCheckpointVersion = 1;

Matrix apply_activation(const Matrix& z, Activation kind) {
  if (kind == Activation::Linear) return z;
  return z.unaryExpr([kind](double v) { return activate(kind, v); });
}

Matrix activation_grad(const Matrix& z, Activation kind) {
  return z.unaryExpr([kind](double v) { return activation_derivative(kind, v); });
}

nlohmann::json vec_to_json(const double* data, Index n) {
  return nlohmann::json(std::vector<double>(data, data + n));
}

Vector json_to_vec(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

BatchNormState BatchNormState::fresh(Index features, double momentum, double epsilon) {
  BatchNormState bn;
  bn.gamma = Vector::Ones(features);
  bn.beta = Vector::Zero(features);
  bn.running_mean = Vector::Zero(features);
  bn.running_var = Vector::Ones(features);
  bn.momentum = momentum;
  bn.epsilon = epsilon;
  return bn;
}

std::vector<std::span<double>> Gradients::blocks() {
  std::vector<std::span<double>> out;
  for (auto& l : layers) {
    out.emplace_back(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
    out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    if (l.gamma.size() > 0) {
      out.emplace_back(l.gamma.data(), static_cast<std::size_t>(l.gamma.size()));
      out.emplace_back(l.beta.data(), static_cast<std::size_t>(l.beta.size()));
    }
  }
  return out;
}

std::vector<std::span<const double>> Gradients::blocks() const {
  std::vector<std::span<const double>> out;
  for (const auto& l : layers) {
    out.emplace_back(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
    out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    if (l.gamma.size() > 0) {
      out.emplace_back(l.gamma.data(), static_cast<std::size_t>(l.gamma.size()));
      out.emplace_back(l.beta.data(), static_cast<std::size_t>(l.beta.size()));
    }
  }
  return out;
}

void Gradients::set_zero() {
  for (auto& l : layers) {
    l.weights.setZero();
    l.bias.setZero();
    l.gamma.setZero();
    l.beta.setZero();
  }
  input.setZero();
}

DenseNet::DenseNet(Index input_dim, const std::vector<LayerSpec>& specs, std::mt19937_64& rng)
    : input_dim_(input_dim) {
  if (input_dim <= 0) throw ArgumentError("DenseNet: input_dim must be positive");
  if (specs.empty()) throw ArgumentError("DenseNet: at least one layer is required");
  Index fan_in = input_dim;
  for (const auto& spec : specs) {
    if (spec.units <= 0) throw ArgumentError("DenseNet: layer units must be positive");
    DenseLayer layer;
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + spec.units));
    std::uniform_real_distribution<double> uni(-bound, bound);
    layer.weights.resize(fan_in, spec.units);
    for (Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = uni(rng);
    layer.bias = Vector::Zero(spec.units);
    layer.activation = spec.activation;
    if (spec.batch_norm) layer.batch_norm = BatchNormState::fresh(fan_in);
    layers_.push_back(std::move(layer));
    fan_in = spec.units;
  }
}

DenseNet::DenseNet(Index input_dim, std::vector<DenseLayer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
  validate();
}

void DenseNet::validate() const {
  if (input_dim_ <= 0) throw ArgumentError("DenseNet: input_dim must be positive");
  if (layers_.empty()) throw ArgumentError("DenseNet: at least one layer is required");
  Index expected = input_dim_;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.in_dim() != expected) {
      throw ArgumentError("DenseNet: layer " + std::to_string(i) + " expects input width " +
                          std::to_string(l.in_dim()) + " but previous width is " +
                          std::to_string(expected));
    }
    if (l.bias.size() != l.out_dim()) {
      throw ArgumentError("DenseNet: bias size mismatch in layer " + std::to_string(i));
    }
    if (l.batch_norm) {
      const auto& bn = *l.batch_norm;
      if (bn.gamma.size() != expected || bn.beta.size() != expected ||
          bn.running_mean.size() != expected || bn.running_var.size() != expected) {
        throw ArgumentError("DenseNet: batch-norm size mismatch in layer " + std::to_string(i));
      }
      if ((bn.running_var.array() <= 0.0).any()) {
        throw ArgumentError("DenseNet: running variance must be positive");
      }
    }
    expected = l.out_dim();
  }
}

Index DenseNet::output_dim() const {
  return layers_.empty() ? 0 : layers_.back().out_dim();
}

Matrix DenseNet::predict(const Matrix& x) const {
  if (x.cols() != input_dim_) {
    throw InputShapeError("DenseNet: input has " + std::to_string(x.cols()) +
                          " columns, expected " + std::to_string(input_dim_));
  }
  Matrix h = x;
  for (const auto& layer : layers_) {
    if (layer.batch_norm) {
      const auto& bn = *layer.batch_norm;
      const Vector scale =
          (bn.running_var.array() + bn.epsilon).rsqrt().matrix().cwiseProduct(bn.gamma);
      const Vector shift = bn.beta - bn.running_mean.cwiseProduct(scale);
      h = (h.array().rowwise() * scale.transpose().array()).rowwise() + shift.transpose().array();
    }
    Matrix z = h * layer.weights;
    z.rowwise() += layer.bias.transpose();
    h = apply_activation(z, layer.activation);
  }
  return h;
}

Matrix DenseNet::forward(const Matrix& x, Mode mode, ForwardTrace* trace) {
  if (x.cols() != input_dim_) {
    throw InputShapeError("DenseNet: input has " + std::to_string(x.cols()) +
                          " columns, expected " + std::to_string(input_dim_));
  }
  if (trace) {
    trace->layers.assign(layers_.size(), LayerTrace{});
    trace->mode = mode;
    trace->valid = false;
  }
  const auto n = static_cast<double>(x.rows());
  Matrix h = x;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    auto& layer = layers_[li];
    LayerTrace* lt = trace ? &trace->layers[li] : nullptr;
    if (layer.batch_norm) {
      auto& bn = *layer.batch_norm;
      Vector mean;
      Vector var;
      if (mode == Mode::Train && x.rows() > 0) {
        mean = h.colwise().mean().transpose();
        var = (h.rowwise() - mean.transpose()).array().square().colwise().sum().transpose() / n;
        bn.running_mean = bn.momentum * bn.running_mean + (1.0 - bn.momentum) * mean;
        bn.running_var = bn.momentum * bn.running_var + (1.0 - bn.momentum) * var;
      } else {
        mean = bn.running_mean;
        var = bn.running_var;
      }
      const Vector inv_std = (var.array() + bn.epsilon).rsqrt().matrix();
      Matrix normalized =
          (h.rowwise() - mean.transpose()).array().rowwise() * inv_std.transpose().array();
      Matrix y = (normalized.array().rowwise() * bn.gamma.transpose().array()).rowwise() +
                 bn.beta.transpose().array();
      if (lt) {
        lt->bn_input = std::move(h);
        lt->normalized = std::move(normalized);
        lt->inv_std = inv_std;
      }
      h = std::move(y);
    }
    Matrix z = h * layer.weights;
    z.rowwise() += layer.bias.transpose();
    Matrix a = apply_activation(z, layer.activation);
    if (lt) {
      lt->dense_input = std::move(h);
      lt->pre_activation = std::move(z);
    }
    h = std::move(a);
  }
  if (trace) trace->valid = true;
  return h;
}

Gradients DenseNet::zero_gradients() const {
  Gradients g;
  g.layers.resize(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    g.layers[i].weights = Matrix::Zero(l.in_dim(), l.out_dim());
    g.layers[i].bias = Vector::Zero(l.out_dim());
    if (l.batch_norm) {
      g.layers[i].gamma = Vector::Zero(l.in_dim());
      g.layers[i].beta = Vector::Zero(l.in_dim());
    }
  }
  return g;
}

Gradients DenseNet::backward(const ForwardTrace& trace, const Matrix& output_grad) const {
  if (!trace.valid || trace.layers.size() != layers_.size()) {
    throw StateError("DenseNet::backward called without a matching cached forward pass");
  }
  const Index rows = trace.layers.front().dense_input.rows();
  if (output_grad.rows() != rows || output_grad.cols() != output_dim()) {
    throw InputShapeError("DenseNet::backward: output gradient shape mismatch");
  }
  Gradients g = zero_gradients();
  Matrix delta = output_grad;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& layer = layers_[k];
    const auto& lt = trace.layers[k];
    Matrix dz = (layer.activation == Activation::Linear)
                    ? delta
                    : Matrix(delta.cwiseProduct(activation_grad(lt.pre_activation, layer.activation)));
    g.layers[k].weights.noalias() = lt.dense_input.transpose() * dz;
    g.layers[k].bias = dz.colwise().sum().transpose();
    Matrix dy = dz * layer.weights.transpose();
    if (layer.batch_norm) {
      const auto& bn = *layer.batch_norm;
      g.layers[k].gamma = dy.cwiseProduct(lt.normalized).colwise().sum().transpose();
      g.layers[k].beta = dy.colwise().sum().transpose();
      Matrix dxhat = dy.array().rowwise() * bn.gamma.transpose().array();
      if (trace.mode == Mode::Train) {
        const auto n = static_cast<double>(rows);
        const Eigen::RowVectorXd sum_d = dxhat.colwise().sum();
        const Eigen::RowVectorXd sum_dx = dxhat.cwiseProduct(lt.normalized).colwise().sum();
        Matrix centered = (dxhat * n).rowwise() - sum_d;
        centered.array() -= lt.normalized.array().rowwise() * sum_dx.array();
        delta = (centered.array().rowwise() * (lt.inv_std.transpose().array() / n)).matrix();
      } else {
        delta = dxhat.array().rowwise() * lt.inv_std.transpose().array();
      }
    } else {
      delta = std::move(dy);
    }
  }
  g.input = std::move(delta);
  return g;
}

std::vector<ParamBlock> DenseNet::parameters() {
  std::vector<ParamBlock> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    auto& l = layers_[i];
    const std::string prefix = "layer" + std::to_string(i) + ".";
    out.push_back({prefix + "weights", {l.weights.data(), static_cast<std::size_t>(l.weights.size())}});
    out.push_back({prefix + "bias", {l.bias.data(), static_cast<std::size_t>(l.bias.size())}});
    if (l.batch_norm) {
      auto& bn = *l.batch_norm;
      out.push_back({prefix + "bn_gamma", {bn.gamma.data(), static_cast<std::size_t>(bn.gamma.size())}});
      out.push_back({prefix + "bn_beta", {bn.beta.data(), static_cast<std::size_t>(bn.beta.size())}});
    }
  }
  return out;
}

double DenseNet::weight_norm_squared() const {
  double s = 0.0;
  for (const auto& l : layers_) s += l.weights.squaredNorm() + l.bias.squaredNorm();
  return s;
}

void DenseNet::add_weight_decay(Gradients& grads, double coeff) const {
  if (coeff == 0.0) return;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    grads.layers[i].weights += 2.0 * coeff * layers_[i].weights;
    grads.layers[i].bias += 2.0 * coeff * layers_[i].bias;
  }
}

void DenseNet::zero_parameters() {
  for (auto& l : layers_) {
    l.weights.setZero();
    l.bias.setZero();
    if (l.batch_norm) l.batch_norm->beta.setZero();
  }
}

bool DenseNet::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
    if (l.batch_norm && (!l.batch_norm->gamma.allFinite() || !l.batch_norm->beta.allFinite())) {
      return false;
    }
  }
  return true;
}

nlohmann::json DenseNet::to_json() const {
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["input_dim"] = input_dim_;
  auto& arr = j["layers"] = nlohmann::json::array();
  for (const auto& l : layers_) {
    nlohmann::json lj;
    lj["in"] = l.in_dim();
    lj["out"] = l.out_dim();
    lj["activation"] = to_string(l.activation);
    lj["weights"] = vec_to_json(l.weights.data(), l.weights.size());
    lj["bias"] = vec_to_json(l.bias.data(), l.bias.size());
    if (l.batch_norm) {
      const auto& bn = *l.batch_norm;
      lj["batch_norm"] = {
          {"gamma", vec_to_json(bn.gamma.data(), bn.gamma.size())},
          {"beta", vec_to_json(bn.beta.data(), bn.beta.size())},
          {"running_mean", vec_to_json(bn.running_mean.data(), bn.running_mean.size())},
          {"running_var", vec_to_json(bn.running_var.data(), bn.running_var.size())},
          {"momentum", bn.momentum},
          {"epsilon", bn.epsilon},
      };
    }
    arr.push_back(std::move(lj));
  }
  return j;
}

DenseNet DenseNet::from_json(const nlohmann::json& j) {
  if (j.value("version", 0) != kCheckpointVersion) {
    throw ArgumentError("DenseNet checkpoint: unsupported version");
  }
  std::vector<DenseLayer> layers;
  for (const auto& lj : j.at("layers")) {
    DenseLayer l;
    const Index in = lj.at("in").get<Index>();
    const Index out = lj.at("out").get<Index>();
    const auto w = lj.at("weights").get<std::vector<double>>();
    if (static_cast<Index>(w.size()) != in * out) {
      throw ArgumentError("DenseNet checkpoint: weight array has wrong length");
    }
    l.weights = Eigen::Map<const Matrix>(w.data(), in, out);
    l.bias = json_to_vec(lj.at("bias"));
    l.activation = activation_from_string(lj.at("activation").get<std::string>());
    if (lj.contains("batch_norm")) {
      const auto& bj = lj.at("batch_norm");
      BatchNormState bn;
      bn.gamma = json_to_vec(bj.at("gamma"));
      bn.beta = json_to_vec(bj.at("beta"));
      bn.running_mean = json_to_vec(bj.at("running_mean"));
      bn.running_var = json_to_vec(bj.at("running_var"));
      bn.momentum = bj.at("momentum").get<double>();
      bn.epsilon = bj.at("epsilon").get<double>();
      l.batch_norm = std::move(bn);
    }
    layers.push_back(std::move(l));
  }
  return DenseNet(j.at("input_dim").get<Index>(), std::move(layers));
}

}  // namespace bifid::nn
