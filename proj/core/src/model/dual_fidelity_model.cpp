#include "bifid/model/dual_fidelity_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include <spdlog/spdlog.h>

#include "bifid/errors.hpp"
#include "bifid/nn/adam.hpp"

namespace bifid::model {

namespace {

std::vector<nn::LayerSpec> stack_specs(int depth, int hidden, nn::Activation act,
                                       nn::Activation out_act, Index out_dim, bool hidden_bn) {
  std::vector<nn::LayerSpec> specs;
  for (int i = 0; i < depth; ++i) {
    // Normalize the output of every hidden layer, not the raw parameters:
    // normalizing the input of the shared latent net would cancel the
    // parameter shift learned on the expensive branch.
    specs.push_back({hidden, act, hidden_bn && i > 0});
  }
  specs.push_back({out_dim, out_act, hidden_bn && depth > 0});
  return specs;
}

/// Adds the NLL of a (mean, raw scale) output block and fills its gradient.
/// With beta > 0 each row's gradient is scaled by sigma^(2 beta), treated as
/// a constant.
double branch_nll(const Matrix& out, const Vector& y, double floor, double beta, Matrix* grad) {
  double total = 0.0;
  if (grad) grad->resize(out.rows(), 2);
  for (Index i = 0; i < out.rows(); ++i) {
    const double mu = out(i, 0);
    const double s = nn::logistic(out(i, 1));
    const double sigma = s + floor;
    const double r = y[i] - mu;
    total += gaussian_nll(y[i], mu, sigma);
    if (grad) {
      const double inv_var = 1.0 / (sigma * sigma);
      const double w = beta == 0.0 ? 1.0 : std::pow(sigma * sigma, beta);
      (*grad)(i, 0) = -w * r * inv_var;
      const double d_sigma = -r * r * inv_var / sigma + 1.0 / sigma;
      (*grad)(i, 1) = w * d_sigma * s * (1.0 - s);
    }
  }
  return total;
}

void append_blocks(std::vector<std::span<const double>>& out, const nn::Gradients& g) {
  for (auto b : g.blocks()) out.push_back(b);
}

TrainingBatch gather(const Matrix& x, const Vector& y, std::span<const std::size_t> idx) {
  TrainingBatch b;
  b.x.resize(static_cast<Index>(idx.size()), x.cols());
  b.y.resize(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    b.x.row(static_cast<Index>(i)) = x.row(static_cast<Index>(idx[i]));
    b.y[static_cast<Index>(i)] = y[static_cast<Index>(idx[i])];
  }
  return b;
}

/// Cycles through a reshuffled permutation of [0, n).
class IndexCycler {
public:
  IndexCycler(std::size_t n, std::mt19937_64& rng) : perm_(n), rng_(rng) {
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    std::shuffle(perm_.begin(), perm_.end(), rng_);
  }

  std::vector<std::size_t> next(std::size_t count) {
    std::vector<std::size_t> out;
    out.reserve(count);
    while (out.size() < count && !perm_.empty()) {
      if (pos_ == perm_.size()) {
        std::shuffle(perm_.begin(), perm_.end(), rng_);
        pos_ = 0;
      }
      out.push_back(perm_[pos_++]);
    }
    return out;
  }

private:
  std::vector<std::size_t> perm_;
  std::size_t pos_ = 0;
  std::mt19937_64& rng_;
};

struct Split {
  TrainingBatch train;
  TrainingBatch holdout;
};

Split split_holdout(const Matrix& x, const Vector& y, double fraction, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  auto n_hold = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  if (n_hold >= n) n_hold = 0;
  std::vector<std::size_t> hold(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_hold));
  std::vector<std::size_t> keep(perm.begin() + static_cast<std::ptrdiff_t>(n_hold), perm.end());
  std::sort(hold.begin(), hold.end());
  std::sort(keep.begin(), keep.end());
  return {gather(x, y, keep), gather(x, y, hold)};
}

}  // namespace

double gaussian_nll(double y, double mu, double sigma) {
  const double r = y - mu;
  return 0.5 * (r * r / (sigma * sigma) + std::log(sigma * sigma));
}

std::vector<std::span<const double>> ModelGradients::blocks() const {
  std::vector<std::span<const double>> out;
  append_blocks(out, fbias);
  append_blocks(out, latent);
  append_blocks(out, tbias);
  return out;
}

void TrainingHistory::write_csv(std::ostream& os) const {
  os << "epoch,L,L_exp,L_cheap,monitor\n";
  os.precision(17);
  for (const auto& e : epochs) {
    os << e.epoch << ',' << e.loss << ',' << e.loss_exp << ',' << e.loss_cheap << ','
       << e.monitor << '\n';
  }
}

DualFidelityModel::DualFidelityModel(Index param_dim, ModelHyperparams hyper,
                                     std::uint64_t init_seed)
    : param_dim_(param_dim), hyper_(std::move(hyper)) {
  if (param_dim <= 0) throw ArgumentError("DualFidelityModel: parameter dimension must be positive");
  hyper_.validate();
  std::mt19937_64 rng(init_seed);
  const int hidden_p = hyper_.resolved_hidden_fbias(static_cast<int>(param_dim));
  fbias_ = nn::DenseNet(param_dim,
                        stack_specs(hyper_.depth_fbias, hidden_p, hyper_.act_fbias,
                                    hyper_.act_fbias_out, param_dim, hyper_.batch_norm_bias),
                        rng);
  latent_ = nn::DenseNet(param_dim,
                         stack_specs(hyper_.depth_latent, hyper_.hidden_latent, hyper_.act_latent,
                                     hyper_.act_latent_out, 2, hyper_.batch_norm_latent),
                         rng);
  tbias_ = nn::DenseNet(2,
                        stack_specs(hyper_.depth_tbias, hyper_.hidden_tbias, hyper_.act_tbias,
                                    hyper_.act_tbias_out, 2, hyper_.batch_norm_bias),
                        rng);
  // Start both corrections at exactly zero so the expensive branch begins as
  // a copy of the cheap one. A Glorot-initialized output layer can shift the
  // parameters by O(1), far outside the region the cheap data covers.
  for (auto* net : {&fbias_, &tbias_}) {
    auto& out = net->layers().back();
    out.weights.setZero();
    out.bias.setZero();
  }
  for (auto* net : {&fbias_, &latent_, &tbias_}) {
    for (auto& layer : net->layers()) {
      if (layer.batch_norm) {
        layer.batch_norm->momentum = hyper_.batch_norm_momentum;
        layer.batch_norm->epsilon = hyper_.batch_norm_epsilon;
      }
    }
  }
}

void DualFidelityModel::set_normalization(Normalization n) {
  if (n.x_min.size() != param_dim_ || n.x_range.size() != param_dim_) {
    throw ArgumentError("DualFidelityModel: normalization has the wrong dimension");
  }
  normalization_ = std::move(n);
}

const Normalization& DualFidelityModel::normalization() const {
  if (!normalization_) throw StateError("DualFidelityModel: model has not been trained");
  return *normalization_;
}

Matrix DualFidelityModel::cheap_output(const Matrix& x_normalized) const {
  return latent_.predict(x_normalized);
}

Matrix DualFidelityModel::expensive_output(const Matrix& x_normalized) const {
  if (x_normalized.cols() != param_dim_) {
    throw InputShapeError("DualFidelityModel: input has " + std::to_string(x_normalized.cols()) +
                          " columns, expected " + std::to_string(param_dim_));
  }
  const Matrix shifted = x_normalized + fbias_.predict(x_normalized);
  const Matrix h = latent_.predict(shifted);
  return h + tbias_.predict(h);
}

std::vector<Prediction> DualFidelityModel::to_predictions(const Matrix& out, Fidelity tag) const {
  const auto& n = normalization();
  const double floor = tag == Fidelity::Cheap ? hyper_.sigma_floor_cheap : hyper_.sigma_floor_exp;
  std::vector<Prediction> preds(static_cast<std::size_t>(out.rows()));
  for (Index i = 0; i < out.rows(); ++i) {
    auto& p = preds[static_cast<std::size_t>(i)];
    p.mean = n.denormalize_y(out(i, 0));
    p.sigma = (nn::logistic(out(i, 1)) + floor) * n.y_std;
    p.tag = tag;
  }
  return preds;
}

std::vector<Prediction> DualFidelityModel::predict_cheap(const Matrix& x) const {
  const auto& n = normalization();
  return to_predictions(cheap_output(n.normalize_x(x)), Fidelity::Cheap);
}

std::vector<Prediction> DualFidelityModel::predict_expensive(const Matrix& x) const {
  const auto& n = normalization();
  return to_predictions(expensive_output(n.normalize_x(x)), Fidelity::Expensive);
}

LossBreakdown DualFidelityModel::loss(const TrainingBatch& cheap, const TrainingBatch& exp,
                                      nn::Mode mode) {
  return evaluate(cheap, exp, mode, nullptr, 0.0);
}

LossBreakdown DualFidelityModel::loss_and_gradients(const TrainingBatch& cheap,
                                                    const TrainingBatch& exp,
                                                    ModelGradients& grads) {
  return evaluate(cheap, exp, nn::Mode::Train, &grads, 0.0);
}

LossBreakdown DualFidelityModel::training_gradients(const TrainingBatch& cheap,
                                                    const TrainingBatch& exp,
                                                    ModelGradients& grads) {
  return evaluate(cheap, exp, nn::Mode::Train, &grads, hyper_.nll_beta);
}

LossBreakdown DualFidelityModel::evaluate(const TrainingBatch& cheap, const TrainingBatch& exp,
                                          nn::Mode mode, ModelGradients* grads,
                                          double beta) {
  const Index nc = cheap.x.rows();
  const Index ne = exp.x.rows();
  if (nc == 0 && ne == 0) throw ArgumentError("loss: both batches are empty");
  if (cheap.y.size() != nc || exp.y.size() != ne) {
    throw ArgumentError("loss: target count does not match input rows");
  }
  if ((nc > 0 && cheap.x.cols() != param_dim_) || (ne > 0 && exp.x.cols() != param_dim_)) {
    throw InputShapeError("loss: batch width does not match the parameter dimension");
  }

  nn::ForwardTrace trace_p;
  nn::ForwardTrace trace_l;
  nn::ForwardTrace trace_t;

  Matrix stacked(nc + ne, param_dim_);
  if (nc > 0) stacked.topRows(nc) = cheap.x;
  if (ne > 0) stacked.bottomRows(ne) = exp.x + fbias_.forward(exp.x, mode, &trace_p);

  // One latent pass over both branches so batch statistics are shared.
  const Matrix h = latent_.forward(stacked, mode, &trace_l);
  Matrix out_exp;
  if (ne > 0) out_exp = h.bottomRows(ne) + tbias_.forward(h.bottomRows(ne), mode, &trace_t);

  LossBreakdown lb;
  Matrix g_cheap;
  Matrix g_exp;
  if (nc > 0) lb.nll_cheap = branch_nll(h.topRows(nc), cheap.y, hyper_.sigma_floor_cheap, beta, grads ? &g_cheap : nullptr);
  if (ne > 0) lb.nll_exp = branch_nll(out_exp, exp.y, hyper_.sigma_floor_exp, beta, grads ? &g_exp : nullptr);
  lb.reg_bias = hyper_.reg_bias * (fbias_.weight_norm_squared() + tbias_.weight_norm_squared());
  lb.reg_latent = hyper_.reg_latent * latent_.weight_norm_squared();
  lb.total = lb.nll_exp + hyper_.coeff_both * lb.nll_cheap + lb.reg_bias + lb.reg_latent;

  if (!grads) return lb;

  Matrix d_h(nc + ne, 2);
  if (nc > 0) d_h.topRows(nc) = hyper_.coeff_both * g_cheap;
  if (ne > 0) {
    grads->tbias = tbias_.backward(trace_t, g_exp);
    d_h.bottomRows(ne) = g_exp + grads->tbias.input;
  } else {
    grads->tbias = tbias_.zero_gradients();
  }
  grads->latent = latent_.backward(trace_l, d_h);
  if (ne > 0) {
    grads->fbias = fbias_.backward(trace_p, grads->latent.input.bottomRows(ne));
  } else {
    grads->fbias = fbias_.zero_gradients();
  }
  fbias_.add_weight_decay(grads->fbias, hyper_.reg_bias);
  tbias_.add_weight_decay(grads->tbias, hyper_.reg_bias);
  latent_.add_weight_decay(grads->latent, hyper_.reg_latent);
  return lb;
}

std::vector<nn::ParamBlock> DualFidelityModel::parameters() {
  std::vector<nn::ParamBlock> out;
  for (auto [prefix, net] : {std::pair{"fbias.", &fbias_}, std::pair{"latent.", &latent_},
                             std::pair{"tbias.", &tbias_}}) {
    for (auto& b : net->parameters()) {
      b.name = prefix + b.name;
      out.push_back(std::move(b));
    }
  }
  return out;
}

TrainingHistory DualFidelityModel::train(const Dataset& data, std::uint64_t seed) {
  if (data.empty()) throw ArgumentError("train: dataset has no observations");
  if (data.dim() != param_dim_) {
    throw InputShapeError("train: dataset dimension " + std::to_string(data.dim()) +
                          " does not match model dimension " + std::to_string(param_dim_));
  }
  if (data.size(Fidelity::Expensive) == 0) {
    spdlog::debug("train: no expensive observations; fitting the latent network only");
  }

  normalization_ = Normalization::fit(data);
  const auto& norm = *normalization_;
  std::mt19937_64 rng(seed);

  Split cheap = split_holdout(norm.normalize_x(data.x(Fidelity::Cheap)),
                              norm.normalize_y(data.y(Fidelity::Cheap)), hyper_.holdout_fraction, rng);
  Split exp = split_holdout(norm.normalize_x(data.x(Fidelity::Expensive)),
                            norm.normalize_y(data.y(Fidelity::Expensive)), hyper_.holdout_fraction, rng);
  const bool has_holdout = cheap.holdout.x.rows() + exp.holdout.x.rows() > 0;

  const auto nc = static_cast<std::size_t>(cheap.train.x.rows());
  const auto ne = static_cast<std::size_t>(exp.train.x.rows());
  const auto batch = static_cast<std::size_t>(hyper_.batch_size);
  const std::size_t lead = std::max(nc, ne);
  const std::size_t steps = (lead + batch - 1) / batch;
  const bool cheap_leads = nc >= ne;

  // One optimizer state per network so the bias networks can sit out the
  // warm-up phase without disturbing the latent network's moments.
  const nn::AdamConfig adam_cfg{hyper_.learning_rate};
  nn::AdamState adam_p(adam_cfg);
  nn::AdamState adam_l(adam_cfg);
  nn::AdamState adam_t(adam_cfg);
  auto params_p = fbias_.parameters();
  auto params_l = latent_.parameters();
  auto params_t = tbias_.parameters();
  // During warm-up only the cheap branch is fitted, so the expensive branch
  // starts correcting a latent network that already describes the cheap data.
  const int warmup = (nc > 0 && ne > 0) ? hyper_.warmup_epochs : 0;
  IndexCycler follower(cheap_leads ? ne : nc, rng);
  std::vector<std::size_t> lead_perm(lead);
  std::iota(lead_perm.begin(), lead_perm.end(), std::size_t{0});

  const TrainingBatch no_rows{Matrix(0, param_dim_), Vector(0)};
  auto monitor_loss = [&](bool cheap_only) {
    const auto& c = has_holdout ? cheap.holdout : cheap.train;
    const auto& e = has_holdout ? exp.holdout : exp.train;
    if (c.x.rows() == 0 && (cheap_only || e.x.rows() == 0)) return 0.0;
    const auto lb = evaluate(c, cheap_only ? no_rows : e, nn::Mode::Eval, nullptr, 0.0);
    return lb.nll_exp + hyper_.coeff_both * lb.nll_cheap;
  };

  TrainingHistory history;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  nn::DenseNet best_p = fbias_;
  nn::DenseNet best_l = latent_;
  nn::DenseNet best_t = tbias_;
  ModelGradients grads;

  for (int epoch = 1; epoch <= hyper_.max_epochs; ++epoch) {
    std::shuffle(lead_perm.begin(), lead_perm.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch;
    const bool warming_up = epoch <= warmup;
    if (epoch == warmup + 1) {
      // The monitor now includes the expensive branch; restart the search.
      best = std::numeric_limits<double>::infinity();
      since_best = 0;
    }
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t begin = s * batch;
      const std::size_t end = std::min(lead, begin + batch);
      std::span<const std::size_t> lead_idx(lead_perm.data() + begin, end - begin);
      const auto follow_idx = follower.next(std::min(batch, cheap_leads ? ne : nc));
      TrainingBatch bc = cheap_leads ? gather(cheap.train.x, cheap.train.y, lead_idx)
                                     : gather(cheap.train.x, cheap.train.y, follow_idx);
      TrainingBatch be = cheap_leads ? gather(exp.train.x, exp.train.y, follow_idx)
                                     : gather(exp.train.x, exp.train.y, lead_idx);
      const auto lb = training_gradients(bc, warming_up ? no_rows : be, grads);
      if (!std::isfinite(lb.total)) {
        throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch), epoch);
      }
      try {
        const nn::Gradients& gl = grads.latent;
        nn::adam_step(params_l, gl.blocks(), adam_l);
        if (!warming_up) {
          const nn::Gradients& gp = grads.fbias;
          const nn::Gradients& gt = grads.tbias;
          nn::adam_step(params_p, gp.blocks(), adam_p);
          nn::adam_step(params_t, gt.blocks(), adam_t);
        }
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " at epoch " + std::to_string(epoch), epoch);
      }
      rec.loss += lb.total;
      rec.loss_exp += lb.nll_exp;
      rec.loss_cheap += lb.nll_cheap;
    }
    const auto denom = static_cast<double>(std::max<std::size_t>(steps, 1));
    rec.loss /= denom;
    rec.loss_exp /= denom;
    rec.loss_cheap /= denom;
    rec.monitor = monitor_loss(warming_up);
    if (!std::isfinite(rec.monitor)) {
      throw DivergenceError("train: non-finite monitor loss at epoch " + std::to_string(epoch), epoch);
    }
    history.epochs.push_back(rec);

    if (rec.monitor < best) {
      best = rec.monitor;
      history.best_epoch = epoch;
      since_best = 0;
      best_p = fbias_;
      best_l = latent_;
      best_t = tbias_;
    } else if (++since_best >= hyper_.patience) {
      history.early_stopped = true;
      break;
    }
  }
  fbias_ = std::move(best_p);
  latent_ = std::move(best_l);
  tbias_ = std::move(best_t);
  if (!fbias_.all_finite() || !latent_.all_finite() || !tbias_.all_finite()) {
    throw DivergenceError("train: non-finite parameters after training", history.best_epoch);
  }
  return history;
}

nlohmann::json DualFidelityModel::to_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["param_dim"] = param_dim_;
  j["hyperparams"] = hyper_.to_json();
  j["fbias"] = fbias_.to_json();
  j["latent"] = latent_.to_json();
  j["tbias"] = tbias_.to_json();
  if (normalization_) {
    const auto& n = *normalization_;
    j["normalization"] = {
        {"x_min", std::vector<double>(n.x_min.data(), n.x_min.data() + n.x_min.size())},
        {"x_range", std::vector<double>(n.x_range.data(), n.x_range.data() + n.x_range.size())},
        {"y_mean", n.y_mean},
        {"y_std", n.y_std},
    };
  }
  return j;
}

DualFidelityModel DualFidelityModel::from_json(const nlohmann::json& j) {
  if (j.value("version", 0) != 1) throw ArgumentError("model checkpoint: unsupported version");
  const auto dim = j.at("param_dim").get<Index>();
  DualFidelityModel m(dim, ModelHyperparams::from_json(j.at("hyperparams")), 0);
  m.fbias_ = nn::DenseNet::from_json(j.at("fbias"));
  m.latent_ = nn::DenseNet::from_json(j.at("latent"));
  m.tbias_ = nn::DenseNet::from_json(j.at("tbias"));
  if (m.fbias_.input_dim() != dim || m.fbias_.output_dim() != dim || m.latent_.input_dim() != dim ||
      m.latent_.output_dim() != 2 || m.tbias_.input_dim() != 2 || m.tbias_.output_dim() != 2) {
    throw ArgumentError("model checkpoint: network dimensions are inconsistent");
  }
  if (j.contains("normalization")) {
    const auto& nj = j.at("normalization");
    Normalization n;
    const auto lo = nj.at("x_min").get<std::vector<double>>();
    const auto range = nj.at("x_range").get<std::vector<double>>();
    n.x_min = Eigen::Map<const Vector>(lo.data(), static_cast<Index>(lo.size()));
    n.x_range = Eigen::Map<const Vector>(range.data(), static_cast<Index>(range.size()));
    n.y_mean = nj.at("y_mean").get<double>();
    n.y_std = nj.at("y_std").get<double>();
    m.set_normalization(std::move(n));
  }
  return m;
}

}  // namespace bifid::model
