#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "bifid/errors.hpp"
#include "bifid/io/regression.hpp"
#include "bifid/model/baseline.hpp"
#include "bifid/model/cross_validation.hpp"
#include "bifid/model/dual_fidelity_model.hpp"
#include "bifid/surface/fixtures.hpp"
#include "toy_model.hpp"

using namespace bifid;
using namespace bifid::model;

namespace {

Matrix random_inputs(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix x(rows, cols);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  return x;
}

DualFidelityModel ready_model(Index p, ModelHyperparams h = {}, std::uint64_t seed = 7) {
  DualFidelityModel m(p, h, seed);
  m.set_normalization(Normalization::identity(p));
  return m;
}

void randomize(nn::DenseNet& net, std::mt19937_64& rng, double scale = 0.5) {
  std::normal_distribution<double> n(0.0, scale);
  for (auto& l : net.layers()) {
    for (Index i = 0; i < l.weights.size(); ++i) l.weights.data()[i] = n(rng);
    for (Index i = 0; i < l.bias.size(); ++i) l.bias[i] = n(rng);
  }
}

// Loop-based forward pass for nets without batch norm.
Matrix loop_forward(const nn::DenseNet& net, const Matrix& x) {
  Matrix h = x;
  for (const auto& l : net.layers()) {
    Matrix out(h.rows(), l.out_dim());
    for (Index r = 0; r < h.rows(); ++r) {
      for (Index o = 0; o < l.out_dim(); ++o) {
        double z = l.bias[o];
        for (Index i = 0; i < l.in_dim(); ++i) z += h(r, i) * l.weights(i, o);
        out(r, o) = nn::activate(l.activation, z);
      }
    }
    h = out;
  }
  return h;
}

double loop_sq_norm(const nn::DenseNet& net) {
  double s = 0.0;
  for (const auto& l : net.layers()) {
    for (Index i = 0; i < l.weights.size(); ++i) s += l.weights.data()[i] * l.weights.data()[i];
    for (Index i = 0; i < l.bias.size(); ++i) s += l.bias[i] * l.bias[i];
  }
  return s;
}

double loop_nll(const Matrix& out, const Vector& y, double floor) {
  double total = 0.0;
  for (Index i = 0; i < out.rows(); ++i) {
    const double sigma = 1.0 / (1.0 + std::exp(-out(i, 1))) + floor;
    const double r = y[i] - out(i, 0);
    total += 0.5 * (r * r / (sigma * sigma) + std::log(sigma * sigma));
  }
  return total;
}

// Straight-line re-implementation of the composite loss.
double reference_loss(const DualFidelityModel& m, const TrainingBatch& cheap, const TrainingBatch& exp) {
  const auto& h = m.hyper();
  const Matrix shifted = exp.x + loop_forward(m.fbias(), exp.x);
  const Matrix latent_exp = loop_forward(m.latent(), shifted);
  const Matrix out_exp = latent_exp + loop_forward(m.tbias(), latent_exp);
  const Matrix out_cheap = loop_forward(m.latent(), cheap.x);
  return loop_nll(out_exp, exp.y, h.sigma_floor_exp) + h.coeff_both * loop_nll(out_cheap, cheap.y, h.sigma_floor_cheap) +
         h.reg_bias * (loop_sq_norm(m.fbias()) + loop_sq_norm(m.tbias())) + h.reg_latent * loop_sq_norm(m.latent());
}

Dataset fixture_dataset(surface::TrigKind kind, int n_exp, int n_cheap, std::uint64_t seed) {
  const auto fx = surface::trig_pair(kind);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset d(1);
  for (int i = 0; i < n_cheap; ++i) {
    const double x = u(rng);
    d.add(std::vector<double>{x}, fx.cheap(x), Fidelity::Cheap);
  }
  for (int i = 0; i < n_exp; ++i) {
    const double x = u(rng);
    d.add(std::vector<double>{x}, fx.expensive(x), Fidelity::Expensive);
  }
  return d;
}

Matrix grid_1d(int n) {
  Matrix x(n, 1);
  for (int i = 0; i < n; ++i) x(i, 0) = static_cast<double>(i) / (n - 1);
  return x;
}

}  // namespace

TEST_CASE("defaults are the tuned out-of-the-box configuration") {
  const ModelHyperparams h;
  CHECK(h.batch_size == 50);
  CHECK(h.learning_rate == 0.000272);
  CHECK(h.coeff_both == 0.5);
  CHECK(h.reg_latent == 1e-3);
  CHECK(h.reg_bias == 0.0894);
  CHECK(h.depth_latent == 3);
  CHECK(h.hidden_latent == 96);
  CHECK(h.hidden_tbias == 3);
  CHECK(h.resolved_hidden_fbias(5) == 5);
  CHECK(h.act_fbias == nn::Activation::Softplus);
  CHECK(h.act_tbias == nn::Activation::Softplus);
  CHECK(h.act_fbias_out == nn::Activation::Linear);
  CHECK(h.act_latent_out == nn::Activation::Linear);
  CHECK(h.act_tbias_out == nn::Activation::Linear);
  CHECK(h.max_epochs == 30000);
  CHECK(h.patience == 500);
  CHECK(h.holdout_fraction == 0.1);
  CHECK_FALSE(h.batch_norm_latent);
  CHECK_FALSE(h.batch_norm_bias);
  CHECK(ModelHyperparams::from_json(nlohmann::json::object()).to_json() == h.to_json());
}

TEST_CASE("hyperparameter JSON rejects unknown keys and bad values") {
  CHECK_THROWS_AS(ModelHyperparams::from_json({{"learnig_rate", 1e-3}}), ConfigError);
  CHECK_THROWS_AS(ModelHyperparams::from_json({{"batch_size", 0}}), ConfigError);
  CHECK_THROWS_AS(ModelHyperparams::from_json({{"act_latent", "tanh"}}), ConfigError);
  const auto h = ModelHyperparams::from_json({{"reg_bias", 0.5}, {"act_latent", "relu"}});
  CHECK(h.reg_bias == 0.5);
  CHECK(h.act_latent == nn::Activation::Relu);
}

TEST_CASE("architecture: bias nets map P to P and 2 to 2, latent P to 2") {
  const DualFidelityModel m(4, {}, 1);
  CHECK(m.fbias().input_dim() == 4);
  CHECK(m.fbias().output_dim() == 4);
  CHECK(m.latent().input_dim() == 4);
  CHECK(m.latent().output_dim() == 2);
  CHECK(m.tbias().input_dim() == 2);
  CHECK(m.tbias().output_dim() == 2);
}

TEST_CASE("zeroed latent output layer predicts mean 0 and sigma 0.51") {
  auto m = ready_model(2);
  auto& last = m.latent().layers().back();
  last.weights.setZero();
  last.bias.setZero();
  for (const auto& p : m.predict_cheap(random_inputs(10, 2, 3))) {
    CHECK(p.mean == 0.0);
    CHECK(p.sigma == doctest::Approx(0.51).epsilon(1e-15));
    CHECK(p.tag == Fidelity::Cheap);
  }
}

TEST_CASE("zeroed bias nets reduce the expensive branch to the cheap branch") {
  auto m = ready_model(3);
  std::mt19937_64 rng(5);
  randomize(m.latent(), rng);
  // Fresh models start with zero-output bias nets; zeroing everything is stronger.
  m.fbias().zero_parameters();
  m.tbias().zero_parameters();
  const Matrix x = random_inputs(25, 3, 9);
  const auto c = m.predict_cheap(x);
  const auto e = m.predict_expensive(x);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(e[i].mean == c[i].mean);
    CHECK(e[i].sigma - 0.1 == doctest::Approx(c[i].sigma - 0.01).epsilon(1e-14));
  }
  // Same with only the zero-initialized output layers of a fresh model.
  auto fresh = ready_model(3, {}, 11);
  const auto fc = fresh.predict_cheap(x);
  const auto fe = fresh.predict_expensive(x);
  for (std::size_t i = 0; i < fc.size(); ++i) CHECK(fe[i].mean == fc[i].mean);
}

TEST_CASE("cheap prediction is the latent output split into mean and sigma") {
  auto m = ready_model(2);
  std::mt19937_64 rng(2);
  randomize(m.latent(), rng);
  m.set_normalization({Vector::Constant(2, -1.0), Vector::Constant(2, 4.0), 3.0, 2.0});
  const Matrix x = random_inputs(8, 2, 4);
  const auto preds = m.predict_cheap(x);
  const Matrix xn = (x.array() + 1.0) / 4.0;
  const Matrix out = m.latent().predict(xn);
  for (Index i = 0; i < x.rows(); ++i) {
    const auto& p = preds[static_cast<std::size_t>(i)];
    CHECK(p.mean == out(i, 0) * 2.0 + 3.0);
    CHECK(p.sigma == (nn::logistic(out(i, 1)) + 0.01) * 2.0);
  }
}

TEST_CASE("sigma floors hold for arbitrary parameters") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto m = ready_model(2, {}, seed);
    std::mt19937_64 rng(seed);
    // Initialized parameters with non-zero bias-net outputs.
    randomize(m.fbias(), rng, 0.5);
    randomize(m.tbias(), rng, 0.5);
    const Matrix x = random_inputs(50, 2, seed + 100);
    for (const auto& p : m.predict_cheap(x)) CHECK(p.sigma > 0.01);
    for (const auto& p : m.predict_expensive(x)) {
      CHECK(p.sigma > 0.1);
      CHECK(std::isfinite(p.mean));
    }
    // Saturated scale outputs: logistic(raw) rounds away next to the floor,
    // so the bound is only >= in floating point.
    for (auto* net : {&m.fbias(), &m.latent(), &m.tbias()}) randomize(*net, rng, 3.0);
    for (const auto& p : m.predict_cheap(x)) CHECK(p.sigma >= 0.01);
    for (const auto& p : m.predict_expensive(x)) {
      CHECK(p.sigma >= 0.1);
      CHECK(std::isfinite(p.mean));
    }
  }
}

TEST_CASE("predicting before training is a state error") {
  const DualFidelityModel m(1, {}, 0);
  CHECK_FALSE(m.is_ready());
  CHECK_THROWS_AS(m.predict_cheap(Matrix::Zero(1, 1)), StateError);
  CHECK_THROWS_AS(m.predict_expensive(Matrix::Zero(1, 1)), StateError);
}

TEST_CASE("input width mismatch is an input-shape error") {
  const auto m = ready_model(2);
  CHECK_THROWS_AS(m.predict_expensive(Matrix::Zero(3, 1)), InputShapeError);
  CHECK_THROWS_AS(m.predict_cheap(Matrix::Zero(3, 4)), InputShapeError);
}

TEST_CASE("gaussian nll closed forms") {
  CHECK(gaussian_nll(1.0, 1.0, 1.0) == 0.0);
  CHECK(gaussian_nll(1.0, 0.0, 1.0) == doctest::Approx(0.5));
  CHECK(gaussian_nll(0.0, 0.0, 2.0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("loss: one expensive point with y=1, mu=0, sigma=1 and no regularization is 0.5") {
  ModelHyperparams h;
  h.reg_bias = 0.0;
  h.reg_latent = 0.0;
  DualFidelityModel m(1, h, 3);
  m.fbias().zero_parameters();
  m.tbias().zero_parameters();
  m.latent().zero_parameters();
  // logistic(raw) + 0.1 = 1 on the expensive branch.
  m.latent().layers().back().bias[1] = std::log(0.9 / 0.1);
  TrainingBatch exp{Matrix::Constant(1, 1, 0.3), Vector::Constant(1, 1.0)};
  const auto lb = m.loss({}, exp, nn::Mode::Eval);
  CHECK(lb.total == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(lb.nll_cheap == 0.0);

  // mu = y and sigma = 1 everywhere: zero likelihood loss.
  TrainingBatch exact{Matrix::Constant(3, 1, 0.5), Vector::Zero(3)};
  CHECK(m.loss({}, exact, nn::Mode::Eval).total == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("loss: both batches empty is an argument error") {
  DualFidelityModel m(1, {}, 0);
  CHECK_THROWS_AS(m.loss({}, {}, nn::Mode::Eval), ArgumentError);
}

TEST_CASE("loss matches an independent straight-line evaluator") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto toy = testing::make_toy_problem(seed);
    if (toy.model.hyper().batch_norm_latent || toy.model.hyper().batch_norm_bias) continue;
    const double expected = reference_loss(toy.model, toy.cheap, toy.exp);
    const double got = toy.model.loss(toy.cheap, toy.exp, nn::Mode::Eval).total;
    INFO("seed " << seed);
    CHECK(got == doctest::Approx(expected).epsilon(1e-10));
  }
  // Dedicated no-batch-norm configurations so the oracle always runs.
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    ModelHyperparams h;
    h.hidden_latent = 6;
    h.depth_latent = 2;
    h.reg_bias = 0.05;
    h.coeff_both = 0.7;
    DualFidelityModel m(2, h, seed);
    std::mt19937_64 rng(seed);
    for (auto* net : {&m.fbias(), &m.latent(), &m.tbias()}) randomize(*net, rng);
    TrainingBatch cheap{random_inputs(5, 2, seed), random_inputs(5, 1, seed + 1).col(0)};
    TrainingBatch exp{random_inputs(3, 2, seed + 2), random_inputs(3, 1, seed + 3).col(0)};
    CHECK(m.loss(cheap, exp, nn::Mode::Eval).total == doctest::Approx(reference_loss(m, cheap, exp)).epsilon(1e-10));
  }
}

TEST_CASE("increasing the bias regularization strictly increases the loss") {
  auto toy = testing::make_toy_problem(4);
  auto base_h = toy.model.hyper();
  double previous = -1e300;
  for (double reg : {0.0, 0.01, 0.1, 1.0}) {
    auto h = base_h;
    h.reg_bias = reg;
    DualFidelityModel m(toy.model.param_dim(), h, 0);
    m.fbias() = toy.model.fbias();
    m.latent() = toy.model.latent();
    m.tbias() = toy.model.tbias();
    const double l = m.loss(toy.cheap, toy.exp, nn::Mode::Eval).total;
    CHECK(l > previous);
    previous = l;
  }
}

TEST_CASE("training direction with beta = 0 is the plain likelihood gradient") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto toy = testing::make_toy_problem(seed);
    auto h = toy.model.hyper();
    h.nll_beta = 0.0;
    DualFidelityModel m(toy.model.param_dim(), h, 0);
    m.fbias() = toy.model.fbias();
    m.latent() = toy.model.latent();
    m.tbias() = toy.model.tbias();
    DualFidelityModel twin = m;
    ModelGradients a;
    ModelGradients b;
    m.loss_and_gradients(toy.cheap, toy.exp, a);
    twin.training_gradients(toy.cheap, toy.exp, b);
    const auto ba = a.blocks();
    const auto bb = b.blocks();
    REQUIRE(ba.size() == bb.size());
    for (std::size_t k = 0; k < ba.size(); ++k) {
      for (std::size_t i = 0; i < ba[k].size(); ++i) CHECK(ba[k][i] == bb[k][i]);
    }
  }
}

TEST_CASE("training: empty dataset is an argument error, dimension mismatch a shape error") {
  DualFidelityModel m(1, {}, 0);
  CHECK_THROWS_AS(m.train(Dataset(1), 0), ArgumentError);
  Dataset d(2);
  d.add(std::vector<double>{0.1, 0.2}, 1.0, Fidelity::Cheap);
  CHECK_THROWS_AS(m.train(d, 0), InputShapeError);
}

TEST_CASE("training is deterministic in the seed") {
  auto h = io::regression_model_defaults();
  h.max_epochs = 60;
  h.patience = 60;
  h.warmup_epochs = 10;
  const auto data = fixture_dataset(surface::TrigKind::Linear, 6, 30, 1);
  DualFidelityModel a(1, h, 5);
  DualFidelityModel b(1, h, 5);
  const auto ha = a.train(data, 9);
  const auto hb = b.train(data, 9);
  REQUIRE(ha.epochs.size() == hb.epochs.size());
  CHECK(ha.epochs.back().loss == hb.epochs.back().loss);
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("training history CSV") {
  auto h = io::regression_model_defaults();
  h.max_epochs = 5;
  DualFidelityModel m(1, h, 0);
  const auto hist = m.train(fixture_dataset(surface::TrigKind::Constant, 4, 10, 2), 0);
  std::ostringstream os;
  hist.write_csv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "epoch,L,L_exp,L_cheap,monitor");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("warm-up freezes the bias networks") {
  auto h = io::regression_model_defaults();
  h.max_epochs = 20;
  h.patience = 20;
  h.warmup_epochs = 20;
  DualFidelityModel m(1, h, 3);
  m.train(fixture_dataset(surface::TrigKind::Constant, 5, 20, 3), 1);
  for (const auto* net : {&m.fbias(), &m.tbias()}) {
    for (const auto& l : net->layers().back().weights.reshaped()) CHECK(l == 0.0);
    for (const auto& l : net->layers().back().bias) CHECK(l == 0.0);
  }
}

TEST_CASE("a runaway learning rate raises a divergence error with its epoch") {
  auto h = io::regression_model_defaults();
  h.learning_rate = 1e200;
  h.max_epochs = 50;
  h.warmup_epochs = 0;
  DualFidelityModel m(1, h, 0);
  try {
    m.train(fixture_dataset(surface::TrigKind::Nonlinear, 5, 20, 4), 0);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.epoch() >= 0);
  }
}

TEST_CASE("checkpoint round trip preserves predictions bitwise") {
  auto h = io::regression_model_defaults();
  h.max_epochs = 20;
  DualFidelityModel m(1, h, 3);
  m.train(fixture_dataset(surface::TrigKind::Linear, 5, 20, 5), 2);
  const auto restored = DualFidelityModel::from_json(nlohmann::json::parse(m.to_json().dump()));
  const Matrix x = grid_1d(33);
  const auto a = m.predict_expensive(x);
  const auto b = restored.predict_expensive(x);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mean == b[i].mean);
    CHECK(a[i].sigma == b[i].sigma);
  }
}

TEST_CASE("cheap-only model fits the constant-bias cheap surface") {
  const auto fx = surface::trig_pair(surface::TrigKind::Constant);
  Dataset d(1);
  for (int i = 0; i < 75; ++i) {
    const double x = static_cast<double>(i) / 74.0;
    d.add(std::vector<double>{x}, fx.cheap(x), Fidelity::Cheap);
  }
  auto h = io::regression_model_defaults();
  h.learning_rate = io::kFastLearningRate;
  DualFidelityModel m(1, h, 1);
  m.train(d, 1);
  const Matrix x = grid_1d(200);
  const auto preds = m.predict_cheap(x);
  double sse = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    const double r = preds[static_cast<std::size_t>(i)].mean - fx.cheap(x(i, 0));
    sse += r * r;
  }
  CHECK(std::sqrt(sse / 200.0) < 0.1);
}

TEST_CASE("baselines: empty selection errors; nn_cheap keeps the systematic offset") {
  const auto fx = surface::trig_pair(surface::TrigKind::Constant);
  Dataset cheap_only(1);
  for (int i = 0; i < 75; ++i) {
    const double x = static_cast<double>(i) / 74.0;
    cheap_only.add(std::vector<double>{x}, fx.cheap(x), Fidelity::Cheap);
  }
  auto hyper = io::regression_model_defaults();
  hyper.learning_rate = io::kFastLearningRate;
  CHECK_THROWS_AS(baseline_train(BaselineVariant::NnExp, cheap_only, hyper, 0), ArgumentError);

  const auto model = baseline_train(BaselineVariant::NnCheap, cheap_only, hyper, 0);
  // The cheap surface is cos(4 pi x) + 2; the expensive one sin(4 pi x). Away
  // from the phase shift, compare on the mean offset over the shifted pair:
  // f_cheap(x) - f_exp(x - 3/8) = 2 exactly, so the residual of nn_cheap
  // against the expensive truth averages the offset plus a zero-mean term.
  const Matrix x = grid_1d(401);
  const auto preds = model.predict(x);
  double offset = 0.0;
  for (Index i = 0; i < x.rows(); ++i) offset += preds[static_cast<std::size_t>(i)].mean - fx.expensive(x(i, 0));
  offset /= static_cast<double>(x.rows());
  CHECK(offset == doctest::Approx(2.0).epsilon(0.1));

  Dataset same(1);
  for (int i = 0; i < 40; ++i) {
    const double xv = static_cast<double>(i) / 39.0;
    same.add(std::vector<double>{xv}, fx.expensive(xv), Fidelity::Cheap);
    same.add(std::vector<double>{xv}, fx.expensive(xv), Fidelity::Expensive);
  }
  auto rmse = [&](const BaselineModel& b) {
    const auto p = b.predict(x);
    double s = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
      const double r = p[static_cast<std::size_t>(i)].mean - fx.expensive(x(i, 0));
      s += r * r;
    }
    return std::sqrt(s / static_cast<double>(x.rows()));
  };
  const double both = rmse(baseline_train(BaselineVariant::NnBoth, same, hyper, 3));
  const double exp_only = rmse(baseline_train(BaselineVariant::NnExp, same, hyper, 3));
  CHECK(std::abs(both - exp_only) < 0.1);
}

TEST_CASE("pearson edge cases") {
  const std::vector<double> a = {1, 2, 3, 4};
  const std::vector<double> b = {2, 4, 6, 8.5};
  const std::vector<double> c = {5, 5, 5, 5};
  CHECK(pearson(a, a) == doctest::Approx(1.0));
  CHECK(pearson(a, c) == 0.0);
  CHECK(pearson(a, b) > 0.99);
}

TEST_CASE("cv folds partition the indices with at least two per fold") {
  for (std::size_t n : {2u, 3u, 5u, 8u, 20u}) {
    const auto folds = cv_folds(n, 3, 4);
    std::vector<int> seen(n, 0);
    for (const auto& f : folds) {
      CHECK(f.size() >= 2);
      for (auto i : f) ++seen[i];
    }
    for (int s : seen) CHECK(s == 1);
  }
  CHECK_THROWS_AS(cv_folds(1, 3, 0), ArgumentError);
}

namespace {

Dataset exp_dataset(int n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset d(2);
  for (int i = 0; i < 4; ++i) d.add(std::vector<double>{u(rng), u(rng)}, u(rng), Fidelity::Cheap);
  for (int i = 0; i < n; ++i) {
    const double a = u(rng);
    const double b = u(rng);
    d.add(std::vector<double>{a, b}, scale * (std::sin(3 * a) + b * b + 0.3 * u(rng)), Fidelity::Expensive);
  }
  return d;
}

// Looks up each validation row's true target so predictors can be exact.
FoldPredictor truth_predictor(const Dataset& full, double sign) {
  return [&full, sign](const Dataset&, const Matrix& xv) {
    const Matrix x = full.x(Fidelity::Expensive);
    const Vector y = full.y(Fidelity::Expensive);
    Vector out(xv.rows());
    for (Index i = 0; i < xv.rows(); ++i) {
      for (Index j = 0; j < x.rows(); ++j) {
        if (x.row(j) == xv.row(i)) out[i] = sign * y[j];
      }
    }
    return out;
  };
}

Vector smooth_guess(const Matrix& xv) {
  Vector out(xv.rows());
  for (Index i = 0; i < xv.rows(); ++i) out[i] = std::sin(3 * xv(i, 0)) + 0.5 * xv(i, 1);
  return out;
}

}  // namespace

TEST_CASE("rho_cv: exact predictions give 1, negated ones -1") {
  const auto data = exp_dataset(9, 1);
  const auto up = rho_cv(data, truth_predictor(data, 1.0), 3, 2);
  const auto down = rho_cv(data, truth_predictor(data, -1.0), 3, 2);
  REQUIRE(up);
  REQUIRE(down);
  CHECK(up->rho == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(down->rho == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("rho_cv: fewer than two expensive points is undefined") {
  auto p = [](const Dataset&, const Matrix& xv) { return Vector(Vector::Zero(xv.rows())); };
  CHECK_FALSE(rho_cv(exp_dataset(1, 2), p, 3, 0));
  CHECK_FALSE(rho_cv(exp_dataset(0, 2), p, 3, 0));
}

TEST_CASE("rho_cv matches a brute-force fold average") {
  const auto data = exp_dataset(8, 3);
  std::vector<std::size_t> train_cheap_counts;
  FoldPredictor p = [&](const Dataset& train, const Matrix& xv) {
    train_cheap_counts.push_back(train.size(Fidelity::Cheap));
    return smooth_guess(xv);
  };
  const auto est = rho_cv(data, p, 3, 17);
  REQUIRE(est);
  const Matrix x = data.x(Fidelity::Expensive);
  const Vector y = data.y(Fidelity::Expensive);
  double sum = 0.0;
  for (const auto& fold : est->folds) {
    std::vector<double> pred;
    std::vector<double> truth;
    for (auto i : fold) {
      pred.push_back(std::sin(3 * x(static_cast<Index>(i), 0)) + 0.5 * x(static_cast<Index>(i), 1));
      truth.push_back(y[static_cast<Index>(i)]);
    }
    double mp = 0.0, mt = 0.0;
    for (std::size_t k = 0; k < pred.size(); ++k) {
      mp += pred[k];
      mt += truth[k];
    }
    mp /= pred.size();
    mt /= truth.size();
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < pred.size(); ++k) {
      sxy += (pred[k] - mp) * (truth[k] - mt);
      sxx += (pred[k] - mp) * (pred[k] - mp);
      syy += (truth[k] - mt) * (truth[k] - mt);
    }
    sum += sxy / std::sqrt(sxx * syy);
  }
  CHECK(est->rho == doctest::Approx(sum / est->folds.size()).epsilon(1e-12));
  for (auto c : train_cheap_counts) CHECK(c == 4);
}

TEST_CASE("rho_cv is invariant to positive rescaling of the expensive targets") {
  auto p = [](const Dataset&, const Matrix& xv) { return smooth_guess(xv); };
  const auto a = rho_cv(exp_dataset(12, 5, 1.0), p, 3, 8);
  const auto b = rho_cv(exp_dataset(12, 5, 37.5), p, 3, 8);
  REQUIRE(a);
  REQUIRE(b);
  REQUIRE(a->fold_rho.size() == b->fold_rho.size());
  for (std::size_t i = 0; i < a->fold_rho.size(); ++i) CHECK(a->fold_rho[i] == doctest::Approx(b->fold_rho[i]).epsilon(1e-9));
}

TEST_CASE("rho_cv: constant predictions contribute 0 instead of NaN") {
  auto p = [](const Dataset&, const Matrix& xv) { return Vector(Vector::Constant(xv.rows(), 2.0)); };
  const auto est = rho_cv(exp_dataset(9, 6), p, 3, 1);
  REQUIRE(est);
  CHECK(est->rho == 0.0);
}
