#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bifid/errors.hpp"
#include "bifid/planner/planner.hpp"

using namespace bifid;
using namespace bifid::planner;

namespace {

Matrix uniform(Index n, Index d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix x(n, d);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  return x;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("bandwidth rule") {
  BandwidthPolicy b;
  CHECK(b.bandwidth(1, 1) == doctest::Approx(0.5));
  CHECK(b.bandwidth(32, 1) == doctest::Approx(0.5 * std::pow(32.0, -0.2)));
  CHECK(b.bandwidth(1000000000, 1) == doctest::Approx(0.02));
  b.fixed = 0.1;
  CHECK(b.bandwidth(7, 3) == 0.1);
  b.min = -1.0;
  CHECK_THROWS_AS(b.validate(), ConfigError);
}

TEST_CASE("single-observation acquisition matches hand evaluation") {
  KdeSurrogate s(1);
  Matrix x0(1, 1);
  x0(0, 0) = 0.3;
  Vector f0(1);
  f0[0] = 2.0;
  s.set_observations(x0, f0);
  s.set_bandwidth(0.1);
  AcquisitionConfig cfg;
  cfg.rho = 0.5;
  cfg.gemini = [](const Matrix& x) { return Vector::Constant(x.rows(), 2.0); };
  const double p = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * 0.1);
  const double expected = (2.0 * p + 1.0 + 0.5 * 2.0) / (p + 1.0 + 1.0);
  CHECK(std::abs(acquisition(std::vector<double>{0.3}, s, cfg, 1.0) - expected) < 1e-12);
}

TEST_CASE("acquisition without the model term reduces to the base form") {
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int set = 0; set < 20; ++set) {
    const Index d = 1 + set % 3;
    KdeSurrogate s(d);
    const Index n = 1 + set;
    std::normal_distribution<double> nf(0.0, 1.0);
    Vector f(n);
    for (Index i = 0; i < n; ++i) f[i] = nf(rng);
    s.set_observations(uniform(n, d, rng), f);
    const Matrix q = uniform(100, d, rng);
    AcquisitionConfig cfg;
    cfg.rho = 0.0;
    cfg.gemini = [](const Matrix& x) { return Vector(x.col(0).array().sin()); };
    AcquisitionConfig none;
    for (double lambda : {1.0, -1.0}) {
      const Vector base = base_acquisition(q, s, lambda);
      worst = std::max(worst, (acquisition(q, s, cfg, lambda) - base).cwiseAbs().maxCoeff());
      worst = std::max(worst, (acquisition(q, s, none, lambda) - base).cwiseAbs().maxCoeff());
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("acquisition limits and monotonicity") {
  KdeSurrogate s(2);
  Matrix x(1, 2);
  x << 0.0, 0.0;
  Vector f(1);
  f[0] = 0.7;
  s.set_observations(x, f);
  s.set_bandwidth(0.02);
  AcquisitionConfig none;
  for (double lambda : {1.0, -1.0, 0.3}) {
    CHECK(acquisition(std::vector<double>{1.0, 1.0}, s, none, lambda) == doctest::Approx(lambda / 2.0));
  }
  AcquisitionConfig cfg;
  cfg.gemini = [](const Matrix& q) { return Vector::Constant(q.rows(), 0.4); };
  double prev = -1e300;
  for (double rho = -1.0; rho <= 1.0; rho += 0.25) {
    cfg.rho = rho;
    const double a = acquisition(std::vector<double>{0.01, 0.02}, s, cfg, 1.0);
    CHECK(a > prev);
    prev = a;
  }
  // Undefined rho drops the model term.
  cfg.rho.reset();
  CHECK(acquisition(std::vector<double>{0.5, 0.5}, s, cfg, 1.0) ==
        acquisition(std::vector<double>{0.5, 0.5}, s, none, 1.0));
}

TEST_CASE("lambda -1 explores farther than lambda 1") {
  std::vector<double> d_exploit;
  std::vector<double> d_explore;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PlannerConfig cfg;
    cfg.seed = seed;
    Planner p(2, cfg);
    Matrix x(1, 2);
    x << 0.5, 0.5;
    Vector f(1);
    f[0] = 10.0;
    p.set_observations(x, f);
    const auto props = p.propose(2);
    REQUIRE(props.size() == 2);
    CHECK(props[0].lambda == 1.0);
    CHECK(props[1].lambda == -1.0);
    auto dist = [](const Proposal& pr) { return std::hypot(pr.x[0] - 0.5, pr.x[1] - 0.5); };
    d_exploit.push_back(dist(props[0]));
    d_explore.push_back(dist(props[1]));
  }
  CHECK(median(d_explore) > median(d_exploit));
}

TEST_CASE("proposals without observations are uniform random") {
  Planner p(3, PlannerConfig{});
  const auto props = p.propose(4);
  for (const auto& pr : props) {
    CHECK(pr.random);
    for (double v : pr.x) CHECK((v >= 0.0 && v <= 1.0));
  }
  CHECK(props[0].x != props[1].x);
}

TEST_CASE("proposals are feasible, deterministic and use the model term") {
  auto run = [](std::uint64_t seed, bool with_model) {
    PlannerConfig cfg;
    cfg.seed = seed;
    cfg.simplex_dim = 4;
    Planner p(3, cfg);
    std::mt19937_64 rng(seed + 100);
    const Matrix x = uniform(6, 3, rng);
    Vector f = x.rowwise().squaredNorm();
    p.set_observations(x, f);
    if (with_model) {
      p.set_gemini(0.9, [](const Matrix& q) { return Vector(q.rowwise().squaredNorm()); });
    }
    std::vector<Proposal> all;
    for (int i = 0; i < 3; ++i) {
      for (auto& pr : p.propose(2)) all.push_back(pr);
    }
    return all;
  };
  const auto a = run(5, true);
  const auto b = run(5, true);
  const auto c = run(5, false);
  REQUIRE(a.size() == 6);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].iteration == static_cast<int>(i / 2));
    differs = differs || a[i].x != c[i].x;
    double sum = 0.0;
    for (double t : a[i].transformed_x) {
      CHECK(t >= 0.0);
      sum += t;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
    for (double v : a[i].x) CHECK((v >= 0.0 && v <= 1.0));
    const auto j = a[i].to_json();
    CHECK(j.at("transformed_x").size() == 4);
  }
  CHECK(differs);
}

TEST_CASE("exploitative proposal lands near the best observation") {
  PlannerConfig cfg;
  cfg.seed = 3;
  cfg.lambdas = {1.0};
  Planner p(2, cfg);
  std::mt19937_64 rng(4);
  const Matrix x = uniform(30, 2, rng);
  Vector f(30);
  for (Index i = 0; i < 30; ++i) f[i] = std::pow(x(i, 0) - 0.2, 2) + std::pow(x(i, 1) - 0.8, 2);
  p.set_observations(x, f);
  Index best = 0;
  f.minCoeff(&best);
  const auto pr = p.propose(1)[0];
  CHECK(std::hypot(pr.x[0] - x(best, 0), pr.x[1] - x(best, 1)) < 0.2);
  // The refined point is no worse than any random candidate.
  const Vector a = acquisition(uniform(2000, 2, rng), p.surrogate(), p.acquisition_config(), 1.0);
  CHECK(pr.acquisition <= a.minCoeff() + 1e-9);
}

TEST_CASE("planner config json") {
  PlannerConfig c;
  c.lambdas = {1.0, 0.0, -1.0};
  c.seed = 99;
  c.bandwidth.fixed = 0.2;
  const auto back = PlannerConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK_THROWS_AS(PlannerConfig::from_json({{"lambda", {1.0}}}), ConfigError);
  CHECK_THROWS_AS(PlannerConfig::from_json({{"lambdas", {2.0}}}), ConfigError);
  CHECK_THROWS_AS(PlannerConfig::from_json({{"n_samples", "many"}}), ConfigError);
  CHECK_THROWS_AS(PlannerConfig::from_json({{"bandwidth", {{"width", 1.0}}}}), ConfigError);
}

TEST_CASE("simplex transform") {
  const SimplexTransform t(6);
  const auto v = t.to_simplex(std::vector<double>(5, 0.0));
  CHECK(v == std::vector<double>{0, 0, 0, 0, 0, 1});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(5);
    for (auto& e : x) e = u(rng);
    const auto s = t.to_simplex(x);
    double sum = 0.0;
    for (double e : s) {
      CHECK(e >= 0.0);
      sum += e;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
    const auto back = t.from_simplex(s);
    for (std::size_t k = 0; k < x.size(); ++k) worst = std::max(worst, std::abs(back[k] - x[k]));
  }
  CHECK(worst < 1e-10);
  CHECK_THROWS_AS(t.from_simplex(std::vector<double>{0.5, 0.5, 0.1, 0, 0, 0}), ArgumentError);
  CHECK_THROWS_AS(t.from_simplex(std::vector<double>{1.1, -0.1, 0, 0, 0, 0}), ArgumentError);
  CHECK_THROWS_AS(t.to_simplex(std::vector<double>{0.5}), ArgumentError);
  CHECK_THROWS_AS(t.to_simplex(std::vector<double>{0, 0, 0, 0, 1.5}), ArgumentError);
  CHECK_THROWS_AS(SimplexTransform(1), ArgumentError);
}

TEST_CASE("rho gate needs two expensive observations") {
  model::Dataset d(1);
  for (int i = 0; i < 5; ++i) d.add(std::vector<double>{i / 5.0}, i, model::Fidelity::Cheap);
  d.add(std::vector<double>{0.5}, 1.0, model::Fidelity::Expensive);
  const model::FoldPredictor echo = [](const model::Dataset&, const Matrix& x) { return Vector(x.col(0)); };
  CHECK_FALSE(update_rho(d, echo, 3, 0).has_value());
  d.add(std::vector<double>{0.1}, 0.1, model::Fidelity::Expensive);
  d.add(std::vector<double>{0.9}, 0.9, model::Fidelity::Expensive);
  d.add(std::vector<double>{0.3}, 0.3, model::Fidelity::Expensive);
  const auto rho = update_rho(d, echo, 2, 0);
  REQUIRE(rho.has_value());
  CHECK(*rho == doctest::Approx(1.0));
}

namespace {

// Cheap channel = sign * expensive channel on a smooth 1D surface.
double proxy_rho(double sign, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto f = [](double x) { return std::sin(2.0 * std::numbers::pi * x) + x; };
  model::Dataset d(1);
  for (int i = 0; i < 40; ++i) {
    const double x = u(rng);
    d.add(std::vector<double>{x}, sign * f(x), model::Fidelity::Cheap);
  }
  for (int i = 0; i < 9; ++i) {
    const double x = u(rng);
    d.add(std::vector<double>{x}, f(x), model::Fidelity::Expensive);
  }
  auto h = model::ModelHyperparams{};
  h.learning_rate = 1e-3;
  h.max_epochs = 600;
  h.patience = 600;
  h.warmup_epochs = 300;
  return *update_rho(d, model::model_fold_predictor(h, seed), 3, seed);
}

}  // namespace

TEST_CASE("rho gate: perfect proxy near 1, anti-proxy negative") {
  std::vector<double> perfect;
  std::vector<double> anti;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    perfect.push_back(proxy_rho(1.0, seed));
    anti.push_back(proxy_rho(-1.0, seed));
  }
  MESSAGE("perfect " << median(perfect) << " anti " << median(anti));
  CHECK(median(perfect) > 0.9);
  CHECK(median(anti) < 0.0);
  for (double r : anti) CHECK((r >= -1.0 && r <= 1.0));
}
