#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "bifid/campaign/campaign.hpp"
#include "bifid/campaign/stats.hpp"
#include "bifid/model/dual_fidelity_model.hpp"
#include "bifid/planner/planner.hpp"
#include "bifid/surface/gp.hpp"
#include "bifid/surface/rank_stats.hpp"
#include "bifid/surface/surface_pair.hpp"

using namespace bifid;

namespace {

nn::Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  nn::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

model::Dataset trig_dataset(int n_cheap, int n_exp) {
  const auto t = surface::trig_pair(surface::TrigKind::Linear);
  model::Dataset d(1);
  for (int i = 0; i < n_cheap; ++i) {
    const double x = i / (n_cheap - 1.0);
    d.add(std::vector<double>{x}, t.cheap(x), model::Fidelity::Cheap);
  }
  for (int i = 0; i < n_exp; ++i) {
    const double x = (i + 0.5) / n_exp;
    d.add(std::vector<double>{x}, t.expensive(x), model::Fidelity::Expensive);
  }
  return d;
}

void BM_DenseForwardBackward(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto batch = state.range(0);
  std::vector<nn::LayerSpec> specs(3);
  specs[0].units = 96;
  specs[0].activation = nn::Activation::LeakyRelu;
  specs[1].units = 96;
  specs[1].activation = nn::Activation::LeakyRelu;
  specs[2].units = 2;
  specs[2].activation = nn::Activation::Linear;
  nn::DenseNet net(2, specs, rng);
  const nn::Matrix x = uniform_matrix(batch, 2, 2);
  const nn::Matrix g = nn::Matrix::Ones(batch, 2);
  for (auto _ : state) {
    nn::ForwardTrace trace;
    benchmark::DoNotOptimize(net.forward(x, nn::Mode::Train, &trace));
    benchmark::DoNotOptimize(net.backward(trace, g));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_DenseForwardBackward)->Arg(50)->Arg(500);

void BM_ModelTrain(benchmark::State& state) {
  const auto data = trig_dataset(75, 10);
  auto h = model::ModelHyperparams{};
  h.max_epochs = static_cast<int>(state.range(0));
  h.patience = h.max_epochs;
  for (auto _ : state) {
    model::DualFidelityModel m(1, h, 3);
    benchmark::DoNotOptimize(m.train(data, 4));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ModelTrain)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_GpPosterior(benchmark::State& state) {
  const auto n = state.range(0);
  const nn::Matrix xt = uniform_matrix(n, 2, 5);
  const nn::Matrix xq = uniform_matrix(n, 2, 6);
  const nn::Vector yt = uniform_matrix(n, 1, 7).col(0);
  const surface::RbfKernel k;
  for (auto _ : state) benchmark::DoNotOptimize(surface::gp_posterior(xt, yt, xq, k));
}
BENCHMARK(BM_GpPosterior)->Arg(20)->Arg(200);

void BM_GpSampleSurface(benchmark::State& state) {
  surface::DomainSpec domain;
  domain.dim = static_cast<int>(state.range(0));
  domain.points_per_dim = domain.dim == 1 ? 1000 : 100;
  std::mt19937_64 rng(8);
  for (auto _ : state) benchmark::DoNotOptimize(surface::gp_sample_surface(domain, {}, 20, rng));
}
BENCHMARK(BM_GpSampleSurface)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_Spearman(benchmark::State& state) {
  const nn::Matrix v = uniform_matrix(state.range(0), 2, 9);
  const std::vector<double> a(v.col(0).begin(), v.col(0).end()), b(v.col(1).begin(), v.col(1).end());
  for (auto _ : state) benchmark::DoNotOptimize(surface::spearman(a, b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Spearman)->Arg(10000);

void BM_Acquisition(benchmark::State& state) {
  planner::KdeSurrogate kde(2);
  kde.set_observations(uniform_matrix(state.range(0), 2, 10), uniform_matrix(state.range(0), 1, 11).col(0));
  const nn::Matrix q = uniform_matrix(1024, 2, 12);
  planner::AcquisitionConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(planner::acquisition(q, kde, cfg, 1.0));
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_Acquisition)->Arg(10)->Arg(100);

void BM_PlannerPropose(benchmark::State& state) {
  planner::Planner p(2, {});
  p.set_observations(uniform_matrix(state.range(0), 2, 13), uniform_matrix(state.range(0), 1, 14).col(0));
  for (auto _ : state) benchmark::DoNotOptimize(p.propose(1));
}
BENCHMARK(BM_PlannerPropose)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Wilcoxon(benchmark::State& state) {
  const nn::Matrix v = uniform_matrix(state.range(0), 2, 15);
  const std::vector<double> a(v.col(0).begin(), v.col(0).end()), b(v.col(1).begin(), v.col(1).end());
  for (auto _ : state) benchmark::DoNotOptimize(campaign::wilcoxon_signed_rank(a, b));
}
BENCHMARK(BM_Wilcoxon)->Arg(20)->Arg(200);

void BM_CampaignBoOnly(benchmark::State& state) {
  auto expensive = campaign::analytic_evaluator(surface::AnalyticName::Dejong, 2, campaign::Fidelity::Expensive);
  campaign::CampaignConfig c;
  c.strategy = campaign::Strategy::BoOnly;
  c.target = -1.0;  // unreachable: always runs the full budget
  c.max_expensive = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(campaign::run_campaign(c, nullptr, expensive));
}
BENCHMARK(BM_CampaignBoOnly)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
