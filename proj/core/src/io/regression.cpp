#include "bifid/io/regression.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include <spdlog/spdlog.h>

#include "bifid/campaign/stats.hpp"
#include "bifid/errors.hpp"
#include "bifid/model/baseline.hpp"
#include "bifid/model/cross_validation.hpp"
#include "bifid/model/dual_fidelity_model.hpp"
#include "bifid/random.hpp"

namespace bifid::io {

namespace {

const std::vector<std::string> kKnownModels = {"gemini", "nn_exp", "nn_cheap", "nn_both"};
const std::vector<std::string> kConfigKeys = {"sizes", "n_cheap", "cheap_ratio", "n_splits",
                                              "models", "hyper", "seed"};

std::vector<std::size_t> sample_without_replacement(std::size_t total, std::size_t count, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, total - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<nn::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<nn::Index>(i)) = x.row(static_cast<nn::Index>(rows[i]));
  return out;
}

Vector means(const std::vector<model::Prediction>& p) {
  Vector v(static_cast<nn::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) v[static_cast<nn::Index>(i)] = p[i].mean;
  return v;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

FidelityPools FidelityPools::from_pair(const surface::SurfacePair& pair) {
  return {pair.domain, pair.y_cheap, pair.domain, pair.y_exp};
}

FidelityPools FidelityPools::from_descriptors(const DescriptorDataset& data) {
  const auto d = data.to_dataset();
  return {d.x(model::Fidelity::Cheap), d.y(model::Fidelity::Cheap), d.x(model::Fidelity::Expensive),
          d.y(model::Fidelity::Expensive)};
}

model::ModelHyperparams regression_model_defaults() {
  model::ModelHyperparams h;
  h.max_epochs = 4000;
  h.patience = 4000;
  h.warmup_epochs = 1000;
  return h;
}

int LearningCurveConfig::cheap_count(int n_exp, std::size_t pool) const {
  const long wanted = cheap_ratio > 0 ? static_cast<long>(cheap_ratio) * n_exp : n_cheap;
  return static_cast<int>(std::min<long>(wanted, static_cast<long>(pool)));
}

void LearningCurveConfig::validate() const {
  if (sizes.empty()) throw ConfigError("sizes must not be empty");
  for (int s : sizes) {
    if (s < 1) throw ConfigError("sizes must be >= 1");
  }
  if (n_cheap < 0) throw ConfigError("n_cheap must be >= 0");
  if (cheap_ratio < 0) throw ConfigError("cheap_ratio must be >= 0");
  if (n_splits < 1) throw ConfigError("n_splits must be >= 1");
  if (models.empty()) throw ConfigError("models must not be empty");
  for (const auto& m : models) {
    if (std::find(kKnownModels.begin(), kKnownModels.end(), m) == kKnownModels.end()) {
      throw ConfigError("models: unknown model '" + m + "'");
    }
  }
  hyper.validate();
}

nlohmann::json LearningCurveConfig::to_json() const {
  return {{"sizes", sizes},   {"n_cheap", n_cheap},        {"cheap_ratio", cheap_ratio}, {"n_splits", n_splits},
          {"models", models}, {"hyper", hyper.to_json()}, {"seed", seed}};
}

LearningCurveConfig LearningCurveConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("regression config must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end()) {
      throw ConfigError("regress: unknown key '" + key + "'");
    }
  }
  LearningCurveConfig c;
  try {
    if (j.contains("sizes")) c.sizes = j.at("sizes").get<std::vector<int>>();
    c.n_cheap = j.value("n_cheap", c.n_cheap);
    c.cheap_ratio = j.value("cheap_ratio", c.cheap_ratio);
    c.n_splits = j.value("n_splits", c.n_splits);
    if (j.contains("models")) c.models = j.at("models").get<std::vector<std::string>>();
    c.seed = j.value("seed", c.seed);
    if (j.contains("hyper")) {
      if (!j.at("hyper").is_object()) throw ConfigError("regress.hyper must be an object");
      auto merged = regression_model_defaults().to_json();
      for (const auto& [key, value] : j.at("hyper").items()) {
        if (!merged.contains(key)) throw ConfigError("regress.hyper: unknown key '" + key + "'");
        merged[key] = value;
      }
      c.hyper = model::ModelHyperparams::from_json(merged);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("regress: ") + e.what());
  }
  c.validate();
  return c;
}

FitMetrics fit_metrics(const Vector& truth, const Vector& prediction) {
  if (truth.size() != prediction.size() || truth.size() == 0) {
    throw ArgumentError("fit_metrics: need equally long nonempty vectors");
  }
  FitMetrics m;
  const double n = static_cast<double>(truth.size());
  const double ss_res = (truth - prediction).squaredNorm();
  const double ss_tot = (truth.array() - truth.mean()).matrix().squaredNorm();
  m.rmsd = std::sqrt(ss_res / n);
  m.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  m.pearson = model::pearson(std::span<const double>(truth.data(), static_cast<std::size_t>(truth.size())),
                             std::span<const double>(prediction.data(), static_cast<std::size_t>(prediction.size())));
  return m;
}

Split make_split(const FidelityPools& pools, int n_exp, int n_cheap, std::uint64_t seed, int size_index, int split) {
  const auto n_pool = static_cast<std::size_t>(pools.x_exp.rows());
  if (n_exp < 1 || static_cast<std::size_t>(n_exp) >= n_pool) {
    throw ArgumentError("split: " + std::to_string(n_exp) + " expensive training points leave no validation rows (pool of " +
                        std::to_string(n_pool) + ")");
  }
  const auto c_pool = static_cast<std::size_t>(pools.x_cheap.rows());
  if (n_cheap < 0 || static_cast<std::size_t>(n_cheap) > c_pool) throw ArgumentError("split: cheap count exceeds the pool");
  auto rng = stream_rng(seed, {static_cast<std::uint64_t>(size_index), static_cast<std::uint64_t>(split)});
  Split s;
  s.exp_train = sample_without_replacement(n_pool, static_cast<std::size_t>(n_exp), rng);
  s.cheap_train = sample_without_replacement(c_pool, static_cast<std::size_t>(n_cheap), rng);
  for (std::size_t i = 0, j = 0; i < n_pool; ++i) {
    if (j < s.exp_train.size() && s.exp_train[j] == i) {
      ++j;
    } else {
      s.validation.push_back(i);
    }
  }
  return s;
}

std::vector<SplitMetric> evaluate_split(const FidelityPools& pools, const LearningCurveConfig& config, int size_index,
                                        int split) {
  const int n_exp = config.sizes[static_cast<std::size_t>(size_index)];
  const int n_cheap = config.cheap_count(n_exp, static_cast<std::size_t>(pools.x_cheap.rows()));
  const Split s = make_split(pools, n_exp, n_cheap, config.seed, size_index, split);

  model::Dataset data(pools.x_exp.cols());
  std::vector<double> row(static_cast<std::size_t>(pools.x_exp.cols()));
  auto add = [&](const Matrix& x, const Vector& y, std::size_t i, model::Fidelity f) {
    for (nn::Index k = 0; k < x.cols(); ++k) row[static_cast<std::size_t>(k)] = x(static_cast<nn::Index>(i), k);
    data.add(row, y[static_cast<nn::Index>(i)], f);
  };
  for (auto i : s.cheap_train) add(pools.x_cheap, pools.y_cheap, i, model::Fidelity::Cheap);
  for (auto i : s.exp_train) add(pools.x_exp, pools.y_exp, i, model::Fidelity::Expensive);

  const Matrix xv = take_rows(pools.x_exp, s.validation);
  Vector yv(static_cast<nn::Index>(s.validation.size()));
  for (std::size_t i = 0; i < s.validation.size(); ++i) yv[static_cast<nn::Index>(i)] = pools.y_exp[static_cast<nn::Index>(s.validation[i])];

  const std::uint64_t model_seed =
      derive_seed(config.seed, {0x6d6f64656cull, static_cast<std::uint64_t>(size_index), static_cast<std::uint64_t>(split)});
  std::vector<SplitMetric> out;
  for (const auto& name : config.models) {
    Vector pred;
    if (name == "gemini") {
      model::DualFidelityModel m(data.dim(), config.hyper, model_seed);
      m.train(data, model_seed + 1);
      pred = means(m.predict_expensive(xv));
    } else {
      const auto variant = model::baseline_from_string(name);
      pred = means(model::baseline_train(variant, data, config.hyper, model_seed).predict(xv));
    }
    const auto fm = fit_metrics(yv, pred);
    out.push_back({n_exp, split, name, n_cheap, static_cast<int>(s.validation.size()), fm.rmsd, fm.r2, fm.pearson});
  }
  return out;
}

std::vector<SplitMetric> run_learning_curve(const FidelityPools& pools, const LearningCurveConfig& config, int threads) {
  config.validate();
  for (int s : config.sizes) {
    if (static_cast<nn::Index>(s) >= pools.x_exp.rows()) {
      throw ArgumentError("regress: training size " + std::to_string(s) + " leaves no validation rows");
    }
    const long wanted = config.cheap_ratio > 0 ? static_cast<long>(config.cheap_ratio) * s : config.n_cheap;
    if (wanted > pools.x_cheap.rows()) {
      spdlog::info("regress: {} cheap points requested for size {}; capped at the pool size {}", wanted, s,
                   pools.x_cheap.rows());
    }
  }
  const std::size_t n_jobs = config.sizes.size() * static_cast<std::size_t>(config.n_splits);
  std::vector<std::vector<SplitMetric>> results(n_jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t job = next++; job < n_jobs; job = next++) {
      const int size_index = static_cast<int>(job / static_cast<std::size_t>(config.n_splits));
      const int split = static_cast<int>(job % static_cast<std::size_t>(config.n_splits));
      try {
        results[job] = evaluate_split(pools, config, size_index, split);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(n_jobs)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<SplitMetric> out;
  for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
  return out;
}

void write_split_csv(const std::vector<SplitMetric>& metrics, std::ostream& os) {
  os << "size,split,model,n_cheap,n_validation,rmsd,r2,pearson\n";
  for (const auto& m : metrics) {
    os << m.size << ',' << m.split << ',' << m.model << ',' << m.n_cheap << ',' << m.n_validation << ','
       << num(m.rmsd) << ',' << num(m.r2) << ',' << num(m.pearson) << '\n';
  }
}

void write_curve_summary_csv(const std::vector<SplitMetric>& metrics, const LearningCurveConfig& config,
                             std::ostream& os) {
  os << "size,model,n_cheap,n_splits,rmsd_q1,rmsd_median,rmsd_q3,r2_q1,r2_median,r2_q3,pearson_q1,pearson_median,"
        "pearson_q3\n";
  for (int size : config.sizes) {
    for (const auto& name : config.models) {
      std::vector<double> rmsd;
      std::vector<double> r2;
      std::vector<double> pr;
      int n_cheap = 0;
      for (const auto& m : metrics) {
        if (m.size != size || m.model != name) continue;
        rmsd.push_back(m.rmsd);
        r2.push_back(m.r2);
        pr.push_back(m.pearson);
        n_cheap = m.n_cheap;
      }
      if (rmsd.empty()) continue;
      const auto a = campaign::summarize(rmsd);
      const auto b = campaign::summarize(r2);
      const auto c = campaign::summarize(pr);
      os << size << ',' << name << ',' << n_cheap << ',' << rmsd.size() << ',' << num(a.q1) << ',' << num(a.median)
         << ',' << num(a.q3) << ',' << num(b.q1) << ',' << num(b.median) << ',' << num(b.q3) << ',' << num(c.q1)
         << ',' << num(c.median) << ',' << num(c.q3) << '\n';
    }
  }
}

}  // namespace bifid::io
