#include "bifid/campaign/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <istream>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>

#include <spdlog/spdlog.h>

#include "bifid/errors.hpp"
#include "bifid/model/dual_fidelity_model.hpp"
#include "bifid/random.hpp"

namespace bifid::campaign {

namespace {

const std::vector<std::string> kConfigKeys = {"strategy", "r",     "target", "max_expensive", "seed",
                                              "planner",  "model", "rho_folds", "model_steps"};

// Stream labels for the independent random streams of one campaign.
enum StreamLabel : std::uint64_t { kPlannerStream = 1, kCheapStream = 2, kRandomStream = 3, kModelStream = 4 };

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows, Index dim) {
  Matrix m(static_cast<Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Index k = 0; k < dim; ++k) m(static_cast<Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
  }
  return m;
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Random:
      return "random";
    case Strategy::BoOnly:
      return "bo_only";
    case Strategy::BoGemini:
      return "bo_gemini";
  }
  return "bo_only";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "random") return Strategy::Random;
  if (s == "bo_only") return Strategy::BoOnly;
  if (s == "bo_gemini") return Strategy::BoGemini;
  throw ConfigError("strategy: unknown value '" + s + "' (expected random, bo_only or bo_gemini)");
}

std::string to_string(CampaignStatus s) {
  switch (s) {
    case CampaignStatus::Running:
      return "running";
    case CampaignStatus::TargetReached:
      return "target_reached";
    case CampaignStatus::BudgetExhausted:
      return "budget_exhausted";
    case CampaignStatus::Error:
      return "error";
  }
  return "running";
}

CampaignStatus status_from_string(const std::string& s) {
  if (s == "running") return CampaignStatus::Running;
  if (s == "target_reached") return CampaignStatus::TargetReached;
  if (s == "budget_exhausted") return CampaignStatus::BudgetExhausted;
  if (s == "error") return CampaignStatus::Error;
  throw ArgumentError("unknown campaign status '" + s + "'");
}

model::ModelHyperparams campaign_model_defaults() {
  model::ModelHyperparams h;
  h.max_epochs = 300;
  h.patience = 50;
  return h;
}

std::string CampaignConfig::label() const {
  return strategy == Strategy::BoGemini ? "bo_gemini_r" + std::to_string(r) : to_string(strategy);
}

void CampaignConfig::validate() const {
  if (r < 0) throw ConfigError("r must be >= 0");
  if (!std::isfinite(target)) throw ConfigError("target must be finite");
  if (max_expensive < 1) throw ConfigError("max_expensive must be >= 1");
  if (rho_folds < 2) throw ConfigError("rho_folds must be >= 2");
  if (model_steps < 0) throw ConfigError("model_steps must be >= 0");
  planner.validate();
  model.validate();
}

nlohmann::json CampaignConfig::to_json() const {
  return {{"strategy", to_string(strategy)}, {"r", r},       {"target", target},
          {"max_expensive", max_expensive},  {"seed", seed}, {"planner", planner.to_json()},
          {"model", model.to_json()},        {"rho_folds", rho_folds}, {"model_steps", model_steps}};
}

CampaignConfig CampaignConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("campaign config must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end()) {
      throw ConfigError("campaign: unknown key '" + key + "'");
    }
  }
  CampaignConfig c;
  try {
    if (j.contains("strategy")) c.strategy = strategy_from_string(j.at("strategy").get<std::string>());
    c.r = j.value("r", c.r);
    c.target = j.value("target", c.target);
    c.max_expensive = j.value("max_expensive", c.max_expensive);
    c.seed = j.value("seed", c.seed);
    c.rho_folds = j.value("rho_folds", c.rho_folds);
    c.model_steps = j.value("model_steps", c.model_steps);
    if (j.contains("planner")) c.planner = planner::PlannerConfig::from_json(j.at("planner"));
    if (j.contains("model")) {
      // Overrides apply on top of the campaign defaults.
      auto merged = campaign_model_defaults().to_json();
      if (!j.at("model").is_object()) throw ConfigError("campaign.model must be an object");
      for (const auto& [key, value] : j.at("model").items()) {
        if (!merged.contains(key)) throw ConfigError("campaign.model: unknown key '" + key + "'");
        merged[key] = value;
      }
      c.model = model::ModelHyperparams::from_json(merged);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("campaign: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json IterationRecord::to_json() const {
  nlohmann::json cheap_json = nlohmann::json::array();
  for (const auto& c : cheap) cheap_json.push_back({{"x", c.x}, {"y", c.y}});
  return {{"iteration", iteration},
          {"lambda", lambda},
          {"x", x},
          {"transformed_x", transformed_x},
          {"y", y},
          {"cheap", cheap_json},
          {"rho", optional_json(rho)},
          {"best_so_far", best_so_far},
          {"cumulative_cost", cumulative_cost},
          {"expensive_evals", expensive_evals},
          {"cheap_evals", cheap_evals},
          {"status", to_string(status)}};
}

IterationRecord IterationRecord::from_json(const nlohmann::json& j) {
  IterationRecord r;
  r.iteration = j.at("iteration").get<int>();
  r.lambda = j.at("lambda").get<double>();
  r.x = j.at("x").get<std::vector<double>>();
  r.transformed_x = j.at("transformed_x").get<std::vector<double>>();
  r.y = j.at("y").get<double>();
  for (const auto& c : j.at("cheap")) r.cheap.push_back({c.at("x").get<std::vector<double>>(), c.at("y").get<double>()});
  if (!j.at("rho").is_null()) r.rho = j.at("rho").get<double>();
  r.best_so_far = j.at("best_so_far").get<double>();
  r.cumulative_cost = j.at("cumulative_cost").get<double>();
  r.expensive_evals = j.at("expensive_evals").get<int>();
  r.cheap_evals = j.at("cheap_evals").get<int>();
  r.status = status_from_string(j.at("status").get<std::string>());
  return r;
}

int CampaignRecord::expensive_evals() const { return iterations.empty() ? 0 : iterations.back().expensive_evals; }
int CampaignRecord::cheap_evals() const { return iterations.empty() ? 0 : iterations.back().cheap_evals; }
double CampaignRecord::best() const {
  return iterations.empty() ? std::numeric_limits<double>::infinity() : iterations.back().best_so_far;
}

void CampaignRecord::write_jsonl(std::ostream& os) const {
  for (std::size_t i = 0; i < iterations.size(); ++i) {
    auto j = iterations[i].to_json();
    j["label"] = label;
    j["strategy"] = to_string(strategy);
    j["r"] = r;
    j["target"] = target;
    j["repeat"] = repeat;
    j["seed"] = seed;
    if (i + 1 == iterations.size()) {
      j["status"] = to_string(status);
      if (!error.empty()) j["error"] = error;
    }
    os << j.dump() << '\n';
  }
  if (iterations.empty()) {
    // A run that failed before its first measurement still leaves a line.
    nlohmann::json j = {{"label", label},   {"strategy", to_string(strategy)}, {"r", r},
                        {"target", target}, {"repeat", repeat},                {"seed", seed},
                        {"status", to_string(status)}, {"error", error}};
    os << j.dump() << '\n';
  }
}

CampaignRecord CampaignRecord::read_jsonl(std::istream& is) {
  CampaignRecord rec;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    if (first) {
      rec.label = j.at("label").get<std::string>();
      rec.strategy = strategy_from_string(j.at("strategy").get<std::string>());
      rec.r = j.at("r").get<int>();
      rec.target = j.at("target").get<double>();
      rec.repeat = j.at("repeat").get<int>();
      rec.seed = j.at("seed").get<std::uint64_t>();
      first = false;
    }
    rec.status = status_from_string(j.at("status").get<std::string>());
    rec.error = j.value("error", std::string{});
    if (j.contains("iteration")) rec.iterations.push_back(IterationRecord::from_json(j));
  }
  if (first) throw IoError("campaign record is empty");
  return rec;
}

model::ModelHyperparams budgeted_hyper(const CampaignConfig& config, const model::Dataset& data) {
  model::ModelHyperparams h = config.model;
  if (config.model_steps == 0) return h;
  const auto rows = std::max(data.size(model::Fidelity::Cheap), data.size(model::Fidelity::Expensive));
  const auto batch = static_cast<std::size_t>(h.batch_size);
  const auto steps_per_epoch = std::max<std::size_t>(1, (rows + batch - 1) / batch);
  const auto steps = static_cast<std::size_t>(config.model_steps);
  h.max_epochs = static_cast<int>(std::max<std::size_t>(1, (steps + steps_per_epoch - 1) / steps_per_epoch));
  h.patience = std::min(h.patience, h.max_epochs);
  h.warmup_epochs = std::min(h.warmup_epochs, h.max_epochs);
  return h;
}

std::uint64_t repeat_seed(std::uint64_t base_seed, int repeat) {
  return derive_seed(base_seed, {static_cast<std::uint64_t>(repeat)});
}

CampaignRecord run_campaign(const CampaignConfig& config, Evaluator* cheap, Evaluator& expensive, int repeat) {
  config.validate();
  const bool gemini = config.strategy == Strategy::BoGemini;
  if (gemini && !cheap) throw ArgumentError("bo_gemini requires a cheap evaluator");
  if (cheap && cheap->dim() != expensive.dim()) throw ArgumentError("evaluators disagree on the dimension");
  const Index dim = expensive.dim();
  const int n_cheap = gemini ? config.r : 0;

  CampaignRecord rec;
  rec.label = config.label();
  rec.strategy = config.strategy;
  rec.r = config.r;
  rec.target = config.target;
  rec.repeat = repeat;
  rec.seed = config.seed;

  planner::PlannerConfig pc = config.planner;
  pc.seed = derive_seed(config.seed, {kPlannerStream});
  planner::Planner planner(dim, pc);
  auto cheap_rng = stream_rng(config.seed, {kCheapStream});
  auto random_rng = stream_rng(config.seed, {kRandomStream});
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::vector<double>> exp_x;
  std::vector<double> exp_y;
  model::Dataset data(dim);
  std::optional<double> rho;
  double best = std::numeric_limits<double>::infinity();
  double cost = 0.0;
  int n_exp = 0;
  int n_cheap_total = 0;

  for (int it = 0; n_exp < config.max_expensive; ++it) {
    IterationRecord ir;
    ir.iteration = it;
    try {
      if (config.strategy == Strategy::Random) {
        ir.x.resize(static_cast<std::size_t>(dim));
        for (auto& v : ir.x) v = unit(random_rng);
        ir.lambda = 0.0;
      } else {
        auto prop = planner.propose(1).front();
        ir.x = prop.x;
        ir.lambda = prop.lambda;
      }
      ir.transformed_x = pc.simplex_dim >= 2 ? planner::SimplexTransform(pc.simplex_dim).to_simplex(ir.x) : ir.x;

      for (int c = 0; c < n_cheap; ++c) {
        CheapSample s;
        s.x.resize(static_cast<std::size_t>(dim));
        for (auto& v : s.x) v = unit(cheap_rng);
        s.y = (*cheap)(s.x);
        cost += cheap->cost_per_eval();
        ++n_cheap_total;
        data.add(s.x, s.y, model::Fidelity::Cheap);
        ir.cheap.push_back(std::move(s));
      }

      ir.y = expensive(ir.x);
      cost += expensive.cost_per_eval();
      ++n_exp;
    } catch (const std::exception& e) {
      spdlog::error("campaign {} repeat {}: evaluator failure: {}", rec.label, repeat, e.what());
      rec.status = CampaignStatus::Error;
      rec.error = e.what();
      return rec;
    }
    exp_x.push_back(ir.x);
    exp_y.push_back(ir.y);
    data.add(ir.x, ir.y, model::Fidelity::Expensive);
    best = std::min(best, ir.y);

    const bool reached = ir.y <= config.target;
    const bool last = reached || n_exp >= config.max_expensive;
    if (!last && config.strategy != Strategy::Random) {
      const Matrix ox = rows_to_matrix(exp_x, dim);
      const Vector oy = Eigen::Map<const Vector>(exp_y.data(), static_cast<Index>(exp_y.size()));
      planner.set_observations(ox, oy);
      if (gemini && n_exp >= 2) {
        const std::uint64_t model_seed = derive_seed(config.seed, {kModelStream, static_cast<std::uint64_t>(it)});
        try {
          const auto hyper = budgeted_hyper(config, data);
          auto trained = std::make_shared<model::DualFidelityModel>(dim, hyper, model_seed);
          trained->train(data, model_seed + 1);
          rho = planner::update_rho(data, model::model_fold_predictor(hyper, model_seed + 2),
                                    config.rho_folds, model_seed + 3);
          planner.set_gemini(rho, [trained](const Matrix& x) {
            const auto preds = trained->predict_expensive(x);
            Vector g(static_cast<Index>(preds.size()));
            for (std::size_t i = 0; i < preds.size(); ++i) g[static_cast<Index>(i)] = preds[i].mean;
            return g;
          });
        } catch (const DivergenceError& e) {
          spdlog::warn("campaign {} repeat {}: model training diverged at epoch {}; using the base acquisition",
                       rec.label, repeat, e.epoch());
          rho.reset();
          planner.clear_gemini();
        }
      }
    }
    ir.rho = rho;
    ir.best_so_far = best;
    ir.cumulative_cost = cost;
    ir.expensive_evals = n_exp;
    ir.cheap_evals = n_cheap_total;
    ir.status = reached ? CampaignStatus::TargetReached
                        : (last ? CampaignStatus::BudgetExhausted : CampaignStatus::Running);
    rec.iterations.push_back(std::move(ir));
    if (last) break;
  }
  rec.status = rec.iterations.back().status;
  return rec;
}

std::vector<SuiteRow> SuiteResult::rows() const {
  std::vector<SuiteRow> out;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    SuiteRow row;
    row.strategy = to_string(configs[c].strategy);
    row.r = configs[c].strategy == Strategy::BoGemini ? configs[c].r : 0;
    row.target = configs[c].target;
    std::vector<double> evals;
    for (const auto& rec : runs[c]) {
      evals.push_back(rec.evals_to_target());
      if (rec.status != CampaignStatus::TargetReached) ++row.censored;
    }
    row.summary = summarize(evals);
    if (c > 0) {
      if (runs[c].size() != runs[c - 1].size()) throw ArgumentError("suite: repeat counts differ between paired rows");
      std::vector<double> prev;
      for (const auto& rec : runs[c - 1]) prev.push_back(rec.evals_to_target());
      row.p_vs_previous = wilcoxon_signed_rank(evals, prev).p_value;
    }
    out.push_back(row);
  }
  return out;
}

void write_suite_csv(const std::vector<SuiteRow>& rows, std::ostream& os) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  os << "strategy,r,target,mean,sem,q1,median,q3,p_vs_previous\n";
  for (const auto& r : rows) {
    os << r.strategy << ',' << r.r << ',' << num(r.target) << ',' << num(r.summary.mean) << ','
       << num(r.summary.sem) << ',' << num(r.summary.q1) << ',' << num(r.summary.median) << ','
       << num(r.summary.q3) << ',' << (r.p_vs_previous ? num(*r.p_vs_previous) : "") << '\n';
  }
}

SuiteResult run_suite(const std::vector<CampaignConfig>& configs, const Evaluator* cheap,
                      const Evaluator& expensive, int n_repeats, int threads) {
  if (n_repeats < 2) throw ArgumentError("run_suite: n_repeats must be >= 2");
  if (configs.empty()) throw ArgumentError("run_suite: no configurations");
  for (const auto& c : configs) c.validate();
  SuiteResult result;
  result.configs = configs;
  result.runs.assign(configs.size(), std::vector<CampaignRecord>(static_cast<std::size_t>(n_repeats)));

  const std::size_t jobs = configs.size() * static_cast<std::size_t>(n_repeats);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const std::size_t c = job / static_cast<std::size_t>(n_repeats);
      const int rep = static_cast<int>(job % static_cast<std::size_t>(n_repeats));
      try {
        CampaignConfig cfg = configs[c];
        cfg.seed = repeat_seed(configs[c].seed, rep);
        std::optional<Evaluator> ch;
        if (cheap) ch.emplace(*cheap);
        Evaluator ex = expensive;
        result.runs[c][static_cast<std::size_t>(rep)] = run_campaign(cfg, ch ? &*ch : nullptr, ex, rep);
        spdlog::debug("suite: {} repeat {} done ({} expensive evals)", cfg.label(), rep,
                      result.runs[c][static_cast<std::size_t>(rep)].expensive_evals());
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(jobs)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

}  // namespace bifid::campaign
