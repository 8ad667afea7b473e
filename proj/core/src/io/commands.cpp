#include "bifid/io/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "bifid/campaign/stats.hpp"
#include "bifid/errors.hpp"

namespace bifid::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  return os;
}

void write_json(const fs::path& path, const json& j) {
  auto os = open_out(path);
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

// Runs job(i) for i in [0, n) on `threads` workers; rethrows the first failure.
template <typename Job>
void parallel_for(int n, int threads, Job job) {
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min(threads, n));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

fs::path run_path(const std::string& label, int repeat) {
  return fs::path("runs") / label / ("repeat_" + std::to_string(repeat) + ".jsonl");
}

}  // namespace

CommandResult cmd_gen_surfaces(const RunConfig& config) {
  if (!config.gen_surfaces) throw ConfigError("config: gen-surfaces needs a gen_surfaces section");
  const auto& spec = config.gen_surfaces->pool;
  const fs::path out = config.out;
  make_dir(out / "surfaces");

  std::vector<std::vector<surface::BinnedPool::Entry>> cells(static_cast<std::size_t>(spec.n_expensive));
  std::vector<std::vector<std::string>> warnings(cells.size());
  parallel_for(spec.n_expensive, config.threads, [&](int i) {
    const auto k = static_cast<std::size_t>(i);
    cells[k] = surface::generate_bin_cells(spec, i, config.seed, &warnings[k]);
  });

  CommandResult result;
  json pairs = json::array();
  auto manifest = open_out(out / "manifest.csv");
  manifest << "file,expensive_index,bin,spearman\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (const auto& e : cells[i]) {
      const fs::path rel =
          fs::path("surfaces") / ("e" + std::to_string(e.expensive_index) + "_b" + std::to_string(e.bin) + ".csv");
      surface::write_surface_pair(e.pair, out / rel);
      result.files.push_back(rel);
      manifest << rel.generic_string() << ',' << e.expensive_index << ',' << e.bin << ',' << num(e.pair.spearman)
               << '\n';
      pairs.push_back({{"file", rel.generic_string()},
                       {"expensive_index", e.expensive_index},
                       {"bin", e.bin},
                       {"spearman", e.pair.spearman}});
    }
    for (auto& w : warnings[i]) {
      spdlog::warn("gen-surfaces: {}", w);
      result.warnings.push_back(std::move(w));
    }
  }
  if (!manifest) throw IoError("failed writing manifest.csv");
  write_json(out / "manifest.json", {{"seed", config.seed},
                                     {"gen_surfaces", config.gen_surfaces->to_json()},
                                     {"pairs", pairs},
                                     {"warnings", result.warnings}});
  result.files.insert(result.files.end(), {"manifest.csv", "manifest.json"});
  spdlog::info("gen-surfaces: wrote {} pairs ({} warnings) to {}", pairs.size(), result.warnings.size(),
               out.string());
  return result;
}

CommandResult cmd_regress(const RunConfig& config) {
  if (!config.regress) throw ConfigError("config: regress needs a regress section");
  LearningCurveConfig curve = config.regress->curve;
  curve.seed = config.seed;
  const FidelityPools pools = config.regress->source.load(config.seed);
  for (int s : curve.sizes) {
    if (s >= pools.x_exp.rows()) {
      throw ArgumentError("regress: training size " + std::to_string(s) + " leaves no validation rows (" +
                          std::to_string(pools.x_exp.rows()) + " expensive rows)");
    }
  }
  make_dir(config.out);
  const auto metrics = run_learning_curve(pools, curve, config.threads);

  auto splits = open_out(config.out / "regress_splits.csv");
  write_split_csv(metrics, splits);
  auto summary = open_out(config.out / "regress_summary.csv");
  write_curve_summary_csv(metrics, curve, summary);
  if (!splits || !summary) throw IoError("failed writing regression results");
  write_json(config.out / "regress_config.json", {{"seed", config.seed}, {"regress", config.regress->to_json()}});
  spdlog::info("regress: {} split results written to {}", metrics.size(), config.out.string());
  return {{"regress_splits.csv", "regress_summary.csv", "regress_config.json"}, {}};
}

CommandResult cmd_optimize(const RunConfig& config) {
  if (!config.optimize) throw ConfigError("config: optimize needs an optimize section");
  const auto& opt = *config.optimize;
  const double target = opt.resolve_target();
  const auto expensive = opt.expensive.build(campaign::Fidelity::Expensive);
  std::optional<campaign::Evaluator> cheap;
  if (opt.cheap) {
    cheap = opt.cheap->build(campaign::Fidelity::Cheap);
    if (cheap->dim() != expensive.dim()) throw ConfigError("optimize.cheap: dimension differs from optimize.expensive");
  }

  std::vector<campaign::CampaignConfig> configs = opt.strategies;
  json campaigns = json::array();
  for (auto& c : configs) {
    c.target = target;
    c.seed = config.seed;
    campaigns.push_back(c.to_json());
  }
  spdlog::info("optimize: target {} , {} strategies x {} repeats", target, configs.size(), opt.n_repeats);
  const auto suite =
      campaign::run_suite(configs, cheap ? &*cheap : nullptr, expensive, opt.n_repeats, config.threads);

  CommandResult result;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    make_dir(config.out / "runs" / configs[c].label());
    for (int i = 0; i < opt.n_repeats; ++i) {
      const fs::path rel = run_path(configs[c].label(), i);
      auto os = open_out(config.out / rel);
      suite.runs[c][static_cast<std::size_t>(i)].write_jsonl(os);
      if (!os) throw IoError("failed writing " + rel.string());
      result.files.push_back(rel);
    }
  }
  write_json(config.out / "manifest.json", {{"seed", config.seed},
                                            {"target", target},
                                            {"n_repeats", opt.n_repeats},
                                            {"campaigns", campaigns},
                                            {"optimize", opt.to_json()}});
  result.files.emplace_back("manifest.json");
  auto report = cmd_report(config.out);
  result.files.insert(result.files.end(), report.files.begin(), report.files.end());
  return result;
}

CommandResult cmd_report(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("report: " + dir.string() + " is not a directory");
  if (fs::is_empty(dir)) throw IoError("report: " + dir.string() + " is empty");
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw IoError("report: no campaign manifest.json in " + dir.string());
  const json manifest = read_json(manifest_path);

  campaign::SuiteResult suite;
  std::uint64_t seed = 0;
  int n_repeats = 0;
  try {
    seed = manifest.at("seed").get<std::uint64_t>();
    n_repeats = manifest.at("n_repeats").get<int>();
    for (const auto& c : manifest.at("campaigns")) suite.configs.push_back(campaign::CampaignConfig::from_json(c));
  } catch (const json::exception& e) {
    throw IoError("report: malformed manifest.json: " + std::string(e.what()));
  } catch (const ConfigError& e) {
    throw IoError("report: malformed manifest.json: " + std::string(e.what()));
  }
  if (suite.configs.empty() || n_repeats < 1) throw IoError("report: manifest.json lists no campaigns");

  std::vector<std::string> missing;
  for (const auto& c : suite.configs) {
    auto& runs = suite.runs.emplace_back();
    for (int i = 0; i < n_repeats; ++i) {
      const fs::path path = dir / run_path(c.label(), i);
      std::ifstream is(path);
      if (!is) {
        missing.push_back(c.label() + " repeat " + std::to_string(i) + " (seed " +
                          std::to_string(campaign::repeat_seed(seed, i)) + ")");
        continue;
      }
      try {
        runs.push_back(campaign::CampaignRecord::read_jsonl(is));
      } catch (const std::exception& e) {
        throw IoError("report: " + path.string() + ": " + e.what());
      }
    }
  }
  if (!missing.empty()) {
    std::string msg = "report: missing campaign records:";
    for (const auto& m : missing) msg += "\n  " + m;
    throw IoError(msg);
  }

  const auto rows = suite.rows();
  auto suite_csv = open_out(dir / "suite.csv");
  campaign::write_suite_csv(rows, suite_csv);

  auto box = open_out(dir / "boxplot.csv");
  box << "label,n,censored,min,q1,median,q3,max\n";
  auto runs_csv = open_out(dir / "runs.csv");
  runs_csv << "label,repeat,seed,status,expensive_evals,cheap_evals,best\n";
  std::vector<std::vector<double>> evals(suite.configs.size());
  for (std::size_t c = 0; c < suite.configs.size(); ++c) {
    const auto label = suite.configs[c].label();
    for (const auto& run : suite.runs[c]) {
      evals[c].push_back(run.evals_to_target());
      runs_csv << label << ',' << run.repeat << ',' << run.seed << ',' << campaign::to_string(run.status) << ','
               << run.expensive_evals() << ',' << run.cheap_evals() << ',' << num(run.best()) << '\n';
    }
    const auto s = campaign::summarize(evals[c]);
    box << label << ',' << evals[c].size() << ',' << rows[c].censored << ',' << num(s.min) << ',' << num(s.q1) << ','
        << num(s.median) << ',' << num(s.q3) << ',' << num(s.max) << '\n';
  }

  auto pairwise = open_out(dir / "pairwise.csv");
  pairwise << "a,b,median_a,median_b,p_value\n";
  for (std::size_t a = 0; a < evals.size(); ++a) {
    for (std::size_t b = a + 1; b < evals.size(); ++b) {
      const auto w = campaign::wilcoxon_signed_rank(evals[a], evals[b]);
      pairwise << suite.configs[a].label() << ',' << suite.configs[b].label() << ','
               << num(campaign::quantile(evals[a], 0.5)) << ',' << num(campaign::quantile(evals[b], 0.5)) << ','
               << num(w.p_value) << '\n';
    }
  }
  if (!suite_csv || !box || !runs_csv || !pairwise) throw IoError("report: failed writing summaries");
  spdlog::info("report: {} strategies summarized in {}", rows.size(), dir.string());
  return {{"suite.csv", "boxplot.csv", "runs.csv", "pairwise.csv"}, {}};
}

}  // namespace bifid::io
