// Command-line front end: gen-surfaces, regress, optimize and report.
//
// Exit codes: 0 success, 1 usage error, 2 invalid configuration,
// 3 runtime failure (I/O, numerical or evaluator errors).

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "bifid/errors.hpp"
#include "bifid/io/commands.hpp"

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kConfig = 2, kRuntime = 3 };

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "Base seed (overrides the config)");
  cmd->add_option("--out", flags.out, "Output directory (overrides the config)");
  cmd->add_option("--threads", flags.threads, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
}

bifid::io::RunConfig load_config(const CommonFlags& flags) {
  auto config = bifid::io::RunConfig::load(flags.config);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.out) config.out = *flags.out;
  if (flags.threads) config.threads = *flags.threads;
  return config;
}

void print_files(const bifid::io::CommandResult& result, const std::filesystem::path& out) {
  std::cout << "wrote " << result.files.size() << " files to " << out.string() << '\n';
  for (const auto& w : result.warnings) std::cout << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-fidelity regression and closed-loop optimization benchmarks"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  CommonFlags gen_flags, regress_flags, optimize_flags;
  auto* gen = app.add_subcommand("gen-surfaces", "Generate binned GP surface pairs");
  add_common(gen, gen_flags);
  auto* regress = app.add_subcommand("regress", "Learning curves for the dual-fidelity model and baselines");
  add_common(regress, regress_flags);
  auto* optimize = app.add_subcommand("optimize", "Closed-loop optimization campaigns over paired seeds");
  add_common(optimize, optimize_flags);
  std::string report_dir, report_out;
  auto* report = app.add_subcommand("report", "Summarize an optimize output directory");
  auto* dir_opt = report->add_option("dir", report_dir, "Directory written by optimize");
  report->add_option("--out", report_out, "Same as the positional directory")->excludes(dir_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (report->parsed()) {
    if (report_dir.empty()) report_dir = report_out;
    if (report_dir.empty()) {
      std::cerr << "report: give the directory as an argument or with --out\n";
      return kUsage;
    }
  }
  spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);
  spdlog::set_pattern("[%l] %v");

  try {
    if (gen->parsed()) {
      const auto config = load_config(gen_flags);
      print_files(bifid::io::cmd_gen_surfaces(config), config.out);
    } else if (regress->parsed()) {
      const auto config = load_config(regress_flags);
      print_files(bifid::io::cmd_regress(config), config.out);
    } else if (optimize->parsed()) {
      const auto config = load_config(optimize_flags);
      print_files(bifid::io::cmd_optimize(config), config.out);
    } else if (report->parsed()) {
      print_files(bifid::io::cmd_report(report_dir), report_dir);
    }
  } catch (const bifid::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
