#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bifid/io/run_config.hpp"

namespace bifid::io {

/// Files written by a command (relative to its output directory) and any
/// non-fatal warnings it produced.
struct CommandResult {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
};

/// Writes `surfaces/e{i}_b{bin}.csv` (+ `.json` sidecars) for every generated
/// pair, plus `manifest.csv` (`file,expensive_index,bin,spearman`) and
/// `manifest.json` (config, pairs, warnings). Unreachable bins become
/// warnings and a partial manifest. Throws ConfigError without a
/// `gen_surfaces` section.
CommandResult cmd_gen_surfaces(const RunConfig& config);

/// Learning curves: `regress_splits.csv` (one row per size x split x model)
/// and `regress_summary.csv` (quartiles per size x model).
CommandResult cmd_regress(const RunConfig& config);

/// Runs every configured strategy for n_repeats paired seeds, writes
/// `runs/<label>/repeat_<i>.jsonl` and `manifest.json`, then the report.
CommandResult cmd_optimize(const RunConfig& config);

/// Aggregates an optimize output directory into `suite.csv`, `boxplot.csv`
/// (five-number summaries per strategy) and `runs.csv` (one row per run).
/// Throws IoError for an empty or unknown directory and when records are
/// missing (listing the absent seeds). Re-running yields identical files.
CommandResult cmd_report(const std::filesystem::path& dir);

}  // namespace bifid::io
