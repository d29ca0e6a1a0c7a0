// SPDX-License-Identifier: Apache-2.0
//
// Pipeline commands behind the `mmblock` executable. Each command resolves
// a RunConfig, writes its artifacts into the output directory and finishes
// with a manifest.json describing what was produced.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "mmblock/campaign.hpp"
#include "mmblock/eval.hpp"
#include "mmblock/io.hpp"

namespace mmblock::cli {

struct RunConfig {
  channel::ScenarioConfig scenario;
  channel::CampaignConfig campaign;
  eval::SweepConfig sweep;
  std::filesystem::path out_dir = "out";

  std::uint64_t master_seed() const noexcept { return sweep.master_seed; }
  /// Scenario with its seed derived from the master seed.
  channel::ScenarioConfig seeded_scenario() const;
  io::json to_json() const;
  void validate() const;
};

/// Values that can be set from the command line; unset ones keep the file
/// (or default) value.
struct Overrides {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::pair<int, int>> horizons;
  std::optional<int> epochs;
  std::optional<int> runs;
};

RunConfig load_run_config(const Overrides& overrides);
RunConfig run_config_from_json(const io::json& j);

/// Parses "a..b" or a single integer "a".
std::pair<int, int> parse_horizon_range(const std::string& text);
data::Task parse_task(const std::string& text);

struct PrepareArgs {
  std::filesystem::path campaign;
  data::Task task = data::Task::classify;
  int horizon = 1;
};

struct TrainArgs {
  std::filesystem::path train;
  std::optional<std::filesystem::path> validation;
};

struct EvalArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path data;
};

// `log` receives human-readable progress; artifacts go to cfg.out_dir.
void cmd_simulate(const RunConfig& cfg, std::ostream& log);
void cmd_prepare(const RunConfig& cfg, const PrepareArgs& args, std::ostream& log);
void cmd_train(const RunConfig& cfg, const TrainArgs& args, std::ostream& log);
void cmd_eval(const RunConfig& cfg, const EvalArgs& args, std::ostream& log);
eval::SweepResult cmd_sweep(const RunConfig& cfg, std::ostream& log);

/// Process exit code for an exception escaping a command.
int exit_code_for(const std::exception& e) noexcept;

inline constexpr const char* kCampaignFile = "campaign.jsonl";
inline constexpr const char* kTrainFile = "train.jsonl";
inline constexpr const char* kValidationFile = "validation.jsonl";
inline constexpr const char* kStatsFile = "stats.json";
inline constexpr const char* kCheckpointFile = "checkpoint.json";
inline constexpr const char* kHistoryFile = "history.csv";
inline constexpr const char* kAccuracyCsv = "p1_accuracy.csv";
inline constexpr const char* kMaeCsv = "p2_mae.csv";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kManifestFile = "manifest.json";

}  // namespace mmblock::cli
