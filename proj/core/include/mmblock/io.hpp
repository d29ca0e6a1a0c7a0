// SPDX-License-Identifier: Apache-2.0
//
// File formats: JSON-lines campaigns and datasets, JSON checkpoints and
// manifests, CSV metric reports.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mmblock/campaign.hpp"
#include "mmblock/dataset.hpp"
#include "mmblock/eval.hpp"
#include "mmblock/gru.hpp"

namespace mmblock::io {

using json = nlohmann::json;

inline constexpr const char* kCheckpointFormat = "mmblock-gru-checkpoint/1";

// Configs. Parsing starts from defaults, so partial objects are accepted.
json to_json(const channel::ScenarioConfig& cfg);
channel::ScenarioConfig scenario_from_json(const json& j,
                                           const channel::ScenarioConfig& defaults = {});
json to_json(const channel::CampaignConfig& cfg);
channel::CampaignConfig campaign_from_json(const json& j,
                                           const channel::CampaignConfig& defaults = {});
json to_json(const nn::ModelConfig& cfg);
nn::ModelConfig model_from_json(const json& j, const nn::ModelConfig& defaults = {});
json to_json(const eval::SweepConfig& cfg);
eval::SweepConfig sweep_from_json(const json& j, const eval::SweepConfig& defaults = {});

// Raw sequence pairs, one JSON object per line.
json to_json(const channel::RawSequencePair& pair);
channel::RawSequencePair pair_from_json(const json& j);
void write_campaign(std::ostream& os, std::span<const channel::RawSequencePair> pairs);
std::vector<channel::RawSequencePair> read_campaign(std::istream& is);

// Datasets: one point per line plus a stats sidecar.
void write_dataset(std::ostream& os, const data::P1Dataset& ds);
void write_dataset(std::ostream& os, const data::P2Dataset& ds);
data::P1Dataset read_p1_dataset(std::istream& is);
data::P2Dataset read_p2_dataset(std::istream& is);
/// Detects the task of a dataset file from its first record.
data::Task detect_task(std::istream& is);
json stats_sidecar(const data::StandardizationStats& stats, int observation, int horizon,
                   std::uint64_t seed);

// Checkpoints.
json checkpoint_to_json(const nn::GruModel& model,
                        const std::optional<data::StandardizationStats>& stats,
                        const std::string& stats_ref = {});
nn::GruModel checkpoint_from_json(const json& j);
std::optional<data::StandardizationStats> checkpoint_stats(const json& j);

// Reports.
void write_csv(std::ostream& os, const eval::P1Report& report);
void write_csv(std::ostream& os, const eval::P2Report& report);
json to_json(const eval::P1Report& report);
json to_json(const eval::P2Report& report);
eval::P1Report p1_report_from_json(const json& j);
eval::P2Report p2_report_from_json(const json& j);
void write_history_csv(std::ostream& os, std::span<const double> train_loss,
                       std::span<const double> validation_metric);

// File helpers; throw mmblock::Error on I/O failure.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

/// Hex FNV-1a of the canonical (sorted-key, compact) dump.
std::string config_hash(const json& j);

}  // namespace mmblock::io
