// SPDX-License-Identifier: Apache-2.0
#include "mmblock/cli/commands.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "mmblock/errors.hpp"
#include "mmblock/seed.hpp"
#include "mmblock/train.hpp"

namespace mmblock::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json file_entry(const fs::path& path) {
  const std::string bytes = io::read_text(path);
  return {{"path", path.filename().string()}, {"bytes", bytes.size()},
          {"fnv1a64", hex64(fnv1a64(bytes))}};
}

json input_entry(const fs::path& path) {
  const std::string bytes = io::read_text(path);
  return {{"path", path.string()}, {"fnv1a64", hex64(fnv1a64(bytes))}};
}

// Manifests hold no timestamps or host details so reruns compare equal.
void write_manifest(const RunConfig& cfg, const std::string& command, const json& extra,
                    const std::vector<fs::path>& outputs, const std::vector<fs::path>& inputs = {}) {
  const json resolved = cfg.to_json();
  json m = {{"tool", "mmblock"},
            {"version", kToolVersion},
            {"command", command},
            {"master_seed", cfg.master_seed()},
            {"config", resolved},
            {"config_hash", io::config_hash(resolved)}};
  json in = json::array();
  for (const auto& p : inputs) in.push_back(input_entry(p));
  json out = json::array();
  for (const auto& p : outputs) out.push_back(file_entry(p));
  m["inputs"] = in;
  m["outputs"] = out;
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
  io::write_json(cfg.out_dir / kManifestFile, m);
}

void ensure_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw Error("cannot create output directory '" + dir.string() + "'");
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

template <class Writer>
void write_stream(const fs::path& path, Writer&& writer) {
  std::ostringstream ss;
  writer(ss);
  io::write_text(path, ss.str());
}

template <class Dataset>
void require_both_classes(const Dataset&) {}

void require_both_classes(const data::P1Dataset& ds) {
  bool zero = false, one = false;
  for (const auto& p : ds.points) (p.label ? one : zero) = true;
  if (!zero || !one) throw DataError("prepared dataset is missing a class");
}

template <class Dataset>
void write_prepared(const RunConfig& cfg, Dataset ds, std::uint64_t split_seed,
                    const PrepareArgs& args, std::ostream& log) {
  if (ds.points.empty()) throw DataError("no data points could be built from the campaign");
  require_both_classes(ds);
  auto [train, val] = data::split(ds, cfg.sweep.train_fraction, split_seed);
  data::standardize_splits(train, val);
  require_both_classes(train);
  require_both_classes(val);

  const fs::path train_path = cfg.out_dir / kTrainFile;
  const fs::path val_path = cfg.out_dir / kValidationFile;
  const fs::path stats_path = cfg.out_dir / kStatsFile;
  write_stream(train_path, [&](std::ostream& os) { io::write_dataset(os, train); });
  write_stream(val_path, [&](std::ostream& os) { io::write_dataset(os, val); });
  io::write_json(stats_path, io::stats_sidecar(*train.stats, ds.observation, ds.horizon, ds.seed));
  log << "prepared " << train.size() << " training and " << val.size()
      << " validation points (T_P=" << args.horizon << ")\n";
  write_manifest(cfg, "prepare",
                 {{"task", args.task == data::Task::classify ? "p1" : "p2"},
                  {"t_p", args.horizon},
                  {"train_points", train.size()},
                  {"validation_points", val.size()}},
                 {train_path, val_path, stats_path}, {args.campaign});
}

template <class Dataset>
Dataset read_dataset_file(const fs::path& path);

template <>
data::P1Dataset read_dataset_file(const fs::path& path) {
  auto in = open_input(path);
  return io::read_p1_dataset(in);
}

template <>
data::P2Dataset read_dataset_file(const fs::path& path) {
  auto in = open_input(path);
  return io::read_p2_dataset(in);
}

data::Task task_of_file(const fs::path& path) {
  auto in = open_input(path);
  return io::detect_task(in);
}

template <class Dataset>
void train_task(const RunConfig& cfg, const TrainArgs& args, std::uint64_t seed,
                std::ostream& log) {
  const auto train_set = read_dataset_file<Dataset>(args.train);
  if (train_set.points.empty()) throw DataError("training set '" + args.train.string() + "' is empty");
  std::optional<Dataset> val;
  if (args.validation) val = read_dataset_file<Dataset>(*args.validation);

  nn::ModelConfig mc = cfg.sweep.model;
  mc.seq_len = train_set.observation;
  mc.seed = seed;
  const int report_every = std::max(1, mc.epochs / 10);
  const auto result = nn::train(train_set, val ? &*val : nullptr, mc,
                                [&](int epoch, double loss, double metric) {
                                  if (epoch % report_every == 0 || epoch == mc.epochs) {
                                    log << "epoch " << epoch << " loss " << loss;
                                    if (val) log << " validation " << metric;
                                    log << '\n';
                                  }
                                });

  const fs::path ckpt = cfg.out_dir / kCheckpointFile;
  const fs::path hist = cfg.out_dir / kHistoryFile;
  io::write_json(ckpt, io::checkpoint_to_json(result.model, train_set.stats, kStatsFile));
  write_stream(hist, [&](std::ostream& os) {
    io::write_history_csv(os, result.history.train_loss, result.history.validation_metric);
  });
  std::vector<fs::path> inputs{args.train};
  if (args.validation) inputs.push_back(*args.validation);
  write_manifest(cfg, "train", {{"epochs", mc.epochs}, {"train_seed", seed}}, {ckpt, hist}, inputs);
}

void check_stats_agree(const std::optional<data::StandardizationStats>& model_stats,
                       const std::optional<data::StandardizationStats>& data_stats) {
  if (!model_stats || !data_stats) return;
  if (model_stats->mean != data_stats->mean || model_stats->stddev != data_stats->stddev)
    throw DataError("dataset was standardized with statistics that differ from the checkpoint's");
}

}  // namespace

channel::ScenarioConfig RunConfig::seeded_scenario() const {
  channel::ScenarioConfig s = scenario;
  s.seed = derive_seed(master_seed(), "simulate", {});
  return s;
}

json RunConfig::to_json() const {
  return {{"scenario", io::to_json(seeded_scenario())},
          {"campaign", io::to_json(campaign)},
          {"sweep", io::to_json(sweep)}};
}

void RunConfig::validate() const {
  seeded_scenario().validate();
  campaign.validate();
  sweep.validate();
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "scenario" && it.key() != "campaign" && it.key() != "sweep")
      throw ConfigError("unknown config section '" + it.key() + "'");
  }
  RunConfig cfg;
  if (j.contains("scenario")) cfg.scenario = io::scenario_from_json(j.at("scenario"));
  if (j.contains("campaign")) cfg.campaign = io::campaign_from_json(j.at("campaign"));
  if (j.contains("sweep")) cfg.sweep = io::sweep_from_json(j.at("sweep"));
  return cfg;
}

RunConfig load_run_config(const Overrides& o) {
  RunConfig cfg = o.config ? run_config_from_json(io::read_json(*o.config)) : RunConfig{};
  if (o.seed) cfg.sweep.master_seed = *o.seed;
  if (o.out) cfg.out_dir = *o.out;
  if (o.horizons) {
    cfg.sweep.horizon_min = o.horizons->first;
    cfg.sweep.horizon_max = o.horizons->second;
  }
  if (o.epochs) cfg.sweep.model.epochs = *o.epochs;
  if (o.runs) cfg.campaign.num_runs = *o.runs;
  cfg.validate();
  return cfg;
}

std::pair<int, int> parse_horizon_range(const std::string& text) {
  const auto parse_int = [&](std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
      throw ConfigError("bad T_P range '" + text + "' (expected N or A..B)");
    return v;
  };
  const auto dots = text.find("..");
  const std::string_view sv(text);
  const int a = parse_int(dots == std::string::npos ? sv : sv.substr(0, dots));
  const int b = dots == std::string::npos ? a : parse_int(sv.substr(dots + 2));
  if (a < 1 || b < a) throw ConfigError("bad T_P range '" + text + "': need 1 <= A <= B");
  return {a, b};
}

data::Task parse_task(const std::string& text) {
  if (text == "p1") return data::Task::classify;
  if (text == "p2") return data::Task::regress;
  throw ConfigError("unknown task '" + text + "' (expected p1 or p2)");
}

void cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  ensure_out_dir(cfg.out_dir);
  const auto pairs = channel::generate_campaign(cfg.seeded_scenario(), cfg.campaign);
  const fs::path path = cfg.out_dir / kCampaignFile;
  write_stream(path, [&](std::ostream& os) { io::write_campaign(os, pairs); });
  int crossings = 0;
  for (const auto& p : pairs) crossings += data::blockage_onset(p).has_value() ? 1 : 0;
  log << "simulated " << pairs.size() << " runs (" << crossings << " with a blockage) -> "
      << path.string() << '\n';
  write_manifest(cfg, "simulate", {{"runs", pairs.size()}}, {path});
}

void cmd_prepare(const RunConfig& cfg, const PrepareArgs& args, std::ostream& log) {
  if (args.horizon < 1) throw ConfigError("T_P must be >= 1");
  auto in = open_input(args.campaign);
  const auto raw = io::read_campaign(in);
  if (raw.empty()) throw DataError("campaign '" + args.campaign.string() + "' has no runs");
  ensure_out_dir(cfg.out_dir);
  const auto augmented = data::augment_campaign(raw, cfg.sweep.drop_rates);
  const auto seeds = eval::sweep_seeds(cfg.master_seed());
  if (args.task == data::Task::classify)
    write_prepared(cfg, data::build_p1_dataset(augmented, cfg.sweep.observation, args.horizon, seeds.dataset),
                   seeds.split, args, log);
  else
    write_prepared(cfg, data::build_p2_dataset(augmented, cfg.sweep.observation, args.horizon, seeds.dataset),
                   seeds.split, args, log);
}

void cmd_train(const RunConfig& cfg, const TrainArgs& args, std::ostream& log) {
  const data::Task task = task_of_file(args.train);
  if (args.validation && task_of_file(*args.validation) != task)
    throw DataError("training and validation files hold different tasks");
  ensure_out_dir(cfg.out_dir);
  const auto seeds = eval::sweep_seeds(cfg.master_seed());
  if (task == data::Task::classify)
    train_task<data::P1Dataset>(cfg, args, seeds.train_p1, log);
  else
    train_task<data::P2Dataset>(cfg, args, seeds.train_p2, log);
}

void cmd_eval(const RunConfig& cfg, const EvalArgs& args, std::ostream& log) {
  const json ckpt = io::read_json(args.checkpoint);
  const nn::GruModel model = io::checkpoint_from_json(ckpt);
  const data::Task task = task_of_file(args.data);
  if (task != model.config.task) throw DataError("checkpoint and dataset tasks differ");
  ensure_out_dir(cfg.out_dir);

  eval::RunMetadata meta;
  meta.master_seed = cfg.master_seed();
  meta.epochs = model.config.epochs;
  meta.observation = model.config.seq_len;
  meta.drop_rates = cfg.sweep.drop_rates;
  meta.train_fraction = cfg.sweep.train_fraction;
  meta.config = cfg.to_json().dump();

  const fs::path csv = cfg.out_dir / (task == data::Task::classify ? kAccuracyCsv : kMaeCsv);
  const fs::path report = cfg.out_dir / kReportFile;
  if (task == data::Task::classify) {
    const auto ds = read_dataset_file<data::P1Dataset>(args.data);
    check_stats_agree(io::checkpoint_stats(ckpt), ds.stats);
    eval::P1Report r{{eval::evaluate_p1(model, ds)}, meta};
    log << "T_P=" << r.rows[0].horizon << " accuracy " << r.rows[0].top1_accuracy << " on "
        << r.rows[0].num_samples << " points\n";
    write_stream(csv, [&](std::ostream& os) { io::write_csv(os, r); });
    io::write_json(report, io::to_json(r));
  } else {
    const auto ds = read_dataset_file<data::P2Dataset>(args.data);
    check_stats_agree(io::checkpoint_stats(ckpt), ds.stats);
    eval::P2Report r{{eval::evaluate_p2(model, ds)}, meta};
    log << "T_P=" << r.rows[0].horizon << " mae " << r.rows[0].mae << " std " << r.rows[0].stddev
        << " on " << r.rows[0].num_samples << " points\n";
    write_stream(csv, [&](std::ostream& os) { io::write_csv(os, r); });
    io::write_json(report, io::to_json(r));
  }
  write_manifest(cfg, "eval", json::object(), {csv, report}, {args.checkpoint, args.data});
}

eval::SweepResult cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  ensure_out_dir(cfg.out_dir);
  const auto pairs = channel::generate_campaign(cfg.seeded_scenario(), cfg.campaign);
  log << "campaign: " << pairs.size() << " runs; sweeping T_P " << cfg.sweep.horizon_min << ".."
      << cfg.sweep.horizon_max << " at " << cfg.sweep.model.epochs << " epochs\n";
  auto result = eval::sweep(pairs, cfg.sweep, [&](const std::string& msg) { log << msg << '\n'; });
  const std::string echo = cfg.to_json().dump();
  result.p1.metadata.config = echo;
  result.p2.metadata.config = echo;

  const fs::path acc = cfg.out_dir / kAccuracyCsv;
  const fs::path mae = cfg.out_dir / kMaeCsv;
  const fs::path report = cfg.out_dir / kReportFile;
  write_stream(acc, [&](std::ostream& os) { io::write_csv(os, result.p1); });
  write_stream(mae, [&](std::ostream& os) { io::write_csv(os, result.p2); });
  io::write_json(report, {{"p1", io::to_json(result.p1)}, {"p2", io::to_json(result.p2)}});
  write_manifest(cfg, "sweep",
                 {{"epochs", cfg.sweep.model.epochs},
                  {"t_p", {cfg.sweep.horizon_min, cfg.sweep.horizon_max}}},
                 {acc, mae, report});
  return result;
}

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DivergenceError*>(&e)) return 4;
  if (dynamic_cast<const Error*>(&e)) return 3;
  return 1;
}

}  // namespace mmblock::cli
