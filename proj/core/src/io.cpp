// SPDX-License-Identifier: Apache-2.0
#include "mmblock/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mmblock/errors.hpp"
#include "mmblock/seed.hpp"

namespace mmblock::io {

namespace {

template <class T>
T get_or(const json& j, const char* key, const T& fallback) {
  if (!j.is_object()) return fallback;
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

json vec2(channel::Vec2 v) { return json::array({v.x, v.y}); }
channel::Vec2 vec2_from(const json& j, const char* key, channel::Vec2 fallback) {
  if (!j.contains(key)) return fallback;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 2) throw ConfigError(std::string("'") + key + "' must be [x, y]");
  return {a[0].get<double>(), a[1].get<double>()};
}

std::string task_name(data::Task t) { return t == data::Task::classify ? "p1" : "p2"; }
data::Task task_from(const std::string& s) {
  if (s == "p1" || s == "classify") return data::Task::classify;
  if (s == "p2" || s == "regress") return data::Task::regress;
  throw ConfigError("unknown task '" + s + "' (expected p1 or p2)");
}

std::string split_name(data::Split s) {
  switch (s) {
    case data::Split::train: return "train";
    case data::Split::validation: return "validation";
    default: return "all";
  }
}
data::Split split_from(const std::string& s) {
  if (s == "train") return data::Split::train;
  if (s == "validation") return data::Split::validation;
  return data::Split::all;
}

json origin_fields(const data::WindowOrigin& o) {
  return {{"run", o.run_id}, {"rate", o.drop_rate}, {"t", o.end_index}};
}

data::ObservationWindow window_from(const json& j) {
  data::ObservationWindow w;
  w.values = j.at("window").get<std::vector<double>>();
  w.origin.run_id = get_or(j, "run", 0);
  w.origin.drop_rate = get_or(j, "rate", 1);
  w.origin.end_index = get_or(j, "t", 0);
  return w;
}

// Dataset files open with a header line carrying split-level fields.
json dataset_header(data::Task task, data::Split split, int observation, int horizon,
                    std::uint64_t seed, const std::optional<data::StandardizationStats>& stats) {
  json h = {{"header", true}, {"task", task_name(task)}, {"split", split_name(split)},
            {"T_o", observation}, {"T_P", horizon}, {"seed", seed}};
  if (stats) h["stats"] = {{"mu", stats->mean}, {"sigma", stats->stddev}};
  return h;
}

template <class D>
void apply_header(const json& h, D& ds) {
  ds.split = split_from(get_or<std::string>(h, "split", "all"));
  ds.observation = get_or(h, "T_o", data::kDefaultObservation);
  ds.horizon = get_or(h, "T_P", 1);
  ds.seed = get_or<std::uint64_t>(h, "seed", 0);
  if (h.contains("stats"))
    ds.stats = data::StandardizationStats{h["stats"].at("mu").get<double>(),
                                          h["stats"].at("sigma").get<double>()};
}

std::vector<json> read_lines(std::istream& is) {
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat(m.data(), m.data() + m.size());
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

Eigen::MatrixXd matrix_from(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto flat = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
    throw DataError("checkpoint: matrix data size mismatch");
  return Eigen::Map<const Eigen::MatrixXd>(flat.data(), rows, cols);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

json metadata_json(const eval::RunMetadata& m) {
  return {{"master_seed", m.master_seed}, {"epochs", m.epochs},           {"observation", m.observation},
          {"drop_rates", m.drop_rates},   {"train_fraction", m.train_fraction},
          {"num_raw_pairs", m.num_raw_pairs}, {"config", m.config}};
}

eval::RunMetadata metadata_from(const json& j) {
  eval::RunMetadata m;
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.epochs = j.at("epochs").get<int>();
  m.observation = j.at("observation").get<int>();
  m.drop_rates = j.at("drop_rates").get<std::vector<int>>();
  m.train_fraction = j.at("train_fraction").get<double>();
  m.num_raw_pairs = j.at("num_raw_pairs").get<int>();
  m.config = j.at("config").get<std::string>();
  return m;
}

}  // namespace

json to_json(const channel::ScenarioConfig& c) {
  return {
      {"ula",
       {{"num_elements", c.ula.num_elements},
        {"wavelength", c.ula.wavelength},
        {"element_spacing", c.ula.element_spacing},
        {"codebook_size", c.ula.codebook_size}}},
      {"ofdm",
       {{"num_subcarriers", c.ofdm.num_subcarriers},
        {"cyclic_prefix_len", c.ofdm.cyclic_prefix_len},
        {"sampling_time", c.ofdm.sampling_time},
        {"carrier_freq", c.ofdm.carrier_freq},
        {"bandwidth", c.ofdm.bandwidth},
        {"tx_power_dbm", c.ofdm.tx_power_dbm},
        {"noise_figure_db", c.ofdm.noise_figure_db},
        {"noise_variance", c.ofdm.noise_variance},
        {"symbol", json::array({c.ofdm.symbol.real(), c.ofdm.symbol.imag()})},
        {"rolloff", c.ofdm.rolloff},
        {"pulse_half_taps", c.ofdm.pulse_half_taps}}},
      {"trajectory",
       {{"start", vec2(c.trajectory.start)},
        {"end", vec2(c.trajectory.end)},
        {"speed", c.trajectory.speed},
        {"blocker_radius", c.trajectory.blocker_radius},
        {"blocker_height", c.trajectory.blocker_height},
        {"testbed_rotation", c.trajectory.testbed_rotation}}},
      {"room",
       {{"enabled", c.room.enabled},
        {"center", vec2(c.room.center)},
        {"size_x", c.room.size_x},
        {"size_y", c.room.size_y},
        {"wall_reflectivity", c.room.wall_reflectivity}}},
      {"tx_pos", vec2(c.tx_pos)},
      {"rx_pos", vec2(c.rx_pos)},
      {"sample_rate", c.sample_rate},
      {"duration", c.duration},
      {"subcarrier", c.subcarrier},
      {"scatter_coefficient", c.scatter_coefficient},
      {"timing_advance_taps", c.timing_advance_taps},
      {"front_to_back_db", c.front_to_back_db},
      {"seed", c.seed},
  };
}

channel::ScenarioConfig scenario_from_json(const json& j, const channel::ScenarioConfig& d) {
  channel::ScenarioConfig c = d;
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  const json ula = j.value("ula", json::object());
  c.ula.num_elements = get_or(ula, "num_elements", d.ula.num_elements);
  c.ula.wavelength = get_or(ula, "wavelength", d.ula.wavelength);
  c.ula.element_spacing = get_or(ula, "element_spacing", d.ula.element_spacing);
  c.ula.codebook_size = get_or(ula, "codebook_size", d.ula.codebook_size);

  const json ofdm = j.value("ofdm", json::object());
  c.ofdm.num_subcarriers = get_or(ofdm, "num_subcarriers", d.ofdm.num_subcarriers);
  c.ofdm.cyclic_prefix_len = get_or(ofdm, "cyclic_prefix_len", d.ofdm.cyclic_prefix_len);
  c.ofdm.sampling_time = get_or(ofdm, "sampling_time", d.ofdm.sampling_time);
  c.ofdm.carrier_freq = get_or(ofdm, "carrier_freq", d.ofdm.carrier_freq);
  c.ofdm.bandwidth = get_or(ofdm, "bandwidth", d.ofdm.bandwidth);
  c.ofdm.tx_power_dbm = get_or(ofdm, "tx_power_dbm", d.ofdm.tx_power_dbm);
  c.ofdm.noise_figure_db = get_or(ofdm, "noise_figure_db", d.ofdm.noise_figure_db);
  // Without an explicit variance, follow bandwidth and noise figure.
  c.ofdm.noise_variance =
      ofdm.contains("noise_variance")
          ? ofdm.at("noise_variance").get<double>()
          : (ofdm.contains("bandwidth") || ofdm.contains("noise_figure_db")
                 ? channel::thermal_noise_variance(c.ofdm.bandwidth, c.ofdm.noise_figure_db)
                 : d.ofdm.noise_variance);
  if (ofdm.contains("symbol")) {
    const auto s = ofdm.at("symbol").get<std::vector<double>>();
    if (s.size() != 2) throw ConfigError("ofdm.symbol must be [re, im]");
    c.ofdm.symbol = {s[0], s[1]};
  }
  c.ofdm.rolloff = get_or(ofdm, "rolloff", d.ofdm.rolloff);
  c.ofdm.pulse_half_taps = get_or(ofdm, "pulse_half_taps", d.ofdm.pulse_half_taps);

  const json tr = j.value("trajectory", json::object());
  c.trajectory.start = vec2_from(tr, "start", d.trajectory.start);
  c.trajectory.end = vec2_from(tr, "end", d.trajectory.end);
  c.trajectory.speed = get_or(tr, "speed", d.trajectory.speed);
  c.trajectory.blocker_radius = get_or(tr, "blocker_radius", d.trajectory.blocker_radius);
  c.trajectory.blocker_height = get_or(tr, "blocker_height", d.trajectory.blocker_height);
  c.trajectory.testbed_rotation = get_or(tr, "testbed_rotation", d.trajectory.testbed_rotation);

  const json room = j.value("room", json::object());
  c.room.enabled = get_or(room, "enabled", d.room.enabled);
  c.room.center = vec2_from(room, "center", d.room.center);
  c.room.size_x = get_or(room, "size_x", d.room.size_x);
  c.room.size_y = get_or(room, "size_y", d.room.size_y);
  c.room.wall_reflectivity = get_or(room, "wall_reflectivity", d.room.wall_reflectivity);

  c.tx_pos = vec2_from(j, "tx_pos", d.tx_pos);
  c.rx_pos = vec2_from(j, "rx_pos", d.rx_pos);
  c.sample_rate = get_or(j, "sample_rate", d.sample_rate);
  c.duration = get_or(j, "duration", d.duration);
  c.subcarrier = get_or(j, "subcarrier", d.subcarrier);
  c.scatter_coefficient = get_or(j, "scatter_coefficient", d.scatter_coefficient);
  c.timing_advance_taps = get_or(j, "timing_advance_taps", d.timing_advance_taps);
  c.front_to_back_db = get_or(j, "front_to_back_db", d.front_to_back_db);
  c.seed = get_or(j, "seed", d.seed);
  return c;
}

json to_json(const channel::CampaignConfig& c) {
  return {{"num_runs", c.num_runs},
          {"rotation_step", c.rotation_step},
          {"num_lanes", c.num_lanes},
          {"lane_spacing", c.lane_spacing}};
}

channel::CampaignConfig campaign_from_json(const json& j, const channel::CampaignConfig& d) {
  channel::CampaignConfig c = d;
  c.num_runs = get_or(j, "num_runs", d.num_runs);
  c.rotation_step = get_or(j, "rotation_step", d.rotation_step);
  c.num_lanes = get_or(j, "num_lanes", d.num_lanes);
  c.lane_spacing = get_or(j, "lane_spacing", d.lane_spacing);
  return c;
}

json to_json(const nn::ModelConfig& c) {
  return {{"input_dim", c.input_dim}, {"hidden", c.hidden},
          {"layers", c.layers},       {"dropout", c.dropout},
          {"seq_len", c.seq_len},     {"task", task_name(c.task)},
          {"epochs", c.epochs},       {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size}, {"seed", c.seed}};
}

nn::ModelConfig model_from_json(const json& j, const nn::ModelConfig& d) {
  nn::ModelConfig c = d;
  c.input_dim = get_or(j, "input_dim", d.input_dim);
  c.hidden = get_or(j, "hidden", d.hidden);
  c.layers = get_or(j, "layers", d.layers);
  c.dropout = get_or(j, "dropout", d.dropout);
  c.seq_len = get_or(j, "seq_len", d.seq_len);
  c.task = task_from(get_or<std::string>(j, "task", task_name(d.task)));
  c.epochs = get_or(j, "epochs", d.epochs);
  c.learning_rate = get_or(j, "learning_rate", d.learning_rate);
  c.batch_size = get_or(j, "batch_size", d.batch_size);
  c.seed = get_or(j, "seed", d.seed);
  return c;
}

json to_json(const eval::SweepConfig& c) {
  return {{"horizon_min", c.horizon_min},
          {"horizon_max", c.horizon_max},
          {"observation", c.observation},
          {"drop_rates", c.drop_rates},
          {"train_fraction", c.train_fraction},
          {"model", to_json(c.model)},
          {"master_seed", c.master_seed}};
}

eval::SweepConfig sweep_from_json(const json& j, const eval::SweepConfig& d) {
  eval::SweepConfig c = d;
  c.horizon_min = get_or(j, "horizon_min", d.horizon_min);
  c.horizon_max = get_or(j, "horizon_max", d.horizon_max);
  c.observation = get_or(j, "observation", d.observation);
  c.drop_rates = get_or(j, "drop_rates", d.drop_rates);
  c.train_fraction = get_or(j, "train_fraction", d.train_fraction);
  if (j.is_object() && j.contains("model")) c.model = model_from_json(j.at("model"), d.model);
  c.master_seed = get_or(j, "master_seed", d.master_seed);
  return c;
}

json to_json(const channel::RawSequencePair& pair) {
  std::vector<int> status(pair.status.begin(), pair.status.end());
  return {{"power", pair.power},
          {"status", status},
          {"meta",
           {{"run_id", pair.meta.run_id},
            {"drop_rate", pair.meta.drop_rate},
            {"beam_index", pair.meta.beam_index},
            {"seed", pair.meta.scenario.seed},
            {"scenario", to_json(pair.meta.scenario)}}}};
}

channel::RawSequencePair pair_from_json(const json& j) {
  channel::RawSequencePair p;
  p.power = j.at("power").get<std::vector<double>>();
  for (int s : j.at("status").get<std::vector<int>>()) {
    if (s != 0 && s != 1) throw DataError("status entries must be 0 or 1");
    p.status.push_back(static_cast<std::uint8_t>(s));
  }
  if (p.power.size() != p.status.size()) throw DataError("power and status lengths differ");
  const json meta = j.value("meta", json::object());
  p.meta.run_id = get_or(meta, "run_id", 0);
  p.meta.drop_rate = get_or(meta, "drop_rate", 1);
  p.meta.beam_index = get_or(meta, "beam_index", -1);
  if (meta.contains("scenario")) p.meta.scenario = scenario_from_json(meta.at("scenario"));
  return p;
}

void write_campaign(std::ostream& os, std::span<const channel::RawSequencePair> pairs) {
  for (const auto& p : pairs) os << to_json(p).dump() << '\n';
}

std::vector<channel::RawSequencePair> read_campaign(std::istream& is) {
  std::vector<channel::RawSequencePair> out;
  for (const auto& j : read_lines(is)) out.push_back(pair_from_json(j));
  return out;
}

void write_dataset(std::ostream& os, const data::P1Dataset& ds) {
  os << dataset_header(data::Task::classify, ds.split, ds.observation, ds.horizon, ds.seed, ds.stats)
            .dump()
     << '\n';
  for (const auto& p : ds.points) {
    json j = {{"window", p.window.values}, {"label", p.label}};
    j.update(origin_fields(p.window.origin));
    os << j.dump() << '\n';
  }
}

void write_dataset(std::ostream& os, const data::P2Dataset& ds) {
  os << dataset_header(data::Task::regress, ds.split, ds.observation, ds.horizon, ds.seed, ds.stats)
            .dump()
     << '\n';
  for (const auto& p : ds.points) {
    json j = {{"window", p.window.values}, {"target", p.target}};
    j.update(origin_fields(p.window.origin));
    os << j.dump() << '\n';
  }
}

data::P1Dataset read_p1_dataset(std::istream& is) {
  data::P1Dataset ds;
  for (const auto& j : read_lines(is)) {
    if (j.value("header", false)) {
      apply_header(j, ds);
      continue;
    }
    if (!j.contains("label")) throw DataError("p1 dataset record without 'label'");
    const int label = j.at("label").get<int>();
    if (label != 0 && label != 1) throw DataError("p1 labels must be 0 or 1");
    ds.points.push_back({window_from(j), label, ds.horizon});
  }
  return ds;
}

data::P2Dataset read_p2_dataset(std::istream& is) {
  data::P2Dataset ds;
  for (const auto& j : read_lines(is)) {
    if (j.value("header", false)) {
      apply_header(j, ds);
      continue;
    }
    if (!j.contains("target")) throw DataError("p2 dataset record without 'target'");
    ds.points.push_back({window_from(j), j.at("target").get<int>(), ds.horizon});
  }
  return ds;
}

data::Task detect_task(std::istream& is) {
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (j.contains("task")) return task_from(j.at("task").get<std::string>());
    if (j.contains("label")) return data::Task::classify;
    if (j.contains("target")) return data::Task::regress;
  }
  throw DataError("cannot determine dataset task: no records");
}

json stats_sidecar(const data::StandardizationStats& stats, int observation, int horizon,
                   std::uint64_t seed) {
  return {{"mu", stats.mean}, {"sigma", stats.stddev}, {"T_o", observation}, {"T_P", horizon},
          {"seed", seed}};
}

json checkpoint_to_json(const nn::GruModel& model,
                        const std::optional<data::StandardizationStats>& stats,
                        const std::string& stats_ref) {
  json params = json::object();
  // Blocks are column-major flat views; store them with their shapes.
  params["W_z"] = matrix_json(model.gru.W_z);
  params["W_r"] = matrix_json(model.gru.W_r);
  params["W_h"] = matrix_json(model.gru.W_h);
  params["U_z"] = matrix_json(model.gru.U_z);
  params["U_r"] = matrix_json(model.gru.U_r);
  params["U_h"] = matrix_json(model.gru.U_h);
  params["b_z"] = matrix_json(model.gru.b_z);
  params["b_r"] = matrix_json(model.gru.b_r);
  params["b_h"] = matrix_json(model.gru.b_h);
  params["W_out"] = matrix_json(model.head.W_out);
  params["b_out"] = matrix_json(model.head.b_out);
  json j = {{"format", kCheckpointFormat},
            {"config", to_json(model.config)},
            {"target_scale", model.target_scale},
            {"params", params}};
  j["stats"] = stats ? json{{"mu", stats->mean}, {"sigma", stats->stddev}} : json(nullptr);
  if (!stats_ref.empty()) j["stats_ref"] = stats_ref;
  return j;
}

nn::GruModel checkpoint_from_json(const json& j) {
  if (j.value("format", std::string{}) != kCheckpointFormat)
    throw DataError("checkpoint: unsupported or missing format tag");
  nn::GruModel m;
  m.config = model_from_json(j.at("config"));
  m.target_scale = j.at("target_scale").get<double>();
  const auto& p = j.at("params");
  m.gru.W_z = matrix_from(p.at("W_z"));
  m.gru.W_r = matrix_from(p.at("W_r"));
  m.gru.W_h = matrix_from(p.at("W_h"));
  m.gru.U_z = matrix_from(p.at("U_z"));
  m.gru.U_r = matrix_from(p.at("U_r"));
  m.gru.U_h = matrix_from(p.at("U_h"));
  m.gru.b_z = matrix_from(p.at("b_z"));
  m.gru.b_r = matrix_from(p.at("b_r"));
  m.gru.b_h = matrix_from(p.at("b_h"));
  m.head.W_out = matrix_from(p.at("W_out"));
  m.head.b_out = matrix_from(p.at("b_out"));
  m.check_shapes();
  return m;
}

std::optional<data::StandardizationStats> checkpoint_stats(const json& j) {
  if (!j.contains("stats") || j.at("stats").is_null()) return std::nullopt;
  return data::StandardizationStats{j["stats"].at("mu").get<double>(),
                                    j["stats"].at("sigma").get<double>()};
}

void write_csv(std::ostream& os, const eval::P1Report& report) {
  os << "t_p,accuracy,n\n";
  for (const auto& r : report.rows)
    os << r.horizon << ',' << fmt(r.top1_accuracy) << ',' << r.num_samples << '\n';
}

void write_csv(std::ostream& os, const eval::P2Report& report) {
  os << "t_p,mae,std,n\n";
  for (const auto& r : report.rows)
    os << r.horizon << ',' << fmt(r.mae) << ',' << fmt(r.stddev) << ',' << r.num_samples << '\n';
}

json to_json(const eval::P1Report& report) {
  json rows = json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"t_p", r.horizon}, {"accuracy", r.top1_accuracy}, {"n", r.num_samples}});
  return {{"task", "p1"}, {"rows", rows}, {"metadata", metadata_json(report.metadata)}};
}

json to_json(const eval::P2Report& report) {
  json rows = json::array();
  for (const auto& r : report.rows)
    rows.push_back(
        {{"t_p", r.horizon}, {"mae", r.mae}, {"std", r.stddev}, {"n", r.num_samples}});
  return {{"task", "p2"}, {"rows", rows}, {"metadata", metadata_json(report.metadata)}};
}

eval::P1Report p1_report_from_json(const json& j) {
  eval::P1Report r;
  for (const auto& row : j.at("rows"))
    r.rows.push_back({row.at("t_p").get<int>(), row.at("accuracy").get<double>(), row.at("n").get<int>()});
  r.metadata = metadata_from(j.at("metadata"));
  return r;
}

eval::P2Report p2_report_from_json(const json& j) {
  eval::P2Report r;
  for (const auto& row : j.at("rows"))
    r.rows.push_back({row.at("t_p").get<int>(), row.at("mae").get<double>(),
                      row.at("std").get<double>(), row.at("n").get<int>()});
  r.metadata = metadata_from(j.at("metadata"));
  return r;
}

void write_history_csv(std::ostream& os, std::span<const double> train_loss,
                       std::span<const double> validation_metric) {
  os << "epoch,train_loss,validation_metric\n";
  for (std::size_t i = 0; i < train_loss.size(); ++i) {
    os << (i + 1) << ',' << fmt(train_loss[i]) << ',';
    if (i < validation_metric.size() && std::isfinite(validation_metric[i])) os << fmt(validation_metric[i]);
    os << '\n';
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string config_hash(const json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

}  // namespace mmblock::io
