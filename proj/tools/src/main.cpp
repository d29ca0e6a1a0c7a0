// SPDX-License-Identifier: Apache-2.0
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mmblock/cli/commands.hpp"
#include "mmblock/errors.hpp"

namespace {

using mmblock::cli::Overrides;

struct CommonFlags {
  std::string config, out, tp;
  std::uint64_t seed = 0;
  int epochs = 0;
  int runs = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_tp, bool with_epochs, bool with_runs) {
  cmd->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out, "output directory (default: out)");
  if (with_tp) cmd->add_option("--tp", f.tp, "prediction horizon N or range A..B");
  if (with_epochs) cmd->add_option("--epochs", f.epochs, "training epochs")->check(CLI::PositiveNumber);
  if (with_runs) cmd->add_option("--runs", f.runs, "number of campaign runs")->check(CLI::PositiveNumber);
}

Overrides to_overrides(const CLI::App* cmd, const CommonFlags& f) {
  Overrides o;
  const auto given = [&](const char* name) {
    const auto* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--config")) o.config = f.config;
  if (given("--seed")) o.seed = f.seed;
  if (given("--out")) o.out = f.out;
  if (given("--tp")) o.horizons = mmblock::cli::parse_horizon_range(f.tp);
  if (given("--epochs")) o.epochs = f.epochs;
  if (given("--runs")) o.runs = f.runs;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmWave link blockage prediction: simulate, prepare, train, evaluate, sweep"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mmblock 0.1.0");

  CommonFlags sim_f, prep_f, train_f, eval_f, sweep_f;

  auto* sim = app.add_subcommand("simulate", "generate the synthetic measurement campaign");
  add_common(sim, sim_f, false, false, true);

  auto* prep = app.add_subcommand("prepare", "build standardized train/validation datasets");
  add_common(prep, prep_f, true, false, false);
  std::string prep_campaign, prep_task = "p1";
  prep->add_option("campaign", prep_campaign, "campaign JSON-lines file")->required();
  prep->add_option("--task", prep_task, "p1 (classification) or p2 (regression)")
      ->check(CLI::IsMember({"p1", "p2"}));

  auto* train = app.add_subcommand("train", "train a GRU on a prepared dataset");
  add_common(train, train_f, false, true, false);
  std::string train_file, val_file;
  train->add_option("train", train_file, "training JSON-lines file")->required();
  train->add_option("--validation", val_file, "validation JSON-lines file");

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a prepared dataset");
  add_common(ev, eval_f, false, false, false);
  std::string ckpt_file, data_file;
  ev->add_option("checkpoint", ckpt_file, "checkpoint JSON file")->required();
  ev->add_option("data", data_file, "dataset JSON-lines file")->required();

  auto* sw = app.add_subcommand("sweep", "simulate, train and evaluate across horizons");
  add_common(sw, sweep_f, true, true, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sim->parsed()) {
      mmblock::cli::cmd_simulate(mmblock::cli::load_run_config(to_overrides(sim, sim_f)), std::cerr);
    } else if (prep->parsed()) {
      auto o = to_overrides(prep, prep_f);
      mmblock::cli::PrepareArgs args;
      args.campaign = prep_campaign;
      args.task = mmblock::cli::parse_task(prep_task);
      args.horizon = o.horizons ? o.horizons->first : 1;
      if (o.horizons && o.horizons->first != o.horizons->second)
        throw mmblock::ConfigError("prepare takes a single T_P, not a range");
      o.horizons.reset();
      mmblock::cli::cmd_prepare(mmblock::cli::load_run_config(o), args, std::cerr);
    } else if (train->parsed()) {
      mmblock::cli::TrainArgs args;
      args.train = train_file;
      if (!val_file.empty()) args.validation = val_file;
      mmblock::cli::cmd_train(mmblock::cli::load_run_config(to_overrides(train, train_f)), args,
                              std::cerr);
    } else if (ev->parsed()) {
      mmblock::cli::cmd_eval(mmblock::cli::load_run_config(to_overrides(ev, eval_f)),
                             {ckpt_file, data_file}, std::cerr);
    } else if (sw->parsed()) {
      mmblock::cli::cmd_sweep(mmblock::cli::load_run_config(to_overrides(sw, sweep_f)), std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "mmblock: error: " << e.what() << '\n';
    return mmblock::cli::exit_code_for(e);
  }
  return 0;
}
