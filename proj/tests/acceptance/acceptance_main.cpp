// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Every criterion prints one PASS/FAIL line; the process
// exits non-zero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gradcheck.hpp"
#include "mmblock/campaign.hpp"
#include "mmblock/cli/commands.hpp"
#include "mmblock/dataset.hpp"
#include "mmblock/eval.hpp"
#include "mmblock/io.hpp"
#include "oracles.hpp"
#include "signature.hpp"

namespace fs = std::filesystem;
using namespace mmblock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// The campaign every data criterion is measured on: the CLI defaults.
const std::vector<channel::RawSequencePair>& default_campaign() {
  static const auto runs = [] {
    const auto cfg = cli::load_run_config({});
    return channel::generate_campaign(cfg.seeded_scenario(), cfg.campaign);
  }();
  return runs;
}

const std::vector<channel::RawSequencePair>& augmented_campaign() {
  static const auto pairs = [] {
    const auto cfg = cli::load_run_config({});
    return data::augment_campaign(default_campaign(), cfg.sweep.drop_rates);
  }();
  return pairs;
}

Verdict gradient_correctness() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string where;
  int checked = 0, small = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (auto task : {data::Task::classify, data::Task::regress}) {
      const auto r = testing::gradient_check(task, seed, 3, 4);
      checked += r.checked;
      small += r.below_floor;
      if (r.max_rel_error > worst) {
        worst = r.max_rel_error;
        where = r.worst_param;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-5 && secs < 10.0,
          "max rel error " + fmt("%.3e", worst) + " at " + where + " over " + std::to_string(checked) +
              " entries (" + std::to_string(small) + " below the " + fmt("%.0e", testing::kRelErrorFloor) +
              " floor), " + fmt("%.2f", secs) + " s"};
}

Verdict pipeline_counts() {
  const auto t0 = Clock::now();
  const auto& pairs = augmented_campaign();
  const auto seeds = eval::sweep_seeds(cli::load_run_config({}).master_seed());
  bool ok = default_campaign().size() == 158 && pairs.size() == 632;
  std::string bad;
  for (int tp = 1; tp <= data::kMaxHorizon; ++tp) {
    const auto p1 = data::build_p1_dataset(pairs, data::kDefaultObservation, tp, seeds.dataset);
    const auto p2 = data::build_p2_dataset(pairs, data::kDefaultObservation, tp, seeds.dataset);
    std::size_t ones = 0;
    for (const auto& p : p1.points) ones += static_cast<std::size_t>(p.label);
    if (ones != 632 || p1.size() != 1264 || p2.size() != 632) {
      ok = false;
      bad += " T_P=" + std::to_string(tp);
    }
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 60.0;
  return {ok, std::to_string(pairs.size()) + " augmented pairs, 632 transitions and 1:1 balance for T_P 1..40" +
                  (bad.empty() ? "" : ", mismatches at" + bad) + ", " + fmt("%.1f", secs) + " s"};
}

Verdict standardization() {
  const auto& pairs = augmented_campaign();
  const auto seeds = eval::sweep_seeds(cli::load_run_config({}).master_seed());
  double worst_mean = 0.0, worst_std = 0.0;
  const auto check = [&](const auto& train) {
    data::Matrix m;
    for (const auto& p : train.points) m.push_back(p.window.values);
    const auto s = oracle::matrix_stats(m);
    worst_mean = std::max(worst_mean, std::fabs(s.mean));
    worst_std = std::max(worst_std, std::fabs(s.stddev - 1.0));
  };
  for (int tp = 1; tp <= data::kMaxHorizon; ++tp) {
    auto p1 = data::build_p1_dataset(pairs, data::kDefaultObservation, tp, seeds.dataset);
    auto [t1, v1] = data::split(p1, 0.8, seeds.split);
    data::standardize_splits(t1, v1);
    check(t1);
    auto p2 = data::build_p2_dataset(pairs, data::kDefaultObservation, tp, seeds.dataset);
    auto [t2, v2] = data::split(p2, 0.8, seeds.split);
    data::standardize_splits(t2, v2);
    check(t2);
  }
  return {worst_mean < 1e-9 && worst_std < 1e-9,
          "worst |mean| " + fmt("%.2e", worst_mean) + ", worst |std-1| " + fmt("%.2e", worst_std) +
              " over 80 training splits"};
}

Verdict signature_presence() {
  const auto cfg = cli::load_run_config({});
  const auto base = cfg.seeded_scenario();
  int crossings = 0, signature = 0, deep = 0;
  double worst_drop = 1e300;
  for (int i = 0; i < cfg.campaign.num_runs; ++i) {
    const auto run_cfg = channel::campaign_run_config(base, cfg.campaign, i);
    const auto& noisy = default_campaign()[static_cast<std::size_t>(i)];
    const auto onset = data::blockage_onset(noisy);
    if (!onset) continue;
    ++crossings;
    const int span = testing::kSignatureSpan;
    if (*onset >= 2 * span &&
        testing::windowed_variance(noisy.power, *onset - span, span) >
            testing::windowed_variance(noisy.power, 0, span))
      ++signature;
    auto quiet_cfg = run_cfg;
    quiet_cfg.ofdm.noise_variance = 0.0;
    const auto quiet = channel::simulate_trajectory(quiet_cfg);
    const double drop = testing::blocked_drop_db(quiet.power, quiet.status);
    worst_drop = std::min(worst_drop, drop);
    if (drop >= 15.0) ++deep;
  }
  const double frac = crossings > 0 ? static_cast<double>(signature) / crossings : 0.0;
  return {crossings > 0 && frac >= 0.9 && deep == crossings,
          "signature in " + std::to_string(signature) + "/" + std::to_string(crossings) +
              " crossing runs, drop >= 15 dB in " + std::to_string(deep) + "/" +
              std::to_string(crossings) + " (worst " + fmt("%.2f", worst_drop) + " dB)"};
}

Verdict metric_oracles() {
  std::mt19937_64 rng(20211);
  std::uniform_real_distribution<double> u(-3.0, 45.0);
  int failures = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    const std::size_t n = 1 + rng() % 400;
    std::vector<int> pred(n), truth(n);
    std::vector<double> yp(n), yt(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<int>(rng() % 2);
      truth[i] = static_cast<int>(rng() % 2);
      yp[i] = u(rng);
      yt[i] = std::floor(u(rng));
    }
    if (std::fabs(eval::top1_accuracy(pred, truth) - oracle::accuracy(pred, truth)) >= 1e-12) ++failures;
    const auto m = eval::mae_std(yp, yt);
    const auto r = oracle::abs_error_stats(yp, yt);
    if (std::fabs(m.mae - r.mean) >= 1e-12 || std::fabs(m.stddev - r.stddev) >= 1e-12) ++failures;

    const int len = 1 + static_cast<int>(rng() % 40);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(len));
    for (auto& b : bits) b = (rng() % static_cast<std::uint64_t>(2 * len)) == 0 ? 1 : 0;
    if (data::blockage_label(bits) != oracle::any_set(bits)) ++failures;

    const int to = 1 + static_cast<int>(rng() % 15);
    const int tp = 1 + static_cast<int>(rng() % 40);
    const std::size_t seq = rng() % 600;
    if (data::window_count(seq, to, tp) != oracle::window_count(seq, to, tp)) ++failures;
  }
  return {failures == 0, std::to_string(trials) + " randomized instances per metric, " +
                             std::to_string(failures) + " mismatches"};
}

struct SweepOutcome {
  eval::SweepResult result;
  double seconds = 0.0;
  int epochs = 0;
};

Verdict accuracy_trend(const SweepOutcome& s) {
  const auto& rows = s.result.p1.rows;
  if (rows.size() != 40) return {false, "expected 40 rows, got " + std::to_string(rows.size())};
  std::vector<double> acc;
  for (const auto& r : rows) acc.push_back(r.top1_accuracy);
  double min_early = 1.0;
  for (int i = 0; i < 6; ++i) min_early = std::min(min_early, acc[static_cast<std::size_t>(i)]);
  const double last = acc.back();
  const auto ma = eval::moving_average(acc, 5);
  double worst_rise = 0.0;
  int rises = 0;
  for (std::size_t i = 1; i < ma.size(); ++i) {
    if (ma[i] > ma[i - 1]) {
      ++rises;
      worst_rise = std::max(worst_rise, ma[i] - ma[i - 1]);
    }
  }
  const bool ok = min_early >= 0.80 && last >= 0.45 && last <= 0.65 && rises == 0;
  return {ok, "min acc(T_P<=6) " + fmt("%.3f", min_early) + ", acc(40) " + fmt("%.3f", last) +
                  ", moving-average rises " + std::to_string(rises) + " (largest " +
                  fmt("%.4f", worst_rise) + "), " + std::to_string(s.epochs) + " epochs, sweep " +
                  fmt("%.0f", s.seconds) + " s"};
}

Verdict mae_trend(const SweepOutcome& s) {
  const auto& rows = s.result.p2.rows;
  if (rows.size() != 40) return {false, "expected 40 rows, got " + std::to_string(rows.size())};
  double worst_early = 0.0;
  for (int i = 0; i < 10; ++i) worst_early = std::max(worst_early, rows[static_cast<std::size_t>(i)].mae);
  const double last = rows.back().mae;
  bool finite_std = true;
  for (const auto& r : rows) finite_std = finite_std && std::isfinite(r.stddev) && r.stddev >= 0.0;
  return {worst_early < 2.5 && last < 10.0 && finite_std,
          "max MAE(T_P<=10) " + fmt("%.3f", worst_early) + ", MAE(40) " + fmt("%.3f", last) +
              " +/- " + fmt("%.3f", rows.back().stddev)};
}

Verdict determinism(const fs::path& out) {
  const auto run = [&](const std::string& name) {
    cli::Overrides o;
    o.out = out / name;
    o.horizons = std::pair{1, 4};
    o.epochs = 3;
    o.runs = 20;
    auto cfg = cli::load_run_config(o);
    fs::create_directories(cfg.out_dir);
    std::ostringstream log;
    cli::cmd_sweep(cfg, log);
    return std::pair{io::read_text(cfg.out_dir / cli::kAccuracyCsv),
                     io::read_text(cfg.out_dir / cli::kMaeCsv)};
  };
  const auto a = run("determinism_a");
  const auto b = run("determinism_b");
  const bool ok = a == b && !a.first.empty() && !a.second.empty();
  return {ok, std::string("reduced sweeps (T_P 1..4, 3 epochs, 20 runs) ") +
                  (ok ? "produced byte-identical CSVs" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmblock acceptance suite"};
  std::string out = "acceptance_artifacts";
  int sweep_epochs = 200;
  app.add_option("--out", out, "directory for sweep artifacts");
  app.add_option("--sweep-epochs", sweep_epochs, "epochs per horizon in the full sweep")
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  const fs::path out_dir(out);
  fs::create_directories(out_dir);

  int failed = 0;
  const auto report = [&](const char* id, const char* name, const std::function<Verdict()>& fn) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::cout << (v.pass ? "PASS " : "FAIL ") << id << ' ' << name << ": " << v.detail << std::endl;
  };

  report("C1", "gradient correctness", gradient_correctness);
  report("C2", "pipeline counts", pipeline_counts);
  report("C3", "standardization", standardization);
  report("C4", "signature presence", signature_presence);

  SweepOutcome sweep;
  std::string sweep_error;
  try {
    cli::Overrides o;
    o.out = out_dir / "sweep";
    o.epochs = sweep_epochs;
    auto cfg = cli::load_run_config(o);
    fs::create_directories(cfg.out_dir);
    std::ostringstream log;
    const auto t0 = Clock::now();
    sweep.result = cli::cmd_sweep(cfg, log);
    sweep.seconds = seconds_since(t0);
    sweep.epochs = cfg.sweep.model.epochs;
  } catch (const std::exception& e) {
    sweep_error = e.what();
  }
  const auto after_sweep = [&](Verdict (*fn)(const SweepOutcome&)) {
    return [&, fn]() -> Verdict {
      if (!sweep_error.empty()) return {false, "sweep failed: " + sweep_error};
      return fn(sweep);
    };
  };
  report("C5", "accuracy trend", after_sweep(accuracy_trend));
  report("C6", "MAE trend", after_sweep(mae_trend));
  report("C7", "metric oracles", metric_oracles);
  report("C8", "determinism", [&] { return determinism(out_dir); });

  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
