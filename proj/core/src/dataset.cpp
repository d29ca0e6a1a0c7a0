// SPDX-License-Identifier: Apache-2.0
#include "mmblock/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "mmblock/errors.hpp"
#include "mmblock/seed.hpp"

namespace mmblock::data {

namespace {

void check_window_params(int observation, int horizon) {
  if (observation < 1) throw DomainError("observation length must be >= 1");
  if (horizon < 1) throw DomainError("prediction horizon must be >= 1");
}

ObservationWindow make_window(const RawSequencePair& pair, int end_index, int observation) {
  ObservationWindow w;
  w.values.assign(pair.power.begin() + (end_index - observation + 1),
                  pair.power.begin() + end_index + 1);
  w.origin = {pair.meta.run_id, pair.meta.drop_rate, end_index};
  return w;
}

struct Transition {
  std::size_t pair;
  int end_index;
  int offset;  // n'
};

std::vector<Transition> place_transitions(std::span<const RawSequencePair> pairs,
                                          int observation, int horizon, std::uint64_t seed) {
  std::vector<Transition> out;
  for (std::size_t u = 0; u < pairs.size(); ++u) {
    const auto& p = pairs[u];
    const auto onset = blockage_onset(p);
    if (!onset) continue;
    const int n = static_cast<int>(p.size());
    // Every n' in 1..T_P must yield a complete window and future slice.
    if (*onset - horizon < observation - 1 || *onset - 1 + horizon > n - 1) continue;
    const std::uint64_t key = derive_seed(
        seed, "transition", {static_cast<std::uint64_t>(p.meta.run_id),
                             static_cast<std::uint64_t>(p.meta.drop_rate)});
    const int offset = 1 + static_cast<int>(std::floor(unit_interval(key) * horizon));
    out.push_back({u, *onset - offset, offset});
  }
  return out;
}

std::uint64_t split_key(std::uint64_t seed, const WindowOrigin& o, bool per_pair) {
  const auto run = static_cast<std::uint64_t>(o.run_id);
  const auto rate = static_cast<std::uint64_t>(o.drop_rate);
  if (per_pair) return derive_seed(seed, "split-pair", {run, rate});
  return derive_seed(seed, "split-window", {run, rate, static_cast<std::uint64_t>(o.end_index)});
}

// Orders `items` by seeded key and cuts at floor(fraction * n).
template <class Point, class KeyFn>
void split_group(const std::vector<const Point*>& items, double fraction, KeyFn key,
                 std::vector<Point>& train, std::vector<Point>& validation) {
  std::vector<std::pair<std::uint64_t, const Point*>> keyed;
  keyed.reserve(items.size());
  for (const Point* p : items) keyed.emplace_back(key(*p), p);
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second->window.origin < b.second->window.origin;
  });
  const auto cut = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(keyed.size())));
  for (std::size_t i = 0; i < keyed.size(); ++i)
    (i < cut ? train : validation).push_back(*keyed[i].second);
}

void check_fraction(double f) {
  if (!(f > 0.0 && f < 1.0)) throw DomainError("split: train fraction must lie in (0, 1)");
}

template <class D>
void finish_split(const D& src, D& train, D& validation) {
  if (train.empty() || validation.empty()) throw DataError("split: one side is empty");
  for (D* d : {&train, &validation}) {
    d->observation = src.observation;
    d->horizon = src.horizon;
    d->seed = src.seed;
  }
  train.split = Split::train;
  validation.split = Split::validation;
}

template <class D>
void standardize_pair(D& train, D& validation) {
  if (train.empty()) throw DataError("standardize: empty training split");
  Matrix rows;
  rows.reserve(train.size());
  for (const auto& p : train.points) rows.push_back(p.window.values);
  const auto stats = compute_stats(rows);
  for (D* d : {&train, &validation}) {
    for (auto& p : d->points)
      for (double& v : p.window.values) v = (v - stats.mean) / stats.stddev;
    d->stats = stats;
  }
}

}  // namespace

RawSequencePair augment_drop(const RawSequencePair& pair, int rate) {
  if (rate < 1) throw DomainError("augment_drop: rate must be >= 1");
  if (pair.power.size() != pair.status.size())
    throw DataError("augment_drop: power and status lengths differ");
  if (pair.size() <= static_cast<std::size_t>(rate))
    throw DataError("augment_drop: sequence too short for rate " + std::to_string(rate));
  RawSequencePair out;
  out.meta = pair.meta;
  out.meta.drop_rate = pair.meta.drop_rate * rate;
  for (std::size_t i = 0; i < pair.size(); i += static_cast<std::size_t>(rate)) {
    out.power.push_back(pair.power[i]);
    out.status.push_back(pair.status[i]);
  }
  return out;
}

std::size_t window_count(std::size_t length, int observation, int horizon) noexcept {
  const auto need = static_cast<std::size_t>(observation) + static_cast<std::size_t>(horizon);
  return length >= need ? length - need + 1 : 0;
}

std::vector<WindowSlice> sliding_windows(const RawSequencePair& pair, int observation,
                                         int horizon) {
  check_window_params(observation, horizon);
  if (pair.power.size() != pair.status.size())
    throw DataError("sliding_windows: power and status lengths differ");
  const std::size_t count = window_count(pair.size(), observation, horizon);
  std::vector<WindowSlice> out;
  out.reserve(count);
  const std::span<const double> power(pair.power);
  const std::span<const std::uint8_t> status(pair.status);
  for (std::size_t i = 0; i < count; ++i) {
    const int t = static_cast<int>(i) + observation - 1;
    out.push_back({t, power.subspan(i, observation), status.subspan(t + 1, horizon)});
  }
  return out;
}

int blockage_label(std::span<const std::uint8_t> future) {
  if (future.empty()) throw DomainError("blockage_label: empty future slice");
  return std::any_of(future.begin(), future.end(), [](std::uint8_t b) { return b != 0; }) ? 1 : 0;
}

std::optional<int> first_blockage_instant(std::span<const std::uint8_t> future) {
  if (future.empty()) throw DomainError("first_blockage_instant: empty future slice");
  for (std::size_t i = 0; i < future.size(); ++i)
    if (future[i]) return static_cast<int>(i) + 1;
  return std::nullopt;
}

std::optional<int> blockage_onset(const RawSequencePair& pair) {
  for (std::size_t i = 0; i < pair.status.size(); ++i)
    if (pair.status[i]) return static_cast<int>(i);
  return std::nullopt;
}

StandardizationStats compute_stats(const Matrix& rows) {
  std::size_t count = 0;
  double sum = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& r : rows) {
    for (double v : r) {
      if (count == 0) lo = hi = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
      ++count;
    }
  }
  if (count == 0) throw DataError("standardize: empty matrix");
  if (lo == hi) throw DataError("standardize: zero variance");
  const double mean = sum / static_cast<double>(count);
  double ss = 0.0;
  for (const auto& r : rows)
    for (double v : r) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(count));
  if (!(sd > 0)) throw DataError("standardize: zero variance");
  return {mean, sd};
}

Matrix apply_stats(const Matrix& rows, const StandardizationStats& stats) {
  if (!(stats.stddev > 0)) throw DomainError("apply_stats: stddev must be > 0");
  Matrix out = rows;
  for (auto& r : out)
    for (double& v : r) v = (v - stats.mean) / stats.stddev;
  return out;
}

Standardized standardize(const Matrix& rows) {
  const auto stats = compute_stats(rows);
  return {apply_stats(rows, stats), stats};
}

P1Dataset build_p1_dataset(std::span<const RawSequencePair> pairs, int observation, int horizon,
                           std::uint64_t seed) {
  check_window_params(observation, horizon);
  const auto transitions = place_transitions(pairs, observation, horizon, seed);

  struct Candidate {
    std::uint64_t key;
    std::size_t pair;
    int end_index;
  };
  std::vector<Candidate> background;
  for (std::size_t u = 0; u < pairs.size(); ++u) {
    for (const auto& w : sliding_windows(pairs[u], observation, horizon)) {
      if (blockage_label(w.future) != 0) continue;
      const auto& m = pairs[u].meta;
      background.push_back(
          {derive_seed(seed, "background",
                       {static_cast<std::uint64_t>(m.run_id), static_cast<std::uint64_t>(m.drop_rate),
                        static_cast<std::uint64_t>(w.end_index)}),
           u, w.end_index});
    }
  }
  if (transitions.empty()) throw DataError("build_p1_dataset: no transition windows");
  if (background.empty()) throw DataError("build_p1_dataset: no non-transition windows");

  const auto by_key = [](const Candidate& a, const Candidate& b) {
    return std::tie(a.key, a.pair, a.end_index) < std::tie(b.key, b.pair, b.end_index);
  };
  std::vector<Transition> chosen = transitions;
  std::size_t keep = std::min(transitions.size(), background.size());
  if (background.size() > keep) {
    std::nth_element(background.begin(), background.begin() + static_cast<std::ptrdiff_t>(keep),
                     background.end(), by_key);
    background.resize(keep);
  }
  if (chosen.size() > keep) {
    // More transitions than background windows: subsample transitions.
    std::vector<std::pair<std::uint64_t, Transition>> keyed;
    for (const auto& t : chosen) {
      const auto& m = pairs[t.pair].meta;
      keyed.emplace_back(derive_seed(seed, "transition-keep",
                                     {static_cast<std::uint64_t>(m.run_id),
                                      static_cast<std::uint64_t>(m.drop_rate)}),
                         t);
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
      return std::tie(a.first, a.second.pair) < std::tie(b.first, b.second.pair);
    });
    keyed.resize(keep);
    chosen.clear();
    for (auto& k : keyed) chosen.push_back(k.second);
    std::sort(chosen.begin(), chosen.end(),
              [](const Transition& a, const Transition& b) { return a.pair < b.pair; });
  }
  std::sort(background.begin(), background.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.pair, a.end_index) < std::tie(b.pair, b.end_index);
  });

  P1Dataset ds;
  ds.observation = observation;
  ds.horizon = horizon;
  ds.seed = seed;
  ds.points.reserve(chosen.size() + background.size());
  for (const auto& t : chosen)
    ds.points.push_back({make_window(pairs[t.pair], t.end_index, observation), 1, horizon});
  for (const auto& c : background)
    ds.points.push_back({make_window(pairs[c.pair], c.end_index, observation), 0, horizon});
  return ds;
}

P2Dataset build_p2_dataset(std::span<const RawSequencePair> pairs, int observation, int horizon,
                           std::uint64_t seed) {
  check_window_params(observation, horizon);
  const auto transitions = place_transitions(pairs, observation, horizon, seed);
  if (transitions.empty()) throw DataError("build_p2_dataset: no transition windows");
  P2Dataset ds;
  ds.observation = observation;
  ds.horizon = horizon;
  ds.seed = seed;
  ds.points.reserve(transitions.size());
  for (const auto& t : transitions)
    ds.points.push_back({make_window(pairs[t.pair], t.end_index, observation), t.offset, horizon});
  return ds;
}

std::pair<P1Dataset, P1Dataset> split(const P1Dataset& dataset, double train_fraction,
                                      std::uint64_t seed) {
  check_fraction(train_fraction);
  std::vector<const P1DataPoint*> positives;
  std::vector<const P1DataPoint*> negatives;
  for (const auto& p : dataset.points) (p.label ? positives : negatives).push_back(&p);
  P1Dataset train;
  P1Dataset validation;
  split_group(positives, train_fraction,
              [&](const P1DataPoint& p) { return split_key(seed, p.window.origin, true); },
              train.points, validation.points);
  split_group(negatives, train_fraction,
              [&](const P1DataPoint& p) { return split_key(seed, p.window.origin, false); },
              train.points, validation.points);
  finish_split(dataset, train, validation);
  return {std::move(train), std::move(validation)};
}

std::pair<P2Dataset, P2Dataset> split(const P2Dataset& dataset, double train_fraction,
                                      std::uint64_t seed) {
  check_fraction(train_fraction);
  std::vector<const P2DataPoint*> all;
  for (const auto& p : dataset.points) all.push_back(&p);
  P2Dataset train;
  P2Dataset validation;
  split_group(all, train_fraction,
              [&](const P2DataPoint& p) { return split_key(seed, p.window.origin, true); },
              train.points, validation.points);
  finish_split(dataset, train, validation);
  return {std::move(train), std::move(validation)};
}

void standardize_splits(P1Dataset& train, P1Dataset& validation) {
  standardize_pair(train, validation);
}

void standardize_splits(P2Dataset& train, P2Dataset& validation) {
  standardize_pair(train, validation);
}

std::optional<int> target_from_origin(const RawSequencePair& pair, const WindowOrigin& origin,
                                      int horizon) {
  const int t = origin.end_index;
  if (t < 0 || t + horizon >= static_cast<int>(pair.size()))
    throw DomainError("target_from_origin: window does not fit the sequence");
  return first_blockage_instant(std::span<const std::uint8_t>(pair.status).subspan(t + 1, horizon));
}

std::vector<RawSequencePair> augment_campaign(std::span<const RawSequencePair> pairs,
                                              std::span<const int> rates) {
  std::vector<RawSequencePair> out;
  out.reserve(pairs.size() * rates.size());
  for (int r : rates)
    for (const auto& p : pairs) out.push_back(augment_drop(p, r));
  return out;
}

}  // namespace mmblock::data
