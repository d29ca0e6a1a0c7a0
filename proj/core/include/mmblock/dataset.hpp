// SPDX-License-Identifier: Apache-2.0
//
// Turns raw power/status sequences into observation windows with
// occurrence labels (classification) or onset offsets (regression).
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mmblock/channel_sim.hpp"

namespace mmblock::data {

using channel::RawSequencePair;

inline constexpr int kDefaultObservation = 10;
inline constexpr int kMaxHorizon = 40;

enum class Split { train, validation, all };
enum class Task { classify, regress };

struct WindowOrigin {
  int run_id = 0;
  int drop_rate = 1;
  int end_index = 0;  // t: last observed index in the (augmented) sequence

  friend auto operator<=>(const WindowOrigin&, const WindowOrigin&) = default;
};

struct ObservationWindow {
  std::vector<double> values;
  WindowOrigin origin;
};

struct P1DataPoint {
  ObservationWindow window;
  int label = 0;  // 1 if a blockage occurs within the horizon
  int horizon = 1;
};

struct P2DataPoint {
  ObservationWindow window;
  int target = 1;  // first future instance (1-based) with the link blocked
  int horizon = 1;
};

struct StandardizationStats {
  double mean = 0.0;
  double stddev = 1.0;
};

template <class Point>
struct Dataset {
  std::vector<Point> points;
  std::optional<StandardizationStats> stats;
  Split split = Split::all;
  int observation = kDefaultObservation;
  int horizon = 1;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

using P1Dataset = Dataset<P1DataPoint>;
using P2Dataset = Dataset<P2DataPoint>;

/// Keeps samples 0, rate, 2*rate, ... of power and status.
RawSequencePair augment_drop(const RawSequencePair& pair, int rate);

struct WindowSlice {
  int end_index = 0;
  std::span<const double> window;
  std::span<const std::uint8_t> future;
};

/// All windows power[t-T_o+1 .. t] with future status[t+1 .. t+T_P].
/// The returned spans view into `pair`.
std::vector<WindowSlice> sliding_windows(const RawSequencePair& pair, int observation,
                                         int horizon);

/// Closed-form number of windows; 0 when the sequence is too short.
std::size_t window_count(std::size_t length, int observation, int horizon) noexcept;

/// 1 iff any future status bit is set.
int blockage_label(std::span<const std::uint8_t> future);

/// Smallest 1-based index holding a set bit.
std::optional<int> first_blockage_instant(std::span<const std::uint8_t> future);

/// Index of the first blocked sample, if any.
std::optional<int> blockage_onset(const RawSequencePair& pair);

using Matrix = std::vector<std::vector<double>>;

/// Global mean and population standard deviation over all entries.
StandardizationStats compute_stats(const Matrix& rows);

/// (A - mu) / sigma elementwise.
Matrix apply_stats(const Matrix& rows, const StandardizationStats& stats);

struct Standardized {
  Matrix values;
  StandardizationStats stats;
};

Standardized standardize(const Matrix& rows);

/// One transition window per pair that has a blockage onset, placed so the
/// onset lies n' steps ahead with n' drawn uniformly from 1..T_P, plus an
/// equal number of non-transition windows sampled without replacement.
/// Pairs that cannot host a full-range transition window are skipped.
P1Dataset build_p1_dataset(std::span<const RawSequencePair> pairs, int observation, int horizon,
                           std::uint64_t seed);

/// The transition windows of build_p1_dataset with targets n'.
P2Dataset build_p2_dataset(std::span<const RawSequencePair> pairs, int observation, int horizon,
                           std::uint64_t seed);

/// Seeded split. Classification splits are stratified per label.
std::pair<P1Dataset, P1Dataset> split(const P1Dataset& dataset, double train_fraction,
                                      std::uint64_t seed);
std::pair<P2Dataset, P2Dataset> split(const P2Dataset& dataset, double train_fraction,
                                      std::uint64_t seed);

/// Standardizes `train` with its own statistics and applies them to
/// `validation`. Both datasets record the statistics.
void standardize_splits(P1Dataset& train, P1Dataset& validation);
void standardize_splits(P2Dataset& train, P2Dataset& validation);

/// Recomputes n' for a stored window from the raw status sequence.
std::optional<int> target_from_origin(const RawSequencePair& pair, const WindowOrigin& origin,
                                      int horizon);

/// Every pair augmented at each rate, rate-major order.
std::vector<RawSequencePair> augment_campaign(std::span<const RawSequencePair> pairs,
                                              std::span<const int> rates);

}  // namespace mmblock::data
