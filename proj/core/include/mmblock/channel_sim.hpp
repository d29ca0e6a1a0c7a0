// SPDX-License-Identifier: Apache-2.0
//
// Synthetic 60 GHz link simulator. A static receiver with a ULA observes a
// transmitter over a geometric multipath channel while a metal cylinder
// moves across the line of sight. The blocker contributes a bistatic
// scattered path whose interference with the LOS grows as it enters the
// receive beam, followed by knife-edge shadowing of the LOS.
#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace mmblock::channel {

inline constexpr double kSpeedOfLight = 299'792'458.0;
inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kPowerFloorDbm = -200.0;

using cd = std::complex<double>;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

double norm(Vec2 v) noexcept;
double dot(Vec2 a, Vec2 b) noexcept;
Vec2 rotate(Vec2 v, double angle) noexcept;

struct UlaConfig {
  int num_elements = 10;
  double wavelength = kSpeedOfLight / 60e9;
  double element_spacing = 0.5 * (kSpeedOfLight / 60e9);
  int codebook_size = 64;

  void validate() const;
  friend bool operator==(const UlaConfig&, const UlaConfig&) = default;
};

/// Thermal noise power kTB scaled by the noise figure, in watts.
double thermal_noise_variance(double bandwidth_hz, double noise_figure_db);

struct OfdmConfig {
  int num_subcarriers = 64;
  int cyclic_prefix_len = 16;
  double sampling_time = 1.0 / 20e6;
  double carrier_freq = 60e9;
  double bandwidth = 20e6;
  double tx_power_dbm = 30.0;
  double noise_figure_db = 10.0;
  /// Watts. Defaults to kTB * NF for the bandwidth above.
  double noise_variance = thermal_noise_variance(20e6, 10.0);
  cd symbol{1.0, 0.0};
  /// Raised-cosine roll-off and truncation (in sampling periods each side).
  double rolloff = 0.5;
  int pulse_half_taps = 4;

  void validate() const;
  friend bool operator==(const OfdmConfig&, const OfdmConfig&) = default;
};

struct PathComponent {
  cd gain;            // complex amplitude, includes path loss and carrier phase
  double delay = 0;   // seconds
  double azimuth = 0; // radians from the array axis
  double elevation = 0;
};

struct BlockageTrajectory {
  Vec2 start{2.0, -5.5};
  Vec2 end{2.0, 5.5};
  double speed = 0.5;          // m/s
  double blocker_radius = 0.25;
  double blocker_height = 1.0;
  double testbed_rotation = 0; // radians, testbed relative to the room

  void validate() const;
  friend bool operator==(const BlockageTrajectory&, const BlockageTrajectory&) = default;
};

/// Rectangular room whose four walls give static specular reflections.
/// Rotating the testbed rotates the walls in the testbed frame.
struct RoomConfig {
  bool enabled = true;
  Vec2 center{4.0, 0.0};
  double size_x = 16.0;
  double size_y = 16.0;
  double wall_reflectivity = 0.2;

  friend bool operator==(const RoomConfig&, const RoomConfig&) = default;
};

struct ScenarioConfig {
  UlaConfig ula;
  OfdmConfig ofdm;
  BlockageTrajectory trajectory;
  RoomConfig room;
  Vec2 tx_pos{0.0, 0.0};
  Vec2 rx_pos{8.0, 0.0};
  double sample_rate = 40.0;  // samples/s
  /// Seconds; 0 means "traverse the whole trajectory once".
  double duration = 0.0;
  int subcarrier = 0;
  /// Reflection coefficient of the blocker surface.
  double scatter_coefficient = 0.9;
  /// Receiver timing offset so the truncated pulse of the first arrival
  /// falls inside the cyclic prefix, in sampling periods.
  double timing_advance_taps = 4.0;
  /// Front-to-back ratio of the RX antenna; paths arriving through its rear
  /// hemisphere are attenuated by this much.
  double front_to_back_db = 20.0;
  std::uint64_t seed = 1;

  int num_samples() const;
  void validate() const;
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct PairMeta {
  ScenarioConfig scenario;
  int run_id = 0;
  int drop_rate = 1;
  int beam_index = -1;

  friend bool operator==(const PairMeta&, const PairMeta&) = default;
};

struct RawSequencePair {
  std::vector<double> power;          // dBm
  std::vector<std::uint8_t> status;   // 1 while the LOS is blocked
  PairMeta meta;

  std::size_t size() const noexcept { return power.size(); }
  friend bool operator==(const RawSequencePair&, const RawSequencePair&) = default;
};

/// Codebook beam w: (1/sqrt(M)) exp(j m (2 pi / lambda) d cos(phi_w)),
/// phi_w = 2 pi w / W.
Eigen::VectorXcd steering_vector(int w, const UlaConfig& cfg);

/// Unit-modulus array response for a plane wave arriving at the given
/// azimuth (from the array axis) and elevation.
Eigen::VectorXcd array_response(double azimuth, double elevation, const UlaConfig& cfg);

/// Truncated raised-cosine pulse evaluated at t seconds.
double pulse(double t, const OfdmConfig& cfg);

Eigen::VectorXcd channel_response(std::span<const PathComponent> paths, int k,
                                  const OfdmConfig& cfg, const UlaConfig& ula);

/// Received power in dBm of r = h^T f s sqrt(P_tx) + n, n ~ CN(0, sigma^2).
/// Zero (or vanishing) power is clamped to kPowerFloorDbm.
double received_power(const Eigen::VectorXcd& h, const Eigen::VectorXcd& f,
                      const OfdmConfig& cfg, std::mt19937_64& rng);

/// Single knife-edge diffraction loss (ITU-R P.526 approximation), dB.
double knife_edge_loss(double v);

/// Fresnel-Kirchhoff parameter for an edge protruding `clearance` metres
/// into the ray, d1/d2 metres from either end.
double fresnel_parameter(double clearance, double d1, double d2, double wavelength);

/// Blocker centre at time index n.
Vec2 blocker_position(const ScenarioConfig& cfg, int n);

/// True iff the blocker cylinder intersects the TX-RX segment.
bool los_blocked(const ScenarioConfig& cfg, Vec2 blocker);

/// All propagation paths for a blocker at the given position. Pass
/// `with_blocker = false` for the empty-room channel.
std::vector<PathComponent> propagation_paths(const ScenarioConfig& cfg, Vec2 blocker,
                                             bool with_blocker = true);

/// Codeword maximising noiseless LOS power with no blocker present.
int best_beam(const ScenarioConfig& cfg);

RawSequencePair simulate_trajectory(const ScenarioConfig& cfg);

}  // namespace mmblock::channel
