// SPDX-License-Identifier: Apache-2.0
#include "mmblock/channel_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "mmblock/errors.hpp"

namespace mmblock::channel {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cd kJ{0.0, 1.0};

// Azimuth of a ray arriving from `source` at the receiver, measured from
// the array axis. The array lies perpendicular to the RX->TX direction.
double arrival_azimuth(const ScenarioConfig& cfg, Vec2 source) {
  const Vec2 los = cfg.tx_pos - cfg.rx_pos;
  const double los_len = norm(los);
  const Vec2 axis{-los.y / los_len, los.x / los_len};
  const Vec2 dir = source - cfg.rx_pos;
  const double c = std::clamp(dot(dir, axis) / norm(dir), -1.0, 1.0);
  return std::acos(c);
}

struct SegmentProjection {
  double distance;  // perpendicular distance from the point to the segment
  double d1;        // along-segment distance from TX to the foot point
  double d2;        // along-segment distance from the foot point to RX
  bool interior;    // foot point strictly inside the segment
};

SegmentProjection project_on_segment(Vec2 a, Vec2 b, Vec2 p) {
  const Vec2 ab = b - a;
  const double len = norm(ab);
  const double s = dot(p - a, ab) / (len * len);
  const double sc = std::clamp(s, 0.0, 1.0);
  const Vec2 foot = a + sc * ab;
  return {norm(p - foot), sc * len, (1.0 - sc) * len, s > 0.0 && s < 1.0};
}

SegmentProjection project_on_link(const ScenarioConfig& cfg, Vec2 p) {
  return project_on_segment(cfg.tx_pos, cfg.rx_pos, p);
}

// Amplitude factor of the knife-edge formed by the cylinder on the ray a->b.
double shadow_amplitude(const ScenarioConfig& cfg, Vec2 a, Vec2 b, Vec2 blocker) {
  const auto proj = project_on_segment(a, b, blocker);
  if (!proj.interior) return 1.0;
  const double clearance = cfg.trajectory.blocker_radius - proj.distance;
  const double v = fresnel_parameter(clearance, proj.d1, proj.d2, cfg.ula.wavelength);
  return std::pow(10.0, -knife_edge_loss(v) / 20.0);
}

}  // namespace

double norm(Vec2 v) noexcept { return std::hypot(v.x, v.y); }
double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
Vec2 rotate(Vec2 v, double angle) noexcept {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

void UlaConfig::validate() const {
  if (num_elements < 1) throw ConfigError("ula: num_elements must be >= 1");
  if (codebook_size < 1) throw ConfigError("ula: codebook_size must be >= 1");
  if (!(element_spacing > 0)) throw ConfigError("ula: element_spacing must be > 0");
  if (!(wavelength > 0)) throw ConfigError("ula: wavelength must be > 0");
}

double thermal_noise_variance(double bandwidth_hz, double noise_figure_db) {
  return kBoltzmann * 290.0 * bandwidth_hz * std::pow(10.0, noise_figure_db / 10.0);
}

void OfdmConfig::validate() const {
  if (num_subcarriers < 1) throw ConfigError("ofdm: num_subcarriers must be >= 1");
  if (cyclic_prefix_len < 1) throw ConfigError("ofdm: cyclic_prefix_len must be >= 1");
  if (!(sampling_time > 0)) throw ConfigError("ofdm: sampling_time must be > 0");
  if (!(noise_variance >= 0)) throw ConfigError("ofdm: noise_variance must be >= 0");
  if (std::abs(std::abs(symbol) - 1.0) > 1e-12) throw ConfigError("ofdm: |symbol| must be 1");
  if (rolloff < 0 || rolloff > 1) throw ConfigError("ofdm: rolloff must lie in [0, 1]");
  if (pulse_half_taps < 1) throw ConfigError("ofdm: pulse_half_taps must be >= 1");
}

void BlockageTrajectory::validate() const {
  if (!(speed > 0)) throw ConfigError("trajectory: speed must be > 0");
  if (!(blocker_height > 0)) throw ConfigError("trajectory: blocker_height must be > 0");
  if (!(blocker_radius > 0)) throw ConfigError("trajectory: blocker_radius must be > 0");
  if (start == end) throw ConfigError("trajectory: start and end coincide");
}

int ScenarioConfig::num_samples() const {
  const double travel = norm(trajectory.end - trajectory.start) / trajectory.speed;
  const double t = duration > 0 ? duration : travel;
  return static_cast<int>(std::floor(t * sample_rate + 1e-9)) + 1;
}

void ScenarioConfig::validate() const {
  ula.validate();
  ofdm.validate();
  trajectory.validate();
  if (!(norm(rx_pos - tx_pos) > 0)) throw ConfigError("scenario: tx and rx coincide");
  if (!(sample_rate > 0)) throw ConfigError("scenario: sample_rate must be > 0");
  if (duration < 0) throw ConfigError("scenario: duration must be >= 0");
  if (subcarrier < 0 || subcarrier >= ofdm.num_subcarriers)
    throw ConfigError("scenario: subcarrier out of range");
  if (timing_advance_taps < 0) throw ConfigError("scenario: timing_advance_taps must be >= 0");
  if (!(front_to_back_db >= 0)) throw ConfigError("scenario: front_to_back_db must be >= 0");
  // Room for at least one observation window and the longest horizon.
  if (num_samples() < 60) throw ConfigError("scenario: fewer than 60 samples per run");

  // The trajectory must cross or come close to the link.
  const Vec2 a = trajectory.start;
  const Vec2 b = trajectory.end;
  double closest = 1e300;
  for (int i = 0; i <= 1000; ++i) {
    const Vec2 p = a + (i / 1000.0) * (b - a);
    closest = std::min(closest, project_on_link(*this, p).distance);
  }
  if (closest > 0.5 * norm(rx_pos - tx_pos))
    throw ConfigError("scenario: trajectory never approaches the TX-RX link");
  if (norm(tx_pos - a) < trajectory.blocker_radius || norm(rx_pos - a) < trajectory.blocker_radius ||
      norm(tx_pos - b) < trajectory.blocker_radius || norm(rx_pos - b) < trajectory.blocker_radius)
    throw ConfigError("scenario: blocker overlaps an antenna");
}

Eigen::VectorXcd steering_vector(int w, const UlaConfig& cfg) {
  if (w < 0 || w >= cfg.codebook_size)
    throw DomainError("steering_vector: codebook index " + std::to_string(w) + " outside [0, " +
                      std::to_string(cfg.codebook_size) + ")");
  const double phi = 2.0 * kPi * w / cfg.codebook_size;
  const double step = 2.0 * kPi / cfg.wavelength * cfg.element_spacing * std::cos(phi);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.num_elements));
  Eigen::VectorXcd f(cfg.num_elements);
  for (int m = 0; m < cfg.num_elements; ++m) f[m] = scale * std::exp(kJ * (m * step));
  return f;
}

Eigen::VectorXcd array_response(double azimuth, double elevation, const UlaConfig& cfg) {
  const double step =
      2.0 * kPi / cfg.wavelength * cfg.element_spacing * std::cos(azimuth) * std::cos(elevation);
  Eigen::VectorXcd a(cfg.num_elements);
  for (int m = 0; m < cfg.num_elements; ++m) a[m] = std::exp(kJ * (m * step));
  return a;
}

double pulse(double t, const OfdmConfig& cfg) {
  const double x = t / cfg.sampling_time;
  if (std::abs(x) > cfg.pulse_half_taps) return 0.0;
  if (x == 0.0) return 1.0;
  const double beta = cfg.rolloff;
  const double sinc = std::sin(kPi * x) / (kPi * x);
  const double denom = 1.0 - 4.0 * beta * beta * x * x;
  if (std::abs(denom) < 1e-10) {
    // Removable singularity at |x| = 1 / (2 beta).
    return kPi / 4.0 * std::sin(kPi / (2.0 * beta)) / (kPi / (2.0 * beta));
  }
  return sinc * std::cos(kPi * beta * x) / denom;
}

Eigen::VectorXcd channel_response(std::span<const PathComponent> paths, int k,
                                  const OfdmConfig& cfg, const UlaConfig& ula) {
  if (k < 0 || k >= cfg.num_subcarriers)
    throw DomainError("channel_response: subcarrier " + std::to_string(k) + " out of range");
  const double max_delay = cfg.cyclic_prefix_len * cfg.sampling_time;
  for (const auto& p : paths) {
    if (!(p.delay >= 0) || !(p.delay < max_delay))
      throw DomainError("channel_response: path delay must lie in [0, D*T_S)");
  }

  Eigen::VectorXcd h = Eigen::VectorXcd::Zero(ula.num_elements);
  for (const auto& p : paths) {
    cd tap_sum{0.0, 0.0};
    for (int d = 0; d < cfg.cyclic_prefix_len; ++d) {
      const double g = pulse(d * cfg.sampling_time - p.delay, cfg);
      if (g == 0.0) continue;
      tap_sum += g * std::exp(-kJ * (2.0 * kPi * k * d / cfg.num_subcarriers));
    }
    h += (p.gain * tap_sum) * array_response(p.azimuth, p.elevation, ula);
  }
  return h;
}

double received_power(const Eigen::VectorXcd& h, const Eigen::VectorXcd& f,
                      const OfdmConfig& cfg, std::mt19937_64& rng) {
  if (h.size() != f.size()) throw DomainError("received_power: h and f differ in length");
  const double tx_mw = std::pow(10.0, cfg.tx_power_dbm / 10.0);
  cd r = (h.transpose() * f)(0) * cfg.symbol * std::sqrt(tx_mw);
  if (cfg.noise_variance > 0) {
    const double sigma_mw = cfg.noise_variance * 1e3;
    std::normal_distribution<double> n(0.0, std::sqrt(sigma_mw / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    r += cd{re, im};
  }
  const double p = std::norm(r);
  if (!(p > 0)) return kPowerFloorDbm;
  return std::max(10.0 * std::log10(p), kPowerFloorDbm);
}

double knife_edge_loss(double v) {
  if (v <= -0.78) return 0.0;
  const double a = v - 0.1;
  return 6.9 + 20.0 * std::log10(std::sqrt(a * a + 1.0) + a);
}

double fresnel_parameter(double clearance, double d1, double d2, double wavelength) {
  return clearance * std::sqrt(2.0 * (d1 + d2) / (wavelength * d1 * d2));
}

Vec2 blocker_position(const ScenarioConfig& cfg, int n) {
  const auto& tr = cfg.trajectory;
  const Vec2 span = tr.end - tr.start;
  const double len = norm(span);
  const double travelled = std::min(tr.speed * n / cfg.sample_rate, len);
  return tr.start + (travelled / len) * span;
}

bool los_blocked(const ScenarioConfig& cfg, Vec2 blocker) {
  return project_on_link(cfg, blocker).distance < cfg.trajectory.blocker_radius;
}

std::vector<PathComponent> propagation_paths(const ScenarioConfig& cfg, Vec2 blocker,
                                             bool with_blocker) {
  const double lambda = cfg.ula.wavelength;
  const double link = norm(cfg.rx_pos - cfg.tx_pos);
  const double t0 = cfg.timing_advance_taps * cfg.ofdm.sampling_time;
  const auto delay_of = [&](double path_len) { return t0 + (path_len - link) / kSpeedOfLight; };
  const auto carrier = [&](double path_len) { return std::exp(-kJ * (2.0 * kPi * path_len / lambda)); };

  // The TX is omnidirectional; only the RX horn has a rear lobe.
  const double back_lobe = std::pow(10.0, -cfg.front_to_back_db / 20.0);
  const auto rear_factor = [&](Vec2 dir, Vec2 boresight) {
    return dot(dir, boresight) < 0.0 ? back_lobe : 1.0;
  };

  std::vector<PathComponent> paths;
  paths.reserve(6);

  // LOS, shadowed by the nearer cylinder edge.
  double los_amp = lambda / (4.0 * kPi * link);
  if (with_blocker) los_amp *= shadow_amplitude(cfg, cfg.tx_pos, cfg.rx_pos, blocker);
  paths.push_back({los_amp * carrier(link), delay_of(link), arrival_azimuth(cfg, cfg.tx_pos), 0.0});

  // Bistatic reflection off the cylinder: the radar equation with an
  // effective cross-section of 4 pi R^2, scaled by Gamma and a sqrt(cos)
  // incidence factor.
  if (with_blocker) {
    const Vec2 to_tx = cfg.tx_pos - blocker;
    const Vec2 to_rx = cfg.rx_pos - blocker;
    const double d1 = norm(to_tx);
    const double d2 = norm(to_rx);
    const double cos_bistatic = std::clamp(dot(to_tx, to_rx) / (d1 * d2), -1.0, 1.0);
    const double bistatic = std::acos(cos_bistatic);
    const double radius = cfg.trajectory.blocker_radius;
    // A specular point exists only where the arcs lit by TX and RX overlap.
    const double lit_limit =
        kPi - std::asin(std::min(radius / d1, 1.0)) - std::asin(std::min(radius / d2, 1.0));
    if (bistatic < lit_limit) {
      const double incidence = std::sqrt(std::max(std::cos(0.5 * bistatic), 0.0));
      const double amp =
          cfg.scatter_coefficient * lambda * radius / (4.0 * kPi * d1 * d2) * incidence;
      const double len = d1 + d2;
      paths.push_back({amp * carrier(len), delay_of(len), arrival_azimuth(cfg, blocker), 0.0});
    }
  }

  // First-order wall reflections via image sources. Walls are fixed in the
  // room; the testbed rotation turns them in the testbed frame.
  if (cfg.room.enabled) {
    const Vec2 pivot = 0.5 * (cfg.tx_pos + cfg.rx_pos);
    const double rot = -cfg.trajectory.testbed_rotation;
    const double hx = 0.5 * cfg.room.size_x;
    const double hy = 0.5 * cfg.room.size_y;
    const Vec2 rel = cfg.room.center - pivot;
    struct Wall { Vec2 point; Vec2 normal; };
    const std::array<Wall, 4> walls{{
        {{rel.x + hx, rel.y}, {1, 0}},
        {{rel.x - hx, rel.y}, {-1, 0}},
        {{rel.x, rel.y + hy}, {0, 1}},
        {{rel.x, rel.y - hy}, {0, -1}},
    }};
    for (const auto& wall : walls) {
      const Vec2 p = pivot + rotate(wall.point, rot);
      const Vec2 n = rotate(wall.normal, rot);
      const double dist = dot(cfg.tx_pos - p, n);
      const Vec2 image = cfg.tx_pos - (2.0 * dist) * n;
      const double len = norm(image - cfg.rx_pos);
      double amp = cfg.room.wall_reflectivity * lambda / (4.0 * kPi * len) *
                   rear_factor(image - cfg.rx_pos, cfg.tx_pos - cfg.rx_pos);
      if (with_blocker) {
        // Bounce point: where the image-to-RX ray meets the wall plane.
        const double di = dot(image - p, n);
        const double dr = dot(cfg.rx_pos - p, n);
        const Vec2 bounce = image + (di / (di - dr)) * (cfg.rx_pos - image);
        amp *= shadow_amplitude(cfg, cfg.tx_pos, bounce, blocker) *
               shadow_amplitude(cfg, bounce, cfg.rx_pos, blocker);
      }
      paths.push_back({amp * carrier(len), delay_of(len), arrival_azimuth(cfg, image), 0.0});
    }
  }
  return paths;
}

int best_beam(const ScenarioConfig& cfg) {
  const auto paths = propagation_paths(cfg, Vec2{}, /*with_blocker=*/false);
  const Eigen::VectorXcd h = channel_response(paths, cfg.subcarrier, cfg.ofdm, cfg.ula);
  int best = 0;
  double best_gain = -1.0;
  for (int w = 0; w < cfg.ula.codebook_size; ++w) {
    const double g = std::norm((h.transpose() * steering_vector(w, cfg.ula))(0));
    if (g > best_gain + 1e-15) {
      best_gain = g;
      best = w;
    }
  }
  return best;
}

RawSequencePair simulate_trajectory(const ScenarioConfig& cfg) {
  cfg.validate();
  const int n = cfg.num_samples();
  const int beam = best_beam(cfg);
  const Eigen::VectorXcd f = steering_vector(beam, cfg.ula);
  std::mt19937_64 rng(cfg.seed);

  RawSequencePair out;
  out.power.resize(n);
  out.status.resize(n);
  out.meta.scenario = cfg;
  out.meta.beam_index = beam;
  for (int i = 0; i < n; ++i) {
    const Vec2 b = blocker_position(cfg, i);
    const auto paths = propagation_paths(cfg, b);
    const Eigen::VectorXcd h = channel_response(paths, cfg.subcarrier, cfg.ofdm, cfg.ula);
    out.power[i] = received_power(h, f, cfg.ofdm, rng);
    out.status[i] = los_blocked(cfg, b) ? 1 : 0;
  }
  return out;
}

}  // namespace mmblock::channel
