// SPDX-License-Identifier: Apache-2.0
#include "mmblock/campaign.hpp"

#include "mmblock/errors.hpp"

namespace mmblock::channel {

void CampaignConfig::validate() const {
  if (num_runs < 1) throw ConfigError("campaign: num_runs must be >= 1");
  if (num_lanes < 1) throw ConfigError("campaign: num_lanes must be >= 1");
}

ScenarioConfig campaign_run_config(const ScenarioConfig& base, const CampaignConfig& campaign,
                                   int index) {
  ScenarioConfig cfg = base;
  const int lane = index % campaign.num_lanes;
  const int cycle = index / campaign.num_lanes;

  // Lanes are offset perpendicular to the direction of motion.
  const Vec2 motion = base.trajectory.end - base.trajectory.start;
  const double len = norm(motion);
  const Vec2 offset = (lane * campaign.lane_spacing / len) * Vec2{motion.y, -motion.x};
  cfg.trajectory.start = base.trajectory.start + offset;
  cfg.trajectory.end = base.trajectory.end + offset;
  if (index % 2 == 1) std::swap(cfg.trajectory.start, cfg.trajectory.end);

  cfg.trajectory.testbed_rotation = base.trajectory.testbed_rotation + cycle * campaign.rotation_step;
  cfg.seed = base.seed + static_cast<std::uint64_t>(index);
  return cfg;
}

std::vector<RawSequencePair> generate_campaign(const ScenarioConfig& base,
                                               const CampaignConfig& campaign) {
  campaign.validate();
  std::vector<RawSequencePair> runs;
  runs.reserve(campaign.num_runs);
  for (int i = 0; i < campaign.num_runs; ++i) {
    auto pair = simulate_trajectory(campaign_run_config(base, campaign, i));
    pair.meta.run_id = i;
    runs.push_back(std::move(pair));
  }
  return runs;
}

std::vector<RawSequencePair> generate_campaign(const ScenarioConfig& base, int num_runs,
                                               double rotation_step) {
  CampaignConfig c;
  c.num_runs = num_runs;
  c.rotation_step = rotation_step;
  return generate_campaign(base, c);
}

}  // namespace mmblock::channel
