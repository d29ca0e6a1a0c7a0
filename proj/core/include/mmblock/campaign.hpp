// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <numbers>
#include <vector>

#include "mmblock/channel_sim.hpp"

namespace mmblock::channel {

/// Measurement campaign layout: the blocker sweeps `num_lanes` parallel
/// lanes `lane_spacing` metres apart, alternating direction on each lane.
/// After every full set of lanes the testbed turns by `rotation_step`.
struct CampaignConfig {
  int num_runs = 158;
  double rotation_step = std::numbers::pi / 180.0;
  int num_lanes = 5;
  double lane_spacing = 1.0;

  void validate() const;
  friend bool operator==(const CampaignConfig&, const CampaignConfig&) = default;
};

/// Scenario of run `index`. Run 0 is `base` unchanged.
ScenarioConfig campaign_run_config(const ScenarioConfig& base, const CampaignConfig& campaign,
                                   int index);

std::vector<RawSequencePair> generate_campaign(const ScenarioConfig& base,
                                               const CampaignConfig& campaign);

std::vector<RawSequencePair> generate_campaign(const ScenarioConfig& base, int num_runs,
                                               double rotation_step);

}  // namespace mmblock::channel
