#pragma once

// Synthetic trial generation from known operator parameters.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "percept/composition.hpp"
#include "percept/fitting.hpp"
#include "percept/operators.hpp"
#include "percept/stimuli.hpp"

namespace percept {

using ParticipantParams = std::vector<std::pair<std::string, OperatorParams>>;

struct SimulationOptions {
  std::size_t trials_per_participant = 48;
  std::uint64_t seed = 0;
  SideRule side_rule = SideRule::FlankSlope;
  std::string condition;
};

// Operator trials. Projection-to-axis tasks place dots uniformly over the
// chart; curve tasks cycle through `curves` (which must be non-empty).
std::vector<TrialRecord> simulate_operator_trials(OperatorTag tag, const ParticipantParams& participants,
                                                  const std::vector<SgtStimulus>& curves,
                                                  const ViewingContext& ctx,
                                                  const SimulationOptions& opts);

// One mean-estimate trial per participant and stimulus, under `strategy`.
std::vector<TrialRecord> simulate_mean_estimates(const ParticipantParams& participants,
                                                 const std::vector<ScatterStimulus>& stimuli,
                                                 const ViewingContext& ctx, Strategy strategy,
                                                 std::uint64_t seed,
                                                 const CompositionOptions& comp = {});

inline const char* kMeanEstimateTask = "mean_estimate";

}  // namespace percept
