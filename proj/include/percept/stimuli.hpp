#pragma once

// Stimulus generators (SGT curves, GBM scatter series, projection dots) and
// scatter-stimulus JSON import/export.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "percept/curves.hpp"
#include "percept/distributions.hpp"
#include "percept/perceptual_space.hpp"
#include "percept/rng.hpp"

namespace percept {

struct ScatterPoint {
  double x;
  double y;
};

struct ScatterCondition {
  std::string mark = "point";  // point | pointArc
  double variability = 0.0;    // 0 | 0.4
  std::string position = "upper";
  std::uint64_t seed = 0;
};

struct ScatterStimulus {
  static constexpr std::size_t kPoints = 60;

  std::string id;
  ScatterCondition condition;
  std::vector<ScatterPoint> points;
  double true_mean = 0.0;

  // Throws SchemaError on a wrong point count or non-increasing x (point mark).
  void validate() const;
  double x_min() const;
  double x_max() const;
};

void to_json(nlohmann::json& j, const ScatterStimulus& s);
// Strict parse; errors name the offending field. Mismatched true_mean values
// are replaced by the recomputed mean and reported through `warnings`.
ScatterStimulus scatter_from_json(const nlohmann::json& j, std::vector<std::string>* warnings = nullptr);

std::vector<ScatterStimulus> import_scatter_stimuli(const std::string& path,
                                                    std::vector<std::string>* warnings = nullptr);
std::vector<ScatterStimulus> parse_scatter_stimuli(const nlohmann::json& doc,
                                                   std::vector<std::string>* warnings = nullptr);
nlohmann::json export_scatter_stimuli(const std::vector<ScatterStimulus>& stimuli);

// --- SGT curve stimuli -------------------------------------------------------------

struct SgtStimulus {
  std::string id;
  StimulusCurve pdf;
  StimulusCurve cdf;
  TruthValues truth;
};

// Curve pair over [-5, 5]; truths computed in the given viewing context.
SgtStimulus gen_sgt_stimulus(Rng& rng, const std::string& id,
                             const ViewingContext& ctx = ViewingContext::curve_chart(),
                             const SgtSamplingOptions& opts = {});
std::vector<SgtStimulus> gen_sgt_set(std::size_t n, std::uint64_t seed,
                                     const ViewingContext& ctx = ViewingContext::curve_chart());

nlohmann::json export_sgt_stimuli(const std::vector<SgtStimulus>& stimuli);
std::vector<SgtStimulus> parse_sgt_stimuli(const nlohmann::json& doc,
                                           const ViewingContext& ctx = ViewingContext::curve_chart());

// --- GBM scatter series ----------------------------------------------------------------

struct GbmOptions {
  std::size_t n = ScatterStimulus::kPoints;
  double drift = 0.0;
  double volatility = 0.1;   // per step, log scale
  double base_scale = 10.0;  // noise sd at full variability, data units
  double y_lo = 30.0;        // walk rescaled into [y_lo, y_hi]
  double y_hi = 70.0;
};

// Base walk from `walk_rng`, noise from `noise_rng`; the two are kept apart so
// conditions that differ only in variability share the same walk.
ScatterStimulus gen_gbm_series(Rng& walk_rng, Rng& noise_rng, double variability,
                               const std::string& position, const GbmOptions& opts = {});
// Seeded convenience form: streams derived from `seed`.
ScatterStimulus gen_gbm_series(std::uint64_t seed, double variability, const std::string& position,
                               const GbmOptions& opts = {});

// 2 variability x 2 position x n_seeds stimuli.
std::vector<ScatterStimulus> gen_moritz_set(std::uint64_t seed, std::size_t n_seeds = 12,
                                            const GbmOptions& opts = {});

// --- projection dots ----------------------------------------------------------------

// Dot drawn uniformly over the chart's pixel box, returned in data units.
ScatterPoint gen_projection_dot(Rng& rng, const ViewingContext& ctx);

}  // namespace percept
