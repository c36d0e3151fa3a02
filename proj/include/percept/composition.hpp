#pragma once

// Composition of projection operators into mean-estimation strategies on
// scatterplots, and scoring of observed responses against the predictions.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "percept/operators.hpp"
#include "percept/perceptual_space.hpp"
#include "percept/stimuli.hpp"

namespace percept {

enum class Path { Once, Twice };
enum class Aggregation { Mean, Median, WeightedMean };

struct Strategy {
  Path path = Path::Once;
  Aggregation agg = Aggregation::Mean;

  bool operator==(const Strategy&) const = default;
  static std::vector<Strategy> all();
};

// "once:mean", "twice:weighted", ...
std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

inline constexpr std::array<double, 7> kSummaryQuantiles = {0.025, 0.10, 0.25, 0.50,
                                                            0.75,  0.90, 0.975};

struct PredictiveSummary {
  double mean = 0.0;
  double sd = 0.0;
  std::array<double, 7> quantiles{};
};

struct PredictiveDistribution {
  std::vector<double> draws;  // data units
  PredictiveSummary summary() const;
};

struct CompositionOptions {
  // Twice-path reference line; defaults to the stimulus x-domain midpoint.
  std::optional<double> midpoint;
};

// A stimulus with its per-point visual angles and projection distances
// precomputed, so that many draws (and many parameter sets) are cheap.
class ComposedStimulus {
 public:
  ComposedStimulus(const ScatterStimulus& stim, const ViewingContext& ctx,
                   const CompositionOptions& opts = {});

  std::size_t n_points() const { return va_y_.size(); }
  // Standard-normal inputs consumed by one draw: one per point plus one for
  // the second Twice stage.
  std::size_t noise_size() const { return va_y_.size() + 1; }
  double midpoint() const { return midpoint_; }

  // One response (data units) from the given standard-normal inputs.
  double draw(const ProjectionParams& proj, Strategy strategy, std::span<const double> z) const;
  // Aggregate without noise or bias, in visual angle.
  double noiseless_va(Strategy strategy, const ProjectionParams& proj) const;
  const std::vector<double>& distances(Path path) const {
    return path == Path::Once ? d_once_ : d_twice_;
  }
  double second_stage_distance() const { return d_mid_; }

 private:
  double aggregate(std::span<const double> values, std::span<const double> d, Aggregation agg,
                   const ProjectionParams& proj) const;

  ViewingContext ctx_;
  double midpoint_;
  std::vector<double> va_y_;
  std::vector<double> d_once_;
  std::vector<double> d_twice_;
  double d_mid_;
};

// Block of standard-normal draws (n_draws x noise_size), reproducible from
// (seed, key) whatever the thread count.
std::vector<double> draw_noise(std::size_t n_draws, std::size_t noise_size, std::uint64_t seed,
                               const std::string& key);

// Predictive distribution of one participant's mean estimate. Streams are
// keyed by (seed, stimulus id, strategy).
// Sampling uncertainty of a fitted projection operator. Each predictive draw
// then uses beta ~ N(beta, se_beta) and alpha * exp(N(0, se_alpha / alpha)),
// so the predictions carry parameter uncertainty and not only response noise.
struct ProjectionUncertainty {
  double se_beta = 0.0;
  double se_alpha = 0.0;
  bool none() const { return se_beta == 0.0 && se_alpha == 0.0; }
};

ProjectionParams perturb_params(const ProjectionParams& p, const ProjectionUncertainty& u, double z_beta,
                                double z_alpha);

// With no uncertainty the parameter stream is never drawn, so plug-in
// predictions stay identical to the plain version.
PredictiveDistribution predict_mean_estimate(const ScatterStimulus& stim, const ViewingContext& ctx,
                                             const ProjectionParams& proj, Strategy strategy,
                                             std::size_t n_draws, std::uint64_t seed,
                                             const CompositionOptions& opts = {},
                                             const ProjectionUncertainty& uncertainty = {});

struct StrategyScore {
  std::string strategy;
  double mean_log_density = 0.0;
  std::vector<double> coverage;  // per level
  int rank = 0;                  // 1 = best; tied scores share a rank
};

// `predictions[s][i]` are the draws for observation i under strategy s.
// Returned in rank order (ties keep input order).
std::vector<StrategyScore> compare_strategies(std::span<const double> observed,
                                              std::span<const std::string> strategy_names,
                                              const std::vector<std::vector<std::vector<double>>>& predictions,
                                              std::span<const double> levels = std::array{0.5, 0.8, 0.95});

}  // namespace percept
