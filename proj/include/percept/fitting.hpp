#pragma once

// Per-participant maximum-likelihood fitting of operator parameters, exact
// leave-one-out comparison of error families, bootstrap standard errors and
// two-stage pooling across participants.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "percept/curves.hpp"
#include "percept/operators.hpp"
#include "percept/perceptual_space.hpp"

namespace percept {

struct TrialRecord {
  std::string participant_id;
  std::string task;
  std::string trial_id;
  std::string stim_id;
  ViewingContext context;
  double true_x = 0.0;
  double true_y = 0.0;
  double resp_x = 0.0;
  double resp_y = 0.0;
  std::string condition;
};

struct FitResult {
  OperatorParams params;
  double log_likelihood = 0.0;
  std::size_t n_trials = 0;
  std::map<std::string, double> bootstrap_se;
  std::vector<std::string> flags;
  bool converged = true;

  bool has_flag(const std::string& f) const;
};

std::map<std::string, double> named_params(const OperatorParams& p);

// --- exclusion ---------------------------------------------------------------

struct ExclusionRules {
  double min_correlation = 0.5;
  double min_distance_cm = 20.0;
};

struct ParticipantScreen {
  std::string participant_id;
  double correlation = 0.0;
  double distance_cm = 0.0;
  std::vector<std::string> reasons;  // "correlation", "distance"; empty if kept
};

struct ExclusionReport {
  std::vector<TrialRecord> kept;
  std::vector<TrialRecord> excluded;
  std::vector<ParticipantScreen> participants;
};

// Drops whole participants whose responses correlate with the truth below
// the threshold, or whose viewing distance is below the minimum.
ExclusionReport exclusion_filter(std::span<const TrialRecord> trials,
                                 const ExclusionRules& rules = {});

// --- observations in visual-angle space ----------------------------------------

struct ProjectionObs {
  double error;     // signed va error, degrees
  double distance;  // projection distance, degrees
};

struct FusionObs {
  double theta_median;
  double theta_mode;
  double response;
};

// Looks up stimulus curves by stim_id (needed for slope and fusion tasks).
using StimulusLookup = std::function<const StimulusCurve*(const std::string&)>;

ProjectionObs projection_observation(const TrialRecord& t, OperatorTag tag);
// Non-negative Weibull error for highest_point / max_slope trials.
double weibull_observation(const TrialRecord& t, OperatorTag tag, const StimulusLookup& stimuli);
// Signed x error (degrees) for highest_point_x / bisect_area trials.
double gaussian_observation(const TrialRecord& t);
FusionObs fusion_observation(const TrialRecord& t, const StimulusLookup& stimuli);

// --- estimators ----------------------------------------------------------------

FitResult fit_projection(std::span<const ProjectionObs> obs);
FitResult fit_weibull_error(std::span<const double> errors);
FitResult fit_gaussian_error(std::span<const double> errors);
FitResult fit_bahp(std::span<const FusionObs> obs, const GaussianOpParams& hp_fixed);
FitResult fit_mixture(std::span<const FusionObs> obs, const GaussianOpParams& hp_fixed);

double projection_log_likelihood(std::span<const ProjectionObs> obs, const ProjectionParams& p);
double bahp_log_likelihood(std::span<const FusionObs> obs, const BahpParams& p);
double mixture_log_likelihood(std::span<const FusionObs> obs, const MixtureParams& p);

// --- leave-one-out ----------------------------------------------------------------

enum class ErrorFamily { Weibull, Exponential, Gaussian, LogNormal, Laplace };
std::string to_string(ErrorFamily f);
ErrorFamily error_family_from_string(const std::string& s);

struct LooEntry {
  ErrorFamily family;
  double elpd = 0.0;  // sum of held-out log densities
  bool usable = true;
  std::string failure;
};

// Exact leave-one-out: every point scored under the family refit without it.
// Usable families ranked first, by descending elpd.
std::vector<LooEntry> loo_compare(std::span<const double> errors,
                                  std::span<const ErrorFamily> families);

// Fitted log density for one family (also used for the held-out scoring).
std::function<double(double)> fit_family(ErrorFamily family, std::span<const double> data);

// --- per-participant driver ---------------------------------------------------

struct FitOptions {
  int bootstrap_replicates = 500;
  std::uint64_t seed = 0;
  std::optional<GaussianOpParams> hp_fixed;  // required for bahp / mixture
};

struct ParticipantFit {
  std::string participant_id;
  FitResult fit;
};

// Fits one participant's trials for `tag`; bootstrap replicates draw from the
// stream derived from (seed, participant id, replicate).
FitResult fit_participant(OperatorTag tag, const std::string& participant_id,
                          std::span<const TrialRecord> trials, const StimulusLookup& stimuli,
                          const FitOptions& opts);

// All participants, in first-appearance order; may run concurrently.
std::vector<ParticipantFit> fit_all(OperatorTag tag, std::span<const TrialRecord> trials,
                                    const StimulusLookup& stimuli, const FitOptions& opts);

// --- pooling ---------------------------------------------------------------------

struct ParameterPool {
  double mean = 0.0;
  double sd = 0.0;
  double tau2 = 0.0;  // between-participant variance net of sampling noise
};

struct PopulationSummary {
  std::map<std::string, ParameterPool> parameters;
  // participant id -> parameter -> shrunken estimate
  std::vector<std::pair<std::string, std::map<std::string, double>>> shrunken;
};

PopulationSummary pool_participants(std::span<const ParticipantFit> fits);

}  // namespace percept
