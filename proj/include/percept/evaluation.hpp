#pragma once

// Calibration and fit diagnostics: PIT values, simultaneous PIT-ECDF bands,
// interval coverage, error-vs-distance tables and density-overlay tables.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "percept/fitting.hpp"
#include "percept/rng.hpp"

namespace percept {

enum class PitMode {
  Randomized,  // ties and the draw grid smoothed with a uniform
  Mid,         // deterministic mid-rank
};

// PIT of one observation against its predictive draws.
double pit_value(double observed, std::span<const double> draws, Rng& rng,
                 PitMode mode = PitMode::Randomized);
std::vector<double> pit_values(std::span<const double> observed,
                               const std::vector<std::vector<double>>& draws, Rng& rng,
                               PitMode mode = PitMode::Randomized);

struct EcdfBand {
  std::vector<double> grid;   // evaluation points in [0, 1]
  std::vector<double> lower;  // simultaneous envelope for the ECDF
  std::vector<double> upper;
  double pointwise_level = 0.0;  // adjusted per-point tail probability
};

// Simultaneous (1 - alpha) envelope for the ECDF of n_obs uniform values,
// evaluated at `n_grid` equally spaced points.
EcdfBand pit_ecdf_band(std::size_t n_obs, double alpha, std::size_t n_sim, std::uint64_t seed,
                       std::size_t n_grid = 100);
// True when the ECDF of `pits` lies inside the band at every grid point.
bool ecdf_inside(std::span<const double> pits, const EcdfBand& band);

// Fraction of observations inside each central interval of their draws.
std::vector<double> interval_coverage(std::span<const double> observed,
                                      const std::vector<std::vector<double>>& draws,
                                      std::span<const double> levels);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
KsResult ks_uniform(std::vector<double> values);

struct DistanceBin {
  double d_lo = 0.0;
  double d_hi = 0.0;
  double d_mid = 0.0;  // mean distance of the members
  std::size_t n = 0;
  double empirical_sd = 0.0;
  double model_sd = 0.0;  // alpha * RMS distance of the members
  bool sparse = false;    // fewer than 3 members
};

// Equal-count bins over distance; the empirical SD is taken about beta.
std::vector<DistanceBin> error_distance_summary(std::span<const ProjectionObs> obs,
                                                const ProjectionParams& params,
                                                std::size_t n_bins = 10);

struct DensityOverlay {
  std::vector<double> grid;
  std::vector<double> observed;             // KDE of the observations
  std::vector<std::vector<double>> draws;   // one KDE per predictive replicate
};

// `replicates[r]` is one simulated dataset the size of `observed`.
DensityOverlay density_overlay(std::span<const double> observed,
                               const std::vector<std::vector<double>>& replicates,
                               std::size_t n_grid = 128);

}  // namespace percept
