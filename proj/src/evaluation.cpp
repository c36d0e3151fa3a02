#include "percept/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/binomial.hpp>

#include "percept/error.hpp"
#include "percept/numerics.hpp"

namespace percept {

double pit_value(double observed, std::span<const double> draws, Rng& rng, PitMode mode) {
  if (draws.empty()) throw DomainError("pit_value: no draws");
  std::size_t less = 0, equal = 0;
  for (double d : draws) {
    if (d < observed) ++less;
    else if (d == observed) ++equal;
  }
  // The observation is ranked among the n draws plus itself, which makes the
  // randomized value exactly uniform when it is exchangeable with the draws.
  const double u = mode == PitMode::Randomized ? uniform_open(rng) : 0.5;
  return (double(less) + u * double(equal + 1)) / double(draws.size() + 1);
}

std::vector<double> pit_values(std::span<const double> observed,
                               const std::vector<std::vector<double>>& draws, Rng& rng,
                               PitMode mode) {
  if (observed.size() != draws.size()) throw DomainError("pit_values: inputs not aligned");
  std::vector<double> out(observed.size());
  for (std::size_t i = 0; i < observed.size(); ++i) out[i] = pit_value(observed[i], draws[i], rng, mode);
  return out;
}

namespace {

// tail[k][c]: two-sided binomial tail probability of count c at grid point k.
std::vector<std::vector<double>> binomial_tails(std::size_t n, const std::vector<double>& grid) {
  std::vector<std::vector<double>> tail(grid.size(), std::vector<double>(n + 1));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const boost::math::binomial_distribution<double> b(double(n), grid[k]);
    for (std::size_t c = 0; c <= n; ++c) {
      const double lo = boost::math::cdf(b, double(c));
      const double hi = c == 0 ? 1.0 : boost::math::cdf(boost::math::complement(b, double(c - 1)));
      tail[k][c] = std::min(1.0, 2.0 * std::min(lo, hi));
    }
  }
  return tail;
}

std::size_t count_at_most(const std::vector<double>& sorted, double z) {
  return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), z) - sorted.begin());
}

}  // namespace

EcdfBand pit_ecdf_band(std::size_t n_obs, double alpha, std::size_t n_sim, std::uint64_t seed,
                       std::size_t n_grid) {
  if (n_obs < 1) throw DomainError("pit_ecdf_band: n_obs must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("pit_ecdf_band: alpha must be in (0, 1]");
  if (n_sim < 1000) throw DomainError("pit_ecdf_band: n_sim must be >= 1000");
  if (n_grid < 2) throw DomainError("pit_ecdf_band: n_grid must be >= 2");
  EcdfBand band;
  for (std::size_t k = 1; k < n_grid; ++k) band.grid.push_back(double(k) / double(n_grid));
  if (alpha >= 1.0) {
    band.lower = band.grid;
    band.upper = band.grid;
    band.pointwise_level = 1.0;
    return band;
  }

  const auto tail = binomial_tails(n_obs, band.grid);
  // Smallest pointwise tail probability reached by each simulated sample.
  std::vector<double> minima(n_sim);
  numerics::parallel_for(n_sim, [&](std::size_t s) {
    Rng rng = make_rng(seed, "ecdf-band", s);
    std::vector<double> u(n_obs);
    for (double& v : u) v = uniform_open(rng);
    std::sort(u.begin(), u.end());
    double m = 1.0;
    for (std::size_t k = 0; k < band.grid.size(); ++k)
      m = std::min(m, tail[k][count_at_most(u, band.grid[k])]);
    minima[s] = m;
  });
  std::sort(minima.begin(), minima.end());
  const double gamma = numerics::quantile_sorted(minima, alpha);
  band.pointwise_level = gamma;
  for (std::size_t k = 0; k < band.grid.size(); ++k) {
    std::size_t lo = n_obs, hi = 0;
    for (std::size_t c = 0; c <= n_obs; ++c) {
      if (tail[k][c] >= gamma) {
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
    }
    if (lo > hi) lo = hi = static_cast<std::size_t>(std::lround(band.grid[k] * double(n_obs)));
    band.lower.push_back(double(lo) / double(n_obs));
    band.upper.push_back(double(hi) / double(n_obs));
  }
  return band;
}

bool ecdf_inside(std::span<const double> pits, const EcdfBand& band) {
  std::vector<double> sorted(pits.begin(), pits.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = double(sorted.size());
  for (std::size_t k = 0; k < band.grid.size(); ++k) {
    const double f = double(count_at_most(sorted, band.grid[k])) / n;
    if (f < band.lower[k] - 1e-12 || f > band.upper[k] + 1e-12) return false;
  }
  return true;
}

std::vector<double> interval_coverage(std::span<const double> observed,
                                      const std::vector<std::vector<double>>& draws,
                                      std::span<const double> levels) {
  if (observed.size() != draws.size()) throw DomainError("interval_coverage: inputs not aligned");
  std::vector<double> hits(levels.size(), 0.0);
  if (levels.empty() || observed.empty()) return hits;
  std::vector<double> sorted;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (draws[i].empty()) throw DomainError("interval_coverage: empty draws");
    sorted.assign(draws[i].begin(), draws[i].end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const double lo = numerics::quantile_sorted(sorted, 0.5 - 0.5 * levels[l]);
      const double hi = numerics::quantile_sorted(sorted, 0.5 + 0.5 * levels[l]);
      if (observed[i] >= lo && observed[i] <= hi) hits[l] += 1.0;
    }
  }
  for (double& h : hits) h /= double(observed.size());
  return hits;
}

KsResult ks_uniform(std::vector<double> values) {
  if (values.empty()) throw DomainError("ks_uniform: no values");
  std::sort(values.begin(), values.end());
  KsResult r;
  r.statistic = numerics::ks_statistic(values, [](double x) { return std::clamp(x, 0.0, 1.0); });
  r.p_value = numerics::ks_pvalue(r.statistic, values.size());
  return r;
}

std::vector<DistanceBin> error_distance_summary(std::span<const ProjectionObs> obs,
                                                const ProjectionParams& params, std::size_t n_bins) {
  if (n_bins < 1) throw DomainError("error_distance_summary: n_bins must be >= 1");
  std::vector<ProjectionObs> sorted(obs.begin(), obs.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ProjectionObs& a, const ProjectionObs& b) { return a.distance < b.distance; });
  std::vector<DistanceBin> bins;
  const std::size_t n = sorted.size();
  n_bins = std::min(n_bins, std::max<std::size_t>(n, 1));
  for (std::size_t b = 0; b < n_bins && n > 0; ++b) {
    const std::size_t lo = b * n / n_bins, hi = (b + 1) * n / n_bins;
    if (hi <= lo) continue;
    DistanceBin bin;
    bin.d_lo = sorted[lo].distance;
    bin.d_hi = sorted[hi - 1].distance;
    bin.n = hi - lo;
    double sd = 0.0, ss = 0.0, dd = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double e = sorted[i].error - params.beta;
      ss += e * e;
      sd += sorted[i].distance;
      dd += sorted[i].distance * sorted[i].distance;
    }
    bin.d_mid = sd / double(bin.n);
    bin.empirical_sd = std::sqrt(ss / double(bin.n));
    // Root-mean-square distance, so both columns estimate the same quantity.
    bin.model_sd = params.alpha * std::sqrt(dd / double(bin.n));
    bin.sparse = bin.n < 3;
    bins.push_back(bin);
  }
  return bins;
}

DensityOverlay density_overlay(std::span<const double> observed,
                               const std::vector<std::vector<double>>& replicates,
                               std::size_t n_grid) {
  if (observed.empty()) throw DomainError("density_overlay: no observations");
  if (n_grid < 2) throw DomainError("density_overlay: n_grid must be >= 2");
  std::vector<double> obs_sorted(observed.begin(), observed.end());
  std::sort(obs_sorted.begin(), obs_sorted.end());
  const double h_obs = numerics::silverman_bandwidth(obs_sorted);
  double lo = obs_sorted.front(), hi = obs_sorted.back();
  for (const auto& r : replicates) {
    for (double v : r) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  lo -= 3.0 * h_obs;
  hi += 3.0 * h_obs;
  DensityOverlay out;
  for (std::size_t g = 0; g < n_grid; ++g) out.grid.push_back(lo + (hi - lo) * double(g) / double(n_grid - 1));
  auto kde = [&](const std::vector<double>& sorted) {
    const double h = numerics::silverman_bandwidth(sorted);
    std::vector<double> dens;
    for (double x : out.grid) dens.push_back(std::exp(numerics::kde_log_density(sorted, h, x)));
    return dens;
  };
  out.observed = kde(obs_sorted);
  for (const auto& r : replicates) {
    if (r.empty()) throw DomainError("density_overlay: empty replicate");
    std::vector<double> s = r;
    std::sort(s.begin(), s.end());
    out.draws.push_back(kde(s));
  }
  return out;
}

}  // namespace percept
