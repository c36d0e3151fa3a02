#include "percept/composition.hpp"

#include <algorithm>
#include <cmath>

#include "percept/error.hpp"
#include "percept/evaluation.hpp"
#include "percept/numerics.hpp"
#include "percept/rng.hpp"

namespace percept {

namespace {

constexpr std::size_t kNoiseBlock = 256;

double median_inplace(std::vector<double>& v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

}  // namespace

std::vector<Strategy> Strategy::all() {
  std::vector<Strategy> out;
  for (Path p : {Path::Once, Path::Twice})
    for (Aggregation a : {Aggregation::Mean, Aggregation::Median, Aggregation::WeightedMean})
      out.push_back({p, a});
  return out;
}

std::string to_string(Strategy s) {
  std::string out = s.path == Path::Once ? "once:" : "twice:";
  switch (s.agg) {
    case Aggregation::Mean: return out + "mean";
    case Aggregation::Median: return out + "median";
    case Aggregation::WeightedMean: return out + "weighted";
  }
  return out;
}

Strategy strategy_from_string(const std::string& s) {
  for (const auto& st : Strategy::all())
    if (to_string(st) == s) return st;
  throw DomainError("unknown strategy \"" + s + "\" (expected {once|twice}:{mean|median|weighted})");
}

PredictiveSummary PredictiveDistribution::summary() const {
  if (draws.empty()) throw DomainError("predictive summary: no draws");
  PredictiveSummary s;
  s.mean = numerics::mean(draws);
  s.sd = draws.size() > 1 ? numerics::stddev(draws) : 0.0;
  std::vector<double> sorted = draws;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < kSummaryQuantiles.size(); ++i)
    s.quantiles[i] = numerics::quantile_sorted(sorted, kSummaryQuantiles[i]);
  return s;
}

ComposedStimulus::ComposedStimulus(const ScatterStimulus& stim, const ViewingContext& ctx,
                                   const CompositionOptions& opts)
    : ctx_(ctx) {
  ctx.validate();
  if (stim.points.empty()) throw DomainError("composition: stimulus has no points");
  midpoint_ = opts.midpoint ? *opts.midpoint : 0.5 * (stim.x_min() + stim.x_max());
  for (const auto& p : stim.points) {
    va_y_.push_back(value_to_va(p.y, Axis::Y, ctx));
    d_once_.push_back(std::abs(value_to_va(p.x, Axis::X, ctx)));
    d_twice_.push_back(data_to_va(std::abs(p.x - midpoint_), Axis::X, ctx).degrees);
  }
  d_mid_ = std::abs(value_to_va(midpoint_, Axis::X, ctx));
}

double ComposedStimulus::aggregate(std::span<const double> values, std::span<const double> d,
                                   Aggregation agg, const ProjectionParams& proj) const {
  switch (agg) {
    case Aggregation::Mean:
      return numerics::mean(values);
    case Aggregation::Median: {
      std::vector<double> v(values.begin(), values.end());
      return median_inplace(v);
    }
    case Aggregation::WeightedMean: {
      // Inverse-MSE weights; points with zero MSE take all the weight.
      double sw = 0.0, swv = 0.0;
      std::size_t n_exact = 0;
      double exact_sum = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double s = proj.alpha * d[i];
        const double mse = proj.beta * proj.beta + s * s;
        if (mse == 0.0) {
          ++n_exact;
          exact_sum += values[i];
        } else {
          sw += 1.0 / mse;
          swv += values[i] / mse;
        }
      }
      if (n_exact > 0) return exact_sum / double(n_exact);
      return swv / sw;
    }
  }
  throw DomainError("unknown aggregation");
}

double ComposedStimulus::draw(const ProjectionParams& proj, Strategy strategy,
                              std::span<const double> z) const {
  if (z.size() < noise_size()) throw DomainError("composition: noise block too short");
  const auto& d = distances(strategy.path);
  const std::size_t n = va_y_.size();
  thread_local std::vector<double> values;
  values.resize(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = va_y_[i] + proj.beta + proj.alpha * d[i] * z[i];
  double va = aggregate(values, d, strategy.agg, proj);
  if (strategy.path == Path::Twice) va += proj.beta + proj.alpha * d_mid_ * z[n];
  return va_to_value(va, Axis::Y, ctx_);
}

double ComposedStimulus::noiseless_va(Strategy strategy, const ProjectionParams& proj) const {
  return aggregate(va_y_, distances(strategy.path), strategy.agg, proj);
}

std::vector<double> draw_noise(std::size_t n_draws, std::size_t noise_size, std::uint64_t seed,
                               const std::string& key) {
  std::vector<double> z(n_draws * noise_size);
  const std::size_t n_blocks = (n_draws + kNoiseBlock - 1) / kNoiseBlock;
  const std::uint64_t stream = derive_seed(seed, "composition-noise", hash_id(key));
  numerics::parallel_for(n_blocks, [&](std::size_t b) {
    Rng rng(derive_seed(stream, "block", b));
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t end = std::min(n_draws, (b + 1) * kNoiseBlock) * noise_size;
    for (std::size_t k = b * kNoiseBlock * noise_size; k < end; ++k) z[k] = normal(rng);
  });
  return z;
}

ProjectionParams perturb_params(const ProjectionParams& p, const ProjectionUncertainty& u, double z_beta,
                                double z_alpha) {
  if (u.se_beta < 0.0 || u.se_alpha < 0.0) throw DomainError("perturb_params: standard errors must be >= 0");
  ProjectionParams q = p;
  q.beta += u.se_beta * z_beta;
  if (p.alpha > 0.0) q.alpha *= std::exp(u.se_alpha / p.alpha * z_alpha);
  return q;
}

PredictiveDistribution predict_mean_estimate(const ScatterStimulus& stim, const ViewingContext& ctx,
                                             const ProjectionParams& proj, Strategy strategy,
                                             std::size_t n_draws, std::uint64_t seed,
                                             const CompositionOptions& opts,
                                             const ProjectionUncertainty& uncertainty) {
  if (n_draws < 1) throw DomainError("predict_mean_estimate: n_draws must be >= 1");
  proj.validate();
  const ComposedStimulus cs(stim, ctx, opts);
  const std::size_t m = cs.noise_size();
  const std::string key = stim.id + "/" + to_string(strategy);
  const auto z = draw_noise(n_draws, m, seed, key);
  std::vector<double> zp;
  if (!uncertainty.none()) zp = draw_noise(n_draws, 2, seed, key + "/params");
  PredictiveDistribution out;
  out.draws.resize(n_draws);
  for (std::size_t i = 0; i < n_draws; ++i) {
    const ProjectionParams p = zp.empty() ? proj : perturb_params(proj, uncertainty, zp[2 * i], zp[2 * i + 1]);
    out.draws[i] = cs.draw(p, strategy, std::span<const double>(z).subspan(i * m, m));
  }
  return out;
}

std::vector<StrategyScore> compare_strategies(std::span<const double> observed,
                                              std::span<const std::string> strategy_names,
                                              const std::vector<std::vector<std::vector<double>>>& predictions,
                                              std::span<const double> levels) {
  if (strategy_names.size() != predictions.size())
    throw DomainError("compare_strategies: names and predictions differ in length");
  std::vector<StrategyScore> scores;
  for (std::size_t s = 0; s < predictions.size(); ++s) {
    const auto& per_obs = predictions[s];
    if (per_obs.size() != observed.size())
      throw DomainError("compare_strategies: predictions for " + strategy_names[s] +
                        " not aligned with the observations");
    StrategyScore sc;
    sc.strategy = strategy_names[s];
    double total = 0.0;
    std::vector<double> sorted;
    for (std::size_t i = 0; i < observed.size(); ++i) {
      if (per_obs[i].empty()) throw DomainError("compare_strategies: empty draws for " + sc.strategy);
      sorted.assign(per_obs[i].begin(), per_obs[i].end());
      std::sort(sorted.begin(), sorted.end());
      const double h = numerics::silverman_bandwidth(sorted);
      total += numerics::kde_log_density(sorted, h, observed[i]);
    }
    sc.mean_log_density = observed.empty() ? 0.0 : total / double(observed.size());
    sc.coverage = interval_coverage(observed, per_obs, levels);
    scores.push_back(std::move(sc));
  }
  std::stable_sort(scores.begin(), scores.end(), [](const StrategyScore& a, const StrategyScore& b) {
    return a.mean_log_density > b.mean_log_density;
  });
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i].rank = (i > 0 && scores[i].mean_log_density == scores[i - 1].mean_log_density)
                         ? scores[i - 1].rank
                         : int(i) + 1;
  }
  return scores;
}

}  // namespace percept
