#include "percept/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "percept/error.hpp"
#include "percept/numerics.hpp"
#include "percept/rng.hpp"

namespace percept {

namespace {

constexpr double kWeibullShapeLo = 0.05;
constexpr double kWeibullShapeHi = 50.0;
constexpr double kErrorFloor = 1e-9;
constexpr double kSigmaFloor = 1e-6;

double x_value_va(double x, const ViewingContext& ctx) { return value_to_va(x, Axis::X, ctx); }
double y_value_va(double y, const ViewingContext& ctx) { return value_to_va(y, Axis::Y, ctx); }

const StimulusCurve& require_stimulus(const StimulusLookup& stimuli, const TrialRecord& t) {
  const StimulusCurve* c = stimuli ? stimuli(t.stim_id) : nullptr;
  if (!c)
    throw SchemaError("trial " + t.trial_id + ": stimulus \"" + t.stim_id +
                      "\" not found (a stimuli file is required for task " + t.task + ")");
  return *c;
}

std::vector<double> floored(std::span<const double> errors, std::size_t& n_floored) {
  std::vector<double> x(errors.begin(), errors.end());
  n_floored = 0;
  for (double& v : x) {
    if (v < -1e-12) throw DomainError("errors must be non-negative for a positive-support family");
    if (v < kErrorFloor) {
      v = kErrorFloor;
      ++n_floored;
    }
  }
  return x;
}

// Profile-likelihood score in the Weibull shape; increasing in k.
struct ShapeScore {
  double h;
  double dh;
};

ShapeScore weibull_shape_score(std::span<const double> x, double k, double mean_log,
                               double log_max) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (double v : x) {
    const double l = std::log(v);
    const double w = std::exp(k * (l - log_max));
    s0 += w;
    s1 += w * l;
    s2 += w * l * l;
  }
  const double r = s1 / s0;
  return {r - 1.0 / k - mean_log, (s2 / s0 - r * r) + 1.0 / (k * k)};
}

double weibull_log_likelihood(std::span<const double> x, const WeibullErrorParams& p) {
  const Weibull w(p);
  double ll = 0.0;
  for (double v : x) ll += w.log_density(v);
  return ll;
}

}  // namespace

bool FitResult::has_flag(const std::string& f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

std::map<std::string, double> named_params(const OperatorParams& p) {
  return std::visit(
      [](const auto& v) -> std::map<std::string, double> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ProjectionParams>) {
          return {{"beta", v.beta}, {"alpha", v.alpha}};
        } else if constexpr (std::is_same_v<T, WeibullErrorParams>) {
          return {{"lambda", v.lambda_scale}, {"k", v.k_shape}};
        } else if constexpr (std::is_same_v<T, GaussianOpParams>) {
          return {{"beta", v.beta}, {"sigma", v.spread}};
        } else if constexpr (std::is_same_v<T, BahpParams>) {
          return {{"beta_ba", v.ba.beta}, {"sigma_ba", v.ba.spread}};
        } else {
          return {{"pi_ba", v.pi_ba}, {"beta_ba", v.ba.beta}, {"sigma_ba", v.ba.spread}};
        }
      },
      p);
}

// --- exclusion -------------------------------------------------------------------

namespace {

// Axis along which a task's response is read.
bool task_reads_y(const std::string& task) {
  return task == "project_to_axis_y" || task == "highest_point" || task == "mean_estimate";
}

}  // namespace

ExclusionReport exclusion_filter(std::span<const TrialRecord> trials, const ExclusionRules& rules) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const TrialRecord*>> by_pid;
  for (const auto& t : trials) {
    auto [it, inserted] = by_pid.try_emplace(t.participant_id);
    if (inserted) order.push_back(t.participant_id);
    it->second.push_back(&t);
  }
  ExclusionReport report;
  std::map<std::string, bool> keep;
  for (const auto& pid : order) {
    const auto& rows = by_pid[pid];
    std::vector<double> truth, resp;
    double min_dist = std::numeric_limits<double>::infinity();
    for (const auto* t : rows) {
      const bool y = task_reads_y(t->task);
      truth.push_back(y ? t->true_y : t->true_x);
      resp.push_back(y ? t->resp_y : t->resp_x);
      min_dist = std::min(min_dist, t->context.distance_cm);
    }
    ParticipantScreen s;
    s.participant_id = pid;
    s.correlation = numerics::pearson(truth, resp);
    s.distance_cm = min_dist;
    if (!(s.correlation >= rules.min_correlation)) s.reasons.push_back("correlation");
    if (s.distance_cm < rules.min_distance_cm) s.reasons.push_back("distance");
    keep[pid] = s.reasons.empty();
    report.participants.push_back(std::move(s));
  }
  for (const auto& t : trials) (keep[t.participant_id] ? report.kept : report.excluded).push_back(t);
  return report;
}

// --- observations --------------------------------------------------------------

ProjectionObs projection_observation(const TrialRecord& t, OperatorTag tag) {
  const auto& ctx = t.context;
  switch (tag) {
    case OperatorTag::ProjectToAxisX:
      return {x_value_va(t.resp_x, ctx) - x_value_va(t.true_x, ctx), y_value_va(t.true_y, ctx)};
    case OperatorTag::ProjectToAxisY:
      return {y_value_va(t.resp_y, ctx) - y_value_va(t.true_y, ctx), x_value_va(t.true_x, ctx)};
    case OperatorTag::ProjectToCurve:
      return {x_value_va(t.resp_x, ctx) - x_value_va(t.true_x, ctx), x_value_va(t.true_x, ctx)};
    default:
      throw DomainError("not a projection operator: " + to_string(tag));
  }
}

double weibull_observation(const TrialRecord& t, OperatorTag tag, const StimulusLookup& stimuli) {
  const auto& ctx = t.context;
  if (tag == OperatorTag::HighestPoint) {
    return y_value_va(t.true_y, ctx) - y_value_va(t.resp_y, ctx);
  }
  if (tag == OperatorTag::MaxSlope) {
    const auto& curve = require_stimulus(stimuli, t);
    const auto peak = max_va_slope(curve, ctx);
    return peak.value - cdf_va_slope(curve, t.resp_x, ctx);
  }
  throw DomainError("not a Weibull-error operator: " + to_string(tag));
}

double gaussian_observation(const TrialRecord& t) {
  return x_value_va(t.resp_x, t.context) - x_value_va(t.true_x, t.context);
}

FusionObs fusion_observation(const TrialRecord& t, const StimulusLookup& stimuli) {
  const auto& curve = require_stimulus(stimuli, t);
  const auto& ctx = t.context;
  return {x_value_va(t.true_x, ctx), x_value_va(curve.distribution().mode(), ctx),
          x_value_va(t.resp_x, ctx)};
}

// --- projection ------------------------------------------------------------------

double projection_log_likelihood(std::span<const ProjectionObs> obs, const ProjectionParams& p) {
  double ll = 0.0;
  for (const auto& o : obs) ll += normal_log_pdf(o.error, p.beta, p.alpha * o.distance);
  return ll;
}

FitResult fit_projection(std::span<const ProjectionObs> obs) {
  if (obs.size() < 4) throw DomainError("fit_projection: at least 4 trials are required");
  double sw = 0.0, swe = 0.0;
  for (const auto& o : obs) {
    if (!(o.distance > 0.0)) throw DomainError("fit_projection: projection distances must be > 0");
    const double w = 1.0 / (o.distance * o.distance);
    sw += w;
    swe += w * o.error;
  }
  const double beta = swe / sw;
  double ss = 0.0;
  for (const auto& o : obs) {
    const double z = (o.error - beta) / o.distance;
    ss += z * z;
  }
  double alpha = std::sqrt(ss / double(obs.size()));
  // Identical errors leave only rounding noise in the residuals.
  if (alpha <= 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(beta))) alpha = 0.0;
  FitResult r;
  r.params = ProjectionParams{beta, alpha};
  r.n_trials = obs.size();
  if (alpha > 0.0) {
    r.log_likelihood = projection_log_likelihood(obs, {beta, alpha});
  } else {
    r.log_likelihood = std::numeric_limits<double>::infinity();
    r.flags.push_back("degenerate_zero_spread");
  }
  return r;
}

// --- Weibull / Gaussian ------------------------------------------------------------

FitResult fit_weibull_error(std::span<const double> errors) {
  if (errors.size() < 5) throw DomainError("fit_weibull_error: at least 5 errors are required");
  std::size_t n_floored = 0;
  const auto x = floored(errors, n_floored);
  double mean_log = 0.0, log_max = -std::numeric_limits<double>::infinity();
  for (double v : x) {
    mean_log += std::log(v);
    log_max = std::max(log_max, std::log(v));
  }
  mean_log /= double(x.size());

  FitResult r;
  r.n_trials = x.size();
  if (n_floored > 0) r.flags.push_back("floored_zero_errors");

  auto score = [&](double k) { return weibull_shape_score(x, k, mean_log, log_max); };
  double lo = kWeibullShapeLo, hi = kWeibullShapeHi;
  double k = 0.0;
  if (score(hi).h < 0.0) {
    k = hi;
    r.flags.push_back("degenerate_shape_at_upper_bound");
  } else if (score(lo).h > 0.0) {
    k = lo;
    r.flags.push_back("shape_at_lower_bound");
  } else {
    // Safeguarded Newton: fall back to bisection whenever a step leaves the bracket.
    std::vector<std::string> trace;
    k = 1.0;
    bool done = false;
    for (int it = 0; it < 200; ++it) {
      const auto s = score(k);
      std::ostringstream line;
      line << "iter " << it << " k=" << k << " h=" << s.h;
      trace.push_back(line.str());
      if (std::abs(s.h) < 1e-13) {
        done = true;
        break;
      }
      if (s.h > 0.0) hi = k; else lo = k;
      double next = k - s.h / s.dh;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - k) <= 1e-13 * k) {
        k = next;
        done = true;
        break;
      }
      k = next;
    }
    if (!done) throw ConvergenceError("fit_weibull_error: shape iteration did not converge", trace);
  }
  double s0 = 0.0;
  for (double v : x) s0 += std::exp(k * (std::log(v) - log_max));
  const double lambda = std::exp(log_max + std::log(s0 / double(x.size())) / k);
  const WeibullErrorParams p{lambda, k};
  r.params = p;
  r.log_likelihood = weibull_log_likelihood(x, p);
  return r;
}

FitResult fit_gaussian_error(std::span<const double> errors) {
  if (errors.size() < 2) throw DomainError("fit_gaussian_error: at least 2 errors are required");
  const double m = numerics::mean(errors);
  double ss = 0.0;
  for (double e : errors) ss += (e - m) * (e - m);
  double sd = std::sqrt(ss / double(errors.size()));
  if (sd <= 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(m))) sd = 0.0;
  FitResult r;
  r.n_trials = errors.size();
  r.params = GaussianOpParams{m, sd, SpreadKind::Fixed};
  if (sd > 0.0) {
    double ll = 0.0;
    for (double e : errors) ll += normal_log_pdf(e, m, sd);
    r.log_likelihood = ll;
  } else {
    r.log_likelihood = std::numeric_limits<double>::infinity();
    r.flags.push_back("degenerate_zero_spread");
  }
  return r;
}

// --- fusion and mixture ----------------------------------------------------------------

double bahp_log_likelihood(std::span<const FusionObs> obs, const BahpParams& p) {
  double ll = 0.0;
  for (const auto& o : obs) ll += bahp(o.theta_median, o.theta_mode, p).log_density(o.response);
  return ll;
}

double mixture_log_likelihood(std::span<const FusionObs> obs, const MixtureParams& p) {
  double ll = 0.0;
  for (const auto& o : obs) ll += mixture(o.theta_median, o.theta_mode, p).log_density(o.response);
  return ll;
}

FitResult fit_bahp(std::span<const FusionObs> obs, const GaussianOpParams& hp_fixed) {
  if (obs.size() < 4) throw DomainError("fit_bahp: at least 4 trials are required");
  hp_fixed.validate();
  std::vector<double> resid;
  for (const auto& o : obs) resid.push_back(o.response - o.theta_median);
  const double b0 = numerics::mean(resid);
  const double s0 = std::max(numerics::stddev(resid), 0.05);

  auto make = [&](std::span<const double> v) {
    return BahpParams{{v[0], kSigmaFloor + std::exp(v[1]), SpreadKind::Fixed}, hp_fixed};
  };
  auto nll = [&](std::span<const double> v) {
    if (!std::isfinite(v[1]) || v[1] > 20.0) return std::numeric_limits<double>::infinity();
    return -bahp_log_likelihood(obs, make(v));
  };
  auto res = numerics::nelder_mead(nll, {b0, std::log(s0)}, {0.5 * s0, 0.5});
  if (res.converged) {
    // Restart from the optimum to guard against a collapsed simplex.
    res = numerics::nelder_mead(nll, res.x, {0.1 * s0, 0.1});
  }
  if (!res.converged) throw ConvergenceError("fit_bahp: simplex did not converge", res.trace);

  const BahpParams p = make(res.x);
  FitResult r;
  r.params = p;
  r.n_trials = obs.size();
  r.log_likelihood = -res.fx;
  double w_sum = 0.0;
  for (const auto& o : obs) w_sum += bahp_weight(o.theta_mode, o.theta_median, p);
  if (w_sum / double(obs.size()) < 0.1) r.flags.push_back("ba_weakly_identified");
  if (p.ba.spread <= 2.0 * kSigmaFloor) r.flags.push_back("sigma_at_floor");
  return r;
}

FitResult fit_mixture(std::span<const FusionObs> obs, const GaussianOpParams& hp_fixed) {
  if (obs.size() < 4) throw DomainError("fit_mixture: at least 4 trials are required");
  hp_fixed.validate();
  const std::size_t n = obs.size();
  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) resid[i] = obs[i].response - obs[i].theta_median;
  MixtureParams p{0.5, {numerics::mean(resid), std::max(numerics::stddev(resid), 0.05), SpreadKind::Fixed},
                  hp_fixed};
  std::vector<double> r(n);
  double prev = -std::numeric_limits<double>::infinity();
  std::vector<std::string> trace;
  bool converged = false;
  for (int it = 0; it < 5000; ++it) {
    // E step
    for (std::size_t i = 0; i < n; ++i) {
      const auto& o = obs[i];
      const double a = std::log(std::max(p.pi_ba, 1e-300)) +
                       normal_log_pdf(o.response, o.theta_median + p.ba.beta, p.ba.spread);
      const double b = std::log(std::max(1.0 - p.pi_ba, 1e-300)) +
                       normal_log_pdf(o.response, o.theta_mode + hp_fixed.beta, hp_fixed.spread);
      r[i] = 1.0 / (1.0 + std::exp(b - a));
    }
    // M step
    const double rs = std::accumulate(r.begin(), r.end(), 0.0);
    p.pi_ba = rs / double(n);
    if (rs > 1e-12) {
      double sb = 0.0;
      for (std::size_t i = 0; i < n; ++i) sb += r[i] * resid[i];
      p.ba.beta = sb / rs;
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) ss += r[i] * (resid[i] - p.ba.beta) * (resid[i] - p.ba.beta);
      p.ba.spread = std::max(std::sqrt(ss / rs), kSigmaFloor);
    }
    const double ll = mixture_log_likelihood(obs, p);
    if (it % 100 == 0) trace.push_back("iter " + std::to_string(it) + " ll=" + std::to_string(ll));
    if (std::abs(ll - prev) < 1e-10 * (1.0 + std::abs(ll))) {
      converged = true;
      prev = ll;
      break;
    }
    prev = ll;
  }
  if (!converged) throw ConvergenceError("fit_mixture: EM did not converge", trace);
  FitResult res;
  res.params = p;
  res.n_trials = n;
  res.log_likelihood = prev;
  if (p.ba.spread <= 2.0 * kSigmaFloor) res.flags.push_back("sigma_at_floor");
  if (p.pi_ba < 1e-6) res.flags.push_back("ba_component_empty");
  return res;
}

// --- leave-one-out ------------------------------------------------------------------

std::string to_string(ErrorFamily f) {
  switch (f) {
    case ErrorFamily::Weibull: return "weibull";
    case ErrorFamily::Exponential: return "exponential";
    case ErrorFamily::Gaussian: return "gaussian";
    case ErrorFamily::LogNormal: return "lognormal";
    case ErrorFamily::Laplace: return "laplace";
  }
  return "unknown";
}

ErrorFamily error_family_from_string(const std::string& s) {
  for (auto f : {ErrorFamily::Weibull, ErrorFamily::Exponential, ErrorFamily::Gaussian,
                 ErrorFamily::LogNormal, ErrorFamily::Laplace})
    if (to_string(f) == s) return f;
  throw SchemaError("unknown error family \"" + s + "\"");
}

std::function<double(double)> fit_family(ErrorFamily family, std::span<const double> data) {
  switch (family) {
    case ErrorFamily::Weibull: {
      const auto fit = fit_weibull_error(data);
      const Weibull w(std::get<WeibullErrorParams>(fit.params));
      return [w](double x) { return w.log_density(std::max(x, kErrorFloor)); };
    }
    case ErrorFamily::Exponential: {
      std::size_t nf = 0;
      const auto x = floored(data, nf);
      const double m = numerics::mean(x);
      return [m](double v) { return -std::log(m) - std::max(v, kErrorFloor) / m; };
    }
    case ErrorFamily::Gaussian: {
      const auto fit = fit_gaussian_error(data);
      if (fit.has_flag("degenerate_zero_spread")) throw DomainError("gaussian: zero spread");
      const auto g = std::get<GaussianOpParams>(fit.params);
      return [g](double x) { return normal_log_pdf(x, g.beta, g.spread); };
    }
    case ErrorFamily::LogNormal: {
      std::size_t nf = 0;
      const auto x = floored(data, nf);
      std::vector<double> logs;
      for (double v : x) logs.push_back(std::log(v));
      const double m = numerics::mean(logs);
      double ss = 0.0;
      for (double l : logs) ss += (l - m) * (l - m);
      const double s = std::sqrt(ss / double(logs.size()));
      if (!(s > 0.0)) throw DomainError("lognormal: zero spread");
      return [m, s](double v) {
        const double l = std::log(std::max(v, kErrorFloor));
        return normal_log_pdf(l, m, s) - l;
      };
    }
    case ErrorFamily::Laplace: {
      const double loc = numerics::median(std::vector<double>(data.begin(), data.end()));
      double b = 0.0;
      for (double v : data) b += std::abs(v - loc);
      b /= double(data.size());
      if (!(b > 0.0)) throw DomainError("laplace: zero spread");
      return [loc, b](double v) { return -std::log(2.0 * b) - std::abs(v - loc) / b; };
    }
  }
  throw DomainError("unknown error family");
}

std::vector<LooEntry> loo_compare(std::span<const double> errors,
                                  std::span<const ErrorFamily> families) {
  if (errors.size() > 500) throw DomainError("loo_compare: exact LOO is limited to n <= 500");
  if (errors.size() < 3) throw DomainError("loo_compare: at least 3 points are required");
  std::vector<LooEntry> out;
  std::vector<double> rest(errors.size() - 1);
  for (auto fam : families) {
    LooEntry e;
    e.family = fam;
    try {
      for (std::size_t i = 0; i < errors.size(); ++i) {
        std::size_t k = 0;
        for (std::size_t j = 0; j < errors.size(); ++j)
          if (j != i) rest[k++] = errors[j];
        const auto logpdf = fit_family(fam, rest);
        const double lp = logpdf(errors[i]);
        if (!std::isfinite(lp)) throw DomainError("non-finite held-out log density");
        e.elpd += lp;
      }
    } catch (const std::exception& ex) {
      e.usable = false;
      e.elpd = -std::numeric_limits<double>::infinity();
      e.failure = ex.what();
    }
    out.push_back(e);
  }
  std::stable_sort(out.begin(), out.end(), [](const LooEntry& a, const LooEntry& b) {
    if (a.usable != b.usable) return a.usable;
    return a.elpd > b.elpd;
  });
  return out;
}

// --- per-participant driver -------------------------------------------------------------

namespace {

// Fits resampled copies of `data` and returns the per-parameter SD.
template <class Obs, class FitFn>
std::map<std::string, double> bootstrap_se(const std::vector<Obs>& data, FitFn fit, int replicates,
                                           std::uint64_t seed, const std::string& pid) {
  std::map<std::string, std::vector<double>> samples;
  std::vector<Obs> resampled(data.size());
  for (int b = 0; b < replicates; ++b) {
    Rng rng = make_rng(seed, "bootstrap/" + pid, static_cast<std::uint64_t>(b));
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    for (auto& r : resampled) r = data[pick(rng)];
    try {
      const FitResult f = fit(resampled);
      for (const auto& [k, v] : named_params(f.params)) samples[k].push_back(v);
    } catch (const std::exception&) {
      // A degenerate resample contributes nothing.
    }
  }
  std::map<std::string, double> se;
  for (const auto& [k, v] : samples) se[k] = numerics::stddev(v);
  return se;
}

}  // namespace

FitResult fit_participant(OperatorTag tag, const std::string& participant_id,
                          std::span<const TrialRecord> trials, const StimulusLookup& stimuli,
                          const FitOptions& opts) {
  const int reps = opts.bootstrap_replicates;
  switch (tag) {
    case OperatorTag::ProjectToCurve:
    case OperatorTag::ProjectToAxisX:
    case OperatorTag::ProjectToAxisY: {
      std::vector<ProjectionObs> obs;
      for (const auto& t : trials) obs.push_back(projection_observation(t, tag));
      auto fit = [](const std::vector<ProjectionObs>& o) { return fit_projection(o); };
      FitResult r = fit(obs);
      if (reps > 0) r.bootstrap_se = bootstrap_se(obs, fit, reps, opts.seed, participant_id);
      return r;
    }
    case OperatorTag::HighestPoint:
    case OperatorTag::MaxSlope: {
      std::vector<double> obs;
      for (const auto& t : trials) obs.push_back(weibull_observation(t, tag, stimuli));
      auto fit = [](const std::vector<double>& o) { return fit_weibull_error(o); };
      FitResult r = fit(obs);
      if (reps > 0) r.bootstrap_se = bootstrap_se(obs, fit, reps, opts.seed, participant_id);
      return r;
    }
    case OperatorTag::HighestPointX:
    case OperatorTag::BisectArea: {
      std::vector<double> obs;
      for (const auto& t : trials) obs.push_back(gaussian_observation(t));
      auto fit = [](const std::vector<double>& o) { return fit_gaussian_error(o); };
      FitResult r = fit(obs);
      if (reps > 0) r.bootstrap_se = bootstrap_se(obs, fit, reps, opts.seed, participant_id);
      return r;
    }
    case OperatorTag::Bahp:
    case OperatorTag::Mixture: {
      if (!opts.hp_fixed) throw DomainError("fit " + to_string(tag) + ": HighestPoint_x parameters are required");
      std::vector<FusionObs> obs;
      for (const auto& t : trials) obs.push_back(fusion_observation(t, stimuli));
      const GaussianOpParams hp = *opts.hp_fixed;
      auto fit = [tag, hp](const std::vector<FusionObs>& o) {
        return tag == OperatorTag::Bahp ? fit_bahp(o, hp) : fit_mixture(o, hp);
      };
      FitResult r = fit(obs);
      if (reps > 0) r.bootstrap_se = bootstrap_se(obs, fit, reps, opts.seed, participant_id);
      return r;
    }
  }
  throw DomainError("unhandled operator");
}

std::vector<ParticipantFit> fit_all(OperatorTag tag, std::span<const TrialRecord> trials,
                                    const StimulusLookup& stimuli, const FitOptions& opts) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<TrialRecord>> by_pid;
  for (const auto& t : trials) {
    auto [it, inserted] = by_pid.try_emplace(t.participant_id);
    if (inserted) order.push_back(t.participant_id);
    it->second.push_back(t);
  }
  std::vector<ParticipantFit> out(order.size());
  numerics::parallel_for(order.size(), [&](std::size_t i) {
    const auto& pid = order[i];
    out[i] = {pid, fit_participant(tag, pid, by_pid.at(pid), stimuli, opts)};
  });
  return out;
}

// --- pooling ----------------------------------------------------------------------------

PopulationSummary pool_participants(std::span<const ParticipantFit> fits) {
  if (fits.size() < 2) throw DomainError("pool_participants: at least 2 participants are required");
  PopulationSummary out;
  std::map<std::string, std::vector<double>> values;
  for (const auto& f : fits)
    for (const auto& [k, v] : named_params(f.fit.params)) values[k].push_back(v);

  for (const auto& [k, v] : values) {
    ParameterPool pool;
    pool.mean = numerics::mean(v);
    pool.sd = numerics::stddev(v);
    double se2 = 0.0;
    std::size_t n_se = 0;
    for (const auto& f : fits) {
      if (auto it = f.fit.bootstrap_se.find(k); it != f.fit.bootstrap_se.end()) {
        se2 += it->second * it->second;
        ++n_se;
      }
    }
    const double mean_se2 = n_se > 0 ? se2 / double(n_se) : 0.0;
    pool.tau2 = std::max(0.0, pool.sd * pool.sd - mean_se2);
    out.parameters[k] = pool;
  }

  for (const auto& f : fits) {
    std::map<std::string, double> shrunk;
    for (const auto& [k, v] : named_params(f.fit.params)) {
      const auto& pool = out.parameters.at(k);
      const auto it = f.fit.bootstrap_se.find(k);
      const double se2 = it == f.fit.bootstrap_se.end() ? 0.0 : it->second * it->second;
      if (se2 + pool.tau2 > 0.0 && se2 > 0.0)
        shrunk[k] = (pool.tau2 * v + se2 * pool.mean) / (pool.tau2 + se2);
      else
        shrunk[k] = v;
    }
    out.shrunken.emplace_back(f.participant_id, std::move(shrunk));
  }
  return out;
}

}  // namespace percept
