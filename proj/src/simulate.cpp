#include "percept/simulate.hpp"

#include <cmath>
#include <cstdio>

#include "percept/error.hpp"

namespace percept {

namespace {

std::string trial_name(std::size_t t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "t%04zu", t);
  return buf;
}

double vx(double x, const ViewingContext& ctx) { return value_to_va(x, Axis::X, ctx); }
double vy(double y, const ViewingContext& ctx) { return value_to_va(y, Axis::Y, ctx); }

void simulate_curve_trial(OperatorTag tag, const OperatorParams& params, const SgtStimulus& stim,
                          const ViewingContext& ctx, SideRule rule, Rng& rng, TrialRecord& t) {
  const TruthValues& tv = stim.truth;
  const SkewedT& dist = stim.pdf.distribution();
  t.stim_id = stim.id;
  switch (tag) {
    case OperatorTag::ProjectToCurve: {
      const auto& p = std::get<ProjectionParams>(params);
      t.true_x = tv.median_x;
      t.true_y = 0.5;
      const double theta = vx(t.true_x, ctx);
      t.resp_x = va_to_value(projection(theta, theta, p).sample(rng), Axis::X, ctx);
      t.resp_y = 0.5;
      return;
    }
    case OperatorTag::HighestPoint: {
      const auto& p = std::get<WeibullErrorParams>(params);
      t.true_x = tv.mode_x;
      t.true_y = tv.peak_y;
      t.resp_x = t.true_x;
      t.resp_y = va_to_value(highest_point_y(vy(t.true_y, ctx), p).sample(rng), Axis::Y, ctx);
      return;
    }
    case OperatorTag::HighestPointX: {
      const auto& p = std::get<GaussianOpParams>(params);
      t.true_x = tv.mode_x;
      t.true_y = tv.peak_y;
      t.resp_x = va_to_value(highest_point_x_gaussian(vx(t.true_x, ctx), p).sample(rng), Axis::X, ctx);
      t.resp_y = dist.pdf(t.resp_x);
      return;
    }
    case OperatorTag::MaxSlope: {
      const auto& p = std::get<WeibullErrorParams>(params);
      // The zero-error response sits at the va-space maximum, which can drift
      // away from the mode on flat-topped curves; the recorded truth stays the mode.
      const SlopePeak peak = max_va_slope(stim.cdf, ctx);
      t.true_x = tv.max_slope_x;
      t.true_y = dist.cdf(t.true_x);
      const double s = max_slope(peak.value, p).sample(rng);
      t.resp_x = max_slope_position(s, stim.cdf, rule, ctx, rng, peak);
      t.resp_y = dist.cdf(t.resp_x);
      return;
    }
    case OperatorTag::BisectArea: {
      const auto& p = std::get<GaussianOpParams>(params);
      t.true_x = tv.median_x;
      t.true_y = dist.pdf(t.true_x);
      t.resp_x = va_to_value(bisect_area(vx(t.true_x, ctx), p).sample(rng), Axis::X, ctx);
      t.resp_y = dist.pdf(t.resp_x);
      return;
    }
    case OperatorTag::Bahp:
    case OperatorTag::Mixture: {
      t.true_x = tv.median_x;
      t.true_y = dist.pdf(t.true_x);
      const double med = vx(tv.median_x, ctx), mode = vx(tv.mode_x, ctx);
      const double r = tag == OperatorTag::Bahp
                           ? bahp(med, mode, std::get<BahpParams>(params)).sample(rng)
                           : mixture(med, mode, std::get<MixtureParams>(params)).sample(rng);
      t.resp_x = va_to_value(r, Axis::X, ctx);
      t.resp_y = dist.pdf(t.resp_x);
      return;
    }
    default:
      throw DomainError("not a curve task: " + to_string(tag));
  }
}

}  // namespace

std::vector<TrialRecord> simulate_operator_trials(OperatorTag tag, const ParticipantParams& participants,
                                                  const std::vector<SgtStimulus>& curves,
                                                  const ViewingContext& ctx,
                                                  const SimulationOptions& opts) {
  ctx.validate();
  const bool axis_task = tag == OperatorTag::ProjectToAxisX || tag == OperatorTag::ProjectToAxisY;
  if (!axis_task && curves.empty())
    throw DomainError("simulate: task " + to_string(tag) + " needs SGT stimuli");
  std::vector<TrialRecord> out;
  for (const auto& [pid, params] : participants) {
    for (std::size_t k = 0; k < opts.trials_per_participant; ++k) {
      Rng rng = make_rng(opts.seed, "simulate/" + pid, k);
      TrialRecord t;
      t.participant_id = pid;
      t.task = to_string(tag);
      t.trial_id = trial_name(k);
      t.context = ctx;
      t.condition = opts.condition;
      if (axis_task) {
        const auto& p = std::get<ProjectionParams>(params);
        const ScatterPoint dot = gen_projection_dot(rng, ctx);
        t.stim_id = "dot-" + pid + "-" + t.trial_id;
        t.true_x = t.resp_x = dot.x;
        t.true_y = t.resp_y = dot.y;
        if (tag == OperatorTag::ProjectToAxisY) {
          const double theta = vy(dot.y, ctx);
          t.resp_y = va_to_value(projection(theta, vx(dot.x, ctx), p).sample(rng), Axis::Y, ctx);
        } else {
          const double theta = vx(dot.x, ctx);
          t.resp_x = va_to_value(projection(theta, vy(dot.y, ctx), p).sample(rng), Axis::X, ctx);
        }
      } else {
        simulate_curve_trial(tag, params, curves[k % curves.size()], ctx, opts.side_rule, rng, t);
      }
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<TrialRecord> simulate_mean_estimates(const ParticipantParams& participants,
                                                 const std::vector<ScatterStimulus>& stimuli,
                                                 const ViewingContext& ctx, Strategy strategy,
                                                 std::uint64_t seed, const CompositionOptions& comp) {
  std::vector<ComposedStimulus> composed;
  for (const auto& s : stimuli) composed.emplace_back(s, ctx, comp);
  std::vector<TrialRecord> out;
  std::vector<double> z;
  for (const auto& [pid, params] : participants) {
    const auto* proj = std::get_if<ProjectionParams>(&params);
    if (!proj) throw DomainError("simulate mean_estimate: projection parameters required");
    for (std::size_t k = 0; k < stimuli.size(); ++k) {
      Rng rng = make_rng(seed, "mean-estimate/" + pid, hash_id(stimuli[k].id));
      z.resize(composed[k].noise_size());
      for (double& v : z) v = standard_normal(rng);
      TrialRecord t;
      t.participant_id = pid;
      t.task = kMeanEstimateTask;
      t.trial_id = trial_name(k);
      t.stim_id = stimuli[k].id;
      t.context = ctx;
      t.true_x = t.resp_x = composed[k].midpoint();
      t.true_y = stimuli[k].true_mean;
      t.resp_y = composed[k].draw(*proj, strategy, z);
      t.condition = to_string(strategy);
      out.push_back(std::move(t));
    }
  }
  return out;
}

}  // namespace percept
