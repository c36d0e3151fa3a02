#include "percept/operators.hpp"

#include <algorithm>
#include <cmath>

#include "percept/error.hpp"

namespace percept {

namespace {

struct TagName {
  OperatorTag tag;
  const char* name;
};

constexpr TagName kTagNames[] = {
    {OperatorTag::ProjectToCurve, "project_to_curve"},
    {OperatorTag::ProjectToAxisX, "project_to_axis_x"},
    {OperatorTag::ProjectToAxisY, "project_to_axis_y"},
    {OperatorTag::HighestPoint, "highest_point"},
    {OperatorTag::HighestPointX, "highest_point_x"},
    {OperatorTag::MaxSlope, "max_slope"},
    {OperatorTag::BisectArea, "bisect_area"},
    {OperatorTag::Bahp, "bahp"},
    {OperatorTag::Mixture, "mixture"},
};

GaussianOpParams fixed_gaussian(const nlohmann::json& j) {
  auto g = j.get<GaussianOpParams>();
  if (g.kind != SpreadKind::Fixed) throw SchemaError("expected a fixed-sigma Gaussian component");
  return g;
}

}  // namespace

std::string to_string(OperatorTag t) {
  for (const auto& tn : kTagNames)
    if (tn.tag == t) return tn.name;
  return "unknown";
}

OperatorTag operator_tag_from_string(const std::string& s) {
  for (const auto& tn : kTagNames)
    if (s == tn.name) return tn.tag;
  throw SchemaError("unknown operator tag \"" + s + "\"");
}

bool is_projection(OperatorTag t) {
  return t == OperatorTag::ProjectToCurve || t == OperatorTag::ProjectToAxisX ||
         t == OperatorTag::ProjectToAxisY;
}

void ProjectionParams::validate() const {
  if (!std::isfinite(beta)) throw DomainError("projection: beta must be finite");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("projection: alpha must be > 0");
}

void BahpParams::validate() const {
  ba.validate();
  hp.validate();
}

void MixtureParams::validate() const {
  if (!(pi_ba >= 0.0 && pi_ba <= 1.0)) throw DomainError("mixture: pi_ba must lie in [0, 1]");
  ba.validate();
  hp.validate();
}

nlohmann::json params_to_json(const OperatorParams& p) {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ProjectionParams>) {
          return {{"beta", v.beta}, {"alpha", v.alpha}};
        } else if constexpr (std::is_same_v<T, WeibullErrorParams>) {
          return v;
        } else if constexpr (std::is_same_v<T, GaussianOpParams>) {
          return v;
        } else if constexpr (std::is_same_v<T, BahpParams>) {
          return {{"ba", v.ba}, {"hp", v.hp}};
        } else {
          return {{"pi_ba", v.pi_ba}, {"ba", v.ba}, {"hp", v.hp}};
        }
      },
      p);
}

OperatorParams params_from_json(OperatorTag tag, const nlohmann::json& j) {
  try {
    switch (tag) {
      case OperatorTag::ProjectToCurve:
      case OperatorTag::ProjectToAxisX:
      case OperatorTag::ProjectToAxisY:
        return ProjectionParams{j.at("beta").get<double>(), j.at("alpha").get<double>()};
      case OperatorTag::HighestPoint:
      case OperatorTag::MaxSlope:
        return j.get<WeibullErrorParams>();
      case OperatorTag::HighestPointX:
      case OperatorTag::BisectArea:
        return fixed_gaussian(j);
      case OperatorTag::Bahp:
        return BahpParams{fixed_gaussian(j.at("ba")), fixed_gaussian(j.at("hp"))};
      case OperatorTag::Mixture:
        return MixtureParams{j.at("pi_ba").get<double>(), fixed_gaussian(j.at("ba")),
                             fixed_gaussian(j.at("hp"))};
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("operator params for " + to_string(tag) + ": " + e.what());
  }
  throw SchemaError("unhandled operator tag");
}

// --- NormalResponse --------------------------------------------------------

NormalResponse::NormalResponse(double mean, double sd) : mean_(mean), sd_(sd) {
  if (!std::isfinite(mean)) throw DomainError("normal response: mean must be finite");
  if (!(sd > 0.0) || !std::isfinite(sd)) throw DomainError("normal response: sd must be > 0");
}

double NormalResponse::sample(Rng& rng) const { return mean_ + sd_ * standard_normal(rng); }
double NormalResponse::log_density(double x) const { return normal_log_pdf(x, mean_, sd_); }
double NormalResponse::cdf(double x) const { return normal_cdf(x, mean_, sd_); }

// --- ReflectedWeibullResponse ----------------------------------------------

ReflectedWeibullResponse::ReflectedWeibullResponse(double theta, const WeibullErrorParams& params)
    : theta_(theta), err_(params) {}

double ReflectedWeibullResponse::sample(Rng& rng) const { return theta_ - err_.sample(rng); }
double ReflectedWeibullResponse::log_density(double x) const {
  return err_.log_density(theta_ - x);
}
double ReflectedWeibullResponse::cdf(double x) const {
  if (x >= theta_) return 1.0;
  return 1.0 - err_.cdf(theta_ - x);
}
double ReflectedWeibullResponse::quantile(double prob) const {
  return theta_ - err_.quantile(1.0 - prob);
}

// --- MaxSlopeResponse -------------------------------------------------------

MaxSlopeResponse::MaxSlopeResponse(double theta_max, const WeibullErrorParams& params)
    : theta_(theta_max), err_(params), kept_mass_(0.0) {
  if (!(theta_max > 0.0) || !std::isfinite(theta_max))
    throw DomainError("max_slope: true maximum slope must be > 0");
  kept_mass_ = err_.cdf(theta_max);
  if (!(kept_mass_ > 0.0)) throw DomainError("max_slope: error distribution leaves no mass below theta");
}

double MaxSlopeResponse::sample_counted(Rng& rng, long& rejections) const {
  for (;;) {
    const double eps = err_.sample(rng);
    if (eps < theta_) return theta_ - eps;
    ++rejections;
  }
}

double MaxSlopeResponse::sample(Rng& rng) const {
  long ignored = 0;
  return sample_counted(rng, ignored);
}

double MaxSlopeResponse::log_density(double x) const {
  if (!(x > 0.0) || x > theta_) return -std::numeric_limits<double>::infinity();
  return err_.log_density(theta_ - x) - std::log(kept_mass_);
}

double MaxSlopeResponse::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= theta_) return 1.0;
  return (kept_mass_ - err_.cdf(theta_ - x)) / kept_mass_;
}

// --- MixtureResponse --------------------------------------------------------

MixtureResponse::MixtureResponse(double pi_first, NormalResponse first, NormalResponse second)
    : pi_(pi_first), first_(first), second_(second) {
  if (!(pi_first >= 0.0 && pi_first <= 1.0)) throw DomainError("mixture weight must be in [0, 1]");
}

double MixtureResponse::sample(Rng& rng) const {
  const double u = uniform_open(rng);
  return u < pi_ ? first_.sample(rng) : second_.sample(rng);
}

double MixtureResponse::log_density(double x) const {
  if (pi_ == 1.0) return first_.log_density(x);
  if (pi_ == 0.0) return second_.log_density(x);
  const double a = std::log(pi_) + first_.log_density(x);
  const double b = std::log1p(-pi_) + second_.log_density(x);
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double MixtureResponse::cdf(double x) const {
  return pi_ * first_.cdf(x) + (1.0 - pi_) * second_.cdf(x);
}

std::optional<double> MixtureResponse::mean() const {
  return pi_ * *first_.mean() + (1.0 - pi_) * *second_.mean();
}

std::optional<double> MixtureResponse::variance() const {
  const double m = *mean();
  const double m1 = *first_.mean();
  const double m2 = *second_.mean();
  return pi_ * (*first_.variance() + (m1 - m) * (m1 - m)) +
         (1.0 - pi_) * (*second_.variance() + (m2 - m) * (m2 - m));
}

// --- HighestPointXResponse ----------------------------------------------------

namespace {
constexpr std::size_t kTailTableSize = 2048;
}

HighestPointXResponse::HighestPointXResponse(const StimulusCurve& curve, const ViewingContext& ctx,
                                             const WeibullErrorParams& params, SideRule rule)
    : curve_(curve), ctx_(ctx), err_(params), rule_(rule) {
  if (curve.kind() != CurveKind::Pdf) throw DomainError("highest_point_x needs a PDF curve");
  ctx_.validate();
  mode_ = curve_.distribution().mode();
  peak_y_ = curve_.distribution().peak();
  theta_peak_ = value_to_va(peak_y_, Axis::Y, ctx_);

  // Cumulative left-flank mass, integrated in probability space from the top.
  const std::size_t n = kTailTableSize;
  std::vector<double> p_left(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double u = double(i) / double(n);
    const double eps = i == n ? theta_peak_ : std::min(err_.quantile(u), theta_peak_);
    const double theta = theta_peak_ - eps;
    const double y = theta > 0.0 ? va_to_value(theta, Axis::Y, ctx_) : 0.0;
    p_left[i] = left_probability(y);
  }
  left_tail_.assign(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;)
    left_tail_[i] = left_tail_[i + 1] + 0.5 * (p_left[i] + p_left[i + 1]) / double(n);
}

double HighestPointXResponse::left_probability(double y) const {
  if (rule_ == SideRule::Equal) return 0.5;
  const auto& d = curve_.distribution();
  const double level = std::clamp(y, peak_y_ * 1e-12, peak_y_ * (1.0 - 1e-9));
  const double xl = mode_ - d.flank_offset(level, false);
  const double xr = mode_ + d.flank_offset(level, true);
  const double sl = std::abs(d.pdf_derivative(xl));
  const double sr = std::abs(d.pdf_derivative(xr));
  if (!(sl + sr > 0.0)) return 0.5;
  return sr / (sl + sr);
}

double HighestPointXResponse::position_for_error(double eps, Side side) const {
  if (eps <= 0.0) return mode_;  // skip the va roundtrip, it lands just below the peak
  const double theta = theta_peak_ - std::max(eps, 0.0);
  if (theta <= 0.0) return side == Side::Left ? curve_.x_lo() : curve_.x_hi();
  const double y = va_to_value(theta, Axis::Y, ctx_);
  if (y <= 0.0) return side == Side::Left ? curve_.x_lo() : curve_.x_hi();
  if (y >= peak_y_) return mode_;
  return preimage_from_y(curve_, y, side);
}

double HighestPointXResponse::sample(Rng& rng) const {
  const double eps = err_.sample(rng);
  const double u = uniform_open(rng);
  const double theta = theta_peak_ - eps;
  const double y = theta > 0.0 ? va_to_value(theta, Axis::Y, ctx_) : 0.0;
  return position_for_error(eps, u < left_probability(y) ? Side::Left : Side::Right);
}

double HighestPointXResponse::error_at(double x) const {
  const double y = curve_.distribution().pdf(x);
  return theta_peak_ - value_to_va(y, Axis::Y, ctx_);
}

double HighestPointXResponse::log_density(double x) const {
  const auto& d = curve_.distribution();
  const double y = d.pdf(x);
  const double eps = theta_peak_ - value_to_va(y, Axis::Y, ctx_);
  const double jac = va_rate(y - ctx_.y_axis.data_min, Axis::Y, ctx_) * std::abs(d.pdf_derivative(x));
  const double pl = left_probability(y);
  const double p_side = x < mode_ ? pl : 1.0 - pl;
  return err_.log_density(std::max(eps, 0.0)) + std::log(jac) + std::log(p_side);
}

double HighestPointXResponse::upper_left_mass(double eps) const {
  const double u = err_.cdf(std::max(eps, 0.0)) * double(kTailTableSize);
  const auto i = std::min(static_cast<std::size_t>(u), kTailTableSize - 1);
  const double frac = u - double(i);
  return left_tail_[i] + frac * (left_tail_[i + 1] - left_tail_[i]);
}

double HighestPointXResponse::cdf(double x) const {
  const double eps = error_at(x);
  const double upper_left = upper_left_mass(eps);
  if (x < mode_) return upper_left;
  const double upper_right = (1.0 - err_.cdf(std::max(eps, 0.0))) - upper_left;
  return 1.0 - upper_right;
}

// --- operator constructors ---------------------------------------------------

NormalResponse projection(double theta, double distance, const ProjectionParams& params) {
  if (!(distance > 0.0) || !std::isfinite(distance))
    throw DomainError("projection: distance must be > 0");
  params.validate();
  return NormalResponse(theta + params.beta, params.alpha * distance);
}

ReflectedWeibullResponse highest_point_y(double theta_peak, const WeibullErrorParams& params) {
  return ReflectedWeibullResponse(theta_peak, params);
}

HighestPointXResponse highest_point_x(const StimulusCurve& curve, const ViewingContext& ctx,
                                      const WeibullErrorParams& params, SideRule rule) {
  return HighestPointXResponse(curve, ctx, params, rule);
}

NormalResponse highest_point_x_gaussian(double theta_mode, const GaussianOpParams& params) {
  params.validate();
  if (params.kind != SpreadKind::Fixed) throw DomainError("highest_point_x: needs a fixed sigma");
  return NormalResponse(theta_mode + params.beta, params.spread);
}

MaxSlopeResponse max_slope(double theta_max, const WeibullErrorParams& params) {
  return MaxSlopeResponse(theta_max, params);
}

NormalResponse bisect_area(double theta_median, const GaussianOpParams& params) {
  params.validate();
  if (params.kind != SpreadKind::Fixed) throw DomainError("bisect_area: needs a fixed sigma");
  return NormalResponse(theta_median + params.beta, params.spread);
}

double max_slope_position(double slope_draw, const StimulusCurve& curve, SideRule rule,
                          const ViewingContext& ctx, Rng& rng, std::optional<SlopePeak> peak) {
  const SlopePeak pk = peak ? *peak : max_va_slope(curve, ctx);
  const double u = uniform_open(rng);
  if (slope_draw >= pk.value) return pk.x;
  const double xl = preimage_from_slope(curve, slope_draw, Side::Left, ctx, pk);
  const double xr = preimage_from_slope(curve, slope_draw, Side::Right, ctx, pk);
  double p_left = 0.5;
  if (rule == SideRule::FlankSlope) {
    const double h = 1e-5 * curve.distribution().v() * curve.sgt().sigma;
    auto ds = [&](double x) {
      return std::abs(cdf_va_slope(curve, x + h, ctx) - cdf_va_slope(curve, x - h, ctx)) / (2 * h);
    };
    const double sl = ds(xl);
    const double sr = ds(xr);
    if (sl + sr > 0.0) p_left = sr / (sl + sr);
  }
  return u < p_left ? xl : xr;
}

BahpTerms bahp_terms(double theta_mode, double theta_median, const BahpParams& params) {
  params.validate();
  const double mse_ba = params.ba.beta * params.ba.beta + params.ba.spread * params.ba.spread;
  const double gap = theta_mode - theta_median + params.hp.beta;
  const double mse_hp = gap * gap + params.hp.spread * params.hp.spread;
  return {mse_ba, mse_hp, mse_hp / (mse_ba + mse_hp)};
}

double bahp_weight(double theta_mode, double theta_median, const BahpParams& params) {
  return bahp_terms(theta_mode, theta_median, params).w;
}

NormalResponse bahp(double theta_median, double theta_mode, const BahpParams& params) {
  const double w = bahp_weight(theta_mode, theta_median, params);
  const double mean =
      w * (theta_median + params.ba.beta) + (1.0 - w) * (theta_mode + params.hp.beta);
  const double var = w * w * params.ba.spread * params.ba.spread +
                     (1.0 - w) * (1.0 - w) * params.hp.spread * params.hp.spread;
  return NormalResponse(mean, std::sqrt(var));
}

MixtureResponse mixture(double theta_median, double theta_mode, const MixtureParams& params) {
  params.validate();
  return MixtureResponse(params.pi_ba, bisect_area(theta_median, params.ba),
                         highest_point_x_gaussian(theta_mode, params.hp));
}

}  // namespace percept
