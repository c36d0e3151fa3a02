#include "percept/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "percept/error.hpp"
#include "percept/numerics.hpp"

namespace percept {

void SgtParams::validate() const {
  if (!std::isfinite(mu)) throw DomainError("sgt: mu must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sgt: sigma must be > 0");
  if (!(std::abs(lambda) < 1.0)) throw DomainError("sgt: |lambda| must be < 1");
  if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("sgt: p must be > 0");
  if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("sgt: q must be > 0");
  if (!(q > 2.0 / p))
    throw DomainError("sgt: q must exceed 2/p for a finite variance (moment condition pq > 2)");
}

void to_json(nlohmann::json& j, const SgtParams& s) {
  j = {{"mu", s.mu}, {"sigma", s.sigma}, {"lambda", s.lambda}, {"p", s.p}, {"q", s.q}};
}

void from_json(const nlohmann::json& j, SgtParams& s) {
  j.at("mu").get_to(s.mu);
  j.at("sigma").get_to(s.sigma);
  j.at("lambda").get_to(s.lambda);
  j.at("p").get_to(s.p);
  j.at("q").get_to(s.q);
}

double sgt_v(const SgtParams& params) {
  params.validate();
  using boost::math::beta;
  const double p = params.p;
  const double q = params.q;
  const double l2 = params.lambda * params.lambda;
  const double b1 = beta(1.0 / p, q);
  const double r3 = beta(3.0 / p, q - 2.0 / p) / b1;
  const double r2 = beta(2.0 / p, q - 1.0 / p) / b1;
  const double bracket = (3.0 * l2 + 1.0) * r3 - 4.0 * l2 * r2 * r2;
  if (!(bracket > 0.0)) throw DomainError("sgt: variance adjustment is not finite");
  return std::pow(q, -1.0 / p) / std::sqrt(bracket);
}

SkewedT::SkewedT(const SgtParams& params) : params_(params), v_(sgt_v(params)) {
  const double p = params_.p;
  const double q = params_.q;
  log_norm_ = std::log(p) - std::log(2.0 * v_ * params_.sigma) - std::log(q) / p -
              std::log(boost::math::beta(1.0 / p, q));
  exponent_ = q + 1.0 / p;
}

double SkewedT::flank_scale(bool right) const {
  const double s = 1.0 + (right ? params_.lambda : -params_.lambda);
  return params_.q * std::pow(v_ * params_.sigma * s, params_.p);
}

double SkewedT::log_pdf(double x) const {
  const double t = x - params_.mu;
  const double u = std::pow(std::abs(t), params_.p) / flank_scale(t >= 0.0);
  return log_norm_ - exponent_ * std::log1p(u);
}

double SkewedT::pdf(double x) const { return std::exp(log_pdf(x)); }

double SkewedT::pdf_derivative(double x) const {
  const double t = x - params_.mu;
  if (t == 0.0) return 0.0;
  const double a = flank_scale(t > 0.0);
  const double at = std::abs(t);
  const double u = std::pow(at, params_.p) / a;
  const double du = params_.p * std::pow(at, params_.p - 1.0) / a * (t > 0.0 ? 1.0 : -1.0);
  return -exponent_ * pdf(x) / (1.0 + u) * du;
}

double SkewedT::cdf(double x) const {
  if (x == std::numeric_limits<double>::infinity()) return 1.0;
  if (x == -std::numeric_limits<double>::infinity()) return 0.0;
  const double t = x - params_.mu;
  const bool right = t >= 0.0;
  const double u = std::pow(std::abs(t), params_.p) / flank_scale(right);
  const double a = 1.0 / params_.p;
  const double left_mass = 0.5 * (1.0 - params_.lambda);
  if (right) {
    const double w = u / (1.0 + u);
    return left_mass + 0.5 * (1.0 + params_.lambda) * boost::math::ibeta(a, params_.q, w);
  }
  // 1 - I_w(a, q) == I_{1-w}(q, a), evaluated without cancellation.
  return left_mass * boost::math::ibeta(params_.q, a, 1.0 / (1.0 + u));
}

double SkewedT::quantile(double prob) const {
  if (!(prob > 0.0 && prob < 1.0)) throw DomainError("sgt quantile: prob must be in (0, 1)");
  const double mu = params_.mu;
  const double left_mass = 0.5 * (1.0 - params_.lambda);
  if (prob == left_mass) return mu;
  // Invert the flank's regularized incomplete beta directly. Both w and 1 - w
  // come from their own inversion so neither tail loses digits.
  const double a = 1.0 / params_.p;
  const double q = params_.q;
  double u;
  if (prob > left_mass) {
    const double right_mass = 0.5 * (1.0 + params_.lambda);
    const double r = (prob - left_mass) / right_mass;
    const double rc = (1.0 - prob) / right_mass;
    u = boost::math::ibeta_inv(a, q, r) / boost::math::ibeta_inv(q, a, rc);
  } else {
    const double r = prob / left_mass;
    const double rc = (left_mass - prob) / left_mass;
    const double z = boost::math::ibeta_inv(q, a, r);
    u = boost::math::ibeta_inv(a, q, rc) / z;
  }
  const double t = std::pow(u * flank_scale(prob > left_mass), 1.0 / params_.p);
  return prob > left_mass ? mu + t : mu - t;
}

double SkewedT::sample(Rng& rng) const { return quantile(uniform_open(rng)); }

double SkewedT::flank_offset(double y, bool right) const {
  const double log_peak = log_norm_;
  if (!(y > 0.0)) throw DomainError("sgt flank: density level must be positive");
  const double log_y = std::log(y);
  if (log_y > log_peak + 1e-12) throw DomainError("sgt flank: level exceeds the peak density");
  if (log_y >= log_peak) return 0.0;
  const double u = std::expm1((log_peak - log_y) / exponent_);
  return std::pow(u * flank_scale(right), 1.0 / params_.p);
}

double sgt_pdf(double x, const SgtParams& params) { return SkewedT(params).pdf(x); }
double sgt_cdf(double x, const SgtParams& params) { return SkewedT(params).cdf(x); }
double sgt_quantile(double prob, const SgtParams& params) {
  return SkewedT(params).quantile(prob);
}

bool sgt_stimulus_valid(const SkewedT& dist, double x_lo, double x_hi, double y_hi) {
  const double mode = dist.mode();
  if (mode < x_lo || mode > x_hi) return false;
  if (dist.peak() > y_hi) return false;
  const double median = dist.quantile(0.5);
  return median >= x_lo && median <= x_hi;
}

SgtParams sample_sgt_params(Rng& rng, const SgtSamplingOptions& opts) {
  std::uniform_real_distribution<double> mu_d(-2.0, 2.0);
  std::uniform_real_distribution<double> sigma_d(0.5, 2.5);
  std::normal_distribution<double> lambda_d(0.0, 0.33);
  std::uniform_real_distribution<double> p_d(2.0, 4.0);
  std::uniform_real_distribution<double> q_d(1.0, 50.0);
  for (int attempt = 0; attempt <= opts.max_rejections; ++attempt) {
    SgtParams s;
    s.mu = mu_d(rng);
    s.sigma = sigma_d(rng);
    const double lam = lambda_d(rng);
    s.lambda = std::isnan(opts.forced_lambda)
                   ? std::clamp(lam, -opts.lambda_clamp, opts.lambda_clamp)
                   : opts.forced_lambda;
    s.p = p_d(rng);
    s.q = q_d(rng);
    if (!(s.q > 2.0 / s.p)) continue;
    if (sgt_stimulus_valid(SkewedT(s), opts.x_lo, opts.x_hi, opts.y_hi)) return s;
  }
  throw DomainError("sample_sgt_params: more than " + std::to_string(opts.max_rejections) +
                    " rejections; sampling ranges are misconfigured");
}

void WeibullErrorParams::validate() const {
  if (!(lambda_scale > 0.0) || !std::isfinite(lambda_scale))
    throw DomainError("weibull: scale must be > 0");
  if (!(k_shape > 0.0) || !std::isfinite(k_shape)) throw DomainError("weibull: shape must be > 0");
}

void to_json(nlohmann::json& j, const WeibullErrorParams& w) {
  j = {{"lambda", w.lambda_scale}, {"k", w.k_shape}};
}

void from_json(const nlohmann::json& j, WeibullErrorParams& w) {
  j.at("lambda").get_to(w.lambda_scale);
  j.at("k").get_to(w.k_shape);
}

Weibull::Weibull(const WeibullErrorParams& params) : params_(params) { params_.validate(); }

double Weibull::log_density(double x) const {
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  const double k = params_.k_shape;
  const double lam = params_.lambda_scale;
  if (x == 0.0) {
    if (k < 1.0) return std::numeric_limits<double>::infinity();
    if (k > 1.0) return -std::numeric_limits<double>::infinity();
    return -std::log(lam);
  }
  const double z = x / lam;
  return std::log(k / lam) + (k - 1.0) * std::log(z) - std::pow(z, k);
}

double Weibull::density(double x) const { return std::exp(log_density(x)); }

double Weibull::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  return -std::expm1(-std::pow(x / params_.lambda_scale, params_.k_shape));
}

double Weibull::quantile(double prob) const {
  if (!(prob >= 0.0 && prob < 1.0)) throw DomainError("weibull quantile: prob must be in [0, 1)");
  return params_.lambda_scale * std::pow(-std::log1p(-prob), 1.0 / params_.k_shape);
}

double Weibull::sample(Rng& rng) const { return quantile(1.0 - uniform_open(rng)); }

double Weibull::mean() const {
  return params_.lambda_scale * std::tgamma(1.0 + 1.0 / params_.k_shape);
}

double Weibull::variance() const {
  const double g1 = std::tgamma(1.0 + 1.0 / params_.k_shape);
  const double g2 = std::tgamma(1.0 + 2.0 / params_.k_shape);
  return params_.lambda_scale * params_.lambda_scale * (g2 - g1 * g1);
}

Weibull weibull(const WeibullErrorParams& params) { return Weibull(params); }

void GaussianOpParams::validate() const {
  if (!std::isfinite(beta)) throw DomainError("gaussian operator: beta must be finite");
  if (!(spread > 0.0) || !std::isfinite(spread))
    throw DomainError("gaussian operator: spread must be > 0");
}

void to_json(nlohmann::json& j, const GaussianOpParams& g) {
  if (g.kind == SpreadKind::Fixed)
    j = {{"beta", g.beta}, {"sigma", g.spread}};
  else
    j = {{"beta", g.beta}, {"alpha", g.spread}};
}

void from_json(const nlohmann::json& j, GaussianOpParams& g) {
  j.at("beta").get_to(g.beta);
  if (j.contains("sigma")) {
    j.at("sigma").get_to(g.spread);
    g.kind = SpreadKind::Fixed;
  } else {
    j.at("alpha").get_to(g.spread);
    g.kind = SpreadKind::Multiplicative;
  }
}

double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

}  // namespace percept
