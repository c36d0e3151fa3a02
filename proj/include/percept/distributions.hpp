#pragma once

// Skewed generalized t (SGT) stimulus distribution and the error families
// used by the operators (Weibull, Gaussian, plus the LOO comparison set).

#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "percept/rng.hpp"

namespace percept {

struct SgtParams {
  double mu = 0.0;      // mode
  double sigma = 1.0;   // scale
  double lambda = 0.0;  // skewness, |lambda| < 1
  double p = 2.0;
  double q = 10.0;

  void validate() const;
};

void to_json(nlohmann::json& j, const SgtParams& s);
void from_json(const nlohmann::json& j, SgtParams& s);

// Variance adjustment v. Requires q > 2/p.
double sgt_v(const SgtParams& params);

// Immutable SGT distribution with the normalising constants precomputed.
class SkewedT {
 public:
  explicit SkewedT(const SgtParams& params);

  const SgtParams& params() const { return params_; }
  double v() const { return v_; }

  double pdf(double x) const;
  double log_pdf(double x) const;
  // d pdf / dx.
  double pdf_derivative(double x) const;
  double cdf(double x) const;
  double quantile(double prob) const;
  double sample(Rng& rng) const;

  double mode() const { return params_.mu; }
  double peak() const { return pdf(params_.mu); }
  // Distance |x - mu| on the given flank at which the density equals y,
  // for 0 < y <= peak. `right` selects x > mu.
  double flank_offset(double y, bool right) const;

 private:
  double flank_scale(bool right) const;  // (v sigma (1 +/- lambda))^p * q

  SgtParams params_;
  double v_ = 1.0;
  double log_norm_ = 0.0;  // log of p / (2 v sigma q^(1/p) B(1/p, q))
  double exponent_ = 0.0;  // q + 1/p
};

double sgt_pdf(double x, const SgtParams& params);
double sgt_cdf(double x, const SgtParams& params);
double sgt_quantile(double prob, const SgtParams& params);

// Display-range check used for stimulus generation: mode and median inside
// [x_lo, x_hi] and peak density at most y_hi.
bool sgt_stimulus_valid(const SkewedT& dist, double x_lo = -5.0, double x_hi = 5.0,
                        double y_hi = 1.0);

struct SgtSamplingOptions {
  double lambda_clamp = 0.95;
  int max_rejections = 1000;
  // When set, lambda is fixed to this value instead of sampled.
  double forced_lambda = std::numeric_limits<double>::quiet_NaN();
  // Display box for the validity check.
  double x_lo = -5.0, x_hi = 5.0, y_hi = 1.0;
};

// mu ~ U[-2, 2], sigma ~ U[0.5, 2.5], lambda ~ N(0, 0.33) (sd), p ~ U[2, 4],
// q ~ U[1, 50]; resampled until q > 2/p and the display-range check holds.
SgtParams sample_sgt_params(Rng& rng, const SgtSamplingOptions& opts = {});

// Weibull(scale, shape) on x >= 0.
struct WeibullErrorParams {
  double lambda_scale = 1.0;
  double k_shape = 1.0;
  void validate() const;
};

void to_json(nlohmann::json& j, const WeibullErrorParams& w);
void from_json(const nlohmann::json& j, WeibullErrorParams& w);

class Weibull {
 public:
  explicit Weibull(const WeibullErrorParams& params);

  double density(double x) const;
  double log_density(double x) const;
  double cdf(double x) const;
  double quantile(double prob) const;
  double sample(Rng& rng) const;
  double mean() const;
  double variance() const;
  const WeibullErrorParams& params() const { return params_; }

 private:
  WeibullErrorParams params_;
};

Weibull weibull(const WeibullErrorParams& params);

// N(true + beta, sigma) with either a fixed sigma or sigma = alpha * distance.
enum class SpreadKind { Fixed, Multiplicative };

struct GaussianOpParams {
  double beta = 0.0;
  double spread = 1.0;
  SpreadKind kind = SpreadKind::Fixed;
  void validate() const;
};

void to_json(nlohmann::json& j, const GaussianOpParams& g);
void from_json(const nlohmann::json& j, GaussianOpParams& g);

double normal_log_pdf(double x, double mean, double sd);
double normal_cdf(double x, double mean, double sd);

}  // namespace percept
