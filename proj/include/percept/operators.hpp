#pragma once

// Visual decoding operators. Each operator maps a true value (visual-angle
// units unless noted) to a response distribution with a sampler, a log-density
// and a CDF.

#include <optional>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "percept/curves.hpp"
#include "percept/distributions.hpp"
#include "percept/perceptual_space.hpp"
#include "percept/rng.hpp"

namespace percept {

enum class OperatorTag {
  ProjectToCurve,
  ProjectToAxisX,
  ProjectToAxisY,
  HighestPoint,   // Weibull error on the peak height
  HighestPointX,  // Gaussian approximation on the x position of the peak
  MaxSlope,
  BisectArea,
  Bahp,
  Mixture,
};

std::string to_string(OperatorTag t);
OperatorTag operator_tag_from_string(const std::string& s);
bool is_projection(OperatorTag t);

struct ProjectionParams {
  double beta = 0.0;   // degrees
  double alpha = 0.05; // sd per degree of projection distance
  void validate() const;
};

struct BahpParams {
  GaussianOpParams ba;
  GaussianOpParams hp;
  void validate() const;
};

struct MixtureParams {
  double pi_ba = 0.5;
  GaussianOpParams ba;
  GaussianOpParams hp;
  void validate() const;
};

using OperatorParams =
    std::variant<ProjectionParams, WeibullErrorParams, GaussianOpParams, BahpParams, MixtureParams>;

nlohmann::json params_to_json(const OperatorParams& p);
OperatorParams params_from_json(OperatorTag tag, const nlohmann::json& j);

struct Support {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

class ResponseDistribution {
 public:
  virtual ~ResponseDistribution() = default;
  virtual double sample(Rng& rng) const = 0;
  virtual double log_density(double x) const = 0;
  virtual double cdf(double x) const = 0;
  virtual std::optional<double> mean() const { return std::nullopt; }
  virtual std::optional<double> variance() const { return std::nullopt; }
  virtual Support support() const { return {}; }
};

class NormalResponse final : public ResponseDistribution {
 public:
  NormalResponse(double mean, double sd);
  double sample(Rng& rng) const override;
  double log_density(double x) const override;
  double cdf(double x) const override;
  std::optional<double> mean() const override { return mean_; }
  std::optional<double> variance() const override { return sd_ * sd_; }
  double sd() const { return sd_; }

 private:
  double mean_;
  double sd_;
};

// theta - eps with eps ~ Weibull; support (-inf, theta].
class ReflectedWeibullResponse final : public ResponseDistribution {
 public:
  ReflectedWeibullResponse(double theta, const WeibullErrorParams& params);
  double sample(Rng& rng) const override;
  double log_density(double x) const override;
  double cdf(double x) const override;
  std::optional<double> mean() const override { return theta_ - err_.mean(); }
  std::optional<double> variance() const override { return err_.variance(); }
  Support support() const override { return {-std::numeric_limits<double>::infinity(), theta_}; }
  double quantile(double prob) const;

 private:
  double theta_;
  Weibull err_;
};

// Steepest-slope response theta_max - eps where draws with eps >= theta_max
// are redrawn, i.e. eps is Weibull truncated to [0, theta_max).
class MaxSlopeResponse final : public ResponseDistribution {
 public:
  MaxSlopeResponse(double theta_max, const WeibullErrorParams& params);
  double sample(Rng& rng) const override;
  // Same as sample(); adds the number of redrawn errors to `rejections`.
  double sample_counted(Rng& rng, long& rejections) const;
  double log_density(double x) const override;
  double cdf(double x) const override;
  Support support() const override { return {0.0, theta_}; }
  double theta_max() const { return theta_; }

 private:
  double theta_;
  Weibull err_;
  double kept_mass_;
};

class MixtureResponse final : public ResponseDistribution {
 public:
  MixtureResponse(double pi_first, NormalResponse first, NormalResponse second);
  double sample(Rng& rng) const override;
  double log_density(double x) const override;
  double cdf(double x) const override;
  std::optional<double> mean() const override;
  std::optional<double> variance() const override;

 private:
  double pi_;
  NormalResponse first_;
  NormalResponse second_;
};

// How a response level is assigned to the left or right flank of a peak.
enum class SideRule {
  FlankSlope,  // P(side) proportional to |dx/dy| on that flank
  Equal,       // 50/50
};

// Peak-finding on a PDF curve, reported as an x position (data units). The
// y error eps ~ Weibull is applied in visual angle to the peak height and the
// resulting level is mapped back to x through the curve geometry.
class HighestPointXResponse final : public ResponseDistribution {
 public:
  HighestPointXResponse(const StimulusCurve& curve, const ViewingContext& ctx,
                        const WeibullErrorParams& params, SideRule rule = SideRule::FlankSlope);
  double sample(Rng& rng) const override;
  double log_density(double x) const override;
  double cdf(double x) const override;

  // x reached by a given y error (degrees) on the given side.
  double position_for_error(double eps, Side side) const;
  // Probability of the left flank at density level y (data units).
  double left_probability(double y) const;
  double mode_x() const { return mode_; }

 private:
  double error_at(double x) const;  // eps such that position_for_error(eps, side(x)) == x
  double upper_left_mass(double eps) const;  // P(eps' >= eps, left)

  StimulusCurve curve_;
  ViewingContext ctx_;
  Weibull err_;
  SideRule rule_;
  double mode_;
  double peak_y_;
  double theta_peak_;
  std::vector<double> left_tail_;  // P(eps >= F^-1(u), left) on a uniform u grid
};

NormalResponse projection(double theta, double distance, const ProjectionParams& params);
ReflectedWeibullResponse highest_point_y(double theta_peak, const WeibullErrorParams& params);
HighestPointXResponse highest_point_x(const StimulusCurve& curve, const ViewingContext& ctx,
                                      const WeibullErrorParams& params,
                                      SideRule rule = SideRule::FlankSlope);
NormalResponse highest_point_x_gaussian(double theta_mode, const GaussianOpParams& params);
MaxSlopeResponse max_slope(double theta_max, const WeibullErrorParams& params);
NormalResponse bisect_area(double theta_median, const GaussianOpParams& params);

// Position on a CDF curve whose va-slope equals `slope_draw`; the flank is
// chosen with `rule`.
double max_slope_position(double slope_draw, const StimulusCurve& curve, SideRule rule,
                          const ViewingContext& ctx, Rng& rng,
                          std::optional<SlopePeak> peak = std::nullopt);

struct BahpTerms {
  double mse_ba;
  double mse_hp;
  double w;
};
BahpTerms bahp_terms(double theta_mode, double theta_median, const BahpParams& params);
double bahp_weight(double theta_mode, double theta_median, const BahpParams& params);
NormalResponse bahp(double theta_median, double theta_mode, const BahpParams& params);
MixtureResponse mixture(double theta_median, double theta_mode, const MixtureParams& params);

}  // namespace percept
