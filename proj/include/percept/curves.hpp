#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "percept/distributions.hpp"
#include "percept/perceptual_space.hpp"

namespace percept {

enum class CurveKind { Pdf, Cdf };
enum class Side { Left, Right };

std::string to_string(CurveKind k);
CurveKind curve_kind_from_string(const std::string& s);

struct CurvePoint {
  double x;
  double y;
};

// A rendered SGT density or distribution function sampled over the display
// range. Immutable once built.
class StimulusCurve {
 public:
  static constexpr std::size_t kDefaultGridSize = 512;

  StimulusCurve(const SgtParams& sgt, CurveKind kind, std::size_t grid_size = kDefaultGridSize,
                double x_lo = -5.0, double x_hi = 5.0);
  // Adopts an existing grid after checking the curve invariants.
  StimulusCurve(const SgtParams& sgt, CurveKind kind, std::vector<CurvePoint> grid);

  const SgtParams& sgt() const { return dist_.params(); }
  const SkewedT& distribution() const { return dist_; }
  CurveKind kind() const { return kind_; }
  const std::vector<CurvePoint>& grid() const { return grid_; }
  double x_lo() const { return grid_.front().x; }
  double x_hi() const { return grid_.back().x; }

  // Curve height at x (density or cumulative probability).
  double value(double x) const;
  // Analytic slope dy/dx of the drawn curve.
  double slope(double x) const;

 private:
  void check_invariants() const;

  SkewedT dist_;
  CurveKind kind_;
  std::vector<CurvePoint> grid_;
};

void to_json(nlohmann::json& j, const StimulusCurve& c);
StimulusCurve curve_from_json(const nlohmann::json& j);

struct TruthValues {
  double mode_x = 0.0;
  double peak_y = 0.0;
  double median_x = 0.0;
  double max_slope_value = 0.0;  // steepest CDF slope in visual-angle units
  double max_slope_x = 0.0;      // steepest point in data space (the mode)
};

void to_json(nlohmann::json& j, const TruthValues& t);
void from_json(const nlohmann::json& j, TruthValues& t);

// Slope of the CDF of the curve's distribution at x, in visual-angle space.
double cdf_va_slope(const StimulusCurve& curve, double x, const ViewingContext& ctx);

struct SlopePeak {
  double x;
  double value;
};
SlopePeak max_va_slope(const StimulusCurve& curve, const ViewingContext& ctx);

TruthValues ground_truth(const StimulusCurve& curve, const ViewingContext& ctx);

// x on the requested side of the mode where the density equals y_target.
double preimage_from_y(const StimulusCurve& curve, double y_target, Side side);

// x on the requested side of the steepest point where the CDF's va-slope
// equals slope_target. `peak` may be supplied to skip the maximisation.
double preimage_from_slope(const StimulusCurve& curve, double slope_target, Side side,
                           const ViewingContext& ctx,
                           std::optional<SlopePeak> peak = std::nullopt);

}  // namespace percept
