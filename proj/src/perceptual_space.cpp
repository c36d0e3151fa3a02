#include "percept/perceptual_space.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "percept/error.hpp"

namespace percept {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

}  // namespace

void AxisMapping::validate(const char* name) const {
  require_finite(data_min, "data_min");
  require_finite(data_max, "data_max");
  if (!(data_max > data_min))
    throw DomainError(std::string(name) + ": data_max must exceed data_min");
  if (!(length_px > 0.0) || !std::isfinite(length_px))
    throw DomainError(std::string(name) + ": length_px must be positive");
}

void ViewingContext::validate() const {
  if (!(distance_cm > 0.0) || !std::isfinite(distance_cm))
    throw DomainError("distance_cm must be positive");
  if (!(px_per_cm > 0.0) || !std::isfinite(px_per_cm))
    throw DomainError("px_per_cm must be positive");
  x_axis.validate("x_axis");
  y_axis.validate("y_axis");
}

ViewingContext ViewingContext::curve_chart(double px_per_cm, double distance_cm) {
  return {distance_cm, px_per_cm, {-5.0, 5.0, 600.0}, {0.0, 1.0, 450.0}};
}

ViewingContext ViewingContext::scatter_chart(double px_per_cm, double distance_cm) {
  return {distance_cm, px_per_cm, {0.0, 61.0, 500.0}, {0.0, 100.0, 200.0}};
}

void to_json(nlohmann::json& j, const AxisMapping& a) {
  j = {{"data_min", a.data_min}, {"data_max", a.data_max}, {"length_px", a.length_px}};
}

void from_json(const nlohmann::json& j, AxisMapping& a) {
  j.at("data_min").get_to(a.data_min);
  j.at("data_max").get_to(a.data_max);
  j.at("length_px").get_to(a.length_px);
}

void to_json(nlohmann::json& j, const ViewingContext& c) {
  j = {{"distance_cm", c.distance_cm},
       {"px_per_cm", c.px_per_cm},
       {"x_axis", c.x_axis},
       {"y_axis", c.y_axis}};
}

void from_json(const nlohmann::json& j, ViewingContext& c) {
  j.at("distance_cm").get_to(c.distance_cm);
  j.at("px_per_cm").get_to(c.px_per_cm);
  j.at("x_axis").get_to(c.x_axis);
  j.at("y_axis").get_to(c.y_axis);
}

double to_visual_angle(double physical_cm, const ViewingContext& ctx) {
  require_finite(physical_cm, "physical size");
  if (physical_cm < 0.0) throw DomainError("physical size must be non-negative");
  return 2.0 * std::atan(physical_cm / (2.0 * ctx.distance_cm)) * kDegPerRad;
}

AngleResult data_to_va(double displacement, Axis axis, const ViewingContext& ctx) {
  require_finite(displacement, "displacement");
  const double cm = std::abs(displacement) * ctx.cm_per_unit(axis);
  const double angle = to_visual_angle(cm, ctx);
  return {std::copysign(angle, displacement),
          std::abs(displacement) > ctx.axis(axis).span()};
}

double va_to_data(double degrees, Axis axis, const ViewingContext& ctx) {
  require_finite(degrees, "angle");
  if (std::abs(degrees) >= 180.0) throw DomainError("|angle| must be below 180 degrees");
  const double cm = 2.0 * ctx.distance_cm * std::tan(std::abs(degrees) / (2.0 * kDegPerRad));
  return std::copysign(cm / ctx.cm_per_unit(axis), degrees);
}

double va_rate(double displacement, Axis axis, const ViewingContext& ctx) {
  const double k = ctx.cm_per_unit(axis);
  const double u = k * displacement / (2.0 * ctx.distance_cm);
  return kDegPerRad * (k / ctx.distance_cm) / (1.0 + u * u);
}

double slope_to_va(double slope, double x, double y, const ViewingContext& ctx) {
  require_finite(slope, "slope");
  require_finite(x, "x");
  require_finite(y, "y");
  const double rate_x = va_rate(x - ctx.x_axis.data_min, Axis::X, ctx);
  const double rate_y = va_rate(y - ctx.y_axis.data_min, Axis::Y, ctx);
  return slope * rate_y / rate_x;
}

}  // namespace percept
