#pragma once

// Conversions between data, pixel, physical (cm) and visual-angle space.
//
// Visual angle of a physical extent s viewed from distance D:
//   va = 2 * atan(s / (2 D)) * 180 / pi   [degrees]
// A data value is converted through its displacement from the axis origin
// (data_min); the sign of a displacement is carried through to the angle.

#include <string>

#include <nlohmann/json.hpp>

namespace percept {

enum class Axis { X, Y };

struct AxisMapping {
  double data_min = 0.0;
  double data_max = 1.0;
  double length_px = 1.0;

  double px_per_unit() const { return length_px / (data_max - data_min); }
  double span() const { return data_max - data_min; }
  void validate(const char* name) const;
};

struct ViewingContext {
  double distance_cm = 50.0;
  double px_per_cm = 37.8;
  AxisMapping x_axis;
  AxisMapping y_axis;

  const AxisMapping& axis(Axis a) const { return a == Axis::X ? x_axis : y_axis; }
  // Physical centimetres per data unit along `a`.
  double cm_per_unit(Axis a) const { return axis(a).px_per_unit() / px_per_cm; }
  void validate() const;

  // 600x450 px chart, x in [-5, 5], y in [0, 1], viewed at 50 cm.
  static ViewingContext curve_chart(double px_per_cm = 37.8, double distance_cm = 50.0);
  // 500x200 px scatterplot, x in [0, 61], y in [0, 100], viewed at 50 cm.
  static ViewingContext scatter_chart(double px_per_cm = 37.8, double distance_cm = 50.0);
};

void to_json(nlohmann::json& j, const AxisMapping& a);
void from_json(const nlohmann::json& j, AxisMapping& a);
void to_json(nlohmann::json& j, const ViewingContext& c);
void from_json(const nlohmann::json& j, ViewingContext& c);

// Angle subtended by a physical extent (cm >= 0), in degrees.
double to_visual_angle(double physical_cm, const ViewingContext& ctx);

struct AngleResult {
  double degrees = 0.0;
  // Displacement larger than the axis data span (extrapolated).
  bool extrapolated = false;
};

AngleResult data_to_va(double displacement, Axis axis, const ViewingContext& ctx);
double va_to_data(double degrees, Axis axis, const ViewingContext& ctx);

// Angle of a value measured from its axis origin.
inline double value_to_va(double value, Axis axis, const ViewingContext& ctx) {
  return data_to_va(value - ctx.axis(axis).data_min, axis, ctx).degrees;
}
inline double va_to_value(double degrees, Axis axis, const ViewingContext& ctx) {
  return ctx.axis(axis).data_min + va_to_data(degrees, axis, ctx);
}

// d(va)/d(displacement) along an axis, degrees per data unit.
double va_rate(double displacement, Axis axis, const ViewingContext& ctx);

// Slope dy/dx (data units) at data point (x, y) expressed as d(va_y)/d(va_x).
double slope_to_va(double slope, double x, double y, const ViewingContext& ctx);

}  // namespace percept
