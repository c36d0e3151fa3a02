#include "percept/curves.hpp"

#include <algorithm>
#include <cmath>

#include "percept/error.hpp"
#include "percept/numerics.hpp"

namespace percept {

std::string to_string(CurveKind k) { return k == CurveKind::Pdf ? "pdf" : "cdf"; }

CurveKind curve_kind_from_string(const std::string& s) {
  if (s == "pdf" || s == "PDF") return CurveKind::Pdf;
  if (s == "cdf" || s == "CDF") return CurveKind::Cdf;
  throw SchemaError("curve kind must be \"pdf\" or \"cdf\", got \"" + s + "\"");
}

StimulusCurve::StimulusCurve(const SgtParams& sgt, CurveKind kind, std::size_t grid_size,
                             double x_lo, double x_hi)
    : dist_(sgt), kind_(kind) {
  if (grid_size < 2) throw DomainError("curve grid needs at least two points");
  if (!(x_hi > x_lo)) throw DomainError("curve display range is empty");
  grid_.reserve(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double x = x_lo + (x_hi - x_lo) * double(i) / double(grid_size - 1);
    grid_.push_back({x, value(x)});
  }
}

StimulusCurve::StimulusCurve(const SgtParams& sgt, CurveKind kind, std::vector<CurvePoint> grid)
    : dist_(sgt), kind_(kind), grid_(std::move(grid)) {
  check_invariants();
}

void StimulusCurve::check_invariants() const {
  if (grid_.size() < 2) throw SchemaError("curve grid needs at least two points");
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const auto& pt = grid_[i];
    if (!std::isfinite(pt.x) || !std::isfinite(pt.y))
      throw SchemaError("curve grid[" + std::to_string(i) + "] is not finite");
    if (i > 0 && !(pt.x > grid_[i - 1].x))
      throw SchemaError("curve grid x must be strictly increasing (index " + std::to_string(i) +
                        ")");
    if (pt.y < 0.0) throw SchemaError("curve grid y must be non-negative");
    if (kind_ == CurveKind::Cdf) {
      if (pt.y > 1.0) throw SchemaError("cdf grid y must lie in [0, 1]");
      if (i > 0 && pt.y < grid_[i - 1].y) throw SchemaError("cdf grid y must be nondecreasing");
    }
  }
}

double StimulusCurve::value(double x) const {
  return kind_ == CurveKind::Pdf ? dist_.pdf(x) : dist_.cdf(x);
}

double StimulusCurve::slope(double x) const {
  return kind_ == CurveKind::Pdf ? dist_.pdf_derivative(x) : dist_.pdf(x);
}

void to_json(nlohmann::json& j, const StimulusCurve& c) {
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& pt : c.grid()) grid.push_back({{"x", pt.x}, {"y", pt.y}});
  j = {{"sgt", c.sgt()}, {"kind", to_string(c.kind())}, {"grid", std::move(grid)}};
}

StimulusCurve curve_from_json(const nlohmann::json& j) {
  if (!j.contains("sgt")) throw SchemaError("curve: missing field \"sgt\"");
  if (!j.contains("kind")) throw SchemaError("curve: missing field \"kind\"");
  SgtParams sgt;
  try {
    sgt = j.at("sgt").get<SgtParams>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("curve: field \"sgt\": ") + e.what());
  }
  const CurveKind kind = curve_kind_from_string(j.at("kind").get<std::string>());
  if (!j.contains("grid")) return StimulusCurve(sgt, kind);
  std::vector<CurvePoint> grid;
  for (const auto& pt : j.at("grid")) grid.push_back({pt.at("x").get<double>(), pt.at("y").get<double>()});
  return StimulusCurve(sgt, kind, std::move(grid));
}

void to_json(nlohmann::json& j, const TruthValues& t) {
  j = {{"mode_x", t.mode_x},
       {"peak_y", t.peak_y},
       {"median_x", t.median_x},
       {"max_slope_value", t.max_slope_value},
       {"max_slope_x", t.max_slope_x}};
}

void from_json(const nlohmann::json& j, TruthValues& t) {
  j.at("mode_x").get_to(t.mode_x);
  j.at("peak_y").get_to(t.peak_y);
  j.at("median_x").get_to(t.median_x);
  j.at("max_slope_value").get_to(t.max_slope_value);
  j.at("max_slope_x").get_to(t.max_slope_x);
}

double cdf_va_slope(const StimulusCurve& curve, double x, const ViewingContext& ctx) {
  const auto& d = curve.distribution();
  return slope_to_va(d.pdf(x), x, d.cdf(x), ctx);
}

SlopePeak max_va_slope(const StimulusCurve& curve, const ViewingContext& ctx) {
  // Coarse scan over the grid abscissae, then Brent on the neighbouring cells.
  const auto& g = curve.grid();
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double s = cdf_va_slope(curve, g[i].x, ctx);
    if (s > best_val) {
      best_val = s;
      best = i;
    }
  }
  double lo = g[best > 0 ? best - 1 : 0].x;
  double hi = g[std::min(best + 1, g.size() - 1)].x;
  const double scale = curve.distribution().v() * curve.sgt().sigma;
  if (best == 0) lo -= 4.0 * scale;
  if (best + 1 == g.size()) hi += 4.0 * scale;
  auto m = numerics::minimize_1d([&](double x) { return -cdf_va_slope(curve, x, ctx); }, lo, hi);
  return {m.x, -m.fx};
}

TruthValues ground_truth(const StimulusCurve& curve, const ViewingContext& ctx) {
  const auto& d = curve.distribution();
  TruthValues t;
  t.mode_x = d.mode();
  t.peak_y = d.peak();
  t.median_x = d.quantile(0.5);
  const auto peak = max_va_slope(curve, ctx);
  // The task answer is the CDF's steepest point in data space, i.e. the mode.
  t.max_slope_x = d.mode();
  t.max_slope_value = peak.value;
  return t;
}

double preimage_from_y(const StimulusCurve& curve, double y_target, Side side) {
  const auto& d = curve.distribution();
  const double peak = d.peak();
  if (!std::isfinite(y_target) || y_target < 0.0)
    throw DomainError("preimage_from_y: level must be >= 0");
  if (y_target > peak * (1.0 + 1e-12))
    throw DomainError("preimage_from_y: level exceeds the peak of the curve");
  const bool right = side == Side::Right;
  if (y_target == 0.0)
    return right ? std::numeric_limits<double>::infinity()
                 : -std::numeric_limits<double>::infinity();
  const double off = d.flank_offset(std::min(y_target, peak), right);
  return right ? d.mode() + off : d.mode() - off;
}

double preimage_from_slope(const StimulusCurve& curve, double slope_target, Side side,
                           const ViewingContext& ctx, std::optional<SlopePeak> peak) {
  const SlopePeak pk = peak ? *peak : max_va_slope(curve, ctx);
  if (!(slope_target > 0.0)) throw DomainError("preimage_from_slope: target must be > 0");
  if (slope_target > pk.value * (1.0 + 1e-12))
    throw DomainError("preimage_from_slope: target exceeds the maximum slope");
  if (slope_target >= pk.value) return pk.x;
  const double scale = curve.distribution().v() * curve.sgt().sigma;
  const double step = side == Side::Right ? 0.25 * scale : -0.25 * scale;
  auto f = [&](double x) { return cdf_va_slope(curve, x, ctx) - slope_target; };
  return numerics::find_root_expanding(f, pk.x, step, 1e9 * scale, 1e-14);
}

}  // namespace percept
