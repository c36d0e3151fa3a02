#include "percept/stimuli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "percept/error.hpp"

namespace percept {

namespace {

const nlohmann::json& field(const nlohmann::json& j, const std::string& name, const std::string& where) {
  if (!j.is_object() || !j.contains(name))
    throw SchemaError(where + ": missing field \"" + name + "\"");
  return j.at(name);
}

double number_field(const nlohmann::json& j, const std::string& name, const std::string& where) {
  const auto& v = field(j, name, where);
  if (!v.is_number()) throw SchemaError(where + ": field \"" + name + "\" must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(where + ": field \"" + name + "\" must be finite");
  return d;
}

std::string string_field(const nlohmann::json& j, const std::string& name, const std::string& where) {
  const auto& v = field(j, name, where);
  if (!v.is_string()) throw SchemaError(where + ": field \"" + name + "\" must be a string");
  return v.get<std::string>();
}

double mean_y(const std::vector<ScatterPoint>& pts) {
  double s = 0.0;
  for (const auto& p : pts) s += p.y;
  return s / double(pts.size());
}

std::string format_variability(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

// --- scatter stimuli -------------------------------------------------------------------

void ScatterStimulus::validate() const {
  const std::string where = "stimulus \"" + id + "\"";
  if (points.size() != kPoints)
    throw SchemaError(where + ": field \"points\" must hold exactly 60 points, found " +
                      std::to_string(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y))
      throw SchemaError(where + ": points[" + std::to_string(i) + "] is not finite");
    if (condition.mark == "point" && i > 0 && !(points[i].x > points[i - 1].x))
      throw SchemaError(where + ": points[" + std::to_string(i) + "].x is not strictly increasing");
  }
  if (condition.mark != "point" && condition.mark != "pointArc")
    throw SchemaError(where + ": condition.mark must be \"point\" or \"pointArc\"");
  if (condition.position != "upper" && condition.position != "lower")
    throw SchemaError(where + ": condition.position must be \"upper\" or \"lower\"");
}

double ScatterStimulus::x_min() const {
  double m = points.front().x;
  for (const auto& p : points) m = std::min(m, p.x);
  return m;
}

double ScatterStimulus::x_max() const {
  double m = points.front().x;
  for (const auto& p : points) m = std::max(m, p.x);
  return m;
}

void to_json(nlohmann::json& j, const ScatterStimulus& s) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : s.points) pts.push_back({{"x", p.x}, {"y", p.y}});
  j = {{"id", s.id},
       {"condition",
        {{"mark", s.condition.mark},
         {"variability", s.condition.variability},
         {"position", s.condition.position},
         {"seed", s.condition.seed}}},
       {"points", std::move(pts)},
       {"true_mean", s.true_mean}};
}

ScatterStimulus scatter_from_json(const nlohmann::json& j, std::vector<std::string>* warnings) {
  ScatterStimulus s;
  s.id = string_field(j, "id", "stimulus");
  const std::string where = "stimulus \"" + s.id + "\"";
  const auto& cond = field(j, "condition", where);
  s.condition.mark = string_field(cond, "mark", where + ".condition");
  s.condition.variability = number_field(cond, "variability", where + ".condition");
  s.condition.position = string_field(cond, "position", where + ".condition");
  if (cond.contains("seed")) {
    if (!cond.at("seed").is_number_integer())
      throw SchemaError(where + ".condition: field \"seed\" must be an integer");
    s.condition.seed = cond.at("seed").get<std::uint64_t>();
  }
  const auto& pts = field(j, "points", where);
  if (!pts.is_array()) throw SchemaError(where + ": field \"points\" must be an array");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string pw = where + ".points[" + std::to_string(i) + "]";
    s.points.push_back({number_field(pts[i], "x", pw), number_field(pts[i], "y", pw)});
  }
  s.validate();
  s.true_mean = mean_y(s.points);
  if (j.contains("true_mean")) {
    if (!j.at("true_mean").is_number())
      throw SchemaError(where + ": field \"true_mean\" must be a number");
    const double given = j.at("true_mean").get<double>();
    if (std::abs(given - s.true_mean) > 1e-9 && warnings) {
      std::ostringstream os;
      os.precision(17);
      os << where << ": true_mean " << given << " differs from the point mean " << s.true_mean
         << "; using the point mean";
      warnings->push_back(os.str());
    }
  }
  return s;
}

std::vector<ScatterStimulus> parse_scatter_stimuli(const nlohmann::json& doc,
                                                   std::vector<std::string>* warnings) {
  const nlohmann::json* arr = &doc;
  if (doc.is_object()) arr = &field(doc, "stimuli", "scatter stimuli file");
  if (!arr->is_array()) throw SchemaError("scatter stimuli file: field \"stimuli\" must be an array");
  if (arr->empty()) throw SchemaError("scatter stimuli file: no stimuli");
  std::vector<ScatterStimulus> out;
  for (const auto& j : *arr) out.push_back(scatter_from_json(j, warnings));
  return out;
}

std::vector<ScatterStimulus> import_scatter_stimuli(const std::string& path,
                                                    std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path + ": invalid JSON: " + e.what());
  }
  return parse_scatter_stimuli(doc, warnings);
}

nlohmann::json export_scatter_stimuli(const std::vector<ScatterStimulus>& stimuli) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : stimuli) arr.push_back(s);
  return {{"kind", "gbm"}, {"stimuli", std::move(arr)}};
}

// --- SGT stimuli --------------------------------------------------------------------------

SgtStimulus gen_sgt_stimulus(Rng& rng, const std::string& id, const ViewingContext& ctx,
                             const SgtSamplingOptions& opts) {
  const SgtParams sgt = sample_sgt_params(rng, opts);
  StimulusCurve pdf(sgt, CurveKind::Pdf);
  StimulusCurve cdf(sgt, CurveKind::Cdf);
  TruthValues truth = ground_truth(cdf, ctx);
  return {id, std::move(pdf), std::move(cdf), truth};
}

std::vector<SgtStimulus> gen_sgt_set(std::size_t n, std::uint64_t seed, const ViewingContext& ctx) {
  std::vector<SgtStimulus> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_rng(seed, "sgt-stimulus", i);
    char id[32];
    std::snprintf(id, sizeof id, "sgt-%04zu", i);
    out.push_back(gen_sgt_stimulus(rng, id, ctx));
  }
  return out;
}

nlohmann::json export_sgt_stimuli(const std::vector<SgtStimulus>& stimuli) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : stimuli)
    arr.push_back({{"id", s.id}, {"sgt", s.pdf.sgt()}, {"truth", s.truth}});
  return {{"kind", "sgt"}, {"stimuli", std::move(arr)}};
}

std::vector<SgtStimulus> parse_sgt_stimuli(const nlohmann::json& doc, const ViewingContext& ctx) {
  const auto& arr = field(doc, "stimuli", "sgt stimuli file");
  if (!arr.is_array()) throw SchemaError("sgt stimuli file: field \"stimuli\" must be an array");
  if (arr.empty()) throw SchemaError("sgt stimuli file: no stimuli");
  std::vector<SgtStimulus> out;
  for (const auto& j : arr) {
    const std::string id = string_field(j, "id", "stimulus");
    const std::string where = "stimulus \"" + id + "\"";
    SgtParams sgt;
    try {
      sgt = field(j, "sgt", where).get<SgtParams>();
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(where + ": field \"sgt\": " + e.what());
    }
    try {
      sgt.validate();
    } catch (const std::exception& e) {
      throw SchemaError(where + ": field \"sgt\": " + e.what());
    }
    StimulusCurve pdf(sgt, CurveKind::Pdf);
    StimulusCurve cdf(sgt, CurveKind::Cdf);
    TruthValues truth = ground_truth(cdf, ctx);
    out.push_back({id, std::move(pdf), std::move(cdf), truth});
  }
  return out;
}

// --- GBM ---------------------------------------------------------------------------------

ScatterStimulus gen_gbm_series(Rng& walk_rng, Rng& noise_rng, double variability,
                               const std::string& position, const GbmOptions& opts) {
  if (variability < 0.0) throw DomainError("gen_gbm_series: variability must be >= 0");
  if (position != "upper" && position != "lower")
    throw DomainError("gen_gbm_series: position must be \"upper\" or \"lower\"");
  if (opts.n < 2) throw DomainError("gen_gbm_series: n must be >= 2");

  std::vector<double> base(opts.n);
  double s = 0.5 * (opts.y_lo + opts.y_hi);
  const double step_drift = opts.drift - 0.5 * opts.volatility * opts.volatility;
  for (std::size_t i = 0; i < opts.n; ++i) {
    base[i] = s;
    s *= std::exp(step_drift + opts.volatility * standard_normal(walk_rng));
  }
  const auto [lo_it, hi_it] = std::minmax_element(base.begin(), base.end());
  const double lo = *lo_it, hi = *hi_it;
  for (double& b : base)
    b = hi > lo ? opts.y_lo + (b - lo) / (hi - lo) * (opts.y_hi - opts.y_lo) : 0.5 * (opts.y_lo + opts.y_hi);

  // Noise amplitude ramps linearly from 0 at the middle of the base range to
  // the full variability at the chosen end.
  const double mid = 0.5 * (opts.y_lo + opts.y_hi);
  const double half = 0.5 * (opts.y_hi - opts.y_lo);
  ScatterStimulus out;
  out.condition.variability = variability;
  out.condition.position = position;
  for (std::size_t i = 0; i < opts.n; ++i) {
    const double f = position == "upper" ? (base[i] - mid) / half : (mid - base[i]) / half;
    const double amp = variability * opts.base_scale * std::clamp(f, 0.0, 1.0);
    const double z = standard_normal(noise_rng);  // drawn unconditionally to keep streams aligned
    out.points.push_back({double(i + 1), base[i] + amp * z});
  }
  out.true_mean = mean_y(out.points);
  return out;
}

ScatterStimulus gen_gbm_series(std::uint64_t seed, double variability, const std::string& position,
                               const GbmOptions& opts) {
  Rng walk = make_rng(seed, "gbm-walk", 0);
  Rng noise = make_rng(seed, "gbm-noise", 0);
  ScatterStimulus s = gen_gbm_series(walk, noise, variability, position, opts);
  s.condition.seed = seed;
  return s;
}

std::vector<ScatterStimulus> gen_moritz_set(std::uint64_t seed, std::size_t n_seeds,
                                            const GbmOptions& opts) {
  std::vector<ScatterStimulus> out;
  for (double variability : {0.0, 0.4}) {
    for (const char* position : {"upper", "lower"}) {
      for (std::size_t k = 0; k < n_seeds; ++k) {
        const std::uint64_t s = derive_seed(seed, "gbm-series", k);
        ScatterStimulus stim = gen_gbm_series(s, variability, position, opts);
        stim.id = "gbm-v" + format_variability(variability) + "-" + position + "-" + std::to_string(k);
        out.push_back(std::move(stim));
      }
    }
  }
  return out;
}

ScatterPoint gen_projection_dot(Rng& rng, const ViewingContext& ctx) {
  std::uniform_real_distribution<double> ux(0.0, ctx.x_axis.length_px);
  std::uniform_real_distribution<double> uy(0.0, ctx.y_axis.length_px);
  const double px = ux(rng);
  const double py = uy(rng);
  return {ctx.x_axis.data_min + px / ctx.x_axis.px_per_unit(),
          ctx.y_axis.data_min + py / ctx.y_axis.px_per_unit()};
}

}  // namespace percept
