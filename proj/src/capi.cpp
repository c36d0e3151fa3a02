#include "percept_ops.h"

#include <cstdlib>
#include <cstring>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "percept/distributions.hpp"
#include "percept/error.hpp"
#include "percept/numerics.hpp"
#include "percept/perceptual_space.hpp"
#include "percept/pipeline.hpp"

struct pops_context {
  percept::ViewingContext ctx;
};

struct pops_sgt {
  percept::SkewedT dist;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

// Malformed options passed through the C boundary.
struct ArgumentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
pops_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return POPS_OK;
  } catch (const ArgumentError& e) {
    g_last_error = e.what();
    return POPS_ERR_ARGUMENT;
  } catch (const percept::SchemaError& e) {
    g_last_error = e.what();
    return POPS_ERR_SCHEMA;
  } catch (const percept::IoError& e) {
    g_last_error = e.what();
    return POPS_ERR_IO;
  } catch (const percept::ConvergenceError& e) {
    g_last_error = e.what();
    for (const auto& line : e.trace()) g_last_error += "\n  " + line;
    return POPS_ERR_CONVERGENCE;
  } catch (const std::domain_error& e) {
    g_last_error = e.what();
    return POPS_ERR_DOMAIN;
  } catch (const json::exception& e) {
    g_last_error = std::string("malformed JSON: ") + e.what();
    return POPS_ERR_ARGUMENT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return POPS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return POPS_ERR_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (!p) throw ArgumentError(std::string(name) + " must not be null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

percept::Axis to_axis(pops_axis a) {
  if (a == POPS_AXIS_X) return percept::Axis::X;
  if (a == POPS_AXIS_Y) return percept::Axis::Y;
  throw ArgumentError("unknown axis");
}

// Typed access to a command's options; rejects keys the command does not know.
class Options {
 public:
  Options(const json& j, std::set<std::string> known) : j_(j) {
    if (!j_.is_object()) throw ArgumentError("options must be a JSON object");
    for (const auto& [k, v] : j_.items())
      if (!known.count(k)) throw ArgumentError("unknown option \"" + k + "\"");
  }
  bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }
  std::string str(const std::string& k) const {
    if (!has(k)) throw ArgumentError("missing option \"" + k + "\"");
    if (!j_.at(k).is_string()) throw ArgumentError("option \"" + k + "\" must be a string");
    return j_.at(k).get<std::string>();
  }
  std::string str(const std::string& k, const std::string& def) const { return has(k) ? str(k) : def; }
  std::optional<std::string> opt_str(const std::string& k) const {
    return has(k) ? std::optional<std::string>(str(k)) : std::nullopt;
  }
  std::uint64_t u64(const std::string& k, std::uint64_t def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_number_unsigned()) throw ArgumentError("option \"" + k + "\" must be a non-negative integer");
    return j_.at(k).get<std::uint64_t>();
  }
  double num(const std::string& k) const {
    if (!has(k)) throw ArgumentError("missing option \"" + k + "\"");
    if (!j_.at(k).is_number()) throw ArgumentError("option \"" + k + "\" must be a number");
    return j_.at(k).get<double>();
  }
  std::optional<double> opt_num(const std::string& k) const {
    return has(k) ? std::optional<double>(num(k)) : std::nullopt;
  }
  bool flag(const std::string& k, bool def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_boolean()) throw ArgumentError("option \"" + k + "\" must be a boolean");
    return j_.at(k).get<bool>();
  }
  std::vector<std::string> strings(const std::string& k) const {
    if (!has(k)) return {};
    const auto& v = j_.at(k);
    if (v.is_string()) return {v.get<std::string>()};
    if (!v.is_array()) throw ArgumentError("option \"" + k + "\" must be a list of strings");
    std::vector<std::string> out;
    for (const auto& s : v) {
      if (!s.is_string()) throw ArgumentError("option \"" + k + "\" must be a list of strings");
      out.push_back(s.get<std::string>());
    }
    return out;
  }

 private:
  const json& j_;
};

json run_command(const std::string& command, const json& j) {
  namespace pl = percept::pipeline;
  if (command == "fit") {
    Options o(j, {"trials", "operator", "stimuli", "hp_params", "out", "seed", "bootstrap", "exclusion"});
    pl::FitCommand c;
    c.trials = o.str("trials");
    c.op = o.str("operator");
    c.stimuli = o.opt_str("stimuli");
    c.hp_params = o.opt_str("hp_params");
    c.out = o.str("out");
    c.seed = o.u64("seed", 0);
    c.bootstrap = static_cast<int>(o.u64("bootstrap", 500));
    c.exclusion = o.flag("exclusion", true);
    pl::run_fit(c);
    return {{"outputs", {c.out, c.out + ".manifest.json"}}};
  }
  if (command == "gen-stimuli") {
    Options o(j, {"kind", "n", "seed", "out", "context"});
    pl::GenStimuliCommand c;
    c.kind = o.str("kind");
    c.n = o.u64("n", 12);
    c.seed = o.u64("seed", 0);
    c.out = o.str("out");
    c.context = o.opt_str("context");
    pl::run_gen_stimuli(c);
    return {{"outputs", {c.out, c.out + ".manifest.json"}}};
  }
  if (command == "simulate") {
    Options o(j, {"params", "stimuli", "task", "context", "trials_per_participant", "strategy", "side_rule",
                  "seed", "out"});
    pl::SimulateCommand c;
    c.params = o.str("params");
    c.stimuli = o.opt_str("stimuli");
    c.task = o.opt_str("task");
    c.context = o.opt_str("context");
    c.trials_per_participant = o.u64("trials_per_participant", 48);
    c.strategy = o.str("strategy", "twice:mean");
    c.side_rule = o.str("side_rule", "flank");
    c.seed = o.u64("seed", 0);
    c.out = o.str("out");
    pl::run_simulate(c);
    return {{"outputs", {c.out, c.out + ".manifest.json"}}};
  }
  if (command == "predict") {
    Options o(j, {"params", "stimuli", "strategies", "all_strategies", "draws", "seed", "out_dir", "context",
                  "participant", "midpoint", "plug_in"});
    pl::PredictCommand c;
    c.params = o.str("params");
    c.stimuli = o.str("stimuli");
    c.strategies = o.strings("strategies");
    if (o.flag("all_strategies", false)) {
      if (!c.strategies.empty()) throw ArgumentError("strategies and all_strategies are exclusive");
      c.strategies = {"once:mean", "once:median", "once:weighted", "twice:mean", "twice:median", "twice:weighted"};
    }
    if (c.strategies.empty()) throw ArgumentError("give strategies or all_strategies");
    c.draws = o.u64("draws", 1000);
    c.seed = o.u64("seed", 0);
    c.out_dir = o.str("out_dir");
    c.context = o.opt_str("context");
    c.participant = o.opt_str("participant");
    c.midpoint = o.opt_num("midpoint");
    c.plug_in = o.flag("plug_in", false);
    pl::run_predict(c);
    return {{"out_dir", c.out_dir}};
  }
  if (command == "evaluate") {
    Options o(j, {"observed", "predictions", "out_dir", "seed", "space", "context", "projection_trials", "params",
                  "pit_mode", "band_sims", "overlay_replicates"});
    pl::EvaluateCommand c;
    c.observed = o.str("observed");
    c.predictions = o.str("predictions");
    c.out_dir = o.str("out_dir");
    c.seed = o.u64("seed", 0);
    c.space = o.str("space", "data");
    c.context = o.opt_str("context");
    c.projection_trials = o.opt_str("projection_trials");
    c.params = o.opt_str("params");
    c.pit_mode = o.str("pit_mode", "randomized");
    c.band_sims = o.u64("band_sims", 2000);
    c.overlay_replicates = o.u64("overlay_replicates", 20);
    pl::run_evaluate(c);
    return {{"out_dir", c.out_dir}};
  }
  if (command == "va") {
    Options o(j, {"context", "value", "axis", "inverse", "displacement"});
    pl::VaCommand c;
    c.context = o.opt_str("context");
    c.value = o.num("value");
    c.axis = o.str("axis", "y");
    c.inverse = o.flag("inverse", false);
    c.displacement = o.flag("displacement", false);
    return pl::run_va(c);
  }
  if (command == "validate") {
    Options o(j, {"schema", "file"});
    const auto problems = pl::run_validate(o.str("schema"), o.str("file"));
    return {{"valid", problems.empty()}, {"problems", problems}};
  }
  throw ArgumentError("unknown command \"" + command + "\"");
}

}  // namespace

extern "C" {

const char* pops_last_error(void) { return g_last_error.c_str(); }

const char* pops_version(void) {
  static const std::string v = percept::pipeline::version();
  return v.c_str();
}

const char* pops_status_name(pops_status status) {
  switch (status) {
    case POPS_OK: return "ok";
    case POPS_ERR_ARGUMENT: return "argument error";
    case POPS_ERR_DOMAIN: return "domain error";
    case POPS_ERR_SCHEMA: return "schema error";
    case POPS_ERR_IO: return "i/o error";
    case POPS_ERR_CONVERGENCE: return "convergence error";
    case POPS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void pops_set_threads(unsigned n) { percept::numerics::set_thread_override(n); }

void pops_string_free(char* s) { std::free(s); }

pops_status pops_context_default(pops_chart chart, pops_context** out) {
  return guarded([&] {
    require(out, "out");
    if (chart == POPS_CHART_CURVE) *out = new pops_context{percept::ViewingContext::curve_chart()};
    else if (chart == POPS_CHART_SCATTER) *out = new pops_context{percept::ViewingContext::scatter_chart()};
    else throw ArgumentError("unknown chart");
  });
}

pops_status pops_context_from_json(const char* text, pops_context** out) {
  return guarded([&] {
    require(text, "json");
    require(out, "out");
    const json j = json::parse(text);
    percept::ViewingContext ctx;
    try {
      ctx = j.get<percept::ViewingContext>();
    } catch (const json::exception& e) {
      throw percept::SchemaError(std::string("viewing context: ") + e.what());
    }
    ctx.validate();
    *out = new pops_context{ctx};
  });
}

pops_status pops_context_to_json(const pops_context* ctx, char** out_json) {
  return guarded([&] {
    require(ctx, "ctx");
    require(out_json, "out_json");
    *out_json = dup_string(json(ctx->ctx).dump());
  });
}

void pops_context_free(pops_context* ctx) { delete ctx; }

pops_status pops_value_to_va(const pops_context* ctx, pops_axis axis, double value, double* out) {
  return guarded([&] {
    require(ctx, "ctx");
    require(out, "out");
    *out = percept::value_to_va(value, to_axis(axis), ctx->ctx);
  });
}

pops_status pops_va_to_value(const pops_context* ctx, pops_axis axis, double degrees, double* out) {
  return guarded([&] {
    require(ctx, "ctx");
    require(out, "out");
    *out = percept::va_to_value(degrees, to_axis(axis), ctx->ctx);
  });
}

pops_status pops_sgt_create(double mu, double sigma, double lambda, double p, double q, pops_sgt** out) {
  return guarded([&] {
    require(out, "out");
    *out = new pops_sgt{percept::SkewedT(percept::SgtParams{mu, sigma, lambda, p, q})};
  });
}

void pops_sgt_free(pops_sgt* d) { delete d; }

pops_status pops_sgt_pdf(const pops_sgt* d, double x, double* out) {
  return guarded([&] {
    require(d, "d");
    require(out, "out");
    *out = d->dist.pdf(x);
  });
}

pops_status pops_sgt_cdf(const pops_sgt* d, double x, double* out) {
  return guarded([&] {
    require(d, "d");
    require(out, "out");
    *out = d->dist.cdf(x);
  });
}

pops_status pops_sgt_quantile(const pops_sgt* d, double prob, double* out) {
  return guarded([&] {
    require(d, "d");
    require(out, "out");
    *out = d->dist.quantile(prob);
  });
}

pops_status pops_sgt_mode(const pops_sgt* d, double* out) {
  return guarded([&] {
    require(d, "d");
    require(out, "out");
    *out = d->dist.mode();
  });
}

pops_status pops_run(const char* command, const char* options_json, char** out_json) {
  return guarded([&] {
    require(command, "command");
    const json opts = options_json ? json::parse(options_json) : json::object();
    const json result = run_command(command, opts);
    if (out_json) *out_json = dup_string(result.dump());
  });
}

}  // extern "C"
