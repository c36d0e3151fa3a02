#include "percept/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/version.hpp>
#include <openssl/evp.h>

#include "percept/composition.hpp"
#include "percept/error.hpp"
#include "percept/evaluation.hpp"
#include "percept/fitting.hpp"
#include "percept/io.hpp"
#include "percept/numerics.hpp"
#include "percept/simulate.hpp"
#include "percept/stimuli.hpp"

#ifndef PERCEPT_OPS_VERSION
#define PERCEPT_OPS_VERSION "0.0.0"
#endif

namespace percept::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::string version() { return PERCEPT_OPS_VERSION; }

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IoError("sha256: digest initialisation failed");
  }
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

// Tracks created files; removes them unless the run completes.
class Outputs {
 public:
  ~Outputs() {
    if (committed_) return;
    std::error_code ec;
    for (auto it = files_.rbegin(); it != files_.rend(); ++it) fs::remove(*it, ec);
    for (auto it = dirs_.rbegin(); it != dirs_.rend(); ++it) fs::remove(*it, ec);  // only if empty
  }
  std::string add(const std::string& path) {
    files_.push_back(path);
    return path;
  }
  void make_dir(const std::string& dir) {
    if (dir.empty() || fs::exists(dir)) return;
    make_dir(fs::path(dir).parent_path().string());
    fs::create_directory(dir);
    dirs_.push_back(dir);
  }
  const std::vector<std::string>& files() const { return files_; }
  void commit() { committed_ = true; }

 private:
  std::vector<std::string> files_;
  std::vector<std::string> dirs_;
  bool committed_ = false;
};

std::ofstream open_out(Outputs& outputs, const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) outputs.make_dir(parent.string());
  std::ofstream out(outputs.add(path), std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

void write_json(Outputs& outputs, const std::string& path, const json& j) {
  auto out = open_out(outputs, path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": invalid JSON: " + e.what());
  }
}

std::string base_name(const std::string& p) { return fs::path(p).filename().string(); }

void write_manifest(Outputs& outputs, const std::string& path, const std::string& command,
                    std::uint64_t seed, const std::vector<std::string>& inputs, const json& options) {
  json in = json::array();
  for (const auto& p : inputs) in.push_back({{"name", base_name(p)}, {"sha256", sha256_file(p)}});
  json out = json::array();
  for (const auto& p : outputs.files()) out.push_back({{"name", base_name(p)}, {"sha256", sha256_file(p)}});
  const json manifest = {{"command", command},
                         {"seed", seed},
                         {"options", options},
                         {"inputs", in},
                         {"outputs", out},
                         {"versions",
                          {{"percept_ops", version()},
                           {"boost", BOOST_LIB_VERSION},
                           {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                 std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                 std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
  write_json(outputs, path, manifest);
}

struct ParamsFile {
  OperatorTag tag;
  ParticipantParams participants;
  std::vector<std::map<std::string, double>> se;  // per participant, empty when absent
};

ParamsFile load_params(const std::string& path) {
  const json doc = read_json(path);
  if (!doc.is_object() || !doc.contains("operator") || !doc.at("operator").is_string())
    throw SchemaError(path + ": missing field \"operator\"");
  ParamsFile pf{operator_tag_from_string(doc.at("operator").get<std::string>()), {}, {}};
  if (!doc.contains("participants") || !doc.at("participants").is_array())
    throw SchemaError(path + ": missing field \"participants\"");
  for (const auto& p : doc.at("participants")) {
    if (!p.contains("participant_id") || !p.at("participant_id").is_string())
      throw SchemaError(path + ": participant entry missing field \"participant_id\"");
    const std::string pid = p.at("participant_id").get<std::string>();
    // Parameter keys may sit beside the id or in a nested "params" object.
    const json& body = p.contains("params") && p.at("params").is_object() ? p.at("params") : p;
    OperatorParams params;
    try {
      params = params_from_json(pf.tag, body);
    } catch (const SchemaError& e) {
      throw SchemaError(path + ": participant \"" + pid + "\": " + e.what());
    }
    std::visit([&](const auto& v) {
      try {
        v.validate();
      } catch (const std::exception& e) {
        throw SchemaError(path + ": participant \"" + pid + "\": " + e.what());
      }
    }, params);
    pf.participants.emplace_back(pid, std::move(params));
    std::map<std::string, double> se;
    if (p.contains("se") && p.at("se").is_object()) {
      for (const auto& [k, v] : p.at("se").items()) {
        if (!v.is_number() || v.get<double>() < 0.0)
          throw SchemaError(path + ": participant \"" + pid + "\": se." + k + " must be a number >= 0");
        se[k] = v.get<double>();
      }
    }
    pf.se.push_back(std::move(se));
  }
  if (pf.participants.empty()) throw SchemaError(path + ": no participants");
  return pf;
}

std::string stimulus_kind(const json& doc, const std::string& path) {
  if (!doc.is_object() || !doc.contains("kind") || !doc.at("kind").is_string())
    throw SchemaError(path + ": missing field \"kind\"");
  return doc.at("kind").get<std::string>();
}

std::vector<SgtStimulus> load_sgt(const std::string& path, const ViewingContext& ctx) {
  const json doc = read_json(path);
  if (stimulus_kind(doc, path) != "sgt") throw SchemaError(path + ": expected SGT stimuli (kind \"sgt\")");
  return parse_sgt_stimuli(doc, ctx);
}

std::vector<ScatterStimulus> load_scatter(const std::string& path, std::vector<std::string>* warnings) {
  const json doc = read_json(path);
  if (doc.is_object() && doc.contains("kind") && doc.at("kind") != "gbm")
    throw SchemaError(path + ": expected scatter stimuli (kind \"gbm\")");
  return parse_scatter_stimuli(doc, warnings);
}

SideRule side_rule_from_string(const std::string& s) {
  if (s == "flank") return SideRule::FlankSlope;
  if (s == "equal") return SideRule::Equal;
  throw DomainError("unknown side rule \"" + s + "\" (expected flank or equal)");
}

json fit_to_json(const std::string& pid, const FitResult& r) {
  json j = params_to_json(r.params);
  j["participant_id"] = pid;
  j["loglik"] = r.log_likelihood;
  j["n"] = r.n_trials;
  j["se"] = r.bootstrap_se;
  j["flags"] = r.flags;
  return j;
}

}  // namespace

ViewingContext load_context(const std::optional<std::string>& path, const ViewingContext& fallback) {
  if (!path) return fallback;
  const json doc = read_json(*path);
  ViewingContext ctx;
  try {
    ctx = doc.get<ViewingContext>();
  } catch (const json::exception& e) {
    throw SchemaError(*path + ": " + e.what());
  }
  try {
    ctx.validate();
  } catch (const std::exception& e) {
    throw SchemaError(*path + ": " + e.what());
  }
  return ctx;
}

// --- fit ------------------------------------------------------------------------------------

void run_fit(const FitCommand& cmd) {
  Outputs outputs;
  const OperatorTag tag = operator_tag_from_string(cmd.op);
  std::vector<TrialRecord> trials;
  for (auto& t : read_trials(cmd.trials))
    if (t.task == cmd.op) trials.push_back(std::move(t));
  if (trials.empty()) throw SchemaError(cmd.trials + ": no trials with task \"" + cmd.op + "\"");

  json excluded = json::array();
  json screens = json::array();
  if (cmd.exclusion) {
    auto report = exclusion_filter(trials);
    for (const auto& s : report.participants) {
      json e = {{"participant_id", s.participant_id},
                {"correlation", std::isfinite(s.correlation) ? json(s.correlation) : json(nullptr)},
                {"distance_cm", s.distance_cm},
                {"reasons", s.reasons}};
      (s.reasons.empty() ? screens : excluded).push_back(e);
    }
    trials = std::move(report.kept);
    if (trials.empty()) throw DomainError("fit: every participant was excluded");
  }

  std::vector<std::string> inputs = {cmd.trials};
  std::vector<SgtStimulus> curves;
  std::map<std::string, std::size_t> curve_index;
  if (cmd.stimuli) {
    inputs.push_back(*cmd.stimuli);
    curves = load_sgt(*cmd.stimuli, trials.front().context);
    for (std::size_t i = 0; i < curves.size(); ++i) curve_index[curves[i].id] = i;
  }
  const StimulusLookup lookup = [&](const std::string& id) -> const StimulusCurve* {
    const auto it = curve_index.find(id);
    if (it == curve_index.end()) return nullptr;
    return tag == OperatorTag::MaxSlope ? &curves[it->second].cdf : &curves[it->second].pdf;
  };

  std::map<std::string, GaussianOpParams> hp_by_pid;
  std::optional<GaussianOpParams> hp_mean;
  if (cmd.hp_params) {
    inputs.push_back(*cmd.hp_params);
    const auto hp = load_params(*cmd.hp_params);
    if (hp.tag != OperatorTag::HighestPointX)
      throw SchemaError(*cmd.hp_params + ": expected highest_point_x parameters");
    double b = 0.0, s = 0.0;
    for (const auto& [pid, p] : hp.participants) {
      const auto& g = std::get<GaussianOpParams>(p);
      hp_by_pid[pid] = g;
      b += g.beta;
      s += g.spread;
    }
    const double n = double(hp.participants.size());
    hp_mean = GaussianOpParams{b / n, s / n, SpreadKind::Fixed};
  }
  if ((tag == OperatorTag::Bahp || tag == OperatorTag::Mixture) && !hp_mean)
    throw DomainError("fit " + cmd.op + ": --hp-params is required");

  std::vector<std::string> order;
  std::map<std::string, std::vector<TrialRecord>> by_pid;
  for (const auto& t : trials) {
    auto [it, inserted] = by_pid.try_emplace(t.participant_id);
    if (inserted) order.push_back(t.participant_id);
    it->second.push_back(t);
  }
  std::vector<ParticipantFit> fits(order.size());
  numerics::parallel_for(order.size(), [&](std::size_t i) {
    const auto& pid = order[i];
    FitOptions opts;
    opts.bootstrap_replicates = cmd.bootstrap;
    opts.seed = cmd.seed;
    if (hp_mean) {
      const auto it = hp_by_pid.find(pid);
      opts.hp_fixed = it != hp_by_pid.end() ? it->second : *hp_mean;
    }
    fits[i] = {pid, fit_participant(tag, pid, by_pid.at(pid), lookup, opts)};
  });

  json doc = {{"operator", cmd.op}, {"seed", cmd.seed}, {"bootstrap", cmd.bootstrap}};
  json parts = json::array();
  for (const auto& f : fits) parts.push_back(fit_to_json(f.participant_id, f.fit));
  doc["participants"] = parts;
  if (fits.size() >= 2) {
    const auto pop = pool_participants(fits);
    json pj = json::object();
    for (const auto& [k, p] : pop.parameters) pj[k] = {{"mean", p.mean}, {"sd", p.sd}, {"tau2", p.tau2}};
    doc["population"] = pj;
    json sj = json::object();
    for (const auto& [pid, m] : pop.shrunken) sj[pid] = m;
    doc["shrunken"] = sj;
  }
  doc["kept"] = screens;
  doc["excluded"] = excluded;
  write_json(outputs, cmd.out, doc);
  write_manifest(outputs, cmd.out + ".manifest.json", "fit", cmd.seed, inputs,
                 {{"operator", cmd.op}, {"bootstrap", cmd.bootstrap}, {"exclusion", cmd.exclusion}});
  outputs.commit();
}

// --- gen-stimuli ------------------------------------------------------------------------------

void run_gen_stimuli(const GenStimuliCommand& cmd) {
  Outputs outputs;
  std::vector<std::string> inputs;
  if (cmd.context) inputs.push_back(*cmd.context);
  json doc;
  if (cmd.kind == "sgt") {
    if (cmd.n < 1) throw DomainError("gen-stimuli: --n must be >= 1");
    doc = export_sgt_stimuli(gen_sgt_set(cmd.n, cmd.seed, load_context(cmd.context, ViewingContext::curve_chart())));
  } else if (cmd.kind == "gbm") {
    if (cmd.n < 1) throw DomainError("gen-stimuli: --n must be >= 1");
    doc = export_scatter_stimuli(gen_moritz_set(cmd.seed, cmd.n));
  } else {
    throw DomainError("gen-stimuli: unknown kind \"" + cmd.kind + "\" (expected sgt or gbm)");
  }
  write_json(outputs, cmd.out, doc);
  write_manifest(outputs, cmd.out + ".manifest.json", "gen-stimuli", cmd.seed, inputs,
                 {{"kind", cmd.kind}, {"n", cmd.n}});
  outputs.commit();
}

// --- simulate ---------------------------------------------------------------------------------

void run_simulate(const SimulateCommand& cmd) {
  Outputs outputs;
  std::vector<std::string> inputs = {cmd.params};
  const ParamsFile pf = load_params(cmd.params);
  const std::string task = cmd.task.value_or(to_string(pf.tag));
  if (cmd.stimuli) inputs.push_back(*cmd.stimuli);
  if (cmd.context) inputs.push_back(*cmd.context);
  std::vector<TrialRecord> trials;
  if (task == kMeanEstimateTask) {
    if (!is_projection(pf.tag)) throw DomainError("simulate mean_estimate: projection parameters required");
    if (!cmd.stimuli) throw DomainError("simulate mean_estimate: --stimuli (scatter) is required");
    const auto ctx = load_context(cmd.context, ViewingContext::scatter_chart());
    trials = simulate_mean_estimates(pf.participants, load_scatter(*cmd.stimuli, nullptr), ctx,
                                     strategy_from_string(cmd.strategy), cmd.seed);
  } else {
    const OperatorTag tag = operator_tag_from_string(task);
    if (tag != pf.tag)
      throw DomainError("simulate: task " + task + " does not match the params operator " + to_string(pf.tag));
    const auto ctx = load_context(cmd.context, ViewingContext::curve_chart());
    std::vector<SgtStimulus> curves;
    if (cmd.stimuli) curves = load_sgt(*cmd.stimuli, ctx);
    SimulationOptions opts;
    opts.trials_per_participant = cmd.trials_per_participant;
    opts.seed = cmd.seed;
    opts.side_rule = side_rule_from_string(cmd.side_rule);
    trials = simulate_operator_trials(tag, pf.participants, curves, ctx, opts);
  }
  {
    auto out = open_out(outputs, cmd.out);
    write_trials(out, trials);
    if (!out) throw IoError("write failed: " + cmd.out);
  }
  write_manifest(outputs, cmd.out + ".manifest.json", "simulate", cmd.seed, inputs,
                 {{"task", task},
                  {"trials_per_participant", cmd.trials_per_participant},
                  {"strategy", cmd.strategy},
                  {"side_rule", cmd.side_rule}});
  outputs.commit();
}

// --- predict ----------------------------------------------------------------------------------

void run_predict(const PredictCommand& cmd) {
  Outputs outputs;
  std::vector<std::string> inputs = {cmd.params, cmd.stimuli};
  if (cmd.context) inputs.push_back(*cmd.context);
  if (cmd.draws < 1) throw DomainError("predict: --draws must be >= 1");
  const ParamsFile pf = load_params(cmd.params);
  if (!is_projection(pf.tag)) throw DomainError("predict: projection parameters required");
  std::vector<ProjectionParams> params;
  std::vector<ProjectionUncertainty> spread;
  for (std::size_t k = 0; k < pf.participants.size(); ++k) {
    const auto& [pid, p] = pf.participants[k];
    if (cmd.participant && pid != *cmd.participant) continue;
    params.push_back(std::get<ProjectionParams>(p));
    ProjectionUncertainty u;
    if (!cmd.plug_in) {
      const auto& se = pf.se[k];
      if (auto it = se.find("beta"); it != se.end()) u.se_beta = it->second;
      if (auto it = se.find("alpha"); it != se.end()) u.se_alpha = it->second;
    }
    spread.push_back(u);
  }
  bool any_spread = false;
  for (const auto& u : spread) any_spread = any_spread || !u.none();
  if (params.empty()) throw DomainError("predict: participant \"" + cmd.participant.value_or("") + "\" not found");
  if (cmd.strategies.empty()) throw DomainError("predict: no strategies given");
  std::vector<Strategy> strategies;
  for (const auto& s : cmd.strategies) strategies.push_back(strategy_from_string(s));

  std::vector<std::string> warnings;
  const auto stimuli = load_scatter(cmd.stimuli, &warnings);
  const auto ctx = load_context(cmd.context, ViewingContext::scatter_chart());
  CompositionOptions comp;
  comp.midpoint = cmd.midpoint;

  // Draw i uses participant i mod P, so the draws marginalise over participants.
  const std::size_t n_jobs = stimuli.size() * strategies.size();
  std::vector<std::vector<double>> draws(n_jobs);
  for (std::size_t job = 0; job < n_jobs; ++job) {
    const auto& stim = stimuli[job / strategies.size()];
    const Strategy st = strategies[job % strategies.size()];
    const ComposedStimulus cs(stim, ctx, comp);
    const std::size_t m = cs.noise_size();
    const std::string key = stim.id + "/" + to_string(st);
    const auto z = draw_noise(cmd.draws, m, cmd.seed, key);
    std::vector<double> zp;
    if (any_spread) zp = draw_noise(cmd.draws, 2, cmd.seed, key + "/params");
    auto& out = draws[job];
    out.resize(cmd.draws);
    numerics::parallel_for(cmd.draws, [&](std::size_t i) {
      const std::size_t k = i % params.size();
      const ProjectionParams p = zp.empty() ? params[k] : perturb_params(params[k], spread[k], zp[2 * i], zp[2 * i + 1]);
      out[i] = cs.draw(p, st, std::span<const double>(z).subspan(i * m, m));
    });
  }

  const std::string pred_path = (fs::path(cmd.out_dir) / "predictions.csv").string();
  const std::string sum_path = (fs::path(cmd.out_dir) / "summary.csv").string();
  {
    auto out = open_out(outputs, pred_path);
    write_csv_row(out, {"stim_id", "strategy", "draw", "value"});
    for (std::size_t job = 0; job < n_jobs; ++job) {
      const auto& id = stimuli[job / strategies.size()].id;
      const auto name = to_string(strategies[job % strategies.size()]);
      for (std::size_t i = 0; i < draws[job].size(); ++i)
        write_csv_row(out, {id, name, std::to_string(i), format_number(draws[job][i])});
    }
    if (!out) throw IoError("write failed: " + pred_path);
  }
  {
    auto out = open_out(outputs, sum_path);
    write_csv_row(out, {"stim_id", "strategy", "mean", "sd", "q02.5", "q10", "q25", "q50", "q75", "q90",
                        "q97.5"});
    for (std::size_t job = 0; job < n_jobs; ++job) {
      const auto s = PredictiveDistribution{draws[job]}.summary();
      std::vector<std::string> row = {stimuli[job / strategies.size()].id,
                                      to_string(strategies[job % strategies.size()]),
                                      format_number(s.mean), format_number(s.sd)};
      for (double q : s.quantiles) row.push_back(format_number(q));
      write_csv_row(out, row);
    }
    if (!out) throw IoError("write failed: " + sum_path);
  }
  write_manifest(outputs, (fs::path(cmd.out_dir) / "manifest.json").string(), "predict", cmd.seed, inputs,
                 {{"strategies", cmd.strategies},
                  {"draws", cmd.draws},
                  {"participant", cmd.participant ? json(*cmd.participant) : json(nullptr)},
                  {"midpoint", cmd.midpoint ? json(*cmd.midpoint) : json(nullptr)},
                  {"warnings", warnings}});
  outputs.commit();
}

// --- evaluate ---------------------------------------------------------------------------------

void run_evaluate(const EvaluateCommand& cmd) {
  Outputs outputs;
  std::vector<std::string> inputs = {cmd.observed, cmd.predictions};
  if (cmd.context) inputs.push_back(*cmd.context);
  if (cmd.space != "data" && cmd.space != "va")
    throw DomainError("evaluate: unknown space \"" + cmd.space + "\" (expected data or va)");
  if (cmd.pit_mode != "randomized" && cmd.pit_mode != "mid")
    throw DomainError("evaluate: unknown PIT mode \"" + cmd.pit_mode + "\"");
  const PitMode pit_mode = cmd.pit_mode == "mid" ? PitMode::Mid : PitMode::Randomized;
  const auto ctx = load_context(cmd.context, ViewingContext::scatter_chart());
  auto to_space = [&](double v) { return cmd.space == "va" ? value_to_va(v, Axis::Y, ctx) : v; };

  std::vector<TrialRecord> observed;
  for (auto& t : read_trials(cmd.observed))
    if (t.task == kMeanEstimateTask) observed.push_back(std::move(t));
  if (observed.empty()) throw SchemaError(cmd.observed + ": no mean_estimate trials");

  const CsvTable pt = read_csv(cmd.predictions);
  const std::size_t c_stim = pt.column("stim_id"), c_strat = pt.column("strategy"),
                    c_value = pt.column("value");
  std::vector<std::string> names;
  std::map<std::string, std::map<std::string, std::vector<double>>> by_strategy;
  for (std::size_t r = 0; r < pt.rows.size(); ++r) {
    const auto& row = pt.rows[r];
    if (!by_strategy.count(row[c_strat])) names.push_back(row[c_strat]);
    by_strategy[row[c_strat]][row[c_stim]].push_back(to_space(
        parse_number(row[c_value], cmd.predictions + ":" + std::to_string(pt.line_numbers[r]) + ": column \"value\"")));
  }
  if (names.empty()) throw SchemaError(cmd.predictions + ": no prediction rows");

  std::vector<double> obs;
  for (const auto& t : observed) obs.push_back(to_space(t.resp_y));
  std::vector<std::vector<std::vector<double>>> preds;
  for (const auto& name : names) {
    std::vector<std::vector<double>> per_obs;
    for (const auto& t : observed) {
      const auto it = by_strategy[name].find(t.stim_id);
      if (it == by_strategy[name].end())
        throw SchemaError(cmd.predictions + ": no draws for stimulus \"" + t.stim_id + "\" under " + name);
      per_obs.push_back(it->second);
    }
    preds.push_back(std::move(per_obs));
  }
  const std::array levels = {0.5, 0.8, 0.95};
  const auto scores = compare_strategies(obs, names, preds, levels);
  const EcdfBand band = pit_ecdf_band(obs.size(), 0.05, cmd.band_sims, cmd.seed);

  std::map<std::string, std::vector<double>> pits;
  for (std::size_t s = 0; s < names.size(); ++s) {
    Rng rng = make_rng(cmd.seed, "pit/" + names[s], 0);
    pits[names[s]] = pit_values(obs, preds[s], rng, pit_mode);
  }

  const fs::path dir(cmd.out_dir);
  {
    auto out = open_out(outputs, (dir / "strategy_scores.csv").string());
    write_csv_row(out, {"strategy", "rank", "mean_log_density", "coverage_50", "coverage_80", "coverage_95",
                        "pit_ks_statistic", "pit_ks_p", "pit_in_band", "n_obs"});
    for (const auto& sc : scores) {
      const auto ks = ks_uniform(pits[sc.strategy]);
      write_csv_row(out, {sc.strategy, std::to_string(sc.rank), format_number(sc.mean_log_density),
                          format_number(sc.coverage[0]), format_number(sc.coverage[1]),
                          format_number(sc.coverage[2]), format_number(ks.statistic),
                          format_number(ks.p_value), ecdf_inside(pits[sc.strategy], band) ? "1" : "0",
                          std::to_string(obs.size())});
    }
  }
  {
    auto out = open_out(outputs, (dir / "pit.csv").string());
    write_csv_row(out, {"strategy", "participant_id", "trial_id", "stim_id", "observed", "pit"});
    for (const auto& name : names)
      for (std::size_t i = 0; i < observed.size(); ++i)
        write_csv_row(out, {name, observed[i].participant_id, observed[i].trial_id, observed[i].stim_id,
                            format_number(obs[i]), format_number(pits[name][i])});
  }
  {
    auto out = open_out(outputs, (dir / "pit_band.csv").string());
    write_csv_row(out, {"strategy", "grid", "lower", "upper", "ecdf"});
    for (const auto& name : names) {
      std::vector<double> sorted = pits[name];
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t k = 0; k < band.grid.size(); ++k) {
        const auto c = std::upper_bound(sorted.begin(), sorted.end(), band.grid[k]) - sorted.begin();
        write_csv_row(out, {name, format_number(band.grid[k]), format_number(band.lower[k]),
                            format_number(band.upper[k]), format_number(double(c) / double(sorted.size()))});
      }
    }
  }
  if (cmd.overlay_replicates > 0) {
    auto out = open_out(outputs, (dir / "density_overlay.csv").string());
    write_csv_row(out, {"strategy", "series", "x", "density"});
    for (std::size_t s = 0; s < names.size(); ++s) {
      std::vector<std::vector<double>> reps(cmd.overlay_replicates);
      for (std::size_t r = 0; r < reps.size(); ++r)
        for (const auto& d : preds[s]) reps[r].push_back(d[r % d.size()]);
      const auto ov = density_overlay(obs, reps);
      for (std::size_t g = 0; g < ov.grid.size(); ++g)
        write_csv_row(out, {names[s], "observed", format_number(ov.grid[g]), format_number(ov.observed[g])});
      for (std::size_t r = 0; r < ov.draws.size(); ++r)
        for (std::size_t g = 0; g < ov.grid.size(); ++g)
          write_csv_row(out, {names[s], "draw_" + std::to_string(r), format_number(ov.grid[g]),
                              format_number(ov.draws[r][g])});
    }
  }
  if (cmd.projection_trials || cmd.params) {
    if (!cmd.projection_trials || !cmd.params)
      throw DomainError("evaluate: --projection-trials and --params go together");
    inputs.push_back(*cmd.projection_trials);
    inputs.push_back(*cmd.params);
    const ParamsFile pf = load_params(*cmd.params);
    if (!is_projection(pf.tag)) throw DomainError("evaluate: projection parameters required");
    const auto trials = read_trials(*cmd.projection_trials);
    auto out = open_out(outputs, (dir / "error_distance.csv").string());
    write_csv_row(out, {"participant_id", "bin", "d_lo", "d_hi", "d_mid", "n", "empirical_sd", "model_sd",
                        "sparse"});
    for (const auto& [pid, p] : pf.participants) {
      std::vector<ProjectionObs> po;
      for (const auto& t : trials)
        if (t.participant_id == pid && t.task == to_string(pf.tag)) po.push_back(projection_observation(t, pf.tag));
      if (po.empty()) continue;
      const auto bins = error_distance_summary(po, std::get<ProjectionParams>(p));
      for (std::size_t b = 0; b < bins.size(); ++b)
        write_csv_row(out, {pid, std::to_string(b), format_number(bins[b].d_lo), format_number(bins[b].d_hi),
                            format_number(bins[b].d_mid), std::to_string(bins[b].n),
                            format_number(bins[b].empirical_sd), format_number(bins[b].model_sd),
                            bins[b].sparse ? "1" : "0"});
    }
  }
  write_manifest(outputs, (dir / "manifest.json").string(), "evaluate", cmd.seed, inputs,
                 {{"space", cmd.space},
                  {"pit_mode", cmd.pit_mode},
                  {"band_sims", cmd.band_sims},
                  {"overlay_replicates", cmd.overlay_replicates}});
  outputs.commit();
}

// --- va / validate --------------------------------------------------------------------------

json run_va(const VaCommand& cmd) {
  const auto ctx = load_context(cmd.context, ViewingContext::curve_chart());
  Axis axis;
  if (cmd.axis == "x") axis = Axis::X;
  else if (cmd.axis == "y") axis = Axis::Y;
  else throw DomainError("va: axis must be x or y");
  if (cmd.inverse) {
    const double v = cmd.displacement ? va_to_data(cmd.value, axis, ctx) : va_to_value(cmd.value, axis, ctx);
    return {{"axis", cmd.axis}, {"degrees", cmd.value}, {cmd.displacement ? "displacement" : "value", v}};
  }
  const double disp = cmd.displacement ? cmd.value : cmd.value - ctx.axis(axis).data_min;
  const AngleResult r = data_to_va(disp, axis, ctx);
  return {{"axis", cmd.axis},
          {cmd.displacement ? "displacement" : "value", cmd.value},
          {"degrees", r.degrees},
          {"extrapolated", r.extrapolated}};
}

std::vector<std::string> run_validate(const std::string& schema, const std::string& file) {
  std::vector<std::string> problems;
  if (!fs::exists(file)) throw IoError("cannot open " + file);
  try {
    if (schema == "trials") {
      return validate_trials_table(read_csv(file), file);
    } else if (schema == "scatter") {
      const json doc = read_json(file);
      const json* arr = &doc;
      if (doc.is_object()) {
        if (!doc.contains("stimuli")) return {file + ": missing field \"stimuli\""};
        arr = &doc.at("stimuli");
      }
      if (!arr->is_array()) return {file + ": field \"stimuli\" must be an array"};
      if (arr->empty()) return {file + ": no stimuli"};
      for (std::size_t i = 0; i < arr->size(); ++i) {
        try {
          std::vector<std::string> warnings;
          scatter_from_json((*arr)[i], &warnings);
        } catch (const std::exception& e) {
          problems.push_back(file + ": stimuli[" + std::to_string(i) + "]: " + e.what());
        }
      }
    } else if (schema == "sgt-stimuli") {
      load_sgt(file, ViewingContext::curve_chart());
    } else if (schema == "context") {
      load_context(file, ViewingContext{});
    } else if (schema == "params") {
      load_params(file);
    } else {
      throw DomainError("validate: unknown schema \"" + schema +
                        "\" (expected trials, scatter, sgt-stimuli, context or params)");
    }
  } catch (const SchemaError& e) {
    problems.push_back(e.what());
  } catch (const DomainError& e) {
    if (std::string(e.what()).rfind("validate:", 0) == 0) throw;
    problems.push_back(e.what());
  }
  return problems;
}

}  // namespace percept::pipeline
