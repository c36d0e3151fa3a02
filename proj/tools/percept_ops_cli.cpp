// percept-ops command-line front end. Parses flags and hands each subcommand
// to the C interface as a JSON option object.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <nlohmann/json.hpp>

#include "percept_ops.h"

using nlohmann::json;

namespace {

template <class T>
void put(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

int run(const std::string& command, const json& opts, bool print_result) {
  char* out = nullptr;
  const pops_status st = pops_run(command.c_str(), opts.dump().c_str(), &out);
  if (st != POPS_OK) {
    std::cerr << "percept-ops " << command << ": " << pops_status_name(st) << ": " << pops_last_error() << '\n';
    return 2;
  }
  const json result = json::parse(out);
  pops_string_free(out);
  if (command == "validate") {
    for (const auto& p : result.at("problems")) std::cout << p.get<std::string>() << '\n';
    return result.at("valid").get<bool>() ? 0 : 1;
  }
  if (print_result) std::cout << result.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visual decoding operators: fit, simulate, compose and evaluate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pops_version()));
  std::optional<unsigned> threads;
  app.add_option("--threads", threads, "worker threads (default: PERCEPT_OPS_THREADS or all cores)");

  std::uint64_t seed = 0;
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", seed, "master seed")->capture_default_str(); };

  // fit
  auto* fit = app.add_subcommand("fit", "fit operator parameters per participant");
  std::string fit_trials, fit_op, fit_out;
  std::optional<std::string> fit_stimuli, fit_hp;
  int bootstrap = 500;
  bool no_exclusion = false;
  fit->add_option("--trials", fit_trials, "trials CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--operator", fit_op, "operator tag")->required();
  fit->add_option("--stimuli", fit_stimuli, "SGT stimuli JSON (max_slope, bahp, mixture)");
  fit->add_option("--hp-params", fit_hp, "highest_point_x fit output (bahp, mixture)");
  fit->add_option("--out", fit_out, "params JSON")->required();
  fit->add_option("--bootstrap", bootstrap, "bootstrap replicates")->capture_default_str()->check(CLI::NonNegativeNumber);
  fit->add_flag("--no-exclusion", no_exclusion, "keep every participant");
  add_seed(fit);

  // gen-stimuli
  auto* gen = app.add_subcommand("gen-stimuli", "generate SGT curve or GBM scatter stimuli");
  std::string gen_kind, gen_out;
  std::size_t gen_n = 12;
  std::optional<std::string> gen_ctx;
  gen->add_option("--kind", gen_kind, "sgt or gbm")->required()->check(CLI::IsMember({"sgt", "gbm"}));
  gen->add_option("--n", gen_n, "sgt: curves; gbm: seeds per condition (4 conditions)")->capture_default_str();
  gen->add_option("--out", gen_out, "stimulus JSON")->required();
  gen->add_option("--context", gen_ctx, "viewing context JSON (sgt truths)");
  add_seed(gen);

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate trials from known parameters");
  std::string sim_params, sim_out, sim_strategy = "twice:mean", sim_side = "flank";
  std::optional<std::string> sim_stimuli, sim_task, sim_ctx;
  std::size_t sim_trials = 48;
  sim->add_option("--params", sim_params, "params JSON (fit output layout)")->required()->check(CLI::ExistingFile);
  sim->add_option("--stimuli", sim_stimuli, "stimulus JSON");
  sim->add_option("--task", sim_task, "operator tag or mean_estimate (default: params operator)");
  sim->add_option("--context", sim_ctx, "viewing context JSON");
  sim->add_option("--trials-per-participant", sim_trials, "operator tasks only")->capture_default_str();
  sim->add_option("--strategy", sim_strategy, "mean_estimate strategy")->capture_default_str();
  sim->add_option("--side-rule", sim_side, "flank or equal")->capture_default_str();
  sim->add_option("--out", sim_out, "trials CSV")->required();
  add_seed(sim);

  // predict
  auto* pred = app.add_subcommand("predict", "compose projection operators into mean-estimate predictions");
  std::string pred_params, pred_stimuli, pred_out;
  std::vector<std::string> pred_strategies;
  bool all_strategies = false, plug_in = false;
  std::size_t draws = 1000;
  std::optional<std::string> pred_ctx, pred_pid;
  std::optional<double> midpoint;
  pred->add_option("--params", pred_params, "projection params JSON")->required()->check(CLI::ExistingFile);
  pred->add_option("--stimuli", pred_stimuli, "scatter stimuli JSON")->required()->check(CLI::ExistingFile);
  auto* st_opt = pred->add_option("--strategy", pred_strategies, "{once|twice}:{mean|median|weighted}");
  auto* all_opt = pred->add_flag("--all-strategies", all_strategies, "all six strategies");
  st_opt->excludes(all_opt);
  pred->add_option("--draws", draws, "draws per stimulus and strategy")->capture_default_str();
  pred->add_option("--out-dir", pred_out, "output directory")->required();
  pred->add_option("--context", pred_ctx, "viewing context JSON (default 500x200 scatter chart)");
  pred->add_option("--participant", pred_pid, "use one participant's parameters");
  pred->add_option("--midpoint", midpoint, "Twice-path reference x (default: domain midpoint)");
  pred->add_flag("--plug-in", plug_in, "use point estimates only, ignoring fitted standard errors");
  add_seed(pred);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score observed mean estimates against predictions");
  std::string ev_obs, ev_pred, ev_out, ev_space = "data", pit_mode = "randomized";
  std::optional<std::string> ev_ctx, ev_proj, ev_params;
  std::size_t band_sims = 2000, overlay = 20;
  ev->add_option("--observed", ev_obs, "observed trials CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--predictions", ev_pred, "predictions.csv from predict")->required()->check(CLI::ExistingFile);
  ev->add_option("--out-dir", ev_out, "output directory")->required();
  ev->add_option("--space", ev_space, "data or va")->capture_default_str()->check(CLI::IsMember({"data", "va"}));
  ev->add_option("--context", ev_ctx, "viewing context JSON");
  ev->add_option("--projection-trials", ev_proj, "projection trials CSV for error_distance.csv");
  ev->add_option("--params", ev_params, "projection params JSON for error_distance.csv");
  ev->add_option("--pit-mode", pit_mode, "randomized or mid")->capture_default_str()->check(CLI::IsMember({"randomized", "mid"}));
  ev->add_option("--band-sims", band_sims, "simulations for the PIT-ECDF band")->capture_default_str();
  ev->add_option("--overlay-replicates", overlay, "density overlay replicates (0 disables)")->capture_default_str();
  add_seed(ev);

  // va
  auto* va = app.add_subcommand("va", "convert a value to visual angle (or back)");
  std::optional<std::string> va_ctx;
  double va_value = 0.0;
  std::string va_axis = "y";
  bool inverse = false, displacement = false;
  va->add_option("--context", va_ctx, "viewing context JSON (default 600x450 curve chart)");
  va->add_option("value", va_value, "data value, or degrees with --inverse")->required();
  va->add_option("--axis", va_axis, "x or y")->capture_default_str()->check(CLI::IsMember({"x", "y"}));
  va->add_flag("--inverse", inverse, "degrees to data");
  va->add_flag("--displacement", displacement, "value is a displacement from the axis origin");

  // validate
  auto* val = app.add_subcommand("validate", "check a file against a schema");
  std::string schema, val_file;
  val->add_option("--schema", schema, "trials, scatter, sgt-stimuli, context or params")->required();
  val->add_option("file", val_file, "file to check")->required();

  CLI11_PARSE(app, argc, argv);
  if (threads) pops_set_threads(*threads);

  json o;
  if (*fit) {
    o = {{"trials", fit_trials}, {"operator", fit_op}, {"out", fit_out}, {"seed", seed},
         {"bootstrap", bootstrap}, {"exclusion", !no_exclusion}};
    put(o, "stimuli", fit_stimuli);
    put(o, "hp_params", fit_hp);
    return run("fit", o, false);
  }
  if (*gen) {
    o = {{"kind", gen_kind}, {"n", gen_n}, {"out", gen_out}, {"seed", seed}};
    put(o, "context", gen_ctx);
    return run("gen-stimuli", o, false);
  }
  if (*sim) {
    o = {{"params", sim_params}, {"out", sim_out}, {"seed", seed}, {"trials_per_participant", sim_trials},
         {"strategy", sim_strategy}, {"side_rule", sim_side}};
    put(o, "stimuli", sim_stimuli);
    put(o, "task", sim_task);
    put(o, "context", sim_ctx);
    return run("simulate", o, false);
  }
  if (*pred) {
    if (pred_strategies.empty() && !all_strategies) {
      std::cerr << "percept-ops predict: give --strategy or --all-strategies\n";
      return 2;
    }
    o = {{"params", pred_params}, {"stimuli", pred_stimuli}, {"out_dir", pred_out}, {"seed", seed},
         {"draws", draws}, {"all_strategies", all_strategies}, {"plug_in", plug_in}};
    if (!pred_strategies.empty()) o["strategies"] = pred_strategies;
    put(o, "context", pred_ctx);
    put(o, "participant", pred_pid);
    put(o, "midpoint", midpoint);
    return run("predict", o, false);
  }
  if (*ev) {
    o = {{"observed", ev_obs}, {"predictions", ev_pred}, {"out_dir", ev_out}, {"seed", seed},
         {"space", ev_space}, {"pit_mode", pit_mode}, {"band_sims", band_sims}, {"overlay_replicates", overlay}};
    put(o, "context", ev_ctx);
    put(o, "projection_trials", ev_proj);
    put(o, "params", ev_params);
    return run("evaluate", o, false);
  }
  if (*va) {
    o = {{"value", va_value}, {"axis", va_axis}, {"inverse", inverse}, {"displacement", displacement}};
    put(o, "context", va_ctx);
    return run("va", o, true);
  }
  o = {{"schema", schema}, {"file", val_file}};
  return run("validate", o, false);
}
