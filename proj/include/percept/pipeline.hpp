#pragma once

// File-level commands behind the CLI. Each writes its outputs plus a
// manifest; on failure every output it created is removed.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "percept/perceptual_space.hpp"

namespace percept::pipeline {

std::string version();
std::string sha256_file(const std::string& path);

struct FitCommand {
  std::string trials;
  std::string op;
  std::optional<std::string> stimuli;    // SGT stimuli JSON (slope and fusion tasks)
  std::optional<std::string> hp_params;  // highest_point_x fit output (bahp, mixture)
  std::string out;
  std::uint64_t seed = 0;
  int bootstrap = 500;
  bool exclusion = true;
};
void run_fit(const FitCommand& cmd);

struct GenStimuliCommand {
  std::string kind;  // sgt | gbm
  std::size_t n = 12;  // sgt: curves; gbm: seeds per condition (4 conditions each)
  std::uint64_t seed = 0;
  std::string out;
  std::optional<std::string> context;
};
void run_gen_stimuli(const GenStimuliCommand& cmd);

struct SimulateCommand {
  std::string params;
  std::optional<std::string> stimuli;
  std::optional<std::string> task;  // defaults to the params file's operator
  std::optional<std::string> context;
  std::size_t trials_per_participant = 48;
  std::string strategy = "twice:mean";  // mean_estimate only
  std::string side_rule = "flank";
  std::uint64_t seed = 0;
  std::string out;
};
void run_simulate(const SimulateCommand& cmd);

struct PredictCommand {
  std::string params;
  std::string stimuli;
  std::vector<std::string> strategies;
  std::size_t draws = 1000;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::optional<std::string> context;
  std::optional<std::string> participant;
  std::optional<double> midpoint;
  bool plug_in = false;  // ignore fitted standard errors, use point estimates only
};
void run_predict(const PredictCommand& cmd);

struct EvaluateCommand {
  std::string observed;
  std::string predictions;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string space = "data";  // data | va
  std::optional<std::string> context;
  std::optional<std::string> projection_trials;
  std::optional<std::string> params;
  std::string pit_mode = "randomized";
  std::size_t band_sims = 2000;
  std::size_t overlay_replicates = 20;
};
void run_evaluate(const EvaluateCommand& cmd);

struct VaCommand {
  std::optional<std::string> context;
  double value = 0.0;
  std::string axis = "y";
  bool inverse = false;
  bool displacement = false;  // value is a displacement, not a coordinate
};
nlohmann::json run_va(const VaCommand& cmd);

// Problems found in `file` read as `schema`; empty when valid.
std::vector<std::string> run_validate(const std::string& schema, const std::string& file);

ViewingContext load_context(const std::optional<std::string>& path, const ViewingContext& fallback);

}  // namespace percept::pipeline
