#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "rbfgen/beam.hpp"
#include "rbfgen/evalcv.hpp"
#include "rbfgen/training.hpp"

namespace rbfgen {

enum class Command { Demo1d, Beam, Crossval, Fit, Predict };

const char* command_name(Command c);

// Declarative prior term from a config file. Probe locations come either
// from an explicit "points" matrix (original units) or from a "slice"
// shorthand {var, count} that sweeps one variable across the modeling box
// with the others held at the box midpoint.
struct PriorSpec {
  std::string id;
  PriorKind kind = PriorKind::Mono;
  double weight = 1.0;

  Mat points;             // empty when the slice shorthand is used
  bool use_slice = false;
  int slice_var = 0;
  int slice_count = 9;

  MonoDirection direction = MonoDirection::NonDecreasing;
  ConvMode conv_mode = ConvMode::Convex;
  ExtremeKind extremum = ExtremeKind::Max;
  double bound = 0.0;
  double lipschitz = 0.0;
  Vec targets;
  double target_mu = 0.0;
  double target_sigma = 1.0;
  double spacing = 0.0;  // derivative/integral kinds with explicit points
};

// Resolve a spec against the modeling box: expands the slice shorthand,
// derives grid spacing, precomputes Lipschitz pair distances, and
// validates the term. Structural problems throw ConfigError naming the
// term id.
PriorTerm instantiate_prior(const PriorSpec& spec, const Box& bounds);

// One run = one command plus its settings. Parsed from a single JSON file;
// unknown keys are rejected with their key path. Input paths (dataset,
// model, points) are resolved against the config file's directory when
// relative; output paths (modelOut, outCsv) against outDir.
struct RunConfig {
  Command command = Command::Demo1d;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int jobs = 0;  // 0 = auto: available cores, or 1 in deterministic mode
  bool deterministic = false;
  FitConfig fit;  // defaults depend on the command (see parse_config)

  // demo1d
  int demo_grid = 241;
  double demo_untrained_alpha = 1.0;  // spread of the prior-free reference
  int demo_svg_members = 12;          // member curves drawn per overlay
  std::vector<PriorSpec> demo_priors;  // extra variants beyond the built-ins

  // beam
  std::vector<int> beam_dims = {2, 5, 10};
  int beam_ratio = 1;
  int beam_seeds = 5;
  std::vector<SurrogateMethod> beam_methods = {SurrogateMethod::BaselineRbf,
                                               SurrogateMethod::RbfGen};
  std::vector<int> beam_plot_dims;  // empty = plot every studied dimension
  BeamPriorConfig beam_priors;
  OptimizeConfig beam_optimize;

  // crossval
  std::string dataset_path;
  std::string mono_table_path;
  int cv_ncomp = 5;
  SurrogateMethod cv_method = SurrogateMethod::RbfGen;
  double cv_mono_weight = 5.0;
  int cv_mono_grid = 9;

  // fit
  std::vector<PriorSpec> fit_priors;
  std::string model_out = "model.json";

  // predict
  std::string model_path;
  std::string points_path;
  double predict_level = 0.95;
  std::string out_csv = "predictions.csv";
};

// Read, parse, validate. Missing file -> IoError; malformed JSON, unknown
// keys, or out-of-range values -> ConfigError with the key path.
RunConfig parse_config(const std::string& path);

// Same from an already-parsed document; base_dir anchors relative input
// paths (empty = current directory).
RunConfig parse_config_json(const nlohmann::json& doc,
                            const std::string& base_dir = "");

// Fully resolved document: every field of the active command explicit.
// serialize -> parse -> serialize is a fixed point.
nlohmann::json serialize_config(const RunConfig& cfg);

// Thread count a command should actually use.
int resolve_jobs(const RunConfig& cfg);

}  // namespace rbfgen
