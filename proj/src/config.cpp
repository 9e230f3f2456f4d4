#include "rbfgen/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "rbfgen/errors.hpp"

namespace rbfgen {

namespace {

using nlohmann::json;

[[noreturn]] void cfg_fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + (path.empty() ? what : path + " " + what));
}

// Every object in the document is checked against the exact key set its
// record accepts, so typos fail loudly instead of silently keeping a
// default.
void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      throw ConfigError("config: unknown key '" +
                        (path.empty() ? key : path + "." + key) + "'");
    }
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) cfg_fail(path, "must be a number");
  return v.get<double>();
}

int get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) cfg_fail(path, "must be an integer");
  return v.get<int>();
}

std::uint64_t get_seed(const json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0)) {
    cfg_fail(path, "must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

bool get_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) cfg_fail(path, "must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) cfg_fail(path, "must be a string");
  return v.get<std::string>();
}

void require_positive(double v, const std::string& path) {
  if (!(v > 0.0)) cfg_fail(path, "must be positive");
}

void require_at_least(int v, int lo, const std::string& path) {
  if (v < lo) cfg_fail(path, "must be at least " + std::to_string(lo));
}

Mat get_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) cfg_fail(path, "must be a non-empty array of rows");
  const auto& first = v[0];
  if (!first.is_array() || first.empty()) {
    cfg_fail(path, "rows must be non-empty arrays of numbers");
  }
  const int rows = static_cast<int>(v.size());
  const int cols = static_cast<int>(first.size());
  Mat out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      cfg_fail(path + "[" + std::to_string(i) + "]",
               "must have " + std::to_string(cols) + " entries");
    }
    for (int j = 0; j < cols; ++j) {
      out(i, j) = get_number(row[static_cast<std::size_t>(j)],
                             path + "[" + std::to_string(i) + "]");
    }
  }
  return out;
}

// ---- enum <-> string tables ----

Command parse_command(const std::string& s) {
  if (s == "demo1d") return Command::Demo1d;
  if (s == "beam") return Command::Beam;
  if (s == "crossval") return Command::Crossval;
  if (s == "fit") return Command::Fit;
  if (s == "predict") return Command::Predict;
  throw ConfigError("config: command must be one of demo1d, beam, crossval, fit, "
                    "predict (got '" + s + "')");
}

KernelKind parse_kernel(const std::string& s, const std::string& path) {
  if (s == "gaussian") return KernelKind::Gaussian;
  if (s == "thinplate") return KernelKind::ThinPlate;
  cfg_fail(path, "must be 'gaussian' or 'thinplate' (got '" + s + "')");
}

const char* kernel_name(KernelKind k) {
  return k == KernelKind::Gaussian ? "gaussian" : "thinplate";
}

CenterStrategy parse_strategy(const std::string& s, const std::string& path) {
  if (s == "grid") return CenterStrategy::UniformGrid;
  if (s == "halton") return CenterStrategy::Halton;
  cfg_fail(path, "must be 'grid' or 'halton' (got '" + s + "')");
}

const char* strategy_name(CenterStrategy s) {
  return s == CenterStrategy::UniformGrid ? "grid" : "halton";
}

Activation parse_activation(const std::string& s, const std::string& path) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::ReLU;
  cfg_fail(path, "must be 'tanh' or 'relu' (got '" + s + "')");
}

const char* activation_name(Activation a) {
  return a == Activation::Tanh ? "tanh" : "relu";
}

SurrogateMethod parse_method(const std::string& s, const std::string& path) {
  if (s == "baseline_rbf") return SurrogateMethod::BaselineRbf;
  if (s == "rbfgen") return SurrogateMethod::RbfGen;
  cfg_fail(path, "must be 'baseline_rbf' or 'rbfgen' (got '" + s + "')");
}

PriorKind parse_prior_kind(const std::string& s, const std::string& path) {
  static const std::pair<const char*, PriorKind> table[] = {
      {"mono", PriorKind::Mono},           {"pos", PriorKind::Pos},
      {"lip", PriorKind::Lip},             {"curv", PriorKind::Curv},
      {"conv", PriorKind::Conv},           {"bnd", PriorKind::Bnd},
      {"kl_point", PriorKind::KLPoint},    {"kl_region", PriorKind::KLRegion},
      {"kl_extreme", PriorKind::KLExtreme},{"kl_grad", PriorKind::KLGrad},
      {"kl_curv", PriorKind::KLCurv},      {"kl_integral", PriorKind::KLIntegral},
  };
  for (const auto& [name, kind] : table) {
    if (s == name) return kind;
  }
  cfg_fail(path, "unknown prior kind '" + s + "'");
}

MonoDirection parse_direction(const std::string& s, const std::string& path) {
  if (s == "nondecreasing") return MonoDirection::NonDecreasing;
  if (s == "nonincreasing") return MonoDirection::NonIncreasing;
  cfg_fail(path, "must be 'nondecreasing' or 'nonincreasing' (got '" + s + "')");
}

const char* direction_name(MonoDirection d) {
  return d == MonoDirection::NonDecreasing ? "nondecreasing" : "nonincreasing";
}

ConvMode parse_conv_mode(const std::string& s, const std::string& path) {
  if (s == "convex") return ConvMode::Convex;
  if (s == "concave") return ConvMode::Concave;
  cfg_fail(path, "must be 'convex' or 'concave' (got '" + s + "')");
}

ExtremeKind parse_extremum(const std::string& s, const std::string& path) {
  if (s == "max") return ExtremeKind::Max;
  if (s == "min") return ExtremeKind::Min;
  cfg_fail(path, "must be 'max' or 'min' (got '" + s + "')");
}

// ---- record parsers ----

void parse_train_block(const json& obj, const std::string& path, TrainConfig& out) {
  reject_unknown_keys(obj, path,
                      {"iterations", "batchSize", "learningRate", "beta1", "beta2",
                       "seed", "alphaScale", "lossLogEvery"});
  if (const json* v = find(obj, "iterations")) {
    out.iterations = get_int(*v, path + ".iterations");
    require_at_least(out.iterations, 1, path + ".iterations");
  }
  if (const json* v = find(obj, "batchSize")) {
    out.batch_size = get_int(*v, path + ".batchSize");
    require_at_least(out.batch_size, 2, path + ".batchSize");
  }
  if (const json* v = find(obj, "learningRate")) {
    out.learning_rate = get_number(*v, path + ".learningRate");
    require_positive(out.learning_rate, path + ".learningRate");
  }
  if (const json* v = find(obj, "beta1")) {
    out.beta1 = get_number(*v, path + ".beta1");
    if (out.beta1 < 0.0 || out.beta1 >= 1.0) cfg_fail(path + ".beta1", "must lie in [0, 1)");
  }
  if (const json* v = find(obj, "beta2")) {
    out.beta2 = get_number(*v, path + ".beta2");
    if (out.beta2 < 0.0 || out.beta2 >= 1.0) cfg_fail(path + ".beta2", "must lie in [0, 1)");
  }
  if (const json* v = find(obj, "seed")) out.seed = get_seed(*v, path + ".seed");
  if (const json* v = find(obj, "alphaScale")) {
    out.alpha_scale = get_number(*v, path + ".alphaScale");
    require_positive(out.alpha_scale, path + ".alphaScale");
  }
  if (const json* v = find(obj, "lossLogEvery")) {
    out.loss_log_every = get_int(*v, path + ".lossLogEvery");
    require_at_least(out.loss_log_every, 1, path + ".lossLogEvery");
  }
}

void parse_fit_block(const json& obj, const std::string& path, FitConfig& out) {
  reject_unknown_keys(obj, path,
                      {"kernel", "epsilon", "centers", "strategy", "centerSeed",
                       "hidden", "activation", "latentDim", "ensembleSize"});
  if (const json* v = find(obj, "kernel")) {
    out.kernel.kind = parse_kernel(get_string(*v, path + ".kernel"), path + ".kernel");
  }
  if (const json* v = find(obj, "epsilon")) {
    out.kernel.epsilon = get_number(*v, path + ".epsilon");
    require_positive(out.kernel.epsilon, path + ".epsilon");
  }
  if (const json* v = find(obj, "centers")) {
    out.center_count = get_int(*v, path + ".centers");
    require_at_least(out.center_count, 0, path + ".centers");
  }
  if (const json* v = find(obj, "strategy")) {
    out.strategy = parse_strategy(get_string(*v, path + ".strategy"), path + ".strategy");
  }
  if (const json* v = find(obj, "centerSeed")) {
    out.center_seed = get_seed(*v, path + ".centerSeed");
  }
  if (const json* v = find(obj, "hidden")) {
    if (!v->is_array()) cfg_fail(path + ".hidden", "must be an array of widths");
    out.hidden.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string p = path + ".hidden[" + std::to_string(i) + "]";
      const int w = get_int((*v)[i], p);
      require_at_least(w, 1, p);
      out.hidden.push_back(w);
    }
  }
  if (const json* v = find(obj, "activation")) {
    out.activation = parse_activation(get_string(*v, path + ".activation"),
                                      path + ".activation");
  }
  if (const json* v = find(obj, "latentDim")) {
    out.latent_dim = get_int(*v, path + ".latentDim");
    require_at_least(out.latent_dim, 0, path + ".latentDim");
  }
  if (const json* v = find(obj, "ensembleSize")) {
    out.ensemble_size = get_int(*v, path + ".ensembleSize");
    require_at_least(out.ensemble_size, 2, path + ".ensembleSize");
  }
}

PriorSpec parse_prior_spec(const json& obj, const std::string& path) {
  if (!obj.is_object()) cfg_fail(path, "must be an object");
  const json* kind_v = find(obj, "kind");
  if (!kind_v) cfg_fail(path + ".kind", "is required");
  PriorSpec spec;
  spec.kind = parse_prior_kind(get_string(*kind_v, path + ".kind"), path + ".kind");

  // Common keys plus the ones this kind understands.
  std::vector<const char*> allowed = {"id", "kind", "weight", "points", "slice"};
  switch (spec.kind) {
    case PriorKind::Mono: allowed.push_back("direction"); break;
    case PriorKind::Pos: allowed.push_back("bound"); break;
    case PriorKind::Lip: allowed.push_back("lipschitz"); break;
    case PriorKind::Curv: break;
    case PriorKind::Conv: allowed.push_back("mode"); break;
    case PriorKind::Bnd: allowed.push_back("targets"); break;
    case PriorKind::KLPoint:
    case PriorKind::KLRegion:
      allowed.insert(allowed.end(), {"targetMu", "targetSigma"});
      break;
    case PriorKind::KLExtreme:
      allowed.insert(allowed.end(), {"targetMu", "targetSigma", "extremum"});
      break;
    case PriorKind::KLGrad:
    case PriorKind::KLCurv:
    case PriorKind::KLIntegral:
      allowed.insert(allowed.end(), {"targetMu", "targetSigma", "spacing"});
      break;
  }
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      throw ConfigError("config: unknown key '" + path + "." + key + "'");
    }
  }

  const json* id_v = find(obj, "id");
  if (!id_v) cfg_fail(path + ".id", "is required");
  spec.id = get_string(*id_v, path + ".id");
  if (spec.id.empty()) cfg_fail(path + ".id", "must be non-empty");

  if (const json* v = find(obj, "weight")) {
    spec.weight = get_number(*v, path + ".weight");
    require_positive(spec.weight, path + ".weight");
  }

  const json* points_v = find(obj, "points");
  const json* slice_v = find(obj, "slice");
  if (points_v && slice_v) cfg_fail(path, "takes 'points' or 'slice', not both");
  if (!points_v && !slice_v) cfg_fail(path, "needs 'points' or 'slice'");
  if (points_v) {
    spec.points = get_matrix(*points_v, path + ".points");
  } else {
    if (!slice_v->is_object()) cfg_fail(path + ".slice", "must be an object");
    reject_unknown_keys(*slice_v, path + ".slice", {"var", "count"});
    const json* var_v = find(*slice_v, "var");
    if (!var_v) cfg_fail(path + ".slice.var", "is required");
    spec.use_slice = true;
    spec.slice_var = get_int(*var_v, path + ".slice.var");
    require_at_least(spec.slice_var, 0, path + ".slice.var");
    if (const json* v = find(*slice_v, "count")) {
      spec.slice_count = get_int(*v, path + ".slice.count");
      require_at_least(spec.slice_count, 2, path + ".slice.count");
    }
  }

  if (const json* v = find(obj, "direction")) {
    spec.direction = parse_direction(get_string(*v, path + ".direction"),
                                     path + ".direction");
  }
  if (const json* v = find(obj, "mode")) {
    spec.conv_mode = parse_conv_mode(get_string(*v, path + ".mode"), path + ".mode");
  }
  if (const json* v = find(obj, "extremum")) {
    spec.extremum = parse_extremum(get_string(*v, path + ".extremum"),
                                   path + ".extremum");
  }
  if (const json* v = find(obj, "bound")) {
    spec.bound = get_number(*v, path + ".bound");
  }
  if (spec.kind == PriorKind::Lip) {
    const json* v = find(obj, "lipschitz");
    if (!v) cfg_fail(path + ".lipschitz", "is required");
    spec.lipschitz = get_number(*v, path + ".lipschitz");
    require_positive(spec.lipschitz, path + ".lipschitz");
  }
  if (const json* v = find(obj, "targets")) {
    if (!v->is_array() || v->empty()) {
      cfg_fail(path + ".targets", "must be a non-empty array");
    }
    spec.targets = Vec(static_cast<int>(v->size()));
    for (std::size_t i = 0; i < v->size(); ++i) {
      spec.targets[static_cast<int>(i)] =
          get_number((*v)[i], path + ".targets[" + std::to_string(i) + "]");
    }
  } else if (spec.kind == PriorKind::Bnd) {
    cfg_fail(path + ".targets", "is required");
  }
  if (is_kl_kind(spec.kind)) {
    const json* mu_v = find(obj, "targetMu");
    const json* sigma_v = find(obj, "targetSigma");
    if (!mu_v) cfg_fail(path + ".targetMu", "is required");
    if (!sigma_v) cfg_fail(path + ".targetSigma", "is required");
    spec.target_mu = get_number(*mu_v, path + ".targetMu");
    spec.target_sigma = get_number(*sigma_v, path + ".targetSigma");
    require_positive(spec.target_sigma, path + ".targetSigma");
  }
  if (const json* v = find(obj, "spacing")) {
    spec.spacing = get_number(*v, path + ".spacing");
    require_positive(spec.spacing, path + ".spacing");
  }
  const bool needs_spacing = spec.kind == PriorKind::KLGrad ||
                             spec.kind == PriorKind::KLCurv ||
                             spec.kind == PriorKind::KLIntegral;
  if (needs_spacing && !spec.use_slice && spec.spacing <= 0.0) {
    cfg_fail(path + ".spacing",
             "is required when 'points' are given explicitly");
  }
  return spec;
}

std::vector<PriorSpec> parse_prior_list(const json& v, const std::string& path) {
  if (!v.is_array()) cfg_fail(path, "must be an array of prior terms");
  std::vector<PriorSpec> specs;
  for (std::size_t i = 0; i < v.size(); ++i) {
    specs.push_back(parse_prior_spec(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return specs;
}

void parse_beam_priors_block(const json& obj, const std::string& path,
                             BeamPriorConfig& out) {
  reject_unknown_keys(obj, path,
                      {"perturb", "monoGrid", "klGrid", "posProbes", "posSeed",
                       "monoWeight", "posWeight", "klWeight"});
  if (const json* v = find(obj, "perturb")) {
    out.perturb = get_number(*v, path + ".perturb");
    require_positive(out.perturb, path + ".perturb");
  }
  if (const json* v = find(obj, "monoGrid")) {
    out.mono_grid = get_int(*v, path + ".monoGrid");
    require_at_least(out.mono_grid, 2, path + ".monoGrid");
  }
  if (const json* v = find(obj, "klGrid")) {
    out.kl_grid = get_int(*v, path + ".klGrid");
    require_at_least(out.kl_grid, 1, path + ".klGrid");
  }
  if (const json* v = find(obj, "posProbes")) {
    out.pos_probes = get_int(*v, path + ".posProbes");
    require_at_least(out.pos_probes, 1, path + ".posProbes");
  }
  if (const json* v = find(obj, "posSeed")) out.pos_seed = get_seed(*v, path + ".posSeed");
  if (const json* v = find(obj, "monoWeight")) {
    out.mono_weight = get_number(*v, path + ".monoWeight");
    if (out.mono_weight < 0.0) cfg_fail(path + ".monoWeight", "must be non-negative");
  }
  if (const json* v = find(obj, "posWeight")) {
    out.pos_weight = get_number(*v, path + ".posWeight");
    if (out.pos_weight < 0.0) cfg_fail(path + ".posWeight", "must be non-negative");
  }
  if (const json* v = find(obj, "klWeight")) {
    out.kl_weight = get_number(*v, path + ".klWeight");
    if (out.kl_weight < 0.0) cfg_fail(path + ".klWeight", "must be non-negative");
  }
}

void parse_optimize_block(const json& obj, const std::string& path,
                          OptimizeConfig& out) {
  reject_unknown_keys(obj, path,
                      {"starts", "maxIters", "initialStep", "minStep", "fdStep"});
  if (const json* v = find(obj, "starts")) {
    out.starts = get_int(*v, path + ".starts");
    require_at_least(out.starts, 1, path + ".starts");
  }
  if (const json* v = find(obj, "maxIters")) {
    out.max_iters = get_int(*v, path + ".maxIters");
    require_at_least(out.max_iters, 1, path + ".maxIters");
  }
  if (const json* v = find(obj, "initialStep")) {
    out.initial_step = get_number(*v, path + ".initialStep");
    require_positive(out.initial_step, path + ".initialStep");
  }
  if (const json* v = find(obj, "minStep")) {
    out.min_step = get_number(*v, path + ".minStep");
    require_positive(out.min_step, path + ".minStep");
  }
  if (const json* v = find(obj, "fdStep")) {
    out.fd_step = get_number(*v, path + ".fdStep");
    require_positive(out.fd_step, path + ".fdStep");
  }
}

std::string resolve_input_path(const std::string& raw, const std::string& base_dir) {
  if (raw.empty() || base_dir.empty()) return raw;
  const std::filesystem::path p(raw);
  if (p.is_absolute()) return raw;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

json fit_to_json(const FitConfig& f) {
  return json{{"kernel", kernel_name(f.kernel.kind)},
              {"epsilon", f.kernel.epsilon},
              {"centers", f.center_count},
              {"strategy", strategy_name(f.strategy)},
              {"centerSeed", f.center_seed},
              {"hidden", f.hidden},
              {"activation", activation_name(f.activation)},
              {"latentDim", f.latent_dim},
              {"ensembleSize", f.ensemble_size}};
}

json train_to_json(const TrainConfig& t) {
  return json{{"iterations", t.iterations},
              {"batchSize", t.batch_size},
              {"learningRate", t.learning_rate},
              {"beta1", t.beta1},
              {"beta2", t.beta2},
              {"seed", t.seed},
              {"alphaScale", t.alpha_scale},
              {"lossLogEvery", t.loss_log_every}};
}

json prior_spec_to_json(const PriorSpec& s) {
  json out{{"id", s.id}, {"kind", prior_kind_name(s.kind)}, {"weight", s.weight}};
  if (s.use_slice) {
    out["slice"] = json{{"var", s.slice_var}, {"count", s.slice_count}};
  } else {
    json rows = json::array();
    for (int i = 0; i < s.points.rows(); ++i) {
      json row = json::array();
      for (int j = 0; j < s.points.cols(); ++j) row.push_back(s.points(i, j));
      rows.push_back(std::move(row));
    }
    out["points"] = std::move(rows);
  }
  switch (s.kind) {
    case PriorKind::Mono: out["direction"] = direction_name(s.direction); break;
    case PriorKind::Pos: out["bound"] = s.bound; break;
    case PriorKind::Lip: out["lipschitz"] = s.lipschitz; break;
    case PriorKind::Curv: break;
    case PriorKind::Conv:
      out["mode"] = s.conv_mode == ConvMode::Convex ? "convex" : "concave";
      break;
    case PriorKind::Bnd: {
      json t = json::array();
      for (int i = 0; i < s.targets.size(); ++i) t.push_back(s.targets[i]);
      out["targets"] = std::move(t);
      break;
    }
    case PriorKind::KLExtreme:
      out["extremum"] = s.extremum == ExtremeKind::Max ? "max" : "min";
      [[fallthrough]];
    case PriorKind::KLPoint:
    case PriorKind::KLRegion:
      out["targetMu"] = s.target_mu;
      out["targetSigma"] = s.target_sigma;
      break;
    case PriorKind::KLGrad:
    case PriorKind::KLCurv:
    case PriorKind::KLIntegral:
      out["targetMu"] = s.target_mu;
      out["targetSigma"] = s.target_sigma;
      if (s.spacing > 0.0) out["spacing"] = s.spacing;
      break;
  }
  return out;
}

}  // namespace

const char* command_name(Command c) {
  switch (c) {
    case Command::Demo1d: return "demo1d";
    case Command::Beam: return "beam";
    case Command::Crossval: return "crossval";
    case Command::Fit: return "fit";
    case Command::Predict: return "predict";
  }
  return "?";
}

PriorTerm instantiate_prior(const PriorSpec& spec, const Box& bounds) {
  PriorTerm term;
  term.id = spec.id;
  term.kind = spec.kind;
  term.weight = spec.weight;
  term.direction = spec.direction;
  term.conv_mode = spec.conv_mode;
  term.extremum = spec.extremum;
  term.bound = spec.bound;
  term.lipschitz = spec.lipschitz;
  term.targets = spec.targets;
  term.target_mu = spec.target_mu;
  term.target_sigma = spec.target_sigma;
  term.spacing = spec.spacing;

  if (spec.use_slice) {
    if (spec.slice_var >= bounds.dim()) {
      throw ConfigError("config: prior '" + spec.id + "': slice.var " +
                        std::to_string(spec.slice_var) + " out of range for a " +
                        std::to_string(bounds.dim()) + "-dimensional domain");
    }
    const int g = spec.slice_count;
    term.points = Mat(g, bounds.dim());
    for (int i = 0; i < g; ++i) {
      term.points.row(i) = (0.5 * (bounds.lo + bounds.hi)).transpose();
      const double t = static_cast<double>(i) / (g - 1);
      term.points(i, spec.slice_var) =
          bounds.lo[spec.slice_var] +
          t * (bounds.hi[spec.slice_var] - bounds.lo[spec.slice_var]);
    }
    term.spacing = (bounds.hi[spec.slice_var] - bounds.lo[spec.slice_var]) /
                   static_cast<double>(g - 1);
  } else {
    if (spec.points.cols() != bounds.dim()) {
      throw ConfigError("config: prior '" + spec.id + "': points have " +
                        std::to_string(spec.points.cols()) +
                        " coordinates, domain has " + std::to_string(bounds.dim()));
    }
    term.points = spec.points;
  }

  if (spec.kind == PriorKind::Lip) {
    const int rows = static_cast<int>(term.points.rows());
    if (rows % 2 != 0) {
      throw ConfigError("config: prior '" + spec.id +
                        "': Lipschitz points must come in pairs (even row count)");
    }
    term.pair_dist = Vec(rows / 2);
    for (int p = 0; p < rows / 2; ++p) {
      term.pair_dist[p] = (term.points.row(2 * p) - term.points.row(2 * p + 1)).norm();
    }
  }

  try {
    validate_prior_term(term);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: prior '") + spec.id + "': " + e.what());
  }
  return term;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
  }
  return parse_config_json(doc, std::filesystem::path(path).parent_path().string());
}

RunConfig parse_config_json(const json& doc, const std::string& base_dir) {
  if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");
  const json* cmd_v = find(doc, "command");
  if (!cmd_v) throw ConfigError("config: 'command' is required");
  RunConfig cfg;
  cfg.command = parse_command(get_string(*cmd_v, "command"));

  std::vector<const char*> allowed = {"command", "outDir", "seed", "jobs",
                                      "deterministic", "trainCfg"};
  switch (cfg.command) {
    case Command::Demo1d:
      allowed.insert(allowed.end(), {"fit", "grid", "untrainedAlphaScale",
                                     "svgMembers", "priors"});
      // Narrow bumps over four samples: wide defaults would make every
      // interpolant identical and the ensemble invisible.
      cfg.fit.kernel = KernelSpec{KernelKind::Gaussian, 6.0};
      cfg.fit.center_count = 12;
      cfg.fit.strategy = CenterStrategy::UniformGrid;
      cfg.fit.ensemble_size = 200;
      break;
    case Command::Beam:
      allowed.insert(allowed.end(),
                     {"fit", "dims", "ratio", "seeds", "methods", "plotDims",
                      "priors", "optimize"});
      break;
    case Command::Crossval:
      allowed.insert(allowed.end(), {"fit", "datasetPath", "monoTablePath", "ncomp",
                                     "method", "monoWeight", "monoGrid"});
      // Hundreds of per-fold refits: a small net and short schedule keep
      // the sweep interactive without hurting the reduced-space fits.
      cfg.fit.hidden = {16};
      cfg.fit.ensemble_size = 32;
      cfg.fit.train.iterations = 300;
      cfg.fit.train.batch_size = 16;
      break;
    case Command::Fit:
      allowed.insert(allowed.end(), {"fit", "datasetPath", "priors", "modelOut"});
      break;
    case Command::Predict:
      allowed.insert(allowed.end(), {"modelPath", "pointsPath", "level", "outCsv"});
      break;
  }
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }

  if (const json* v = find(doc, "outDir")) cfg.out_dir = get_string(*v, "outDir");
  if (cfg.out_dir.empty()) throw ConfigError("config: outDir must be non-empty");
  if (const json* v = find(doc, "seed")) cfg.seed = get_seed(*v, "seed");
  if (const json* v = find(doc, "jobs")) {
    cfg.jobs = get_int(*v, "jobs");
    require_at_least(cfg.jobs, 0, "jobs");
  }
  if (const json* v = find(doc, "deterministic")) {
    cfg.deterministic = get_bool(*v, "deterministic");
  }
  if (const json* v = find(doc, "fit")) {
    if (!v->is_object()) throw ConfigError("config: fit must be an object");
    parse_fit_block(*v, "fit", cfg.fit);
  }
  if (const json* v = find(doc, "trainCfg")) {
    if (!v->is_object()) throw ConfigError("config: trainCfg must be an object");
    parse_train_block(*v, "trainCfg", cfg.fit.train);
  }

  switch (cfg.command) {
    case Command::Demo1d:
      if (const json* v = find(doc, "grid")) {
        cfg.demo_grid = get_int(*v, "grid");
        require_at_least(cfg.demo_grid, 4, "grid");
      }
      if (const json* v = find(doc, "untrainedAlphaScale")) {
        cfg.demo_untrained_alpha = get_number(*v, "untrainedAlphaScale");
        require_positive(cfg.demo_untrained_alpha, "untrainedAlphaScale");
      }
      if (const json* v = find(doc, "svgMembers")) {
        cfg.demo_svg_members = get_int(*v, "svgMembers");
        require_at_least(cfg.demo_svg_members, 0, "svgMembers");
      }
      if (const json* v = find(doc, "priors")) {
        cfg.demo_priors = parse_prior_list(*v, "priors");
      }
      break;
    case Command::Beam: {
      if (const json* v = find(doc, "dims")) {
        if (!v->is_array() || v->empty()) {
          throw ConfigError("config: dims must be a non-empty array");
        }
        cfg.beam_dims.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
          const std::string p = "dims[" + std::to_string(i) + "]";
          const int d = get_int((*v)[i], p);
          require_at_least(d, 1, p);
          cfg.beam_dims.push_back(d);
        }
      }
      if (const json* v = find(doc, "ratio")) {
        cfg.beam_ratio = get_int(*v, "ratio");
        require_at_least(cfg.beam_ratio, 1, "ratio");
      }
      if (const json* v = find(doc, "seeds")) {
        cfg.beam_seeds = get_int(*v, "seeds");
        require_at_least(cfg.beam_seeds, 1, "seeds");
      }
      if (const json* v = find(doc, "methods")) {
        if (!v->is_array() || v->empty()) {
          throw ConfigError("config: methods must be a non-empty array");
        }
        cfg.beam_methods.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
          const std::string p = "methods[" + std::to_string(i) + "]";
          cfg.beam_methods.push_back(parse_method(get_string((*v)[i], p), p));
        }
      }
      if (const json* v = find(doc, "plotDims")) {
        if (!v->is_array()) throw ConfigError("config: plotDims must be an array");
        cfg.beam_plot_dims.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
          const std::string p = "plotDims[" + std::to_string(i) + "]";
          const int d = get_int((*v)[i], p);
          if (std::find(cfg.beam_dims.begin(), cfg.beam_dims.end(), d) ==
              cfg.beam_dims.end()) {
            cfg_fail(p, "must be one of the studied dims");
          }
          cfg.beam_plot_dims.push_back(d);
        }
      }
      if (const json* v = find(doc, "priors")) {
        if (!v->is_object()) throw ConfigError("config: priors must be an object");
        parse_beam_priors_block(*v, "priors", cfg.beam_priors);
      }
      if (const json* v = find(doc, "optimize")) {
        if (!v->is_object()) throw ConfigError("config: optimize must be an object");
        parse_optimize_block(*v, "optimize", cfg.beam_optimize);
      }
      break;
    }
    case Command::Crossval: {
      const json* ds = find(doc, "datasetPath");
      if (!ds) throw ConfigError("config: datasetPath is required for crossval");
      cfg.dataset_path = resolve_input_path(get_string(*ds, "datasetPath"), base_dir);
      const json* mt = find(doc, "monoTablePath");
      if (!mt) throw ConfigError("config: monoTablePath is required for crossval");
      cfg.mono_table_path =
          resolve_input_path(get_string(*mt, "monoTablePath"), base_dir);
      if (const json* v = find(doc, "ncomp")) {
        cfg.cv_ncomp = get_int(*v, "ncomp");
        require_at_least(cfg.cv_ncomp, 1, "ncomp");
      }
      if (const json* v = find(doc, "method")) {
        cfg.cv_method = parse_method(get_string(*v, "method"), "method");
      }
      if (const json* v = find(doc, "monoWeight")) {
        cfg.cv_mono_weight = get_number(*v, "monoWeight");
        if (cfg.cv_mono_weight < 0.0) cfg_fail("monoWeight", "must be non-negative");
      }
      if (const json* v = find(doc, "monoGrid")) {
        cfg.cv_mono_grid = get_int(*v, "monoGrid");
        require_at_least(cfg.cv_mono_grid, 2, "monoGrid");
      }
      break;
    }
    case Command::Fit: {
      const json* ds = find(doc, "datasetPath");
      if (!ds) throw ConfigError("config: datasetPath is required for fit");
      cfg.dataset_path = resolve_input_path(get_string(*ds, "datasetPath"), base_dir);
      const json* pr = find(doc, "priors");
      if (!pr) throw ConfigError("config: priors are required for fit");
      cfg.fit_priors = parse_prior_list(*pr, "priors");
      if (cfg.fit_priors.empty()) {
        throw ConfigError("config: priors must contain at least one term");
      }
      if (const json* v = find(doc, "modelOut")) {
        cfg.model_out = get_string(*v, "modelOut");
        if (cfg.model_out.empty()) cfg_fail("modelOut", "must be non-empty");
      }
      break;
    }
    case Command::Predict: {
      const json* mp = find(doc, "modelPath");
      if (!mp) throw ConfigError("config: modelPath is required for predict");
      cfg.model_path = resolve_input_path(get_string(*mp, "modelPath"), base_dir);
      const json* pp = find(doc, "pointsPath");
      if (!pp) throw ConfigError("config: pointsPath is required for predict");
      cfg.points_path = resolve_input_path(get_string(*pp, "pointsPath"), base_dir);
      if (const json* v = find(doc, "level")) {
        cfg.predict_level = get_number(*v, "level");
        if (!(cfg.predict_level > 0.0 && cfg.predict_level < 1.0)) {
          cfg_fail("level", "must lie strictly between 0 and 1");
        }
      }
      if (const json* v = find(doc, "outCsv")) {
        cfg.out_csv = get_string(*v, "outCsv");
        if (cfg.out_csv.empty()) cfg_fail("outCsv", "must be non-empty");
      }
      break;
    }
  }

  // Duplicate prior ids would make the loss CSV columns ambiguous.
  const auto check_ids = [](const std::vector<PriorSpec>& specs) {
    for (std::size_t i = 0; i < specs.size(); ++i) {
      for (std::size_t k = i + 1; k < specs.size(); ++k) {
        if (specs[i].id == specs[k].id) {
          throw ConfigError("config: duplicate prior id '" + specs[i].id + "'");
        }
      }
    }
  };
  check_ids(cfg.demo_priors);
  check_ids(cfg.fit_priors);
  return cfg;
}

nlohmann::json serialize_config(const RunConfig& cfg) {
  json doc{{"command", command_name(cfg.command)},
           {"outDir", cfg.out_dir},
           {"seed", cfg.seed},
           {"jobs", cfg.jobs},
           {"deterministic", cfg.deterministic}};
  if (cfg.command != Command::Predict) {
    doc["fit"] = fit_to_json(cfg.fit);
    doc["trainCfg"] = train_to_json(cfg.fit.train);
  }
  switch (cfg.command) {
    case Command::Demo1d: {
      doc["grid"] = cfg.demo_grid;
      doc["untrainedAlphaScale"] = cfg.demo_untrained_alpha;
      doc["svgMembers"] = cfg.demo_svg_members;
      json priors = json::array();
      for (const auto& s : cfg.demo_priors) priors.push_back(prior_spec_to_json(s));
      doc["priors"] = std::move(priors);
      break;
    }
    case Command::Beam: {
      doc["dims"] = cfg.beam_dims;
      doc["ratio"] = cfg.beam_ratio;
      doc["seeds"] = cfg.beam_seeds;
      json methods = json::array();
      for (const auto m : cfg.beam_methods) methods.push_back(method_name(m));
      doc["methods"] = std::move(methods);
      doc["plotDims"] = cfg.beam_plot_dims.empty() ? cfg.beam_dims : cfg.beam_plot_dims;
      doc["priors"] = json{{"perturb", cfg.beam_priors.perturb},
                           {"monoGrid", cfg.beam_priors.mono_grid},
                           {"klGrid", cfg.beam_priors.kl_grid},
                           {"posProbes", cfg.beam_priors.pos_probes},
                           {"posSeed", cfg.beam_priors.pos_seed},
                           {"monoWeight", cfg.beam_priors.mono_weight},
                           {"posWeight", cfg.beam_priors.pos_weight},
                           {"klWeight", cfg.beam_priors.kl_weight}};
      doc["optimize"] = json{{"starts", cfg.beam_optimize.starts},
                             {"maxIters", cfg.beam_optimize.max_iters},
                             {"initialStep", cfg.beam_optimize.initial_step},
                             {"minStep", cfg.beam_optimize.min_step},
                             {"fdStep", cfg.beam_optimize.fd_step}};
      break;
    }
    case Command::Crossval:
      doc["datasetPath"] = cfg.dataset_path;
      doc["monoTablePath"] = cfg.mono_table_path;
      doc["ncomp"] = cfg.cv_ncomp;
      doc["method"] = method_name(cfg.cv_method);
      doc["monoWeight"] = cfg.cv_mono_weight;
      doc["monoGrid"] = cfg.cv_mono_grid;
      break;
    case Command::Fit: {
      doc["datasetPath"] = cfg.dataset_path;
      doc["modelOut"] = cfg.model_out;
      json priors = json::array();
      for (const auto& s : cfg.fit_priors) priors.push_back(prior_spec_to_json(s));
      doc["priors"] = std::move(priors);
      break;
    }
    case Command::Predict:
      doc["modelPath"] = cfg.model_path;
      doc["pointsPath"] = cfg.points_path;
      doc["level"] = cfg.predict_level;
      doc["outCsv"] = cfg.out_csv;
      break;
  }
  return doc;
}

int resolve_jobs(const RunConfig& cfg) {
  if (cfg.deterministic) return 1;
  if (cfg.jobs > 0) return cfg.jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace rbfgen
