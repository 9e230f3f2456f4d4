#include "rbfgen/commands.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include "rbfgen/beam.hpp"
#include "rbfgen/errors.hpp"
#include "rbfgen/evalcv.hpp"
#include "rbfgen/io.hpp"
#include "rbfgen/svg.hpp"

namespace rbfgen {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

// Palette shared by every plot.
constexpr const char* kColorTruth = "#222222";
constexpr const char* kColorMean = "#1f4e9c";
constexpr const char* kColorBand = "#8fb3e8";
constexpr const char* kColorMember = "#b0bec9";
constexpr const char* kColorBaseline = "#c23b22";
constexpr const char* kColorPoints = "#111111";

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir + ": cannot create output directory: " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// Output file names come from user-chosen ids; keep them to one flat,
// portable token.
std::string sanitize_name(const std::string& raw) {
  std::string out;
  for (char c : raw) {
    out += (std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '_';
  }
  return out.empty() ? std::string("term") : out;
}

void write_manifest(const RunConfig& cfg) {
  json doc{{"command", command_name(cfg.command)},
           {"config", serialize_config(cfg)},
           {"jobsResolved", resolve_jobs(cfg)},
           {"deterministic", cfg.deterministic},
           {"versions", json{{"rbfgen", kVersion},
                             {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                           std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                           std::to_string(EIGEN_MINOR_VERSION)}}}};
  write_text_file(join_path(cfg.out_dir, "manifest.json"), doc.dump(2) + "\n");
}

// Resolve an output path against outDir unless it is already absolute.
std::string resolve_output(const RunConfig& cfg, const std::string& raw) {
  const std::filesystem::path p(raw);
  if (p.is_absolute()) return raw;
  return join_path(cfg.out_dir, raw);
}

void write_loss_csv(const std::string& path, const TrainResult& log) {
  std::string out = "iteration,total";
  for (const auto& id : log.term_ids) out += "," + id;
  out += '\n';
  for (std::size_t i = 0; i < log.logged_iterations.size(); ++i) {
    out += std::to_string(log.logged_iterations[i]);
    for (double v : log.logged_rows[i]) out += "," + format_double(v);
    out += '\n';
  }
  write_text_file(path, out);
}

// ---- model bundle ----

json vec_to_json(const Vec& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

template <typename M>
json mat_to_json(const M& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vec vec_from_json(const json& v, const std::string& what) {
  if (!v.is_array()) throw IoError("model: " + what + " must be an array");
  Vec out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw IoError("model: " + what + " must hold numbers");
    out[static_cast<int>(i)] = v[i].get<double>();
  }
  return out;
}

MatRM mat_from_json(const json& v, const std::string& what) {
  if (!v.is_array()) throw IoError("model: " + what + " must be an array of rows");
  const int rows = static_cast<int>(v.size());
  int cols = -1;
  for (const auto& row : v) {
    if (!row.is_array()) throw IoError("model: " + what + " rows must be arrays");
    if (cols < 0) {
      cols = static_cast<int>(row.size());
    } else if (static_cast<int>(row.size()) != cols) {
      throw IoError("model: " + what + " rows have inconsistent lengths");
    }
  }
  MatRM out(rows, std::max(cols, 0));
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < out.cols(); ++j) {
      const auto& cell = v[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (!cell.is_number()) throw IoError("model: " + what + " must hold numbers");
      out(i, j) = cell.get<double>();
    }
  }
  return out;
}

// ---- 1D demo ----

double demo_truth(double x) { return 20.0 * x * x + 20.0 * x + 1.0; }

Dataset demo_dataset() {
  Mat X(4, 1);
  X << 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0;
  Vec y(4);
  for (int i = 0; i < 4; ++i) y[i] = demo_truth(X(i, 0));
  return make_dataset(X, y, Box::unit(1));
}

Mat demo_slice(int count) {
  Mat g(count, 1);
  for (int i = 0; i < count; ++i) {
    g(i, 0) = static_cast<double>(i) / (count - 1);
  }
  return g;
}

struct DemoVariant {
  std::string name;
  std::vector<PriorTerm> priors;  // empty = untrained reference ensemble
};

// The four showcase ensembles: unconstrained interpolants, then one prior
// apiece — a pinned value, a curvature target, and the increasing trend.
std::vector<DemoVariant> demo_variants(const RunConfig& cfg, double y_stddev) {
  std::vector<DemoVariant> variants;
  variants.push_back({"relaxed", {}});

  {
    PriorTerm t;
    t.id = "point";
    t.kind = PriorKind::KLPoint;
    t.points = Mat(1, 1);
    t.points(0, 0) = 0.3;
    t.target_mu = demo_truth(0.3);
    t.target_sigma = 1.0;
    variants.push_back({"point", {t}});
  }
  {
    PriorTerm t;
    t.id = "curvature";
    t.kind = PriorKind::KLCurv;
    t.points = demo_slice(33);
    t.spacing = 1.0 / 32.0;
    t.target_mu = 40.0;  // the quadratic's constant second derivative
    t.target_sigma = 1.0;
    variants.push_back({"curvature", {t}});
  }
  {
    PriorTerm t;
    t.id = "monotone";
    t.kind = PriorKind::Mono;
    t.direction = MonoDirection::NonDecreasing;
    t.points = demo_slice(33);
    // Structural penalties act on original-unit values; scale down by the
    // response spread so the term competes at O(1).
    t.weight = 20.0 / y_stddev;
    variants.push_back({"monotone", {t}});
  }
  for (const PriorSpec& spec : cfg.demo_priors) {
    variants.push_back(
        {"custom_" + sanitize_name(spec.id), {instantiate_prior(spec, Box::unit(1))}});
  }
  return variants;
}

void write_demo_outputs(const RunConfig& cfg, const std::string& name,
                        const SurrogateEnsemble& ens) {
  const int grid = cfg.demo_grid;
  const int members = static_cast<int>(ens.members.size());

  CsvTable table;
  table.header = {"x", "truth", "mean", "lo", "hi"};
  for (int m = 0; m < members; ++m) table.header.push_back("m" + std::to_string(m));

  std::vector<double> xs(static_cast<std::size_t>(grid));
  std::vector<double> truth(xs.size()), mean(xs.size()), lo(xs.size()), hi(xs.size());
  std::vector<std::vector<double>> member_curves(
      static_cast<std::size_t>(members), std::vector<double>(xs.size()));

  Vec x(1);
  for (int i = 0; i < grid; ++i) {
    const double xv = static_cast<double>(i) / (grid - 1);
    x[0] = xv;
    const Prediction p = predict_with_ci(ens, x, 0.95);
    xs[static_cast<std::size_t>(i)] = xv;
    truth[static_cast<std::size_t>(i)] = demo_truth(xv);
    mean[static_cast<std::size_t>(i)] = p.mean;
    lo[static_cast<std::size_t>(i)] = p.lo;
    hi[static_cast<std::size_t>(i)] = p.hi;

    std::vector<double> row = {xv, demo_truth(xv), p.mean, p.lo, p.hi};
    for (int m = 0; m < members; ++m) {
      const double v =
          ens.ystd.to_original(evaluate_surrogate(ens.system, ens.members[m], x));
      member_curves[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)] = v;
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  write_csv(join_path(cfg.out_dir, "demo1d_" + name + "_curves.csv"), table);

  SvgPlot plot("1D demo: " + name, "x", "f(x)");
  plot.add_band(xs, lo, hi, kColorBand, 0.35);
  const int drawn = std::min(members, cfg.demo_svg_members);
  for (int m = 0; m < drawn; ++m) {
    plot.add_polyline(xs, member_curves[static_cast<std::size_t>(m)], kColorMember,
                      1.0);
  }
  plot.add_polyline(xs, mean, kColorMean, 2.0);
  plot.add_polyline(xs, truth, kColorTruth, 1.5, "6 4");
  const Dataset ds = demo_dataset();
  std::vector<double> px(4), py(4);
  for (int i = 0; i < 4; ++i) {
    px[static_cast<std::size_t>(i)] = ds.X(i, 0);
    py[static_cast<std::size_t>(i)] = ds.y[i];
  }
  plot.add_points(px, py, kColorPoints, 4.0);
  plot.add_legend("mean", kColorMean);
  plot.add_legend("95% band", kColorBand);
  plot.add_legend("truth", kColorTruth);
  plot.add_legend("data", kColorPoints);
  write_text_file(join_path(cfg.out_dir, "demo1d_" + name + ".svg"), plot.render());
}

// ---- shared beam fitting (mirrors the study cells) ----

struct BeamSurrogates {
  RbfSystem baseline;
  SurrogateEnsemble model;
  Dataset data;
};

BeamSurrogates fit_beam_surrogates(const RunConfig& cfg, const BeamProblem& problem,
                                   std::uint64_t seed, bool want_baseline,
                                   bool want_rbfgen) {
  BeamSurrogates out;
  const int n = cfg.beam_ratio * problem.elements;
  out.data = sample_training_data(problem, n, seed);
  if (want_baseline) {
    out.baseline = build_square_system(out.data, cfg.fit.kernel);
  }
  if (want_rbfgen) {
    auto fem = [&problem](const Vec& h) { return beam_compliance(problem, h); };
    BeamPriorConfig pc = cfg.beam_priors;
    const Standardizer ystd = fit_standardizer(out.data.y);
    pc.mono_weight /= ystd.stddev;
    pc.pos_weight /= ystd.stddev;
    FitConfig fit = cfg.fit;
    if (fit.center_count == 0) {
      fit.center_count = std::max(3 * problem.elements, n + 1);
    }
    fit.train.seed = seed;
    out.model = fit_rbfgen(out.data, build_beam_priors(problem, fem, pc), fit);
  }
  return out;
}

void write_beam_slice_svg(const RunConfig& cfg, int dims) {
  const BeamProblem problem = make_beam_problem(dims);
  const bool baseline_on =
      std::find(cfg.beam_methods.begin(), cfg.beam_methods.end(),
                SurrogateMethod::BaselineRbf) != cfg.beam_methods.end();
  const bool rbfgen_on =
      std::find(cfg.beam_methods.begin(), cfg.beam_methods.end(),
                SurrogateMethod::RbfGen) != cfg.beam_methods.end();
  const BeamSurrogates fits =
      fit_beam_surrogates(cfg, problem, cfg.seed, baseline_on, rbfgen_on);

  // Sweep the first element height; hold the rest at the training-region
  // midpoint where the data lives.
  const int grid = 101;
  Vec h = 0.5 * (problem.train_region.lo + problem.train_region.hi);
  std::vector<double> xs(grid), truth(grid), base(grid), mean(grid), lo(grid),
      hi(grid);
  for (int i = 0; i < grid; ++i) {
    const double t = static_cast<double>(i) / (grid - 1);
    h[0] = problem.bounds.lo[0] + t * (problem.bounds.hi[0] - problem.bounds.lo[0]);
    xs[static_cast<std::size_t>(i)] = h[0];
    truth[static_cast<std::size_t>(i)] = beam_compliance(problem, h);
    if (baseline_on) {
      base[static_cast<std::size_t>(i)] =
          evaluate_surrogate(fits.baseline, fits.baseline.w0, h);
    }
    if (rbfgen_on) {
      const Prediction p = predict_with_ci(fits.model, h, 0.95);
      mean[static_cast<std::size_t>(i)] = p.mean;
      lo[static_cast<std::size_t>(i)] = p.lo;
      hi[static_cast<std::size_t>(i)] = p.hi;
    }
  }

  SvgPlot plot("Cantilever slice, D = " + std::to_string(dims), "h_1",
               "compliance");
  if (rbfgen_on) {
    plot.add_band(xs, lo, hi, kColorBand, 0.35);
    plot.add_polyline(xs, mean, kColorMean, 2.0);
    plot.add_legend("generator mean", kColorMean);
    plot.add_legend("95% band", kColorBand);
  }
  if (baseline_on) {
    plot.add_polyline(xs, base, kColorBaseline, 1.5);
    plot.add_legend("square RBF", kColorBaseline);
  }
  plot.add_polyline(xs, truth, kColorTruth, 1.5, "6 4");
  plot.add_legend("FEM", kColorTruth);
  std::vector<double> px(static_cast<std::size_t>(fits.data.count())),
      py(static_cast<std::size_t>(fits.data.count()));
  for (int i = 0; i < fits.data.count(); ++i) {
    px[static_cast<std::size_t>(i)] = fits.data.X(i, 0);
    py[static_cast<std::size_t>(i)] = fits.data.y[i];
  }
  plot.add_points(px, py, kColorPoints, 3.5);
  plot.add_legend("training data", kColorPoints);
  write_text_file(
      join_path(cfg.out_dir, "beam_slice_d" + std::to_string(dims) + ".svg"),
      plot.render());
}

}  // namespace

std::string serialize_model(const SurrogateEnsemble& ensemble) {
  const RbfSystem& sys = ensemble.system;
  json doc{{"kernel", json{{"kind", sys.kernel.kind == KernelKind::Gaussian
                                        ? "gaussian"
                                        : "thinplate"},
                           {"epsilon", sys.kernel.epsilon}}},
           {"bounds",
            json{{"lo", vec_to_json(sys.bounds.lo)}, {"hi", vec_to_json(sys.bounds.hi)}}},
           {"centers", mat_to_json(sys.centers)},
           {"w0", vec_to_json(sys.w0)},
           {"nullspace", mat_to_json(sys.nullspace)},
           {"ystd", json{{"mean", ensemble.ystd.mean}, {"stddev", ensemble.ystd.stddev}}},
           {"generator", json::parse(serialize_generator(ensemble.net))}};
  json members = json::array();
  for (const Vec& w : ensemble.members) members.push_back(vec_to_json(w));
  doc["members"] = std::move(members);
  return doc.dump();
}

SurrogateEnsemble deserialize_model(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("model: not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw IoError("model: top level must be an object");
  for (const char* key :
       {"kernel", "bounds", "centers", "w0", "nullspace", "ystd", "generator",
        "members"}) {
    if (!doc.contains(key)) {
      throw IoError(std::string("model: missing field '") + key + "'");
    }
  }

  SurrogateEnsemble ens;
  const json& kernel = doc["kernel"];
  const std::string kind = kernel.value("kind", "");
  if (kind == "gaussian") {
    ens.system.kernel.kind = KernelKind::Gaussian;
  } else if (kind == "thinplate") {
    ens.system.kernel.kind = KernelKind::ThinPlate;
  } else {
    throw IoError("model: unknown kernel kind '" + kind + "'");
  }
  ens.system.kernel.epsilon = kernel.value("epsilon", 1.0);
  ens.system.bounds.lo = vec_from_json(doc["bounds"]["lo"], "bounds.lo");
  ens.system.bounds.hi = vec_from_json(doc["bounds"]["hi"], "bounds.hi");
  ens.system.centers = mat_from_json(doc["centers"], "centers");
  ens.system.w0 = vec_from_json(doc["w0"], "w0");
  ens.system.nullspace = mat_from_json(doc["nullspace"], "nullspace");
  ens.system.phi = MatRM(0, ens.system.centers.rows());
  ens.ystd.mean = doc["ystd"].value("mean", 0.0);
  ens.ystd.stddev = doc["ystd"].value("stddev", 1.0);
  ens.net = deserialize_generator(doc["generator"].dump());
  for (const auto& w : doc["members"]) {
    ens.members.push_back(vec_from_json(w, "members"));
  }

  try {
    validate_box(ens.system.bounds);
  } catch (const std::exception& e) {
    throw IoError(std::string("model: bad bounds: ") + e.what());
  }
  const int k = static_cast<int>(ens.system.centers.rows());
  if (ens.system.centers.cols() != ens.system.bounds.dim()) {
    throw IoError("model: centers and bounds disagree on dimension");
  }
  if (static_cast<int>(ens.system.w0.size()) != k) {
    throw IoError("model: w0 length must match the center count");
  }
  if (ens.system.nullspace.rows() != 0 && ens.system.nullspace.rows() != k) {
    throw IoError("model: null basis rows must match the center count");
  }
  if (ens.members.empty()) throw IoError("model: no ensemble members");
  for (const Vec& w : ens.members) {
    if (static_cast<int>(w.size()) != k) {
      throw IoError("model: member length must match the center count");
    }
  }
  if (!(ens.ystd.stddev > 0.0)) throw IoError("model: ystd.stddev must be positive");
  return ens;
}

int cmd_demo1d(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  const Dataset ds = demo_dataset();
  const Standardizer ystd = fit_standardizer(ds.y);

  for (const DemoVariant& variant : demo_variants(cfg, ystd.stddev)) {
    SurrogateEnsemble ens;
    if (variant.priors.empty()) {
      // Untrained reference: spherical latent draws straight through the
      // null basis, spread controlled by the alpha scale alone.
      Dataset std_ds;
      std_ds.X = ds.X;
      std_ds.bounds = ds.bounds;
      std_ds.y = (ds.y.array() - ystd.mean) / ystd.stddev;
      ens.system = build_relaxed_system(std_ds, cfg.fit.kernel, cfg.fit.center_count,
                                        cfg.fit.strategy, cfg.fit.center_seed);
      ens.ystd = ystd;
      ens.members = sample_random_alpha_ensemble(ens.system, cfg.demo_untrained_alpha,
                                                 cfg.fit.ensemble_size, cfg.seed);
    } else {
      TrainResult log;
      ens = fit_rbfgen(ds, variant.priors, cfg.fit, &log);
      write_loss_csv(join_path(cfg.out_dir, "demo1d_" + variant.name + "_loss.csv"),
                     log);
    }
    write_demo_outputs(cfg, variant.name, ens);
  }
  write_manifest(cfg);
  return 0;
}

int cmd_beam(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);

  BeamStudyConfig study;
  study.dims = cfg.beam_dims;
  study.ratio = cfg.beam_ratio;
  study.seeds = cfg.beam_seeds;
  study.methods = cfg.beam_methods;
  study.seed_base = cfg.seed;
  study.deterministic = cfg.deterministic;
  study.jobs = resolve_jobs(cfg);
  study.priors = cfg.beam_priors;
  study.fit = cfg.fit;
  study.optimize = cfg.beam_optimize;
  const std::vector<BeamStudyRow> rows = run_beam_study(study);

  std::string out = "D,ratio,method,seed,C_initial,C_final_true,improvement_pct,wall_time_s\n";
  for (const BeamStudyRow& row : rows) {
    out += std::to_string(row.dims) + "," + std::to_string(row.ratio) + "," +
           row.method + "," + std::to_string(row.seed) + "," +
           format_double(row.c_initial) + "," + format_double(row.c_final_true) +
           "," + format_double(row.improvement_pct) + "," +
           format_double(row.wall_time_s) + "\n";
  }
  write_text_file(join_path(cfg.out_dir, "beam_study.csv"), out);

  std::string summary = "D,ratio,method,median_improvement_pct,mean_improvement_pct,mean_wall_time_s\n";
  for (int d : cfg.beam_dims) {
    for (SurrogateMethod method : cfg.beam_methods) {
      double sum = 0.0, time_sum = 0.0;
      int count = 0;
      for (const BeamStudyRow& row : rows) {
        if (row.dims == d && row.method == method_name(method)) {
          sum += row.improvement_pct;
          time_sum += row.wall_time_s;
          ++count;
        }
      }
      summary += std::to_string(d) + "," + std::to_string(cfg.beam_ratio) + "," +
                 method_name(method) + "," +
                 format_double(median_improvement(rows, d, method)) + "," +
                 format_double(sum / count) + "," + format_double(time_sum / count) +
                 "\n";
    }
  }
  write_text_file(join_path(cfg.out_dir, "beam_summary.csv"), summary);

  const std::vector<int>& plot_dims =
      cfg.beam_plot_dims.empty() ? cfg.beam_dims : cfg.beam_plot_dims;
  for (int d : plot_dims) write_beam_slice_svg(cfg, d);

  write_manifest(cfg);
  return 0;
}

int cmd_crossval(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  const MultiDataset data = read_dataset_csv(cfg.dataset_path);
  std::vector<std::string> table_vars;
  const MonotonicityTable table =
      read_mono_table_csv(cfg.mono_table_path, &table_vars, nullptr);
  validate_mono_table(table, data.dim(), data.qoi_count());

  CrossValConfig cv;
  cv.method = cfg.cv_method;
  cv.ncomp = cfg.cv_ncomp;
  cv.fit = cfg.fit;
  cv.mono_weight = cfg.cv_mono_weight;
  cv.mono_grid = cfg.cv_mono_grid;
  cv.seed = cfg.seed;
  cv.jobs = resolve_jobs(cfg);
  const CrossValReport report = run_l2o(data, table, cv);

  std::string out = "qoi,method,are,aae\n";
  for (const QoiResult& q : report.per_qoi) {
    out += q.qoi + "," + method_name(cfg.cv_method) + "," + format_double(q.are) +
           "," + format_double(q.aae) + "\n";
  }
  out += std::string("overall,") + method_name(cfg.cv_method) + "," +
         format_double(report.overall_are) + "," + format_double(report.overall_aae) +
         "\n";
  write_text_file(join_path(cfg.out_dir, "crossval_report.csv"), out);
  write_manifest(cfg);
  return 0;
}

int cmd_fit(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  const MultiDataset multi = read_dataset_csv(cfg.dataset_path);
  if (multi.qoi_count() != 1) {
    throw DomainError("fit: dataset must carry exactly one response column (found " +
                      std::to_string(multi.qoi_count()) + ")");
  }
  const Dataset data = make_dataset(multi.X, multi.Y.col(0), multi.bounds);

  std::vector<PriorTerm> priors;
  priors.reserve(cfg.fit_priors.size());
  for (const PriorSpec& spec : cfg.fit_priors) {
    priors.push_back(instantiate_prior(spec, data.bounds));
  }

  FitConfig fit = cfg.fit;
  if (fit.center_count == 0) {
    fit.center_count = std::max(3 * data.dim(), data.count() + 1);
  }
  TrainResult log;
  const SurrogateEnsemble ens = fit_rbfgen(data, priors, fit, &log);

  write_text_file(resolve_output(cfg, cfg.model_out), serialize_model(ens) + "\n");
  write_loss_csv(join_path(cfg.out_dir, "fit_loss.csv"), log);
  write_manifest(cfg);
  return 0;
}

int cmd_predict(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  std::ifstream in(cfg.model_path, std::ios::binary);
  if (!in) throw IoError(cfg.model_path + ": cannot open model file");
  const std::string text(std::istreambuf_iterator<char>(in),
                         std::istreambuf_iterator<char>{});
  const SurrogateEnsemble ens = deserialize_model(text);

  const CsvTable points = read_csv(cfg.points_path);
  const int d = ens.system.bounds.dim();
  if (static_cast<int>(points.header.size()) != d) {
    throw DomainError("predict: points have " + std::to_string(points.header.size()) +
                      " columns, the model expects " + std::to_string(d));
  }

  CsvTable out;
  out.header = points.header;
  out.header.insert(out.header.end(), {"mean", "lo", "hi"});
  Vec x(d);
  for (const auto& row : points.rows) {
    for (int j = 0; j < d; ++j) x[j] = row[static_cast<std::size_t>(j)];
    const Prediction p = predict_with_ci(ens, x, cfg.predict_level);
    std::vector<double> cells = row;
    cells.insert(cells.end(), {p.mean, p.lo, p.hi});
    out.rows.push_back(std::move(cells));
  }
  write_csv(resolve_output(cfg, cfg.out_csv), out);
  write_manifest(cfg);
  return 0;
}

int run_command(const RunConfig& cfg) {
  try {
    switch (cfg.command) {
      case Command::Demo1d: return cmd_demo1d(cfg);
      case Command::Beam: return cmd_beam(cfg);
      case Command::Crossval: return cmd_crossval(cfg);
      case Command::Fit: return cmd_fit(cfg);
      case Command::Predict: return cmd_predict(cfg);
    }
    std::cerr << "rbfgen: unknown command\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "rbfgen: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "rbfgen: " << e.what() << "\n";
    return 2;
  } catch (const ShapeError& e) {
    std::cerr << "rbfgen: " << e.what() << "\n";
    return 2;
  } catch (const RankDeficiencyError& e) {
    std::cerr << "rbfgen: " << e.what() << "\n";
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "rbfgen: " << e.what() << "\n";
    return 4;
  } catch (const IoError& e) {
    std::cerr << "rbfgen: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "rbfgen: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace rbfgen
