#include "rbfgen/beam.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "parallel.hpp"
#include "rbfgen/centers.hpp"
#include "rbfgen/errors.hpp"
#include "rbfgen/rng.hpp"

namespace rbfgen {

namespace {

Vec train_midpoint(const BeamProblem& problem) {
  return 0.5 * (problem.train_region.lo + problem.train_region.hi);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

BeamProblem make_beam_problem(int elements) {
  BeamProblem p;
  p.elements = elements;
  p.bounds.lo = Vec::Constant(elements, 0.05);
  p.bounds.hi = Vec::Constant(elements, 0.5);
  p.train_region.lo = Vec::Constant(elements, 0.05);
  p.train_region.hi = Vec::Constant(elements, 0.1);
  validate_beam_problem(p);
  return p;
}

void validate_beam_problem(const BeamProblem& problem) {
  if (problem.elements < 1) {
    throw DomainError("beam: element count must be at least 1");
  }
  if (problem.length <= 0.0 || problem.width <= 0.0 || problem.modulus <= 0.0 ||
      problem.tip_load <= 0.0 || problem.volume_cap <= 0.0) {
    throw DomainError("beam: physical constants must be positive");
  }
  validate_box(problem.bounds);
  validate_box(problem.train_region);
  if (problem.bounds.dim() != problem.elements ||
      problem.train_region.dim() != problem.elements) {
    throw DomainError("beam: bounds dimension must match the element count");
  }
  for (int i = 0; i < problem.elements; ++i) {
    if (problem.bounds.lo[i] <= 0.0) {
      throw DomainError("beam: height bounds must be strictly positive");
    }
    if (problem.train_region.lo[i] < problem.bounds.lo[i] ||
        problem.train_region.hi[i] > problem.bounds.hi[i]) {
      throw DomainError("beam: train region must lie inside the bounds");
    }
  }
  if (beam_volume(problem, problem.bounds.lo) > problem.volume_cap) {
    throw DomainError("beam: volume cap excludes the entire design box");
  }
}

double beam_compliance(const BeamProblem& problem, const Vec& h) {
  const int d = problem.elements;
  if (h.size() != d) {
    throw ShapeError("beam_compliance: expected " + std::to_string(d) +
                     " heights, got " + std::to_string(h.size()));
  }
  for (int i = 0; i < d; ++i) {
    if (!(h[i] > 0.0)) {
      throw DomainError("beam_compliance: heights must be strictly positive");
    }
  }

  // Two DOF per node (deflection, rotation), root node clamped away.
  const double le = problem.length / d;
  const int ndof = 2 * d;
  Mat stiffness = Mat::Zero(ndof, ndof);
  for (int e = 0; e < d; ++e) {
    const double ei = problem.modulus * problem.width * h[e] * h[e] * h[e] / 12.0;
    const double c = ei / (le * le * le);
    const double k[4][4] = {
        {12.0 * c, 6.0 * le * c, -12.0 * c, 6.0 * le * c},
        {6.0 * le * c, 4.0 * le * le * c, -6.0 * le * c, 2.0 * le * le * c},
        {-12.0 * c, -6.0 * le * c, 12.0 * c, -6.0 * le * c},
        {6.0 * le * c, 2.0 * le * le * c, -6.0 * le * c, 4.0 * le * le * c}};
    // Element DOFs 2e..2e+3 in the full numbering; subtract the two clamped
    // root DOFs and drop rows/columns that land on them.
    for (int a = 0; a < 4; ++a) {
      const int ga = 2 * e + a - 2;
      if (ga < 0) continue;
      for (int b = 0; b < 4; ++b) {
        const int gb = 2 * e + b - 2;
        if (gb < 0) continue;
        stiffness(ga, gb) += k[a][b];
      }
    }
  }

  Vec f = Vec::Zero(ndof);
  f[ndof - 2] = problem.tip_load;  // tip translation DOF

  Eigen::LLT<Mat> llt(stiffness);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("beam_compliance: stiffness factorization failed");
  }
  const Vec dvec = llt.solve(f);
  return f.dot(dvec);
}

double beam_volume(const BeamProblem& problem, const Vec& h) {
  if (h.size() != problem.elements) {
    throw ShapeError("beam_volume: expected " + std::to_string(problem.elements) +
                     " heights, got " + std::to_string(h.size()));
  }
  return problem.width * (problem.length / problem.elements) * h.sum();
}

Dataset sample_training_data(const BeamProblem& problem, int count,
                             std::uint64_t seed) {
  validate_beam_problem(problem);
  if (count < 1) {
    throw DomainError("sample_training_data: count must be at least 1");
  }
  const int d = problem.elements;
  const Mat unit = latin_hypercube_unit(count, d, seed);
  Mat X(count, d);
  Vec y(count);
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < d; ++j) {
      X(i, j) = problem.train_region.lo[j] +
                unit(i, j) * (problem.train_region.hi[j] - problem.train_region.lo[j]);
    }
    y[i] = beam_compliance(problem, X.row(i).transpose());
  }
  return make_dataset(X, y, problem.bounds);
}

std::vector<PriorTerm> build_beam_priors(
    const BeamProblem& problem, const std::function<double(const Vec&)>& fem,
    const BeamPriorConfig& cfg) {
  validate_beam_problem(problem);
  if (!fem) {
    throw DomainError("build_beam_priors: truth oracle must be callable");
  }
  if (cfg.mono_grid < 2 || cfg.kl_grid < 1 || cfg.pos_probes < 1) {
    throw DomainError("build_beam_priors: grid sizes must be positive");
  }
  const int d = problem.elements;
  const Vec anchor = train_midpoint(problem);
  std::vector<PriorTerm> terms;
  terms.reserve(static_cast<std::size_t>(d * (1 + cfg.kl_grid) + 1));

  // (a) thicker is stiffer: compliance never rises along any height axis.
  for (int j = 0; j < d; ++j) {
    PriorTerm t;
    t.id = "mono_h" + std::to_string(j);
    t.kind = PriorKind::Mono;
    t.direction = MonoDirection::NonIncreasing;
    t.weight = cfg.mono_weight;
    t.points = Mat(cfg.mono_grid, d);
    for (int g = 0; g < cfg.mono_grid; ++g) {
      t.points.row(g) = anchor.transpose();
      t.points(g, j) = problem.bounds.lo[j] +
                       (problem.bounds.hi[j] - problem.bounds.lo[j]) * g /
                           (cfg.mono_grid - 1);
    }
    terms.push_back(std::move(t));
  }

  // (b) compliance stays positive everywhere in the box.
  {
    PriorTerm t;
    t.id = "pos";
    t.kind = PriorKind::Pos;
    t.bound = 0.0;
    t.weight = cfg.pos_weight;
    t.points = Mat(cfg.pos_probes, d);
    Rng rng(cfg.pos_seed);
    for (int g = 0; g < cfg.pos_probes; ++g) {
      for (int j = 0; j < d; ++j) {
        t.points(g, j) = rng.uniform(problem.bounds.lo[j], problem.bounds.hi[j]);
      }
    }
    terms.push_back(std::move(t));
  }

  // (c) slice targets: pin the ensemble near the true model along each
  // axis, with a band proportional to the value.
  for (int j = 0; j < d; ++j) {
    for (int g = 0; g < cfg.kl_grid; ++g) {
      PriorTerm t;
      t.id = "kl_h" + std::to_string(j) + "_" + std::to_string(g);
      t.kind = PriorKind::KLPoint;
      t.weight = cfg.kl_weight;
      t.points = Mat(1, d);
      t.points.row(0) = anchor.transpose();
      t.points(0, j) = problem.bounds.lo[j] +
                       (cfg.kl_grid == 1
                            ? 0.5 * (problem.bounds.hi[j] - problem.bounds.lo[j])
                            : (problem.bounds.hi[j] - problem.bounds.lo[j]) * g /
                                  (cfg.kl_grid - 1));
      t.target_mu = fem(t.points.row(0).transpose());
      t.target_sigma = cfg.perturb * std::fabs(t.target_mu);
      if (!(t.target_sigma > 0.0)) {
        throw DomainError("build_beam_priors: slice target at '" + t.id +
                          "' has zero spread");
      }
      terms.push_back(std::move(t));
    }
  }
  return terms;
}

Vec project_feasible(const BeamProblem& problem, const Vec& u) {
  const int d = problem.elements;
  if (u.size() != d) {
    throw ShapeError("project_feasible: expected " + std::to_string(d) +
                     " coordinates, got " + std::to_string(u.size()));
  }
  // Volume is affine in normalized coordinates: const + sum(c_j u_j).
  const double per = problem.width * problem.length / d;
  Vec coeff(d);
  double base = 0.0;
  for (int j = 0; j < d; ++j) {
    coeff[j] = per * (problem.bounds.hi[j] - problem.bounds.lo[j]);
    base += per * problem.bounds.lo[j];
  }
  const double budget = problem.volume_cap - base;

  Vec clamped = u.cwiseMax(0.0).cwiseMin(1.0);
  if (coeff.dot(clamped) <= budget + 1e-10) {
    return clamped;
  }

  // Dual bisection on the half-space multiplier: g(lambda) is continuous
  // and nonincreasing, g(0) > budget, and g(lambda_max) = 0 <= budget.
  auto clamp_at = [&](double lambda, Vec& out) {
    double vol = 0.0;
    for (int j = 0; j < d; ++j) {
      out[j] = std::clamp(u[j] - lambda * coeff[j], 0.0, 1.0);
      vol += coeff[j] * out[j];
    }
    return vol;
  };
  double lo = 0.0;
  double hi = 0.0;
  for (int j = 0; j < d; ++j) {
    if (coeff[j] > 0.0) hi = std::max(hi, (u[j] + 1.0) / coeff[j]);
  }
  Vec out(d);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double vol = clamp_at(mid, out);
    (vol > budget ? lo : hi) = mid;
    if (std::fabs(vol - budget) <= 1e-12) break;
  }
  clamp_at(hi, out);  // final evaluation on the feasible side
  return out;
}

OptimizeResult optimize_on_surrogate(
    const std::function<double(const Vec&)>& objective,
    const BeamProblem& problem, const OptimizeConfig& cfg) {
  validate_beam_problem(problem);
  if (!objective) {
    throw DomainError("optimize_on_surrogate: objective must be callable");
  }
  if (cfg.starts < 1 || cfg.max_iters < 1 || cfg.initial_step <= 0.0 ||
      cfg.fd_step <= 0.0) {
    throw DomainError("optimize_on_surrogate: bad optimizer configuration");
  }
  const int d = problem.elements;
  auto eval = [&](const Vec& u) {
    return objective(denormalize_point(problem.bounds, u));
  };

  Rng rng(cfg.seed);
  Vec best_u;
  double best_f = std::numeric_limits<double>::infinity();
  for (int s = 0; s < cfg.starts; ++s) {
    Vec u(d);
    if (s == 0) {
      u = normalize_point(problem.bounds, train_midpoint(problem));
    } else {
      for (int j = 0; j < d; ++j) u[j] = rng.uniform();
    }
    u = project_feasible(problem, u);
    double f = eval(u);
    if (!std::isfinite(f)) continue;

    double step = cfg.initial_step;
    Vec grad(d), probe(d), cand(d);
    for (int iter = 0; iter < cfg.max_iters && step >= cfg.min_step; ++iter) {
      for (int j = 0; j < d; ++j) {
        probe = u;
        probe[j] = u[j] + cfg.fd_step;
        const double up = eval(probe);
        probe[j] = u[j] - cfg.fd_step;
        const double down = eval(probe);
        grad[j] = (up - down) / (2.0 * cfg.fd_step);
      }
      const double norm = grad.norm();
      if (!(norm > 0.0) || !std::isfinite(norm)) break;
      cand = project_feasible(problem, u - (step / norm) * grad);
      const double fc = eval(cand);
      if (std::isfinite(fc) && fc < f - 1e-12 * (1.0 + std::fabs(f))) {
        u = cand;
        f = fc;
        step = std::min(step * 1.3, 0.2);
      } else {
        step *= 0.5;
      }
    }
    if (f < best_f) {
      best_f = f;
      best_u = u;
    }
  }
  if (!std::isfinite(best_f)) {
    throw NumericalError(
        "optimize_on_surrogate: no start produced a finite objective");
  }
  OptimizeResult result;
  result.h_star = denormalize_point(problem.bounds, best_u);
  result.predicted = best_f;
  return result;
}

double measured_improvement(double c_initial, double c_final) {
  if (!(c_initial > 0.0)) {
    throw DomainError("measured_improvement: initial objective must be positive");
  }
  return 100.0 * (c_initial - c_final) / c_initial;
}

namespace {

struct StudyCell {
  int dims = 0;
  std::uint64_t seed = 0;
  SurrogateMethod method = SurrogateMethod::BaselineRbf;
};

BeamStudyRow run_study_cell(const BeamStudyConfig& cfg, const StudyCell& cell) {
  const BeamProblem problem = make_beam_problem(cell.dims);
  auto fem = [&](const Vec& h) { return beam_compliance(problem, h); };
  const Vec h0 = train_midpoint(problem);
  const double c0 = beam_compliance(problem, h0);
  const int n = cfg.ratio * cell.dims;
  const Dataset data = sample_training_data(problem, n, cell.seed);

  const auto t_start = std::chrono::steady_clock::now();
  std::function<double(const Vec&)> surrogate;
  SurrogateEnsemble model;  // keeps the generator pipeline alive
  RbfSystem baseline;
  Vec mean_w;

  if (cell.method == SurrogateMethod::BaselineRbf) {
    baseline = build_square_system(data, cfg.fit.kernel);
    surrogate = [&baseline](const Vec& h) {
      return evaluate_surrogate(baseline, baseline.w0, h);
    };
  } else {
    BeamPriorConfig pc = cfg.priors;
    const Standardizer ystd = fit_standardizer(data.y);
    pc.mono_weight /= ystd.stddev;
    pc.pos_weight /= ystd.stddev;
    FitConfig fit = cfg.fit;
    if (fit.center_count == 0) fit.center_count = std::max(3 * cell.dims, n + 1);
    fit.train.seed = cell.seed;
    model = fit_rbfgen(data, build_beam_priors(problem, fem, pc), fit);
    // The ensemble is linear in the weights, so the mean member evaluates
    // to the exact ensemble-mean prediction.
    mean_w = Vec::Zero(model.system.center_count());
    for (const Vec& w : model.members) mean_w += w;
    mean_w /= static_cast<double>(model.members.size());
    surrogate = [&model, &mean_w](const Vec& h) {
      return model.ystd.to_original(evaluate_surrogate(model.system, mean_w, h));
    };
  }

  OptimizeConfig oc = cfg.optimize;
  oc.seed = cell.seed;
  const OptimizeResult opt = optimize_on_surrogate(surrogate, problem, oc);
  const double c_final = beam_compliance(problem, opt.h_star);
  const auto t_end = std::chrono::steady_clock::now();

  BeamStudyRow row;
  row.dims = cell.dims;
  row.ratio = cfg.ratio;
  row.method = method_name(cell.method);
  row.seed = cell.seed;
  row.c_initial = c0;
  row.c_final_true = c_final;
  row.improvement_pct = measured_improvement(c0, c_final);
  row.wall_time_s = cfg.deterministic
                        ? 0.0
                        : std::chrono::duration<double>(t_end - t_start).count();
  return row;
}

}  // namespace

std::vector<BeamStudyRow> run_beam_study(const BeamStudyConfig& cfg) {
  if (cfg.dims.empty() || cfg.seeds < 1 || cfg.methods.empty() ||
      cfg.ratio < 1) {
    throw DomainError("run_beam_study: dims, seeds, ratio, and methods must be set");
  }
  std::vector<StudyCell> cells;
  for (int d : cfg.dims) {
    for (int seed = 0; seed < cfg.seeds; ++seed) {
      for (SurrogateMethod method : cfg.methods) {
        cells.push_back({d, cfg.seed_base + static_cast<std::uint64_t>(seed),
                         method});
      }
    }
  }
  std::vector<BeamStudyRow> rows(cells.size());
  detail::parallel_for(static_cast<int>(cells.size()), cfg.jobs, [&](int i) {
    rows[static_cast<std::size_t>(i)] =
        run_study_cell(cfg, cells[static_cast<std::size_t>(i)]);
  });
  return rows;
}

double median_improvement(const std::vector<BeamStudyRow>& rows, int dims,
                          SurrogateMethod method) {
  std::vector<double> vals;
  for (const BeamStudyRow& row : rows) {
    if (row.dims == dims && row.method == method_name(method)) {
      vals.push_back(row.improvement_pct);
    }
  }
  if (vals.empty()) {
    throw DomainError("median_improvement: no study rows for that cell");
  }
  return median_of(std::move(vals));
}

}  // namespace rbfgen
