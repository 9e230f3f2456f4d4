#include "rbfgen/evalcv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "parallel.hpp"
#include "rbfgen/centers.hpp"
#include "rbfgen/errors.hpp"
#include "rbfgen/rng.hpp"

namespace rbfgen {

namespace {

constexpr double kAreFloor = 1e-12;  // |y| below this is excluded from ARE

double column_median(const Mat& X, int col, std::vector<double>& scratch) {
  scratch.resize(static_cast<std::size_t>(X.rows()));
  for (int i = 0; i < X.rows(); ++i) {
    scratch[static_cast<std::size_t>(i)] = X(i, col);
  }
  std::sort(scratch.begin(), scratch.end());
  const std::size_t n = scratch.size();
  return n % 2 == 1 ? scratch[n / 2]
                    : 0.5 * (scratch[n / 2 - 1] + scratch[n / 2]);
}

// Training-score box padded a little so the surrogate normalization has
// breathing room; held-out projections may still fall outside, which the
// evaluation path accepts.
Box score_bounds(const Mat& scores) {
  Box box;
  const int d = static_cast<int>(scores.cols());
  box.lo = Vec(d);
  box.hi = Vec(d);
  for (int j = 0; j < d; ++j) {
    double lo = scores.col(j).minCoeff();
    double hi = scores.col(j).maxCoeff();
    const double range = hi - lo;
    if (range < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    } else {
      lo -= 0.05 * range;
      hi += 0.05 * range;
    }
    box.lo[j] = lo;
    box.hi[j] = hi;
  }
  return box;
}

}  // namespace

void validate_mono_table(const MonotonicityTable& table, int num_vars,
                         int num_qois) {
  if (table.var_count() != num_vars || table.qoi_count() != num_qois) {
    throw DomainError("mono table: expected " + std::to_string(num_vars) + "x" +
                      std::to_string(num_qois) + " entries, got " +
                      std::to_string(table.var_count()) + "x" +
                      std::to_string(table.qoi_count()));
  }
  for (int v = 0; v < table.var_count(); ++v) {
    for (int q = 0; q < table.qoi_count(); ++q) {
      const int e = table.entries(v, q);
      if (e != -1 && e != 0 && e != 1) {
        throw DomainError("mono table: entry (" + std::to_string(v) + "," +
                          std::to_string(q) + ") must be -1, 0, or +1");
      }
    }
  }
}

void validate_multi_dataset(const MultiDataset& data) {
  if (data.X.rows() == 0 || data.X.cols() == 0) {
    throw ShapeError("multi dataset: X must be non-empty");
  }
  if (data.Y.rows() != data.X.rows() || data.Y.cols() == 0) {
    throw ShapeError("multi dataset: Y must pair one row per sample");
  }
  validate_box(data.bounds);
  if (data.bounds.dim() != data.dim()) {
    throw ShapeError("multi dataset: bounds dimension mismatch");
  }
  if (static_cast<int>(data.var_names.size()) != data.dim() ||
      static_cast<int>(data.qoi_names.size()) != data.qoi_count()) {
    throw ShapeError("multi dataset: name lists must match the column counts");
  }
  for (int i = 0; i < data.count(); ++i) {
    if (!box_contains(data.bounds, data.X.row(i).transpose())) {
      throw DomainError("multi dataset: row " + std::to_string(i) +
                        " lies outside the bounds");
    }
  }
}

std::vector<std::pair<int, int>> l2o_folds(int n) {
  if (n < 3) {
    throw DomainError(
        "l2o_folds: need at least 3 samples to keep a training slice");
  }
  std::vector<std::pair<int, int>> folds;
  folds.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) folds.emplace_back(i, j);
  }
  return folds;
}

Metrics compute_metrics(const std::vector<std::pair<double, double>>& pred_true) {
  if (pred_true.empty()) {
    throw DomainError("compute_metrics: prediction list is empty");
  }
  double abs_sum = 0.0;
  double rel_sum = 0.0;
  int rel_count = 0;
  for (const auto& [yhat, y] : pred_true) {
    const double err = std::fabs(yhat - y);
    abs_sum += err;
    if (std::fabs(y) >= kAreFloor) {
      rel_sum += err / std::fabs(y);
      ++rel_count;
    }
  }
  Metrics m;
  m.aae = abs_sum / static_cast<double>(pred_true.size());
  m.are = rel_count > 0 ? rel_sum / rel_count : 0.0;
  return m;
}

PlsModel pls_fit(const Mat& X, const Vec& y, int ncomp) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  if (n < 2 || d < 1) {
    throw ShapeError("pls_fit: need at least 2 samples and 1 variable");
  }
  if (y.size() != n) {
    throw ShapeError("pls_fit: X and y row counts differ");
  }

  PlsModel model;
  model.x_mean = X.colwise().mean();
  model.x_scale = Vec(d);
  Mat Xs(n, d);
  for (int j = 0; j < d; ++j) {
    const Vec centered = X.col(j).array() - model.x_mean[j];
    const double var = centered.squaredNorm() / (n - 1);
    model.x_scale[j] = var > 1e-24 ? std::sqrt(var) : 1.0;
    Xs.col(j) = centered / model.x_scale[j];
  }
  model.y_mean = y.mean();
  Vec yc = y.array() - model.y_mean;

  // ncomp is capped by the rank of the standardized inputs.
  Eigen::JacobiSVD<Mat> svd(Xs);
  const Vec& sv = svd.singularValues();
  const double tol =
      std::max(n, d) * std::numeric_limits<double>::epsilon() * sv[0];
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > tol) ++rank;
  }
  if (ncomp < 1 || ncomp > rank) {
    throw DomainError("pls_fit: ncomp must lie in [1, " + std::to_string(rank) +
                      "], got " + std::to_string(ncomp));
  }

  model.weights = Mat(d, ncomp);
  model.loadings = Mat(d, ncomp);
  for (int a = 0; a < ncomp; ++a) {
    Vec cov = Xs.transpose() * yc;
    const double cov_norm = cov.norm();
    if (cov_norm <= 1e-12) {
      throw NumericalError(
          "pls_fit: response has no covariance left with the inputs at "
          "component " +
          std::to_string(a + 1));
    }
    const Vec w = cov / cov_norm;
    const Vec t = Xs * w;
    const double tt = t.squaredNorm();
    const Vec p = Xs.transpose() * t / tt;
    const double q = yc.dot(t) / tt;
    model.weights.col(a) = w;
    model.loadings.col(a) = p;
    Xs.noalias() -= t * p.transpose();
    yc -= q * t;
  }
  const Mat ptw = model.loadings.transpose() * model.weights;
  model.rotation = model.weights * ptw.partialPivLu().solve(
                                       Mat::Identity(ncomp, ncomp));
  return model;
}

Mat pls_transform(const PlsModel& model, const Mat& X) {
  if (X.cols() != model.dim()) {
    throw ShapeError("pls_transform: variable count mismatch");
  }
  Mat Xs(X.rows(), X.cols());
  for (int j = 0; j < X.cols(); ++j) {
    Xs.col(j) = (X.col(j).array() - model.x_mean[j]) / model.x_scale[j];
  }
  return Xs * model.rotation;
}

std::vector<PriorTerm> mono_terms_from_signs(const Mat& X,
                                             const std::vector<int>& signs,
                                             const PlsModel& pls, int grid,
                                             double weight) {
  const int d = static_cast<int>(X.cols());
  if (static_cast<int>(signs.size()) != d) {
    throw ShapeError("mono_terms_from_signs: one sign per variable required");
  }
  if (grid < 2) {
    throw DomainError("mono_terms_from_signs: grid needs at least 2 points");
  }
  std::vector<PriorTerm> terms;
  std::vector<double> scratch;
  Vec medians(d);
  for (int j = 0; j < d; ++j) medians[j] = column_median(X, j, scratch);
  for (int v = 0; v < d; ++v) {
    if (signs[static_cast<std::size_t>(v)] == 0) continue;
    const double lo = X.col(v).minCoeff();
    const double hi = X.col(v).maxCoeff();
    if (hi - lo < 1e-12) continue;  // variable never moves in this slice
    Mat slice = medians.transpose().replicate(grid, 1);
    for (int g = 0; g < grid; ++g) {
      slice(g, v) = lo + (hi - lo) * g / (grid - 1);
    }
    PriorTerm t;
    t.id = "mono_x" + std::to_string(v);
    t.kind = PriorKind::Mono;
    t.direction = signs[static_cast<std::size_t>(v)] > 0
                      ? MonoDirection::NonDecreasing
                      : MonoDirection::NonIncreasing;
    t.weight = weight;
    t.points = pls_transform(pls, slice);
    terms.push_back(std::move(t));
  }
  return terms;
}

std::pair<double, double> l2o_predict(const Mat& X, const Vec& y,
                                      const std::vector<int>& mono_signs,
                                      const CrossValConfig& cfg,
                                      std::pair<int, int> fold) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  if (y.size() != n) {
    throw ShapeError("l2o_predict: X and y row counts differ");
  }
  if (static_cast<int>(mono_signs.size()) != d) {
    throw ShapeError("l2o_predict: one trend sign per variable required");
  }
  if (fold.first < 0 || fold.second <= fold.first || fold.second >= n) {
    throw DomainError("l2o_predict: fold indices must satisfy 0 <= i < j < n");
  }

  // Training slice without the held-out pair.
  const int m = n - 2;
  Mat Xtr(m, d);
  Vec ytr(m);
  int row = 0;
  for (int i = 0; i < n; ++i) {
    if (i == fold.first || i == fold.second) continue;
    Xtr.row(row) = X.row(i);
    ytr[row] = y[i];
    ++row;
  }

  const PlsModel pls = pls_fit(Xtr, ytr, cfg.ncomp);
  const Mat scores = pls_transform(pls, Xtr);
  const Box bounds = score_bounds(scores);
  const Dataset reduced = make_dataset(scores, ytr, bounds);

  Mat held(2, d);
  held.row(0) = X.row(fold.first);
  held.row(1) = X.row(fold.second);
  const Mat held_scores = pls_transform(pls, held);

  if (cfg.method == SurrogateMethod::BaselineRbf) {
    const RbfSystem sys = build_square_system(reduced, cfg.fit.kernel);
    return {evaluate_surrogate(sys, sys.w0, held_scores.row(0).transpose()),
            evaluate_surrogate(sys, sys.w0, held_scores.row(1).transpose())};
  }

  // Generator pipeline: map each expert trend into a monotonicity term
  // along the original variable, expressed at reduced-space probe points.
  const double y_std = fit_standardizer(ytr).stddev;
  std::vector<PriorTerm> terms = mono_terms_from_signs(
      Xtr, mono_signs, pls, cfg.mono_grid, cfg.mono_weight / y_std);

  FitConfig fit = cfg.fit;
  if (fit.center_count == 0) {
    // Twice the training count: a barely-overcomplete basis (N + 1) keeps
    // almost no null space to shape and generalizes no better than the
    // square baseline, while ~2N spread centers give the minimum-norm
    // solution a real smoothing advantage.
    fit.center_count = std::max(3 * cfg.ncomp, 2 * m);
  }
  fit.train.seed = cfg.seed;

  if (terms.empty()) {
    // No expert trends for this QoI: the pipeline reduces to the
    // minimum-norm relaxed interpolant.
    const RbfSystem sys =
        build_relaxed_system(reduced, fit.kernel, fit.center_count,
                             fit.strategy, fit.center_seed);
    return {evaluate_surrogate(sys, sys.w0, held_scores.row(0).transpose()),
            evaluate_surrogate(sys, sys.w0, held_scores.row(1).transpose())};
  }

  const SurrogateEnsemble model = fit_rbfgen(reduced, terms, fit);
  Vec mean_w = Vec::Zero(model.system.center_count());
  for (const Vec& w : model.members) mean_w += w;
  mean_w /= static_cast<double>(model.members.size());
  auto predict = [&](const Vec& s) {
    return model.ystd.to_original(evaluate_surrogate(model.system, mean_w, s));
  };
  return {predict(held_scores.row(0).transpose()),
          predict(held_scores.row(1).transpose())};
}

CrossValReport run_l2o(const MultiDataset& data, const MonotonicityTable& table,
                       const CrossValConfig& cfg) {
  validate_multi_dataset(data);
  validate_mono_table(table, data.dim(), data.qoi_count());
  const auto folds = l2o_folds(data.count());
  const int fold_count = static_cast<int>(folds.size());
  const int qois = data.qoi_count();

  // One slot per (qoi, fold); cells are independent.
  std::vector<std::vector<std::pair<double, double>>> raw(
      static_cast<std::size_t>(qois));
  for (auto& r : raw) r.resize(static_cast<std::size_t>(fold_count));
  detail::parallel_for(qois * fold_count, cfg.jobs, [&](int cell) {
    const int q = cell / fold_count;
    const int f = cell % fold_count;
    std::vector<int> signs(static_cast<std::size_t>(data.dim()));
    for (int v = 0; v < data.dim(); ++v) signs[static_cast<std::size_t>(v)] = table.entries(v, q);
    raw[static_cast<std::size_t>(q)][static_cast<std::size_t>(f)] =
        l2o_predict(data.X, data.Y.col(q), signs, cfg,
                    folds[static_cast<std::size_t>(f)]);
  });

  CrossValReport report;
  report.fold_count = fold_count;
  report.prediction_count = 2 * fold_count;
  report.per_qoi.reserve(static_cast<std::size_t>(qois));
  double are_sum = 0.0;
  double aae_sum = 0.0;
  for (int q = 0; q < qois; ++q) {
    QoiResult r;
    r.qoi = data.qoi_names[static_cast<std::size_t>(q)];
    r.predictions.reserve(static_cast<std::size_t>(2 * fold_count));
    for (int f = 0; f < fold_count; ++f) {
      const auto& [hat_i, hat_j] = raw[static_cast<std::size_t>(q)][static_cast<std::size_t>(f)];
      const auto& [i, j] = folds[static_cast<std::size_t>(f)];
      r.predictions.emplace_back(hat_i, data.Y(i, q));
      r.predictions.emplace_back(hat_j, data.Y(j, q));
    }
    const Metrics m = compute_metrics(r.predictions);
    r.are = m.are;
    r.aae = m.aae;
    are_sum += m.are;
    aae_sum += m.aae;
    report.per_qoi.push_back(std::move(r));
  }
  report.overall_are = are_sum / qois;
  report.overall_aae = aae_sum / qois;
  return report;
}

MultiDataset make_synthetic_dataset(const SyntheticSpec& spec) {
  if (spec.count < 3 || spec.vars < 1 || spec.qois < 1) {
    throw DomainError("synthetic dataset: count >= 3, vars/qois >= 1 required");
  }
  if (spec.relevant < 1 || spec.relevant > spec.vars) {
    throw DomainError("synthetic dataset: relevant must lie in [1, vars]");
  }
  if (spec.noise < 0.0) {
    throw DomainError("synthetic dataset: noise must be non-negative");
  }

  MultiDataset data;
  data.X = latin_hypercube_unit(spec.count, spec.vars, spec.seed);
  data.Y = Mat(spec.count, spec.qois);
  data.bounds = Box::unit(spec.vars);
  const MonotonicityTable table = synthetic_mono_table(spec);

  Rng noise_rng(spec.seed + 0x5DEECE66DULL);
  for (int q = 0; q < spec.qois; ++q) {
    Vec signal(spec.count);
    for (int i = 0; i < spec.count; ++i) {
      double s = 0.0;
      for (int r = 0; r < spec.relevant; ++r) {
        const int v = (3 * q + r) % spec.vars;
        const double amp = 1.0 + 0.5 * r;
        const double u = table.entries(v, q) > 0 ? data.X(i, v)
                                                 : 1.0 - data.X(i, v);
        // Strictly increasing and smooth on [0, 1].
        s += amp * (u + 0.5 * u * u);
      }
      signal[i] = s;
    }
    const double offset = 10.0 * (q + 1);
    const double scale = 2.0 * (q + 1);
    signal = offset + scale * signal.array();
    const double sig_std = fit_standardizer(signal).stddev;
    for (int i = 0; i < spec.count; ++i) {
      data.Y(i, q) = signal[i] + spec.noise * sig_std * noise_rng.normal();
    }
  }

  data.var_names.reserve(static_cast<std::size_t>(spec.vars));
  for (int v = 0; v < spec.vars; ++v) {
    data.var_names.push_back("x" + std::to_string(v + 1));
  }
  data.qoi_names.reserve(static_cast<std::size_t>(spec.qois));
  for (int q = 0; q < spec.qois; ++q) {
    data.qoi_names.push_back("q" + std::to_string(q + 1));
  }
  return data;
}

MonotonicityTable synthetic_mono_table(const SyntheticSpec& spec) {
  MonotonicityTable table;
  table.entries = Eigen::MatrixXi::Zero(spec.vars, spec.qois);
  for (int q = 0; q < spec.qois; ++q) {
    for (int r = 0; r < spec.relevant; ++r) {
      const int v = (3 * q + r) % spec.vars;
      table.entries(v, q) = (v + q) % 2 == 0 ? 1 : -1;
    }
  }
  return table;
}

}  // namespace rbfgen
