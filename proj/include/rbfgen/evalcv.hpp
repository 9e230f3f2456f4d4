#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rbfgen/training.hpp"

namespace rbfgen {

// Expert trend table: one row per input variable, one column per quantity
// of interest; +1 = the QoI increases with the variable, -1 = decreases,
// 0 = no known trend.
struct MonotonicityTable {
  Eigen::MatrixXi entries;

  int var_count() const { return static_cast<int>(entries.rows()); }
  int qoi_count() const { return static_cast<int>(entries.cols()); }
};

// Entries outside {-1, 0, +1} or a shape mismatch throw DomainError.
void validate_mono_table(const MonotonicityTable& table, int num_vars,
                         int num_qois);

// Multi-response dataset: shared inputs, one response column per QoI.
struct MultiDataset {
  Mat X;
  Mat Y;  // count x qoi_count
  Box bounds;
  std::vector<std::string> var_names;
  std::vector<std::string> qoi_names;

  int count() const { return static_cast<int>(X.rows()); }
  int dim() const { return static_cast<int>(X.cols()); }
  int qoi_count() const { return static_cast<int>(Y.cols()); }
};

void validate_multi_dataset(const MultiDataset& data);

// All unordered index pairs (i, j), i < j, in lexicographic order: the
// fold list for leave-two-out cross-validation. Throws DomainError for
// n < 3 (each fold must keep a nonempty training slice).
std::vector<std::pair<int, int>> l2o_folds(int n);

// Prediction-error summary. ARE averages |yhat - y| / |y| over the
// entries with |y| >= 1e-12 (near-zero truths are excluded rather than
// divided by; ARE is 0 when every entry is excluded). AAE averages
// |yhat - y| over all entries. Throws DomainError on an empty list.
struct Metrics {
  double are = 0.0;
  double aae = 0.0;
};
Metrics compute_metrics(const std::vector<std::pair<double, double>>& pred_true);

// Supervised linear reduction fit by NIPALS on one response: columns of X
// are standardized, y is centered, and each component takes the
// covariance-maximizing direction before deflating X and y.
struct PlsModel {
  Vec x_mean;
  Vec x_scale;
  double y_mean = 0.0;
  Mat weights;   // d x ncomp, unit-norm columns (deflated-space directions)
  Mat loadings;  // d x ncomp
  Mat rotation;  // d x ncomp; standardized X * rotation = scores

  int dim() const { return static_cast<int>(weights.rows()); }
  int components() const { return static_cast<int>(weights.cols()); }
};

// Throws DomainError when ncomp < 1 or exceeds the rank of the
// standardized inputs, and NumericalError when the response carries no
// covariance with the remaining input directions.
PlsModel pls_fit(const Mat& X, const Vec& y, int ncomp);

// Project rows of X into the reduced space (n x ncomp scores).
Mat pls_transform(const PlsModel& model, const Mat& X);

struct CrossValConfig {
  SurrogateMethod method = SurrogateMethod::BaselineRbf;
  int ncomp = 5;
  FitConfig fit;          // generator pipeline; kernel shared with baseline
  double mono_weight = 5.0;  // divided by std(y) of each training slice
  int mono_grid = 9;
  std::uint64_t seed = 0;
  int jobs = 1;  // worker threads over independent folds
};

// Expert trends as reduced-space prior terms: each nonzero sign becomes
// one monotonicity term whose probe grid varies that original variable
// over its data range (other variables at the data medians) and is mapped
// through the reduction, preserving the expert's original-variable
// meaning. Variables that never move in the data are skipped.
std::vector<PriorTerm> mono_terms_from_signs(const Mat& X,
                                             const std::vector<int>& signs,
                                             const PlsModel& pls, int grid,
                                             double weight);

// One fold of leave-two-out for a single QoI: fit the reduction and the
// surrogate on everything except the held-out pair, return predictions
// for (fold.first, fold.second). mono_signs has one {-1, 0, +1} entry per
// original variable.
std::pair<double, double> l2o_predict(const Mat& X, const Vec& y,
                                      const std::vector<int>& mono_signs,
                                      const CrossValConfig& cfg,
                                      std::pair<int, int> fold);

struct QoiResult {
  std::string qoi;
  double are = 0.0;
  double aae = 0.0;
  // Fold-ordered (yhat, ytrue) pairs, two per fold, for independent
  // recomputation of the metrics.
  std::vector<std::pair<double, double>> predictions;
};

struct CrossValReport {
  std::vector<QoiResult> per_qoi;
  double overall_are = 0.0;  // mean of the per-QoI AREs
  double overall_aae = 0.0;
  int fold_count = 0;
  int prediction_count = 0;  // per QoI: 2 * fold_count
};

// Full leave-two-out sweep: every fold of every QoI, with the reduction
// refit inside each fold (the held-out pair never leaks into it).
CrossValReport run_l2o(const MultiDataset& data, const MonotonicityTable& table,
                       const CrossValConfig& cfg);

// Seeded synthetic stand-in for the confidential process dataset: d input
// variables in the unit box, each QoI a smooth response that is strictly
// monotone in `relevant` of them (signs alternating by variable and QoI)
// plus Gaussian noise scaled to the signal spread.
struct SyntheticSpec {
  int count = 20;
  int vars = 17;
  int qois = 5;
  int relevant = 5;
  double noise = 0.05;  // standard deviation as a fraction of signal std
  std::uint64_t seed = 0;
};

MultiDataset make_synthetic_dataset(const SyntheticSpec& spec);

// The true trend signs of the synthetic responses: the expert table an
// oracle would write down for them.
MonotonicityTable synthetic_mono_table(const SyntheticSpec& spec);

}  // namespace rbfgen
