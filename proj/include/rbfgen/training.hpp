#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rbfgen/generator.hpp"
#include "rbfgen/priors.hpp"
#include "rbfgen/rbf_system.hpp"

namespace rbfgen {

// Adam hyperparameters and loop controls for generator training.
struct TrainConfig {
  int iterations = 2000;
  int batch_size = 64;  // latent batch M; KL terms need at least 2
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::uint64_t seed = 0;
  double alpha_scale = 1.0;  // applied when the fit pipeline builds the net
  int loss_log_every = 10;
};

void validate_train_config(const TrainConfig& cfg);

// Affine response map y_std = (y - mean) / stddev.
struct Standardizer {
  double mean = 0.0;
  double stddev = 1.0;

  double to_original(double v) const { return mean + stddev * v; }
  double to_standard(double y) const { return (y - mean) / stddev; }
};

// Near-constant responses keep stddev = 1 to avoid blowing up.
Standardizer fit_standardizer(const Vec& y);

struct TrainResult {
  GeneratorNet net;
  std::vector<double> loss_history;  // total loss per iteration

  // Sparse log for the loss CSV: weighted per-term contributions, so the
  // term columns sum to the total.
  std::vector<std::string> term_ids;
  std::vector<int> logged_iterations;
  std::vector<std::vector<double>> logged_rows;  // total, then per-term
};

// One evaluation of the composite loss at fixed parameters: M members with
// counter-based latents (seed, counter_base + m), probe values mapped back
// to original units through ystd before the terms see them. When grad_out
// is non-null the parameter gradient is accumulated into it.
double training_loss(const RbfSystem& system, const GeneratorNet& net,
                     const std::vector<PriorTerm>& priors,
                     const Standardizer& ystd, int batch_size,
                     std::uint64_t seed, std::uint64_t counter_base,
                     GeneratorGrad* grad_out);

// Algorithm: per iteration, sample a fresh latent batch, push the ensemble
// through every prior term, and take one Adam step on the generator.
// Aborts with NumericalError (naming term and iteration) on non-finite loss.
TrainResult train_rbfgen(const RbfSystem& system, GeneratorNet net,
                         const std::vector<PriorTerm>& priors,
                         const TrainConfig& cfg,
                         const Standardizer& ystd = Standardizer{});

// Deterministic ensemble from a trained generator: w_m = w0 + N G(z_m).
std::vector<Vec> sample_ensemble(const RbfSystem& system, const GeneratorNet& net,
                                 int count, std::uint64_t seed);

// Untrained reference ensemble: w = w0 + N (alpha_scale * z), no generator.
std::vector<Vec> sample_random_alpha_ensemble(const RbfSystem& system,
                                              double alpha_scale, int count,
                                              std::uint64_t seed);

// Trained model bundle: the system, the response map, and cached members
// (weights in standardized units; predictions are de-standardized).
struct SurrogateEnsemble {
  RbfSystem system;
  Standardizer ystd;
  GeneratorNet net;
  std::vector<Vec> members;
  std::vector<double> loss_history;
};

struct Prediction {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Ensemble mean plus empirical quantiles at (1 +/- level)/2 with linear
// interpolation between order statistics. level must lie in (0, 1).
Prediction predict_with_ci(const SurrogateEnsemble& ensemble, const Vec& x,
                           double level);
double predict_mean(const SurrogateEnsemble& ensemble, const Vec& x);

struct FitConfig {
  KernelSpec kernel;
  int center_count = 0;  // required: K > N for a usable null space
  CenterStrategy strategy = CenterStrategy::Halton;
  std::uint64_t center_seed = 0;
  std::vector<int> hidden = {64, 64};
  Activation activation = Activation::Tanh;
  int latent_dim = 0;  // 0 = min(8, null dimension)
  int ensemble_size = 64;
  TrainConfig train;
};

// Full pipeline: standardize responses, build the overcomplete system,
// train the generator against the priors, cache the ensemble. When
// train_log is non-null it receives the loss history and the sparse
// per-term log (net excluded) for loss-curve reporting.
SurrogateEnsemble fit_rbfgen(const Dataset& data,
                             const std::vector<PriorTerm>& priors,
                             const FitConfig& cfg,
                             TrainResult* train_log = nullptr);

// Which surrogate a benchmark fits: the plain square RBF interpolant with
// centers at the data points, or the generator-ensemble pipeline.
enum class SurrogateMethod { BaselineRbf, RbfGen };

const char* method_name(SurrogateMethod m);

}  // namespace rbfgen
