#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rbfgen/priors.hpp"
#include "rbfgen/training.hpp"

namespace rbfgen {

// Cantilever sizing benchmark: D per-element heights, clamped at the root,
// point load at the free tip. The objective is compliance f^T d (lower is
// stiffer) subject to a material volume cap.
struct BeamProblem {
  int elements = 10;     // design dimension: one height per element
  double length = 1.0;
  double width = 1.0;
  double modulus = 1.0;  // Young's modulus
  double tip_load = 1.0;
  double volume_cap = 0.2;
  Box bounds;        // feasible height range per element
  Box train_region;  // neighborhood the training data is sampled from
};

// Nondimensional defaults: unit length, width, modulus, and load; heights
// in [0.05, 0.5]; training data from [0.05, 0.1]; volume capped at 0.2.
BeamProblem make_beam_problem(int elements);

// Throws DomainError on nonpositive sizes or constants, a train region
// that leaves the bounds, or a volume cap that excludes the whole box.
void validate_beam_problem(const BeamProblem& problem);

// Tip compliance of the Euler-Bernoulli cantilever: assembles two-node
// Hermite beam elements with per-element inertia b*h_i^3/12, clamps the
// root node, applies the tip point load, and returns f^T d. Nodally exact
// for point loads, so a uniform beam reproduces P^2 L^3/(3EI) closed form.
// Throws ShapeError on a wrong-length h, DomainError on h_i <= 0, and
// NumericalError if the stiffness factorization fails.
double beam_compliance(const BeamProblem& problem, const Vec& h);

// Material volume width * (length/D) * sum(h).
double beam_volume(const BeamProblem& problem, const Vec& h);

// Seeded Latin-hypercube heights in the train region with compliance
// responses; the dataset carries the full design bounds.
Dataset sample_training_data(const BeamProblem& problem, int count,
                             std::uint64_t seed);

// Knob block for the three beam priors. Weights default to 1; callers
// working in raw compliance units typically divide the structural weights
// by std(y) so the penalties stay O(1) against the KL terms.
struct BeamPriorConfig {
  double perturb = 0.30;  // slice target sigma as a fraction of |mu|
  int mono_grid = 9;      // probe points per monotonicity slice
  int kl_grid = 5;        // target points per slice
  int pos_probes = 64;    // random positivity probes over the full box
  std::uint64_t pos_seed = 0;
  double mono_weight = 1.0;
  double pos_weight = 1.0;
  double kl_weight = 1.0;
};

// Expert knowledge for the beam, as prior terms over the full design box:
//  (a) per-dimension monotonicity (compliance never rises with thickness),
//      probed along each axis with the other heights frozen at the
//      train-region midpoint;
//  (b) positivity (compliance > 0) at seeded random probes;
//  (c) per-dimension slice targets: at grid points along each axis, a
//      Gaussian with mean = true-model value and sigma = perturb * |mean|.
// `fem` is the truth oracle used for the slice targets.
std::vector<PriorTerm> build_beam_priors(
    const BeamProblem& problem, const std::function<double(const Vec&)>& fem,
    const BeamPriorConfig& cfg = {});

struct OptimizeConfig {
  int starts = 8;  // multi-start count; the train-region midpoint is always one
  std::uint64_t seed = 0;
  int max_iters = 300;
  double initial_step = 0.05;  // normalized coordinates
  double min_step = 1e-6;
  double fd_step = 1e-4;  // central-difference stencil, normalized coordinates
};

struct OptimizeResult {
  Vec h_star;          // feasible design, original units
  double predicted = 0.0;  // surrogate objective at h_star
};

// Multi-start projected gradient descent on a surrogate objective defined
// over original-unit designs. Gradients come from central differences in
// normalized coordinates; every iterate is projected onto the box
// intersected with the volume half-space (clamp composed with a dual
// bisection, feasible to 1e-10). Steps are accepted only when the
// objective decreases, so each start descends monotonically.
OptimizeResult optimize_on_surrogate(
    const std::function<double(const Vec&)>& objective,
    const BeamProblem& problem, const OptimizeConfig& cfg = {});

// Euclidean projection of a normalized design onto {box} ∩ {volume <= cap};
// exposed for testing. Input and output are unit-cube coordinates.
Vec project_feasible(const BeamProblem& problem, const Vec& u);

// Percentage reduction of the true objective: 100 * (c0 - c1)/c0.
// Negative when the "optimized" design is worse than the start.
// Throws DomainError when c_initial <= 0.
double measured_improvement(double c_initial, double c_final);

struct BeamStudyConfig {
  std::vector<int> dims = {2, 5, 10};
  int ratio = 1;  // N = ratio * D training samples
  int seeds = 5;
  std::vector<SurrogateMethod> methods = {SurrogateMethod::BaselineRbf,
                                          SurrogateMethod::RbfGen};
  std::uint64_t seed_base = 0;
  bool deterministic = false;  // zero the wall-time column for stable output
  int jobs = 1;                // worker threads over independent study cells
  BeamPriorConfig priors;
  FitConfig fit;  // center_count 0 = max(3D, N+1)
  OptimizeConfig optimize;
};

struct BeamStudyRow {
  int dims = 0;
  int ratio = 0;
  std::string method;
  std::uint64_t seed = 0;
  double c_initial = 0.0;
  double c_final_true = 0.0;
  double improvement_pct = 0.0;
  double wall_time_s = 0.0;
};

// One row per (D, method, seed): sample scarce data, fit the surrogate
// (baseline = square RBF on the data points; the generator pipeline adds
// the beam priors), optimize on it, and re-evaluate the winner with the
// true model from the common initial design (uniform train-region
// midpoint).
std::vector<BeamStudyRow> run_beam_study(const BeamStudyConfig& cfg);

// Median improvement over seeds for one (D, method) cell of the study.
double median_improvement(const std::vector<BeamStudyRow>& rows, int dims,
                          SurrogateMethod method);

}  // namespace rbfgen
