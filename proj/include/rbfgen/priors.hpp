#pragma once

#include <span>
#include <string>
#include <vector>

#include "rbfgen/linalg.hpp"
#include "rbfgen/rbf_system.hpp"

namespace rbfgen {

// Expert-knowledge terms. Structural penalties measure constraint
// violations on probe values; KL kinds compare the distribution of a
// functional statistic across an ensemble against a Gaussian target.
enum class PriorKind {
  Mono,
  Pos,
  Lip,
  Curv,
  Conv,
  Bnd,
  KLPoint,
  KLRegion,
  KLExtreme,
  KLGrad,
  KLCurv,
  KLIntegral,
};

enum class MonoDirection { NonDecreasing, NonIncreasing };
enum class ConvMode { Convex, Concave };
enum class ExtremeKind { Max, Min };

bool is_kl_kind(PriorKind kind);
const char* prior_kind_name(PriorKind kind);

// One term of the composite loss. `points` are probe locations in original
// coordinates; 1-D slice grids vary a single coordinate with equal spacing
// and keep the others frozen. Lipschitz terms store pairs as consecutive
// rows (2p, 2p+1) with the pair distances precomputed.
struct PriorTerm {
  std::string id;
  PriorKind kind = PriorKind::Mono;
  double weight = 1.0;
  Mat points;
  double spacing = 0.0;  // grid step, needed by KLGrad/KLCurv/KLIntegral

  MonoDirection direction = MonoDirection::NonDecreasing;
  ConvMode conv_mode = ConvMode::Convex;
  ExtremeKind extremum = ExtremeKind::Max;
  double bound = 0.0;      // Pos: require f >= bound
  double lipschitz = 0.0;  // Lip: slope limit L
  Vec pair_dist;           // Lip: ||x - y|| per pair
  Vec targets;             // Bnd: known boundary values
  double target_mu = 0.0;  // KL kinds: target Gaussian
  double target_sigma = 1.0;

  int probe_count() const { return static_cast<int>(points.rows()); }
};

// Checks weight/targets/point-count requirements for the term's kind.
void validate_prior_term(const PriorTerm& term);

// ---- structural penalties on plain value arrays ----
// Each *_grad accumulates scale * d(pen)/d(values) into grad; ReLU kinks
// take the zero branch.

// Mean violation of the requested trend over consecutive differences.
double pen_mono(std::span<const double> values, MonoDirection direction);
void pen_mono_grad(std::span<const double> values, MonoDirection direction,
                   double scale, double* grad);

// How far the minimum dips below the bound m.
double pen_pos(std::span<const double> values, double m);
void pen_pos_grad(std::span<const double> values, double m, double scale,
                  double* grad);

// Sum of slope excesses over L; values hold pairs (f(x_p), f(y_p)).
double pen_lip(std::span<const double> values, std::span<const double> pair_dist,
               double L);
void pen_lip_grad(std::span<const double> values, std::span<const double> pair_dist,
                  double L, double scale, double* grad);

// Sum of squared second differences over interior points.
double pen_curv(std::span<const double> values);
void pen_curv_grad(std::span<const double> values, double scale, double* grad);

// Sum of second-difference violations of convexity (or concavity).
double pen_conv(std::span<const double> values, ConvMode mode);
void pen_conv_grad(std::span<const double> values, ConvMode mode, double scale,
                   double* grad);

// Sum of squared deviations from known boundary values.
double pen_bnd(std::span<const double> values, std::span<const double> targets);
void pen_bnd_grad(std::span<const double> values, std::span<const double> targets,
                  double scale, double* grad);

// Structural dispatch for a term given its probe values.
double eval_structural(const PriorTerm& term, std::span<const double> values);
void structural_grad(const PriorTerm& term, std::span<const double> values,
                     double scale, double* grad);

// ---- distributional terms ----

// KL(N(mu1, sigma1^2) || N(mu2, sigma2^2)).
double gaussian_kl(double mu1, double sigma1, double mu2, double sigma2);

// Scalar statistic of one member's probe values (Point/Region/Extreme/
// Grad/Curv/Integral kinds). Differentiable via statistic_grad, which
// accumulates upstream * d(stat)/d(values).
double statistic_value(const PriorTerm& term, std::span<const double> values);
void statistic_grad(const PriorTerm& term, std::span<const double> values,
                    double upstream, double* grad);

struct BatchMoments {
  double mean = 0.0;
  double stddev = 0.0;
  bool floored = false;  // std was clamped to the 1e-6 floor
};

// Mean and population std of the member statistics, std floored at 1e-6.
BatchMoments batch_moments(std::span<const double> stats);

// Full distributional term: evaluate each member on the term's probe grid,
// reduce to the statistic, and compare batch moments with the target.
// Requires M >= 2 members.
double kl_statistic(const std::vector<Vec>& member_weights, const RbfSystem& system,
                    const PriorTerm& term);

// ---- composite loss ----

struct TermValue {
  const PriorTerm* term;
  double value;  // penalty or KL before weighting
};

// Sum of weight * value; throws NumericalError naming the offending term
// when a value is non-finite.
double total_loss(const std::vector<TermValue>& terms);

}  // namespace rbfgen
