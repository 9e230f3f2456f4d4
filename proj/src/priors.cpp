#include "rbfgen/priors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rbfgen/errors.hpp"
#include "rbfgen/simd.hpp"

namespace rbfgen {

namespace {

constexpr double kStdFloor = 1e-6;

[[noreturn]] void term_error(const PriorTerm& term, const std::string& what) {
  throw DomainError("prior term '" + term.id + "' (" + prior_kind_name(term.kind) +
                    "): " + what);
}

void require_count(std::span<const double> values, std::size_t n,
                   const char* what) {
  if (values.size() < n) {
    throw DomainError(std::string(what) + ": needs at least " + std::to_string(n) +
                      " values");
  }
}

}  // namespace

bool is_kl_kind(PriorKind kind) {
  switch (kind) {
    case PriorKind::KLPoint:
    case PriorKind::KLRegion:
    case PriorKind::KLExtreme:
    case PriorKind::KLGrad:
    case PriorKind::KLCurv:
    case PriorKind::KLIntegral:
      return true;
    default:
      return false;
  }
}

const char* prior_kind_name(PriorKind kind) {
  switch (kind) {
    case PriorKind::Mono: return "mono";
    case PriorKind::Pos: return "pos";
    case PriorKind::Lip: return "lip";
    case PriorKind::Curv: return "curv";
    case PriorKind::Conv: return "conv";
    case PriorKind::Bnd: return "bnd";
    case PriorKind::KLPoint: return "kl_point";
    case PriorKind::KLRegion: return "kl_region";
    case PriorKind::KLExtreme: return "kl_extreme";
    case PriorKind::KLGrad: return "kl_grad";
    case PriorKind::KLCurv: return "kl_curv";
    case PriorKind::KLIntegral: return "kl_integral";
  }
  return "?";
}

void validate_prior_term(const PriorTerm& term) {
  if (!(term.weight >= 0.0)) term_error(term, "weight must be non-negative");
  const int p = term.probe_count();
  if (p < 1) term_error(term, "needs at least one probe point");
  if (is_kl_kind(term.kind) && !(term.target_sigma > 0.0)) {
    term_error(term, "target sigma must be positive");
  }
  switch (term.kind) {
    case PriorKind::Mono:
      if (p < 2) term_error(term, "needs at least 2 grid points");
      break;
    case PriorKind::Pos:
      break;
    case PriorKind::Lip:
      if (p % 2 != 0 || p == 0) term_error(term, "needs an even number of pair rows");
      if (term.pair_dist.size() != p / 2) {
        term_error(term, "pair distances do not match pair count");
      }
      for (int i = 0; i < term.pair_dist.size(); ++i) {
        if (!(term.pair_dist[i] > 0.0)) term_error(term, "coincident pair points");
      }
      if (!(term.lipschitz > 0.0)) term_error(term, "slope limit must be positive");
      break;
    case PriorKind::Curv:
      if (p < 3) term_error(term, "needs at least 3 grid points");
      break;
    case PriorKind::Conv:
      if (p < 3) term_error(term, "needs at least 3 grid points");
      break;
    case PriorKind::Bnd:
      if (term.targets.size() != p) {
        term_error(term, "boundary targets do not match probe count");
      }
      break;
    case PriorKind::KLPoint:
      break;
    case PriorKind::KLRegion:
    case PriorKind::KLExtreme:
      break;
    case PriorKind::KLGrad:
    case PriorKind::KLCurv:
      if (p < 3) term_error(term, "needs at least 3 grid points");
      if (!(term.spacing > 0.0)) term_error(term, "needs a positive grid spacing");
      break;
    case PriorKind::KLIntegral:
      if (p < 2) term_error(term, "needs at least 2 grid points");
      if (!(term.spacing > 0.0)) term_error(term, "needs a positive grid spacing");
      break;
  }
}

double pen_mono(std::span<const double> values, MonoDirection direction) {
  require_count(values, 2, "pen_mono");
  const std::size_t gaps = values.size() - 1;
  double total = 0.0;
  for (std::size_t k = 0; k < gaps; ++k) {
    const double delta = values[k + 1] - values[k];
    const double violation =
        direction == MonoDirection::NonDecreasing ? -delta : delta;
    if (violation > 0.0) total += violation;
  }
  return total / static_cast<double>(gaps);
}

void pen_mono_grad(std::span<const double> values, MonoDirection direction,
                   double scale, double* grad) {
  require_count(values, 2, "pen_mono");
  const std::size_t gaps = values.size() - 1;
  const double unit = scale / static_cast<double>(gaps);
  for (std::size_t k = 0; k < gaps; ++k) {
    const double delta = values[k + 1] - values[k];
    if (direction == MonoDirection::NonDecreasing) {
      if (delta < 0.0) {  // violation = -delta
        grad[k] += unit;
        grad[k + 1] -= unit;
      }
    } else {
      if (delta > 0.0) {  // violation = +delta
        grad[k] -= unit;
        grad[k + 1] += unit;
      }
    }
  }
}

double pen_pos(std::span<const double> values, double m) {
  require_count(values, 1, "pen_pos");
  const double lowest = *std::min_element(values.begin(), values.end());
  return std::max(0.0, m - lowest);
}

void pen_pos_grad(std::span<const double> values, double m, double scale,
                  double* grad) {
  require_count(values, 1, "pen_pos");
  const auto it = std::min_element(values.begin(), values.end());
  if (m - *it > 0.0) {
    grad[static_cast<std::size_t>(it - values.begin())] -= scale;
  }
}

double pen_lip(std::span<const double> values, std::span<const double> pair_dist,
               double L) {
  if (values.size() != 2 * pair_dist.size() || pair_dist.empty()) {
    throw ShapeError("pen_lip: values must hold one pair per distance");
  }
  double total = 0.0;
  for (std::size_t p = 0; p < pair_dist.size(); ++p) {
    if (!(pair_dist[p] > 0.0)) throw DomainError("pen_lip: coincident pair points");
    const double slope = std::fabs(values[2 * p + 1] - values[2 * p]) / pair_dist[p];
    if (slope > L) total += slope - L;
  }
  return total;
}

void pen_lip_grad(std::span<const double> values, std::span<const double> pair_dist,
                  double L, double scale, double* grad) {
  if (values.size() != 2 * pair_dist.size() || pair_dist.empty()) {
    throw ShapeError("pen_lip: values must hold one pair per distance");
  }
  for (std::size_t p = 0; p < pair_dist.size(); ++p) {
    const double diff = values[2 * p + 1] - values[2 * p];
    const double slope = std::fabs(diff) / pair_dist[p];
    if (slope > L && diff != 0.0) {
      const double s = scale * (diff > 0.0 ? 1.0 : -1.0) / pair_dist[p];
      grad[2 * p + 1] += s;
      grad[2 * p] -= s;
    }
  }
}

double pen_curv(std::span<const double> values) {
  require_count(values, 3, "pen_curv");
  double total = 0.0;
  for (std::size_t k = 1; k + 1 < values.size(); ++k) {
    const double d2 = values[k + 1] - 2.0 * values[k] + values[k - 1];
    total += d2 * d2;
  }
  return total;
}

void pen_curv_grad(std::span<const double> values, double scale, double* grad) {
  require_count(values, 3, "pen_curv");
  for (std::size_t k = 1; k + 1 < values.size(); ++k) {
    const double d2 = values[k + 1] - 2.0 * values[k] + values[k - 1];
    const double g = 2.0 * scale * d2;
    grad[k - 1] += g;
    grad[k] -= 2.0 * g;
    grad[k + 1] += g;
  }
}

double pen_conv(std::span<const double> values, ConvMode mode) {
  require_count(values, 3, "pen_conv");
  double total = 0.0;
  for (std::size_t k = 1; k + 1 < values.size(); ++k) {
    const double d2 = values[k + 1] - 2.0 * values[k] + values[k - 1];
    const double violation = mode == ConvMode::Convex ? -d2 : d2;
    if (violation > 0.0) total += violation;
  }
  return total;
}

void pen_conv_grad(std::span<const double> values, ConvMode mode, double scale,
                   double* grad) {
  require_count(values, 3, "pen_conv");
  const double sign = mode == ConvMode::Convex ? -1.0 : 1.0;
  for (std::size_t k = 1; k + 1 < values.size(); ++k) {
    const double d2 = values[k + 1] - 2.0 * values[k] + values[k - 1];
    if (sign * d2 > 0.0) {
      grad[k - 1] += scale * sign;
      grad[k] -= 2.0 * scale * sign;
      grad[k + 1] += scale * sign;
    }
  }
}

double pen_bnd(std::span<const double> values, std::span<const double> targets) {
  if (values.size() != targets.size() || values.empty()) {
    throw ShapeError("pen_bnd: values and targets must have equal positive length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double r = values[i] - targets[i];
    total += r * r;
  }
  return total;
}

void pen_bnd_grad(std::span<const double> values, std::span<const double> targets,
                  double scale, double* grad) {
  if (values.size() != targets.size() || values.empty()) {
    throw ShapeError("pen_bnd: values and targets must have equal positive length");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    grad[i] += 2.0 * scale * (values[i] - targets[i]);
  }
}

double eval_structural(const PriorTerm& term, std::span<const double> values) {
  switch (term.kind) {
    case PriorKind::Mono: return pen_mono(values, term.direction);
    case PriorKind::Pos: return pen_pos(values, term.bound);
    case PriorKind::Lip:
      return pen_lip(values, {term.pair_dist.data(),
                              static_cast<std::size_t>(term.pair_dist.size())},
                     term.lipschitz);
    case PriorKind::Curv: return pen_curv(values);
    case PriorKind::Conv: return pen_conv(values, term.conv_mode);
    case PriorKind::Bnd:
      return pen_bnd(values, {term.targets.data(),
                              static_cast<std::size_t>(term.targets.size())});
    default:
      term_error(term, "not a structural penalty");
  }
}

void structural_grad(const PriorTerm& term, std::span<const double> values,
                     double scale, double* grad) {
  switch (term.kind) {
    case PriorKind::Mono: pen_mono_grad(values, term.direction, scale, grad); return;
    case PriorKind::Pos: pen_pos_grad(values, term.bound, scale, grad); return;
    case PriorKind::Lip:
      pen_lip_grad(values, {term.pair_dist.data(),
                            static_cast<std::size_t>(term.pair_dist.size())},
                   term.lipschitz, scale, grad);
      return;
    case PriorKind::Curv: pen_curv_grad(values, scale, grad); return;
    case PriorKind::Conv: pen_conv_grad(values, term.conv_mode, scale, grad); return;
    case PriorKind::Bnd:
      pen_bnd_grad(values, {term.targets.data(),
                            static_cast<std::size_t>(term.targets.size())},
                   scale, grad);
      return;
    default:
      term_error(term, "not a structural penalty");
  }
}

double gaussian_kl(double mu1, double sigma1, double mu2, double sigma2) {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) {
    throw DomainError("gaussian_kl: sigmas must be positive");
  }
  const double dm = mu1 - mu2;
  return std::log(sigma2 / sigma1) +
         (sigma1 * sigma1 + dm * dm) / (2.0 * sigma2 * sigma2) - 0.5;
}

double statistic_value(const PriorTerm& term, std::span<const double> values) {
  switch (term.kind) {
    case PriorKind::KLPoint:
      require_count(values, 1, "point statistic");
      return values[0];
    case PriorKind::KLRegion: {
      require_count(values, 1, "region statistic");
      return simd::sum(values.data(), values.size()) /
             static_cast<double>(values.size());
    }
    case PriorKind::KLExtreme: {
      require_count(values, 1, "extreme statistic");
      return term.extremum == ExtremeKind::Max
                 ? *std::max_element(values.begin(), values.end())
                 : *std::min_element(values.begin(), values.end());
    }
    case PriorKind::KLGrad: {
      // Mean slope magnitude from central differences over the interior.
      require_count(values, 3, "gradient statistic");
      const std::size_t interior = values.size() - 2;
      double total = 0.0;
      for (std::size_t k = 1; k + 1 < values.size(); ++k) {
        total += std::fabs(values[k + 1] - values[k - 1]) / (2.0 * term.spacing);
      }
      return total / static_cast<double>(interior);
    }
    case PriorKind::KLCurv: {
      // Mean signed second derivative from second differences.
      require_count(values, 3, "curvature statistic");
      const std::size_t interior = values.size() - 2;
      const double h2 = term.spacing * term.spacing;
      double total = 0.0;
      for (std::size_t k = 1; k + 1 < values.size(); ++k) {
        total += (values[k + 1] - 2.0 * values[k] + values[k - 1]) / h2;
      }
      return total / static_cast<double>(interior);
    }
    case PriorKind::KLIntegral: {
      require_count(values, 2, "integral statistic");
      double total = 0.5 * (values.front() + values.back());
      for (std::size_t k = 1; k + 1 < values.size(); ++k) total += values[k];
      return term.spacing * total;
    }
    default:
      term_error(term, "not a distributional statistic");
  }
}

void statistic_grad(const PriorTerm& term, std::span<const double> values,
                    double upstream, double* grad) {
  switch (term.kind) {
    case PriorKind::KLPoint:
      grad[0] += upstream;
      return;
    case PriorKind::KLRegion: {
      const double g = upstream / static_cast<double>(values.size());
      for (std::size_t i = 0; i < values.size(); ++i) grad[i] += g;
      return;
    }
    case PriorKind::KLExtreme: {
      const auto it = term.extremum == ExtremeKind::Max
                          ? std::max_element(values.begin(), values.end())
                          : std::min_element(values.begin(), values.end());
      grad[static_cast<std::size_t>(it - values.begin())] += upstream;
      return;
    }
    case PriorKind::KLGrad: {
      const std::size_t interior = values.size() - 2;
      const double unit =
          upstream / (static_cast<double>(interior) * 2.0 * term.spacing);
      for (std::size_t k = 1; k + 1 < values.size(); ++k) {
        const double diff = values[k + 1] - values[k - 1];
        if (diff == 0.0) continue;  // |.| kink: zero branch
        const double s = diff > 0.0 ? unit : -unit;
        grad[k + 1] += s;
        grad[k - 1] -= s;
      }
      return;
    }
    case PriorKind::KLCurv: {
      const std::size_t interior = values.size() - 2;
      const double unit = upstream / (static_cast<double>(interior) *
                                      term.spacing * term.spacing);
      for (std::size_t k = 1; k + 1 < values.size(); ++k) {
        grad[k - 1] += unit;
        grad[k] -= 2.0 * unit;
        grad[k + 1] += unit;
      }
      return;
    }
    case PriorKind::KLIntegral: {
      grad[0] += 0.5 * upstream * term.spacing;
      grad[values.size() - 1] += 0.5 * upstream * term.spacing;
      for (std::size_t k = 1; k + 1 < values.size(); ++k) {
        grad[k] += upstream * term.spacing;
      }
      return;
    }
    default:
      term_error(term, "not a distributional statistic");
  }
}

BatchMoments batch_moments(std::span<const double> stats) {
  if (stats.size() < 2) {
    throw DomainError("batch_moments: need at least 2 members to estimate spread");
  }
  const double m = static_cast<double>(stats.size());
  const double mean = simd::sum(stats.data(), stats.size()) / m;
  double var = 0.0;
  for (double s : stats) {
    const double d = s - mean;
    var += d * d;
  }
  var /= m;  // population variance
  BatchMoments out;
  out.mean = mean;
  out.stddev = std::sqrt(var);
  if (out.stddev < kStdFloor) {
    out.stddev = kStdFloor;
    out.floored = true;
  }
  return out;
}

double kl_statistic(const std::vector<Vec>& member_weights, const RbfSystem& system,
                    const PriorTerm& term) {
  validate_prior_term(term);
  if (!is_kl_kind(term.kind)) term_error(term, "not a distributional statistic");
  if (member_weights.size() < 2) {
    throw DomainError("kl_statistic: need at least 2 batch members");
  }
  const int p = term.probe_count();
  std::vector<double> values(static_cast<std::size_t>(p));
  std::vector<double> stats;
  stats.reserve(member_weights.size());
  for (const Vec& w : member_weights) {
    for (int r = 0; r < p; ++r) {
      values[static_cast<std::size_t>(r)] =
          evaluate_surrogate(system, w, term.points.row(r).transpose());
    }
    stats.push_back(statistic_value(term, values));
  }
  const BatchMoments bm = batch_moments(stats);
  return gaussian_kl(bm.mean, bm.stddev, term.target_mu, term.target_sigma);
}

double total_loss(const std::vector<TermValue>& terms) {
  double total = 0.0;
  for (const TermValue& tv : terms) {
    if (!std::isfinite(tv.value)) {
      throw NumericalError("total_loss: term '" + tv.term->id +
                           "' produced a non-finite value");
    }
    total += tv.term->weight * tv.value;
  }
  return total;
}

}  // namespace rbfgen
