#include "rbfgen/training.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "rbfgen/errors.hpp"
#include "rbfgen/rng.hpp"
#include "rbfgen/simd.hpp"

namespace rbfgen {

namespace {

// Stream tags for the counter-based latent draws.
constexpr std::uint64_t kStreamTrain = 1;
constexpr std::uint64_t kStreamEnsemble = 2;
constexpr std::uint64_t kStreamRandomAlpha = 3;

Vec latent_draw(int dim, std::uint64_t seed, std::uint64_t stream,
                std::uint64_t counter) {
  Vec z(dim);
  for (int j = 0; j < dim; ++j) {
    z[j] = counter_normal(seed, stream, counter, static_cast<std::uint64_t>(j));
  }
  return z;
}

// Preassembled probe features plus scratch buffers for one training run.
struct TrainContext {
  const RbfSystem* system = nullptr;
  const std::vector<PriorTerm>* priors = nullptr;
  Standardizer ystd;
  int batch = 0;

  MatRM phi_probe;                // P x K, rows grouped by term
  std::vector<int> term_offset;   // row offset of each term's block
  Mat weights;                    // K x M, one member per column
  MatRM values;                   // M x P, original-unit probe values
  MatRM value_grad;               // M x P, d(loss)/d(values)
  std::vector<ForwardCache> caches;
  std::vector<Vec> alphas;
  std::vector<double> member_scratch;  // per-member penalty/statistic values
  Vec dw;
  Vec dalpha;

  TrainContext(const RbfSystem& sys, const std::vector<PriorTerm>& terms,
               const Standardizer& std_map, int batch_size)
      : system(&sys), priors(&terms), ystd(std_map), batch(batch_size) {
    if (terms.empty()) {
      throw DomainError("training: prior list must be non-empty");
    }
    if (sys.null_dim() < 1) {
      throw DomainError("training: system has no null space to shape");
    }
    int total = 0;
    term_offset.reserve(terms.size());
    for (const PriorTerm& term : terms) {
      validate_prior_term(term);
      if (term.points.cols() != sys.centers.cols()) {
        throw ShapeError("training: prior term '" + term.id +
                         "' probe dimension does not match the system");
      }
      term_offset.push_back(total);
      total += term.probe_count();
    }
    const int k = sys.center_count();
    phi_probe = MatRM(total, k);
    int row = 0;
    for (const PriorTerm& term : terms) {
      for (int r = 0; r < term.probe_count(); ++r) {
        sys.features(term.points.row(r).transpose(), phi_probe.row(row).data());
        ++row;
      }
    }
    weights = Mat(k, batch);
    values = MatRM(batch, total);
    value_grad = MatRM(batch, total);
    caches.resize(static_cast<std::size_t>(batch));
    alphas.resize(static_cast<std::size_t>(batch));
    member_scratch.resize(static_cast<std::size_t>(batch));
    dw = Vec(k);
    dalpha = Vec(sys.null_dim());
  }

  int probe_rows() const { return static_cast<int>(phi_probe.rows()); }

  // Composite loss for the latent batch at counters [base, base + M).
  // Optionally accumulates the parameter gradient and per-term weighted
  // contributions (term_values must hold priors->size() slots).
  double evaluate(const GeneratorNet& net, std::uint64_t seed,
                  std::uint64_t counter_base, GeneratorGrad* grad_out,
                  std::vector<double>* term_values) {
    const int k = system->center_count();
    const int nd = system->null_dim();
    const int p = probe_rows();
    const std::size_t kk = static_cast<std::size_t>(k);

    // Forward: latents -> alpha -> member weights -> probe values.
    for (int m = 0; m < batch; ++m) {
      const std::size_t mi = static_cast<std::size_t>(m);
      const Vec z = latent_draw(net.latent_dim, seed, kStreamTrain,
                                counter_base + static_cast<std::uint64_t>(m));
      alphas[mi] = generator_forward(net, z, grad_out ? &caches[mi] : nullptr);
      double* col = weights.col(m).data();
      const double* alpha = alphas[mi].data();
      for (int r = 0; r < k; ++r) {
        col[r] = system->w0[r] +
                 simd::dot(system->nullspace.row(r).data(), alpha,
                           static_cast<std::size_t>(nd));
      }
    }
    for (int m = 0; m < batch; ++m) {
      const double* col = weights.col(m).data();
      double* row = values.row(m).data();
      for (int r = 0; r < p; ++r) {
        row[r] = simd::dot(phi_probe.row(r).data(), col, kk);
      }
      // Terms see original response units.
      simd::affine(row, row, static_cast<std::size_t>(p), ystd.stddev, ystd.mean);
    }

    if (grad_out != nullptr) value_grad.setZero();

    // Terms: batch-mean penalties plus moment-matched KL statistics.
    double total = 0.0;
    const double inv_m = 1.0 / static_cast<double>(batch);
    for (std::size_t t = 0; t < priors->size(); ++t) {
      const PriorTerm& term = (*priors)[t];
      const int off = term_offset[t];
      const std::size_t len = static_cast<std::size_t>(term.probe_count());
      double value;
      if (is_kl_kind(term.kind)) {
        if (batch < 2) {
          throw DomainError("training: KL term '" + term.id +
                            "' needs a batch of at least 2");
        }
        for (int m = 0; m < batch; ++m) {
          member_scratch[static_cast<std::size_t>(m)] = statistic_value(
              term, {values.row(m).data() + off, len});
        }
        const BatchMoments bm = batch_moments(
            {member_scratch.data(), static_cast<std::size_t>(batch)});
        if (!std::isfinite(bm.mean) || !std::isfinite(bm.stddev)) {
          throw NumericalError("training: term '" + term.id +
                               "' produced a non-finite value");
        }
        value = gaussian_kl(bm.mean, bm.stddev, term.target_mu, term.target_sigma);
        if (grad_out != nullptr) {
          const double t_var = term.target_sigma * term.target_sigma;
          const double d_mean = (bm.mean - term.target_mu) / t_var;
          // Flooring freezes the stddev, so its branch contributes nothing.
          const double d_std =
              bm.floored ? 0.0 : -1.0 / bm.stddev + bm.stddev / t_var;
          for (int m = 0; m < batch; ++m) {
            const std::size_t mi = static_cast<std::size_t>(m);
            double upstream = term.weight * d_mean * inv_m;
            if (!bm.floored) {
              upstream += term.weight * d_std *
                          (member_scratch[mi] - bm.mean) /
                          (static_cast<double>(batch) * bm.stddev);
            }
            statistic_grad(term, {values.row(m).data() + off, len}, upstream,
                           value_grad.row(m).data() + off);
          }
        }
      } else {
        double acc = 0.0;
        for (int m = 0; m < batch; ++m) {
          acc += eval_structural(term, {values.row(m).data() + off, len});
        }
        value = acc * inv_m;
        if (grad_out != nullptr) {
          for (int m = 0; m < batch; ++m) {
            structural_grad(term, {values.row(m).data() + off, len},
                            term.weight * inv_m, value_grad.row(m).data() + off);
          }
        }
      }
      if (!std::isfinite(value)) {
        throw NumericalError("training: term '" + term.id +
                             "' produced a non-finite value");
      }
      if (term_values != nullptr) (*term_values)[t] = term.weight * value;
      total += term.weight * value;
    }
    if (!std::isfinite(total)) {
      throw NumericalError("training: total loss is non-finite");
    }

    if (grad_out != nullptr) {
      // Chain back: values -> weights -> alpha -> parameters. The
      // standardization map contributes a factor of stddev.
      for (int m = 0; m < batch; ++m) {
        const std::size_t mi = static_cast<std::size_t>(m);
        dw.setZero();
        const double* grow = value_grad.row(m).data();
        for (int r = 0; r < p; ++r) {
          const double g = grow[r] * ystd.stddev;
          if (g != 0.0) simd::axpy(g, phi_probe.row(r).data(), dw.data(), kk);
        }
        dalpha.setZero();
        for (int r = 0; r < k; ++r) {
          if (dw[r] != 0.0) {
            simd::axpy(dw[r], system->nullspace.row(r).data(), dalpha.data(),
                       static_cast<std::size_t>(nd));
          }
        }
        generator_backward(net, caches[mi], dalpha, *grad_out);
      }
    }
    return total;
  }
};

// Flat elementwise Adam over all layers.
struct AdamState {
  GeneratorGrad m;
  GeneratorGrad v;
  int step = 0;

  explicit AdamState(const GeneratorNet& net)
      : m(GeneratorGrad::zeros_like(net)), v(GeneratorGrad::zeros_like(net)) {}

  void update(GeneratorNet& net, const GeneratorGrad& grad,
              const TrainConfig& cfg) {
    ++step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, step);
    const double bc2 = 1.0 - std::pow(cfg.beta2, step);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      auto apply = [&](double* theta, double* ms, double* vs, const double* g,
                       std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
          ms[i] = cfg.beta1 * ms[i] + (1.0 - cfg.beta1) * g[i];
          vs[i] = cfg.beta2 * vs[i] + (1.0 - cfg.beta2) * g[i] * g[i];
          const double mhat = ms[i] / bc1;
          const double vhat = vs[i] / bc2;
          theta[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + 1e-8);
        }
      };
      apply(net.layers[l].W.data(), m.layers[l].W.data(), v.layers[l].W.data(),
            grad.layers[l].W.data(), static_cast<std::size_t>(net.layers[l].W.size()));
      apply(net.layers[l].b.data(), m.layers[l].b.data(), v.layers[l].b.data(),
            grad.layers[l].b.data(), static_cast<std::size_t>(net.layers[l].b.size()));
    }
  }
};

}  // namespace

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.iterations < 1) throw DomainError("train config: iterations must be >= 1");
  if (cfg.batch_size < 2) throw DomainError("train config: batch size must be >= 2");
  if (!(cfg.learning_rate > 0.0)) {
    throw DomainError("train config: learning rate must be positive");
  }
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw DomainError("train config: Adam betas must lie in [0, 1)");
  }
  if (!(cfg.alpha_scale > 0.0)) {
    throw DomainError("train config: alpha scale must be positive");
  }
  if (cfg.loss_log_every < 1) {
    throw DomainError("train config: loss log interval must be >= 1");
  }
}

Standardizer fit_standardizer(const Vec& y) {
  if (y.size() == 0) throw DomainError("standardizer: empty response vector");
  Standardizer s;
  s.mean = y.mean();
  const double var = (y.array() - s.mean).square().sum() / y.size();
  const double sd = std::sqrt(var);
  s.stddev = sd > 1e-12 ? sd : 1.0;
  return s;
}

double training_loss(const RbfSystem& system, const GeneratorNet& net,
                     const std::vector<PriorTerm>& priors,
                     const Standardizer& ystd, int batch_size,
                     std::uint64_t seed, std::uint64_t counter_base,
                     GeneratorGrad* grad_out) {
  if (net.out_dim != system.null_dim()) {
    throw ShapeError("training: generator output does not match null dimension");
  }
  TrainContext ctx(system, priors, ystd, batch_size);
  return ctx.evaluate(net, seed, counter_base, grad_out, nullptr);
}

TrainResult train_rbfgen(const RbfSystem& system, GeneratorNet net,
                         const std::vector<PriorTerm>& priors,
                         const TrainConfig& cfg, const Standardizer& ystd) {
  validate_train_config(cfg);
  if (net.out_dim != system.null_dim()) {
    throw ShapeError("training: generator output does not match null dimension");
  }

  TrainContext ctx(system, priors, ystd, cfg.batch_size);
  AdamState adam(net);
  GeneratorGrad grad = GeneratorGrad::zeros_like(net);

  TrainResult result;
  result.loss_history.reserve(static_cast<std::size_t>(cfg.iterations));
  result.term_ids.reserve(priors.size());
  for (const PriorTerm& term : priors) result.term_ids.push_back(term.id);
  std::vector<double> term_values(priors.size(), 0.0);

  for (int it = 0; it < cfg.iterations; ++it) {
    grad.set_zero();
    double total;
    try {
      total = ctx.evaluate(net, cfg.seed,
                           static_cast<std::uint64_t>(it) *
                               static_cast<std::uint64_t>(cfg.batch_size),
                           &grad, &term_values);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (iteration " +
                           std::to_string(it) + ")");
    }
    result.loss_history.push_back(total);
    if (it % cfg.loss_log_every == 0 || it == cfg.iterations - 1) {
      result.logged_iterations.push_back(it);
      std::vector<double> row;
      row.reserve(1 + term_values.size());
      row.push_back(total);
      row.insert(row.end(), term_values.begin(), term_values.end());
      result.logged_rows.push_back(std::move(row));
    }
    adam.update(net, grad, cfg);
  }

  result.net = std::move(net);
  return result;
}

std::vector<Vec> sample_ensemble(const RbfSystem& system, const GeneratorNet& net,
                                 int count, std::uint64_t seed) {
  if (count < 0) throw DomainError("sample_ensemble: count must be non-negative");
  if (net.out_dim != system.null_dim()) {
    throw ShapeError("sample_ensemble: generator output does not match null dimension");
  }
  std::vector<Vec> members;
  members.reserve(static_cast<std::size_t>(count));
  for (int m = 0; m < count; ++m) {
    const Vec z = latent_draw(net.latent_dim, seed, kStreamEnsemble,
                              static_cast<std::uint64_t>(m));
    const Vec alpha = generator_forward(net, z);
    members.push_back(system.w0 + system.nullspace * alpha);
  }
  return members;
}

std::vector<Vec> sample_random_alpha_ensemble(const RbfSystem& system,
                                              double alpha_scale, int count,
                                              std::uint64_t seed) {
  if (count < 0) throw DomainError("ensemble: count must be non-negative");
  std::vector<Vec> members;
  members.reserve(static_cast<std::size_t>(count));
  for (int m = 0; m < count; ++m) {
    const Vec z = latent_draw(system.null_dim(), seed, kStreamRandomAlpha,
                              static_cast<std::uint64_t>(m));
    members.push_back(system.w0 + system.nullspace * (alpha_scale * z));
  }
  return members;
}

Prediction predict_with_ci(const SurrogateEnsemble& ensemble, const Vec& x,
                           double level) {
  if (ensemble.members.empty()) {
    throw DomainError("predict: ensemble has no members");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("predict: level must lie in (0, 1)");
  }
  const int k = ensemble.system.center_count();
  std::vector<double> feat(static_cast<std::size_t>(k));
  ensemble.system.features(x, feat.data());

  std::vector<double> vals;
  vals.reserve(ensemble.members.size());
  double mean = 0.0;
  for (const Vec& w : ensemble.members) {
    const double v = ensemble.ystd.to_original(
        simd::dot(feat.data(), w.data(), static_cast<std::size_t>(k)));
    vals.push_back(v);
    mean += v;
  }
  mean /= static_cast<double>(vals.size());

  std::sort(vals.begin(), vals.end());
  const auto quantile = [&](double p) {
    const double h = p * static_cast<double>(vals.size() - 1);
    const std::size_t i = static_cast<std::size_t>(h);
    if (i + 1 >= vals.size()) return vals.back();
    const double frac = h - static_cast<double>(i);
    return vals[i] + frac * (vals[i + 1] - vals[i]);
  };

  Prediction out;
  out.mean = mean;
  out.lo = quantile((1.0 - level) / 2.0);
  out.hi = quantile(1.0 - (1.0 - level) / 2.0);
  return out;
}

double predict_mean(const SurrogateEnsemble& ensemble, const Vec& x) {
  if (ensemble.members.empty()) {
    throw DomainError("predict: ensemble has no members");
  }
  const int k = ensemble.system.center_count();
  std::vector<double> feat(static_cast<std::size_t>(k));
  ensemble.system.features(x, feat.data());
  double mean = 0.0;
  for (const Vec& w : ensemble.members) {
    mean += simd::dot(feat.data(), w.data(), static_cast<std::size_t>(k));
  }
  return ensemble.ystd.to_original(mean / static_cast<double>(ensemble.members.size()));
}

SurrogateEnsemble fit_rbfgen(const Dataset& data,
                             const std::vector<PriorTerm>& priors,
                             const FitConfig& cfg, TrainResult* train_log) {
  validate_train_config(cfg.train);
  if (cfg.center_count <= data.count()) {
    throw DomainError("fit: center count must exceed the data count");
  }
  if (cfg.ensemble_size < 1) {
    throw DomainError("fit: ensemble size must be positive");
  }

  const Standardizer ystd = fit_standardizer(data.y);
  Dataset std_data;
  std_data.X = data.X;
  std_data.bounds = data.bounds;
  std_data.y = (data.y.array() - ystd.mean) / ystd.stddev;

  RbfSystem system = build_relaxed_system(std_data, cfg.kernel, cfg.center_count,
                                          cfg.strategy, cfg.center_seed);
  const int latent =
      cfg.latent_dim > 0 ? cfg.latent_dim : std::min(8, system.null_dim());
  GeneratorNet net =
      init_generator(latent, system.null_dim(), cfg.hidden, cfg.activation,
                     cfg.train.alpha_scale, cfg.train.seed);

  TrainResult trained = train_rbfgen(system, std::move(net), priors, cfg.train, ystd);
  if (train_log) {
    train_log->loss_history = trained.loss_history;
    train_log->term_ids = trained.term_ids;
    train_log->logged_iterations = trained.logged_iterations;
    train_log->logged_rows = trained.logged_rows;
  }

  SurrogateEnsemble out;
  out.members = sample_ensemble(system, trained.net, cfg.ensemble_size,
                                cfg.train.seed);
  out.system = std::move(system);
  out.ystd = ystd;
  out.net = std::move(trained.net);
  out.loss_history = std::move(trained.loss_history);
  return out;
}

const char* method_name(SurrogateMethod m) {
  return m == SurrogateMethod::BaselineRbf ? "baseline_rbf" : "rbfgen";
}

}  // namespace rbfgen
