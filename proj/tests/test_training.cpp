#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "rbfgen/errors.hpp"
#include "rbfgen/rng.hpp"
#include "rbfgen/training.hpp"

using namespace rbfgen;

namespace {

Dataset demo_dataset() {
  Mat X(4, 1);
  X << 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0;
  Vec y(4);
  y << 1.0, 89.0 / 9.0, 209.0 / 9.0, 41.0;
  return make_dataset(X, y, Box::unit(1));
}

Mat slice_grid_1d(int count, double lo = 0.0, double hi = 1.0) {
  Mat g(count, 1);
  for (int i = 0; i < count; ++i) {
    g(i, 0) = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  }
  return g;
}

PriorTerm mono_term_1d(int count, double weight) {
  PriorTerm t;
  t.id = "mono_x0";
  t.kind = PriorKind::Mono;
  t.weight = weight;
  t.points = slice_grid_1d(count);
  t.direction = MonoDirection::NonDecreasing;
  return t;
}

double member_mono_pen(const RbfSystem& sys, const Vec& w, int grid = 64) {
  const Mat g = slice_grid_1d(grid);
  std::vector<double> vals(static_cast<std::size_t>(grid));
  for (int i = 0; i < grid; ++i) {
    vals[static_cast<std::size_t>(i)] =
        evaluate_surrogate(sys, w, g.row(i).transpose());
  }
  return pen_mono(vals, MonoDirection::NonDecreasing);
}

void randomize_all_layers(GeneratorNet& net, Rng& rng) {
  for (auto& layer : net.layers) {
    for (int i = 0; i < layer.W.size(); ++i) layer.W.data()[i] = rng.uniform(-0.6, 0.6);
    for (int i = 0; i < layer.b.size(); ++i) layer.b[i] = rng.uniform(-0.2, 0.2);
  }
}

}  // namespace

TEST_CASE("end-to-end loss gradient matches finite differences") {
  // Tiny instance: d=1, N=2, K=4, generator 2 -> 4 -> 2.
  Mat X(2, 1);
  X << 0.25, 0.75;
  Vec y(2);
  y << 0.5, -1.0;
  Dataset ds = make_dataset(X, y, Box::unit(1));
  RbfSystem sys = build_relaxed_system(ds, KernelSpec{KernelKind::Gaussian, 1.0}, 4,
                                       CenterStrategy::UniformGrid, 0);
  REQUIRE(sys.null_dim() == 2);

  GeneratorNet net = init_generator(2, 2, {4}, Activation::Tanh, 1.2, 3);
  Rng rng(17);
  randomize_all_layers(net, rng);

  // One term of every gradient flavor: trend, pointwise, smoothness,
  // boundary, plus mean/std-coupled statistics.
  std::vector<PriorTerm> priors;
  priors.push_back(mono_term_1d(6, 0.7));
  {
    PriorTerm t;
    t.id = "bnd";
    t.kind = PriorKind::Bnd;
    t.weight = 0.4;
    t.points = Mat(1, 1);
    t.points << 0.5;
    t.targets = Vec::Constant(1, 0.3);
    priors.push_back(t);
  }
  {
    PriorTerm t;
    t.id = "curv";
    t.kind = PriorKind::Curv;
    t.weight = 0.25;
    t.points = slice_grid_1d(5);
    priors.push_back(t);
  }
  {
    PriorTerm t;
    t.id = "kl_point";
    t.kind = PriorKind::KLPoint;
    t.weight = 0.6;
    t.points = Mat(1, 1);
    t.points << 0.4;
    t.target_mu = 0.2;
    t.target_sigma = 0.8;
    priors.push_back(t);
  }
  {
    PriorTerm t;
    t.id = "kl_curv";
    t.kind = PriorKind::KLCurv;
    t.weight = 0.3;
    t.points = slice_grid_1d(5);
    t.spacing = 0.25;
    t.target_mu = 1.0;
    t.target_sigma = 2.0;
    priors.push_back(t);
  }

  // Non-identity response map to exercise the de-standardization chain.
  Standardizer ystd;
  ystd.mean = 3.0;
  ystd.stddev = 2.0;

  const int batch = 4;
  GeneratorGrad grad = GeneratorGrad::zeros_like(net);
  training_loss(sys, net, priors, ystd, batch, 11, 0, &grad);

  const double h = 1e-5;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto check = [&](double* p, double analytic) {
      const double saved = *p;
      *p = saved + h;
      const double up = training_loss(sys, net, priors, ystd, batch, 11, 0, nullptr);
      *p = saved - h;
      const double down = training_loss(sys, net, priors, ystd, batch, 11, 0, nullptr);
      *p = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double scale = std::max({std::fabs(numeric), std::fabs(analytic), 1e-4});
      CHECK(std::fabs(numeric - analytic) / scale < 1e-3);
    };
    for (int i = 0; i < net.layers[l].W.size(); ++i) {
      check(net.layers[l].W.data() + i, grad.layers[l].W.data()[i]);
    }
    for (int i = 0; i < net.layers[l].b.size(); ++i) {
      check(net.layers[l].b.data() + i, grad.layers[l].b[i]);
    }
  }
}

TEST_CASE("zero prior weights leave parameters untouched") {
  Dataset ds = demo_dataset();
  RbfSystem sys = build_relaxed_system(ds, KernelSpec{KernelKind::Gaussian, 1.0},
                                       12, CenterStrategy::UniformGrid, 0);
  GeneratorNet net = init_generator(4, sys.null_dim(), {8}, Activation::Tanh, 1.0, 5);
  Rng rng(6);
  randomize_all_layers(net, rng);
  const GeneratorNet before = net;

  PriorTerm t = mono_term_1d(8, 0.0);
  TrainConfig cfg;
  cfg.iterations = 20;
  cfg.batch_size = 4;

  TrainResult result = train_rbfgen(sys, std::move(net), {t}, cfg);
  for (double loss : result.loss_history) CHECK(loss == 0.0);
  for (std::size_t l = 0; l < before.layers.size(); ++l) {
    CHECK(result.net.layers[l].W == before.layers[l].W);
    CHECK(result.net.layers[l].b == before.layers[l].b);
  }
}

TEST_CASE("training is deterministic for a fixed seed") {
  Dataset ds = demo_dataset();
  // Narrow kernels so the null space carries visible function variation and
  // the monotonicity loss is nonzero (with wide kernels the minimum-norm fit
  // is already monotone and every seed would flatline at zero).
  RbfSystem sys = build_relaxed_system(ds, KernelSpec{KernelKind::Gaussian, 6.0},
                                       12, CenterStrategy::UniformGrid, 0);
  TrainConfig cfg;
  cfg.iterations = 40;
  cfg.batch_size = 8;
  cfg.seed = 21;

  auto run = [&]() {
    GeneratorNet net =
        init_generator(4, sys.null_dim(), {16}, Activation::Tanh, 1.0, cfg.seed);
    return train_rbfgen(sys, std::move(net), {mono_term_1d(16, 5.0)}, cfg,
                        fit_standardizer(ds.y));
  };
  TrainResult a = run();
  TrainResult b = run();
  CHECK(a.loss_history == b.loss_history);

  TrainConfig other = cfg;
  other.seed = 22;
  GeneratorNet net =
      init_generator(4, sys.null_dim(), {16}, Activation::Tanh, 1.0, other.seed);
  TrainResult c = train_rbfgen(sys, std::move(net), {mono_term_1d(16, 5.0)}, other,
                               fit_standardizer(ds.y));
  CHECK(a.loss_history != c.loss_history);
}

TEST_CASE("monotonicity prior pulls the ensemble toward the trend") {
  Dataset ds = demo_dataset();
  const Standardizer ystd = fit_standardizer(ds.y);
  Dataset std_ds;
  std_ds.X = ds.X;
  std_ds.bounds = ds.bounds;
  std_ds.y = (ds.y.array() - ystd.mean) / ystd.stddev;
  // Kernel width comparable to the center spacing: the random ensemble then
  // wiggles enough between data points that most members break the trend.
  RbfSystem sys = build_relaxed_system(std_ds, KernelSpec{KernelKind::Gaussian, 6.0},
                                       12, CenterStrategy::UniformGrid, 0);

  // Reference: the relaxed-interpolation ensemble before any training.
  const auto untrained = sample_random_alpha_ensemble(sys, 1.0, 32, 77);
  int violations_before = 0;
  for (const Vec& w : untrained) {
    if (member_mono_pen(sys, w) > 1e-6) ++violations_before;
  }
  CHECK(violations_before > 0);

  PriorTerm mono = mono_term_1d(32, 20.0 / ystd.stddev);
  TrainConfig cfg;
  cfg.iterations = 400;
  cfg.batch_size = 16;
  cfg.seed = 77;
  GeneratorNet net =
      init_generator(4, sys.null_dim(), {32}, Activation::Tanh, 1.0, cfg.seed);
  TrainResult trained = train_rbfgen(sys, std::move(net), {mono}, cfg, ystd);

  const auto after = sample_ensemble(sys, trained.net, 32, 77);
  int violations_after = 0;
  for (const Vec& w : after) {
    if (member_mono_pen(sys, w) > 1e-6) ++violations_after;
  }
  // Directional claim: training reduces the violating fraction.
  CHECK(violations_after < violations_before);

  // Loss trend smoke check: trailing window no worse than the opening one.
  const auto& hist = trained.loss_history;
  const double head =
      std::accumulate(hist.begin(), hist.begin() + 50, 0.0) / 50.0;
  const double tail = std::accumulate(hist.end() - 50, hist.end(), 0.0) / 50.0;
  CHECK(tail <= head);
}

TEST_CASE("interpolation survives training for every sampled member") {
  Dataset ds = demo_dataset();
  std::vector<PriorTerm> priors = {mono_term_1d(16, 10.0)};
  FitConfig cfg;
  cfg.kernel = {KernelKind::Gaussian, 1.0};
  cfg.center_count = 12;
  cfg.strategy = CenterStrategy::UniformGrid;
  cfg.hidden = {16};
  cfg.ensemble_size = 24;
  cfg.train.iterations = 150;
  cfg.train.batch_size = 8;
  cfg.train.seed = 4;

  SurrogateEnsemble model = fit_rbfgen(ds, priors, cfg);
  REQUIRE(model.members.size() == 24);
  for (int i = 0; i < ds.count(); ++i) {
    const Vec x = ds.X.row(i).transpose();
    const double tol = 1e-8 * std::max(1.0, std::fabs(ds.y[i]));
    const Prediction p = predict_with_ci(model, x, 0.95);
    CHECK(std::fabs(p.mean - ds.y[i]) <= tol);
    CHECK(std::fabs(p.lo - ds.y[i]) <= tol);
    CHECK(std::fabs(p.hi - ds.y[i]) <= tol);
  }
}

TEST_CASE("ensemble sampling is seeded and prefix-stable") {
  Dataset ds = demo_dataset();
  RbfSystem sys = build_relaxed_system(ds, KernelSpec{KernelKind::Gaussian, 6.0},
                                       12, CenterStrategy::UniformGrid, 0);
  GeneratorNet net = init_generator(4, sys.null_dim(), {8}, Activation::Tanh, 1.0, 1);
  Rng rng(2);
  randomize_all_layers(net, rng);

  CHECK(sample_ensemble(sys, net, 0, 9).empty());
  const auto a = sample_ensemble(sys, net, 5, 9);
  const auto b = sample_ensemble(sys, net, 5, 9);
  const auto c = sample_ensemble(sys, net, 3, 9);
  for (int m = 0; m < 5; ++m) CHECK(a[m] == b[m]);
  for (int m = 0; m < 3; ++m) CHECK(a[m] == c[m]);

  // Random-alpha members spread away from the data but still interpolate.
  const auto random_members = sample_random_alpha_ensemble(sys, 1.0, 8, 5);
  const Vec probe = Vec::Constant(1, 0.5);
  std::vector<double> at_probe;
  for (const Vec& w : random_members) {
    at_probe.push_back(evaluate_surrogate(sys, w, probe));
    for (int i = 0; i < ds.count(); ++i) {
      const double v = evaluate_surrogate(sys, w, ds.X.row(i).transpose());
      CHECK(std::fabs(v - ds.y[i]) <= 1e-8 * std::max(1.0, std::fabs(ds.y[i])));
    }
  }
  const auto [lo_it, hi_it] = std::minmax_element(at_probe.begin(), at_probe.end());
  CHECK(*hi_it - *lo_it > 0.1);
}

TEST_CASE("prediction quantiles match a sort-based oracle") {
  // Hand-built degenerate system: single center on top of x, so the
  // surrogate value at x equals the member weight itself.
  SurrogateEnsemble e;
  e.system.kernel = {KernelKind::Gaussian, 1.0};
  e.system.bounds = Box::unit(1);
  e.system.centers = MatRM(1, 1);
  e.system.centers << 0.5;
  e.system.phi = MatRM::Ones(1, 1);
  e.system.w0 = Vec::Ones(1);
  e.system.nullspace = MatRM(1, 0);

  Rng rng(31);
  std::vector<double> raw(100);
  for (int i = 0; i < 100; ++i) raw[static_cast<std::size_t>(i)] = i + 1.0;
  for (int i = 99; i > 0; --i) {
    std::swap(raw[static_cast<std::size_t>(i)],
              raw[rng.uniform_index(static_cast<std::uint64_t>(i + 1))]);
  }
  for (double v : raw) e.members.push_back(Vec::Constant(1, v));

  const Vec x = Vec::Constant(1, 0.5);
  const Prediction p = predict_with_ci(e, x, 0.95);

  // Independent oracle: sort and interpolate order statistics directly.
  std::vector<double> sorted = raw;
  std::sort(sorted.begin(), sorted.end());
  auto oracle = [&](double q) {
    const double pos = q * (sorted.size() - 1.0);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return i + 1 < sorted.size() ? sorted[i] + frac * (sorted[i + 1] - sorted[i])
                                 : sorted.back();
  };
  CHECK(p.mean == doctest::Approx(50.5).epsilon(1e-12));
  CHECK(p.lo == doctest::Approx(oracle(0.025)).epsilon(1e-12));
  CHECK(p.hi == doctest::Approx(oracle(0.975)).epsilon(1e-12));
  CHECK(p.lo == doctest::Approx(3.475).epsilon(1e-12));
  CHECK(p.hi == doctest::Approx(97.525).epsilon(1e-12));

  // Degenerate cases and argument validation.
  SurrogateEnsemble single = e;
  single.members = {Vec::Constant(1, 7.0)};
  const Prediction ps = predict_with_ci(single, x, 0.95);
  CHECK(ps.mean == doctest::Approx(7.0));
  CHECK(ps.lo == ps.mean);
  CHECK(ps.hi == ps.mean);

  SurrogateEnsemble empty = e;
  empty.members.clear();
  CHECK_THROWS_AS(predict_with_ci(empty, x, 0.95), DomainError);
  CHECK_THROWS_AS(predict_with_ci(e, x, 0.0), DomainError);
  CHECK_THROWS_AS(predict_with_ci(e, x, 1.0), DomainError);
}

TEST_CASE("training rejects bad configurations and poisoned nets") {
  Dataset ds = demo_dataset();
  RbfSystem sys = build_relaxed_system(ds, KernelSpec{KernelKind::Gaussian, 1.0},
                                       12, CenterStrategy::UniformGrid, 0);
  GeneratorNet net = init_generator(4, sys.null_dim(), {8}, Activation::Tanh, 1.0, 1);

  TrainConfig cfg;
  cfg.iterations = 5;
  cfg.batch_size = 4;

  CHECK_THROWS_AS(train_rbfgen(sys, net, {}, cfg), DomainError);

  TrainConfig bad = cfg;
  bad.batch_size = 1;
  CHECK_THROWS_AS(train_rbfgen(sys, net, {mono_term_1d(8, 1.0)}, bad), DomainError);
  bad = cfg;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(train_rbfgen(sys, net, {mono_term_1d(8, 1.0)}, bad), DomainError);

  GeneratorNet mismatched =
      init_generator(4, sys.null_dim() + 1, {8}, Activation::Tanh, 1.0, 1);
  CHECK_THROWS_AS(train_rbfgen(sys, mismatched, {mono_term_1d(8, 1.0)}, cfg),
                  ShapeError);

  // A non-finite parameter must abort with the term and iteration named.
  GeneratorNet poisoned = net;
  poisoned.layers.back().W(0, 0) = std::nan("");
  PriorTerm curv;
  curv.id = "curv_probe";
  curv.kind = PriorKind::Curv;
  curv.weight = 1.0;
  curv.points = slice_grid_1d(5);
  CHECK_THROWS_WITH_AS(train_rbfgen(sys, poisoned, {curv}, cfg),
                       doctest::Contains("iteration 0"), NumericalError);
}

TEST_CASE("standardizer normalizes and survives constant responses") {
  Vec y(4);
  y << 2.0, 4.0, 6.0, 8.0;
  const Standardizer s = fit_standardizer(y);
  CHECK(s.mean == doctest::Approx(5.0));
  CHECK(s.stddev == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
  CHECK(s.to_original(s.to_standard(3.3)) == doctest::Approx(3.3).epsilon(1e-12));

  const Standardizer flat = fit_standardizer(Vec::Constant(3, 7.0));
  CHECK(flat.mean == doctest::Approx(7.0));
  CHECK(flat.stddev == 1.0);
}
