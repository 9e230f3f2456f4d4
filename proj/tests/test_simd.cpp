#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstddef>
#include <vector>

#include "doctest.h"
#include "rbfgen/rng.hpp"
#include "rbfgen/simd.hpp"

using rbfgen::simd::Level;
using rbfgen::simd::Ops;

namespace {

// Sizes straddling the 8-wide and 4-wide AVX2 blocks plus scalar tails.
const std::vector<std::size_t> kSizes = {0, 1, 2, 3, 4, 5, 7, 8,  9,  15, 16,
                                         17, 23, 24, 31, 32, 33, 63, 64, 67};

std::vector<double> random_vec(std::size_t n, rbfgen::Rng& rng, double lo = -3.0,
                               double hi = 3.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

bool close_rel(double a, double b, double rel, double abs_floor = 1e-300) {
  const double diff = std::fabs(a - b);
  return diff <= rel * std::max({std::fabs(a), std::fabs(b), abs_floor / rel});
}

}  // namespace

TEST_CASE("scalar kernels match straightforward math") {
  const double a[4] = {1.0, 2.0, 3.0, 4.0};
  const double b[4] = {0.5, -1.0, 2.0, 0.0};
  CHECK(rbfgen::simd::scalar::dot(a, b, 4) == doctest::Approx(4.5));
  CHECK(rbfgen::simd::scalar::sum(a, 4) == doctest::Approx(10.0));
  CHECK(rbfgen::simd::scalar::sq_dist(a, b, 4) ==
        doctest::Approx(0.25 + 9.0 + 1.0 + 16.0));

  double y[4] = {1.0, 1.0, 1.0, 1.0};
  rbfgen::simd::scalar::axpy(2.0, a, y, 4);
  CHECK(y[0] == doctest::Approx(3.0));
  CHECK(y[3] == doctest::Approx(9.0));

  double out[4];
  rbfgen::simd::scalar::affine(a, out, 4, 2.0, -1.0);
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[3] == doctest::Approx(7.0));

  const double r2[3] = {0.0, 0.25, 4.0};
  rbfgen::simd::scalar::exp_neg_scale(r2, out, 3, 4.0);
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[1] == doctest::Approx(std::exp(-1.0)));
  CHECK(out[2] == doctest::Approx(std::exp(-16.0)));
}

TEST_CASE("dispatch reports a usable level") {
  CHECK(rbfgen::simd::level_available(Level::Scalar));
  const Level active = rbfgen::simd::active_level();
  CHECK(rbfgen::simd::level_available(active));
  CHECK(rbfgen::simd::level_name(active) != nullptr);

  rbfgen::simd::force_level(Level::Scalar);
  const double a[2] = {1.0, 2.0};
  CHECK(rbfgen::simd::dot(a, a, 2) == doctest::Approx(5.0));
  rbfgen::simd::force_level(active);
}

#if defined(RBFGEN_SIMD_HAS_AVX2_BUILD)
TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!rbfgen::simd::level_available(Level::Avx2)) {
    MESSAGE("AVX2 unavailable on this CPU, skipping equivalence checks");
    return;
  }
  const Ops& sc = rbfgen::simd::ops_for(Level::Scalar);
  const Ops& av = rbfgen::simd::ops_for(Level::Avx2);
  rbfgen::Rng rng(20240817);

  for (std::size_t n : kSizes) {
    CAPTURE(n);
    const auto a = random_vec(n, rng);
    const auto b = random_vec(n, rng);

    CHECK(close_rel(sc.dot(a.data(), b.data(), n), av.dot(a.data(), b.data(), n),
                    1e-12));
    CHECK(close_rel(sc.sum(a.data(), n), av.sum(a.data(), n), 1e-12));
    CHECK(close_rel(sc.sq_dist(a.data(), b.data(), n),
                    av.sq_dist(a.data(), b.data(), n), 1e-12));

    auto y1 = b, y2 = b;
    sc.axpy(1.7, a.data(), y1.data(), n);
    av.axpy(1.7, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]));

    std::vector<double> o1(n), o2(n);
    sc.affine(a.data(), o1.data(), n, -2.5, 0.75);
    av.affine(a.data(), o2.data(), n, -2.5, 0.75);
    // FMA keeps one extra rounding's worth of precision over mul+add.
    for (std::size_t i = 0; i < n; ++i)
      CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-14));
  }
}

TEST_CASE("avx2 exp_neg_scale matches std::exp across magnitudes") {
  if (!rbfgen::simd::level_available(Level::Avx2)) return;
  const Ops& av = rbfgen::simd::ops_for(Level::Avx2);
  rbfgen::Rng rng(7);

  for (std::size_t n : kSizes) {
    CAPTURE(n);
    auto r2 = random_vec(n, rng, 0.0, 50.0);
    if (n > 3) {
      r2[0] = 0.0;
      r2[1] = 1e-14;   // near-one output
      r2[2] = 200.0;   // deep underflow region for large c
      r2[3] = 700.0;
    }
    std::vector<double> out(n);
    for (double c : {1e-3, 0.5, 1.0, 4.0, 25.0}) {
      av.exp_neg_scale(r2.data(), out.data(), n, c);
      for (std::size_t i = 0; i < n; ++i) {
        const double ref = std::exp(-c * r2[i]);
        if (ref >= 1e-290) {
          CHECK(close_rel(out[i], ref, 5e-15));
        } else {
          CHECK(std::fabs(out[i] - ref) <= 1e-290);
        }
      }
    }
  }
}
#endif
