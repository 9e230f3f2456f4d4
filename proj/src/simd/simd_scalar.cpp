#include "rbfgen/simd.hpp"

#include <cmath>

// Reference kernels. Plain sequential loops; the AVX2 variants are tested
// against these.
namespace rbfgen::simd::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

double sq_dist(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void exp_neg_scale(const double* r2, double* out, std::size_t n, double c) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(-c * r2[i]);
}

void affine(const double* x, double* out, std::size_t n, double a, double b) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b;
}

}  // namespace rbfgen::simd::scalar
