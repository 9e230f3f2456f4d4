#pragma once

#include <cstddef>

// Data-parallel kernels behind the hot loops: RBF matrix assembly, probe-grid
// batch evaluation, and generator matrix-vector work. A scalar reference
// implementation always exists; an AVX2 variant is selected at runtime when
// the CPU supports it. Both variants are exported so tests can compare them
// directly.
namespace rbfgen::simd {

enum class Level { Scalar, Avx2 };

struct Ops {
  // sum_i a[i]*b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // sum_i a[i]
  double (*sum)(const double* a, std::size_t n);
  // sum_i (a[i]-b[i])^2
  double (*sq_dist)(const double* a, const double* b, std::size_t n);
  // out[i] = exp(-c * r2[i]); values below DBL_MIN may flush to 0
  void (*exp_neg_scale)(const double* r2, double* out, std::size_t n, double c);
  // out[i] = a * x[i] + b
  void (*affine)(const double* x, double* out, std::size_t n, double a, double b);
};

const char* level_name(Level level);
bool level_available(Level level);
Level active_level();
const Ops& ops();
const Ops& ops_for(Level level);  // throws std::invalid_argument if unavailable
void force_level(Level level);    // testing hook; throws if unavailable

inline double dot(const double* a, const double* b, std::size_t n) { return ops().dot(a, b, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { ops().axpy(alpha, x, y, n); }
inline double sum(const double* a, std::size_t n) { return ops().sum(a, n); }
inline double sq_dist(const double* a, const double* b, std::size_t n) { return ops().sq_dist(a, b, n); }
inline void exp_neg_scale(const double* r2, double* out, std::size_t n, double c) {
  ops().exp_neg_scale(r2, out, n, c);
}
inline void affine(const double* x, double* out, std::size_t n, double a, double b) {
  ops().affine(x, out, n, a, b);
}

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* a, std::size_t n);
double sq_dist(const double* a, const double* b, std::size_t n);
void exp_neg_scale(const double* r2, double* out, std::size_t n, double c);
void affine(const double* x, double* out, std::size_t n, double a, double b);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define RBFGEN_SIMD_HAS_AVX2_BUILD 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* a, std::size_t n);
double sq_dist(const double* a, const double* b, std::size_t n);
void exp_neg_scale(const double* r2, double* out, std::size_t n, double c);
void affine(const double* x, double* out, std::size_t n, double a, double b);
}  // namespace avx2
#endif

}  // namespace rbfgen::simd
