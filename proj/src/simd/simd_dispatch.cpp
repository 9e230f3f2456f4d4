#include "rbfgen/simd.hpp"

#include <stdexcept>

namespace rbfgen::simd {

namespace {

constexpr Ops kScalarOps{scalar::dot,     scalar::axpy,          scalar::sum,
                         scalar::sq_dist, scalar::exp_neg_scale, scalar::affine};

#if defined(RBFGEN_SIMD_HAS_AVX2_BUILD)
constexpr Ops kAvx2Ops{avx2::dot,     avx2::axpy,          avx2::sum,
                       avx2::sq_dist, avx2::exp_neg_scale, avx2::affine};

bool cpu_has_avx2() { return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"); }
#endif

Level detect() {
#if defined(RBFGEN_SIMD_HAS_AVX2_BUILD)
  if (cpu_has_avx2()) return Level::Avx2;
#endif
  return Level::Scalar;
}

Level& current() {
  static Level level = detect();
  return level;
}

}  // namespace

const char* level_name(Level level) {
  switch (level) {
    case Level::Scalar: return "scalar";
    case Level::Avx2: return "avx2";
  }
  return "unknown";
}

bool level_available(Level level) {
  if (level == Level::Scalar) return true;
#if defined(RBFGEN_SIMD_HAS_AVX2_BUILD)
  if (level == Level::Avx2) return cpu_has_avx2();
#endif
  return false;
}

Level active_level() { return current(); }

const Ops& ops_for(Level level) {
  if (level == Level::Scalar) return kScalarOps;
#if defined(RBFGEN_SIMD_HAS_AVX2_BUILD)
  if (level == Level::Avx2 && cpu_has_avx2()) return kAvx2Ops;
#endif
  throw std::invalid_argument("simd level not available on this CPU");
}

const Ops& ops() { return ops_for(current()); }

void force_level(Level level) {
  if (!level_available(level)) throw std::invalid_argument("simd level not available on this CPU");
  current() = level;
}

}  // namespace rbfgen::simd
