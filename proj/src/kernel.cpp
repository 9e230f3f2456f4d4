#include "rbfgen/kernel.hpp"

#include <cmath>

#include "rbfgen/errors.hpp"
#include "rbfgen/simd.hpp"

namespace rbfgen {

namespace {

void check_spec(const KernelSpec& spec) {
  if (spec.kind == KernelKind::Gaussian && !(spec.epsilon > 0.0)) {
    throw DomainError("kernel: Gaussian epsilon must be positive");
  }
}

}  // namespace

double kernel_eval(const KernelSpec& spec, double r) {
  check_spec(spec);
  if (r < 0.0) {
    throw DomainError("kernel: radius must be non-negative");
  }
  switch (spec.kind) {
    case KernelKind::Gaussian: {
      const double er = spec.epsilon * r;
      return std::exp(-er * er);
    }
    case KernelKind::ThinPlate:
      return r > 0.0 ? r * r * std::log(r) : 0.0;
  }
  return 0.0;  // unreachable
}

void kernel_eval_sq(const KernelSpec& spec, const double* r2, double* out,
                    std::size_t n) {
  check_spec(spec);
  switch (spec.kind) {
    case KernelKind::Gaussian:
      // exp(-(eps*r)^2) = exp(-eps^2 * r2)
      simd::exp_neg_scale(r2, out, n, spec.epsilon * spec.epsilon);
      return;
    case KernelKind::ThinPlate:
      // r^2 log r = 0.5 * r2 * log(r2); log has no SIMD kernel here and the
      // thin-plate path is not on the hot loop, so keep it scalar.
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = r2[i] > 0.0 ? 0.5 * r2[i] * std::log(r2[i]) : 0.0;
      }
      return;
  }
}

}  // namespace rbfgen
