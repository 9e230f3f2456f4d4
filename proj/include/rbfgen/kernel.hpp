#pragma once

#include <cstddef>

namespace rbfgen {

enum class KernelKind { Gaussian, ThinPlate };

// Radial kernel phi(r) acting on distances between normalized coordinates.
//   Gaussian:  phi(r) = exp(-(epsilon * r)^2)
//   ThinPlate: phi(r) = r^2 * log(r), with phi(0) = 0
// epsilon only applies to the Gaussian kernel and must be positive.
struct KernelSpec {
  KernelKind kind = KernelKind::Gaussian;
  double epsilon = 1.0;
};

// Throws DomainError for r < 0 or a non-positive Gaussian epsilon.
double kernel_eval(const KernelSpec& spec, double r);

// Batched form on squared distances: out[i] = phi(sqrt(r2[i])).
// The Gaussian path runs through the SIMD exp kernel.
void kernel_eval_sq(const KernelSpec& spec, const double* r2, double* out,
                    std::size_t n);

}  // namespace rbfgen
