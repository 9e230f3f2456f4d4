#pragma once

#include <cstdint>

#include "rbfgen/centers.hpp"
#include "rbfgen/dataset.hpp"
#include "rbfgen/kernel.hpp"

namespace rbfgen {

// Kernel matrix Phi with Phi(i, k) = phi(||points_i - centers_k||).
// Both inputs must already live in the same (normalized) coordinates.
MatRM assemble_phi(const MatRM& points, const MatRM& centers,
                   const KernelSpec& kernel);

// Minimum-norm solution of the (possibly underdetermined) system
// Phi w = y, computed from the SVD. Singular values below
// 1e-12 * sigma_max raise RankDeficiencyError (message reports the ratio).
Vec min_norm_solution(const MatRM& phi, const Vec& y);

// Orthonormal basis of the null space of Phi as columns of a K x (K - N)
// matrix (trailing right singular vectors). Columns are sign-normalized so
// the first entry with magnitude above 1e-12 is positive, making the basis
// reproducible across runs. Empty (K x 0) when Phi has full column rank.
MatRM null_basis(const MatRM& phi);

// Overcomplete interpolation system built from a dataset: every weight
// vector w0 + N * alpha interpolates the data exactly.
struct RbfSystem {
  KernelSpec kernel;
  Box bounds;        // normalization map for incoming points
  MatRM centers;     // K x d, normalized coordinates
  MatRM phi;         // N x K kernel matrix at the training points
  Vec w0;            // minimum-norm particular solution, length K
  MatRM nullspace;   // K x (K - N) orthonormal null-space basis

  int data_count() const { return static_cast<int>(phi.rows()); }
  int center_count() const { return static_cast<int>(centers.rows()); }
  int null_dim() const { return static_cast<int>(nullspace.cols()); }

  // Kernel feature row phi(x) for a point in original coordinates;
  // out must hold center_count() doubles.
  void features(const Vec& x, double* out) const;
};

// Surrogate value phi(x)^T w at a point in original coordinates.
double evaluate_surrogate(const RbfSystem& system, const Vec& w, const Vec& x);

// Build the system with explicit centers given in normalized coordinates.
// Requires K >= N; verifies the interpolation residual
// ||Phi w0 - y||_inf <= 1e-8 * max(1, ||y||_inf) and throws NumericalError
// if violated.
RbfSystem build_system(const Dataset& data, const KernelSpec& kernel,
                       Mat centers_normalized);

// Overcomplete system with K placed centers (K > N recommended).
RbfSystem build_relaxed_system(const Dataset& data, const KernelSpec& kernel,
                               int center_count, CenterStrategy strategy,
                               std::uint64_t seed);

// Classical square interpolant: centers at the data points (K = N).
RbfSystem build_square_system(const Dataset& data, const KernelSpec& kernel);

}  // namespace rbfgen
