#include "rbfgen/rbf_system.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "rbfgen/errors.hpp"
#include "rbfgen/simd.hpp"

namespace rbfgen {

namespace {

constexpr double kRankTol = 1e-12;

std::string format_ratio(double ratio) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", ratio);
  return buf;
}

}  // namespace

MatRM assemble_phi(const MatRM& points, const MatRM& centers,
                   const KernelSpec& kernel) {
  if (points.cols() != centers.cols()) {
    throw ShapeError("assemble_phi: points and centers dimension mismatch");
  }
  const int n = static_cast<int>(points.rows());
  const int k = static_cast<int>(centers.rows());
  const int d = static_cast<int>(points.cols());
  MatRM phi(n, k);
  std::vector<double> r2(static_cast<std::size_t>(k));
  for (int i = 0; i < n; ++i) {
    const double* pi = points.row(i).data();
    for (int c = 0; c < k; ++c) {
      r2[static_cast<std::size_t>(c)] =
          simd::sq_dist(pi, centers.row(c).data(), static_cast<std::size_t>(d));
    }
    kernel_eval_sq(kernel, r2.data(), phi.row(i).data(),
                   static_cast<std::size_t>(k));
  }
  return phi;
}

Vec min_norm_solution(const MatRM& phi, const Vec& y) {
  if (phi.rows() != y.size()) {
    throw ShapeError("min_norm_solution: Phi row count does not match y");
  }
  Eigen::JacobiSVD<Mat> svd(phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  const double smin = sv.size() > 0 ? sv[sv.size() - 1] : 0.0;
  if (smax <= 0.0 || smin < kRankTol * smax) {
    const double ratio = smax > 0.0 ? smin / smax : 0.0;
    throw RankDeficiencyError(
        "min_norm_solution: interpolation matrix is rank-deficient "
        "(sigma_min/sigma_max = " + format_ratio(ratio) + ")");
  }
  // With all singular values above the cutoff the pseudo-inverse solve
  // yields the minimum-norm solution of the underdetermined system.
  Vec coeff = svd.matrixU().transpose() * y;
  coeff.array() /= sv.array();
  return svd.matrixV() * coeff;
}

MatRM null_basis(const MatRM& phi) {
  const int n = static_cast<int>(phi.rows());
  const int k = static_cast<int>(phi.cols());
  if (k <= n) return MatRM(k, 0);

  Eigen::JacobiSVD<Mat> svd(phi, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  const double smin = sv.size() > 0 ? sv[sv.size() - 1] : 0.0;
  if (smax <= 0.0 || smin < kRankTol * smax) {
    const double ratio = smax > 0.0 ? smin / smax : 0.0;
    throw RankDeficiencyError(
        "null_basis: interpolation matrix is rank-deficient "
        "(sigma_min/sigma_max = " + format_ratio(ratio) + ")");
  }

  // Trailing right singular vectors span the null space exactly when Phi
  // has full row rank (checked above).
  MatRM basis = svd.matrixV().rightCols(k - n);
  for (int c = 0; c < basis.cols(); ++c) {
    for (int r = 0; r < basis.rows(); ++r) {
      const double v = basis(r, c);
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) basis.col(c) = -basis.col(c);
        break;
      }
    }
  }
  return basis;
}

void RbfSystem::features(const Vec& x, double* out) const {
  const Vec xn = normalize_point(bounds, x);
  const int k = center_count();
  const int d = static_cast<int>(centers.cols());
  std::vector<double> r2(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    r2[static_cast<std::size_t>(c)] =
        simd::sq_dist(xn.data(), centers.row(c).data(), static_cast<std::size_t>(d));
  }
  kernel_eval_sq(kernel, r2.data(), out, static_cast<std::size_t>(k));
}

double evaluate_surrogate(const RbfSystem& system, const Vec& w, const Vec& x) {
  if (w.size() != system.center_count()) {
    throw ShapeError("evaluate_surrogate: weight length does not match centers");
  }
  std::vector<double> feat(static_cast<std::size_t>(system.center_count()));
  system.features(x, feat.data());
  return simd::dot(feat.data(), w.data(), feat.size());
}

RbfSystem build_system(const Dataset& data, const KernelSpec& kernel,
                       Mat centers_normalized) {
  const int n = data.count();
  const int k = static_cast<int>(centers_normalized.rows());
  if (centers_normalized.cols() != data.dim()) {
    throw ShapeError("build_system: center dimension does not match data");
  }
  if (k < n) {
    throw DomainError("build_system: need at least as many centers as data points");
  }

  RbfSystem sys;
  sys.kernel = kernel;
  sys.bounds = data.bounds;
  sys.centers = MatRM(std::move(centers_normalized));
  sys.phi = assemble_phi(normalize_rows(data.bounds, data.X), sys.centers, kernel);
  sys.w0 = min_norm_solution(sys.phi, data.y);
  sys.nullspace = null_basis(sys.phi);

  const double residual = (sys.phi * sys.w0 - data.y).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, data.y.cwiseAbs().maxCoeff());
  if (!(residual <= 1e-8 * scale)) {
    throw NumericalError(
        "build_system: interpolation residual " + format_ratio(residual) +
        " exceeds tolerance");
  }
  return sys;
}

RbfSystem build_relaxed_system(const Dataset& data, const KernelSpec& kernel,
                               int center_count, CenterStrategy strategy,
                               std::uint64_t seed) {
  Mat centers = place_centers(Box::unit(data.dim()), center_count, strategy, seed);
  return build_system(data, kernel, std::move(centers));
}

RbfSystem build_square_system(const Dataset& data, const KernelSpec& kernel) {
  return build_system(data, kernel, normalize_rows(data.bounds, data.X));
}

}  // namespace rbfgen
