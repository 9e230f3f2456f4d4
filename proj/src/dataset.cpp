#include "rbfgen/dataset.hpp"

#include <cstdio>
#include <string>
#include <utility>

#include "rbfgen/errors.hpp"

namespace rbfgen {

void validate_box(const Box& box) {
  if (box.lo.size() != box.hi.size()) {
    throw ShapeError("box: lo and hi must have equal length");
  }
  if (box.lo.size() == 0) {
    throw DomainError("box: dimension must be positive");
  }
  for (int j = 0; j < box.dim(); ++j) {
    if (!(box.hi[j] > box.lo[j])) {
      throw DomainError("box: hi must exceed lo in coordinate " + std::to_string(j));
    }
  }
}

bool box_contains(const Box& box, const Vec& x, double tol) {
  if (x.size() != box.lo.size()) {
    throw ShapeError("box_contains: point dimension mismatch");
  }
  for (int j = 0; j < box.dim(); ++j) {
    if (x[j] < box.lo[j] - tol || x[j] > box.hi[j] + tol) return false;
  }
  return true;
}

MatRM normalize_rows(const Box& box, const Mat& X) {
  if (X.cols() != box.lo.size()) {
    throw ShapeError("normalize_rows: column count does not match box dimension");
  }
  MatRM out(X.rows(), X.cols());
  for (int j = 0; j < X.cols(); ++j) {
    const double width = box.hi[j] - box.lo[j];
    out.col(j) = (X.col(j).array() - box.lo[j]) / width;
  }
  return out;
}

Vec normalize_point(const Box& box, const Vec& x) {
  if (x.size() != box.lo.size()) {
    throw ShapeError("normalize_point: point dimension mismatch");
  }
  return (x - box.lo).cwiseQuotient(box.hi - box.lo);
}

Vec denormalize_point(const Box& box, const Vec& u) {
  if (u.size() != box.lo.size()) {
    throw ShapeError("denormalize_point: point dimension mismatch");
  }
  return box.lo + u.cwiseProduct(box.hi - box.lo);
}

Dataset make_dataset(Mat X, Vec y, Box bounds) {
  validate_box(bounds);
  if (X.rows() == 0 || X.cols() == 0) {
    throw ShapeError("dataset: X must be non-empty");
  }
  if (X.rows() != y.size()) {
    throw ShapeError("dataset: X and y row counts differ");
  }
  if (X.cols() != bounds.lo.size()) {
    throw ShapeError("dataset: X column count does not match bounds dimension");
  }
  for (int i = 0; i < X.rows(); ++i) {
    if (!box_contains(bounds, X.row(i).transpose())) {
      throw DomainError("dataset: row " + std::to_string(i) + " lies outside bounds");
    }
  }
  // Duplicate rows make the interpolation system inconsistent; compare in
  // normalized coordinates so the tolerance is scale-free.
  const MatRM norm = normalize_rows(bounds, X);
  constexpr double kDupTol = 1e-12;
  for (int i = 0; i < norm.rows(); ++i) {
    for (int k = i + 1; k < norm.rows(); ++k) {
      if ((norm.row(i) - norm.row(k)).cwiseAbs().maxCoeff() <= kDupTol) {
        throw DomainError("dataset: rows " + std::to_string(i) + " and " +
                          std::to_string(k) + " are duplicates after normalization");
      }
    }
  }
  Dataset ds;
  ds.X = std::move(X);
  ds.y = std::move(y);
  ds.bounds = std::move(bounds);
  return ds;
}

}  // namespace rbfgen
