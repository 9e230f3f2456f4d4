#pragma once

#include "rbfgen/linalg.hpp"

namespace rbfgen {

// Axis-aligned box used both as the modeling domain and as the coordinate
// normalization map: norm(x) = (x - lo) / (hi - lo), componentwise.
struct Box {
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }

  static Box unit(int d) {
    Box b;
    b.lo = Vec::Zero(d);
    b.hi = Vec::Ones(d);
    return b;
  }
};

// Throws ShapeError / DomainError unless lo and hi have equal positive
// length and hi > lo holds strictly in every coordinate.
void validate_box(const Box& box);

bool box_contains(const Box& box, const Vec& x, double tol = 0.0);

// Map rows of X (original coordinates) into the unit cube.
MatRM normalize_rows(const Box& box, const Mat& X);
Vec normalize_point(const Box& box, const Vec& x);
Vec denormalize_point(const Box& box, const Vec& u);

// Immutable training set: N rows of d coordinates plus one response each.
struct Dataset {
  Mat X;       // N x d
  Vec y;       // N
  Box bounds;  // modeling domain, rows of X must lie inside

  int count() const { return static_cast<int>(X.rows()); }
  int dim() const { return static_cast<int>(X.cols()); }
};

// Validates shapes, bounds membership, and rejects duplicate rows
// (pairs closer than 1e-12 in max-norm after normalization).
Dataset make_dataset(Mat X, Vec y, Box bounds);

}  // namespace rbfgen
