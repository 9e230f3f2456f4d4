#include "rbfgen/centers.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "rbfgen/errors.hpp"
#include "rbfgen/log.hpp"
#include "rbfgen/rng.hpp"

namespace rbfgen {

namespace {

std::vector<int> first_primes(int count) {
  std::vector<int> primes;
  primes.reserve(count);
  for (int n = 2; static_cast<int>(primes.size()) < count; ++n) {
    bool prime = true;
    for (int p : primes) {
      if (p * p > n) break;
      if (n % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(n);
  }
  return primes;
}

// Van der Corput radical inverse of index i in the given base.
double radical_inverse(std::uint64_t i, int base) {
  double result = 0.0;
  double digit = 1.0 / base;
  while (i != 0) {
    result += static_cast<double>(i % base) * digit;
    digit /= base;
    i /= base;
  }
  return result;
}

Mat halton_unit(int count, int dim, std::uint64_t seed) {
  const std::vector<int> bases = first_primes(dim);
  Mat pts(count, dim);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t index = 1 + seed + static_cast<std::uint64_t>(i);
    for (int j = 0; j < dim; ++j) {
      pts(i, j) = radical_inverse(index, bases[j]);
    }
  }
  return pts;
}

Mat uniform_grid_unit(int count, int dim) {
  if (dim == 1) {
    Mat pts(count, 1);
    if (count == 1) {
      pts(0, 0) = 0.5;
    } else {
      for (int i = 0; i < count; ++i) {
        pts(i, 0) = static_cast<double>(i) / (count - 1);
      }
    }
    return pts;
  }
  // Require a perfect d-th power; the caller falls back to Halton otherwise.
  const int per_dim = static_cast<int>(std::llround(std::pow(count, 1.0 / dim)));
  int total = 1;
  for (int j = 0; j < dim; ++j) total *= per_dim;
  if (per_dim < 1 || total != count) return Mat();

  Mat pts(count, dim);
  for (int i = 0; i < count; ++i) {
    int rem = i;
    for (int j = 0; j < dim; ++j) {
      const int idx = rem % per_dim;
      rem /= per_dim;
      pts(i, j) = per_dim == 1 ? 0.5 : static_cast<double>(idx) / (per_dim - 1);
    }
  }
  return pts;
}

}  // namespace

Mat place_centers(const Box& box, int count, CenterStrategy strategy,
                  std::uint64_t seed) {
  validate_box(box);
  if (count <= 0) {
    throw DomainError("place_centers: count must be positive");
  }
  const int dim = box.dim();

  Mat unit;
  if (strategy == CenterStrategy::UniformGrid) {
    unit = uniform_grid_unit(count, dim);
    if (unit.size() == 0) {
      log::warn("place_centers: " + std::to_string(count) + " is not a perfect " +
                std::to_string(dim) + "-th power, falling back to Halton");
      unit = halton_unit(count, dim, seed);
    }
  } else {
    unit = halton_unit(count, dim, seed);
  }

  Mat out(count, dim);
  for (int j = 0; j < dim; ++j) {
    out.col(j) = box.lo[j] + (box.hi[j] - box.lo[j]) * unit.col(j).array();
  }
  return out;
}

Mat latin_hypercube_unit(int count, int dim, std::uint64_t seed) {
  if (count <= 0 || dim <= 0) {
    throw DomainError("latin_hypercube_unit: count and dim must be positive");
  }
  Rng rng(seed);
  Mat pts(count, dim);
  std::vector<int> strata(static_cast<std::size_t>(count));
  for (int j = 0; j < dim; ++j) {
    std::iota(strata.begin(), strata.end(), 0);
    for (int i = count - 1; i > 0; --i) {
      const auto pick = rng.uniform_index(static_cast<std::uint64_t>(i + 1));
      std::swap(strata[static_cast<std::size_t>(i)],
                strata[static_cast<std::size_t>(pick)]);
    }
    for (int i = 0; i < count; ++i) {
      pts(i, j) = (strata[static_cast<std::size_t>(i)] + rng.uniform()) / count;
    }
  }
  return pts;
}

}  // namespace rbfgen
