#pragma once

#include <cstdint>

#include "rbfgen/dataset.hpp"

namespace rbfgen {

enum class CenterStrategy {
  UniformGrid,  // tensor grid; needs K to be a perfect d-th power for d > 1
  Halton,       // low-discrepancy sequence, any K
};

// Place K candidate centers inside the box.
//
// UniformGrid in 1-D spaces K points evenly including both endpoints. For
// d > 1 it requires K = m^d and falls back to Halton (with a logged
// warning) otherwise. Halton uses the first d primes as bases starting at
// index 1 + seed, so seed shifts the sequence deterministically.
//
// Throws DomainError for K <= 0.
Mat place_centers(const Box& box, int count, CenterStrategy strategy,
                  std::uint64_t seed);

// Seeded Latin-hypercube sample of `count` points in the unit cube: each
// dimension is split into `count` strata, each stratum hit exactly once,
// with an independent shuffle per dimension. Throws DomainError for
// count <= 0 or dim <= 0.
Mat latin_hypercube_unit(int count, int dim, std::uint64_t seed);

}  // namespace rbfgen
