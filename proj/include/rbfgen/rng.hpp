#pragma once

#include <cstdint>

namespace rbfgen {

// Deterministic random numbers with identical output on every platform.
// The standard <random> distributions are implementation-defined, so all
// sampling here is built from a splitmix64 bit mixer plus an inverse
// normal CDF. Two access patterns are provided:
//
//  * Rng            - sequential stream (shuffles, ad-hoc draws)
//  * counter_*      - stateless counter-based draws keyed by
//                     (seed, stream, counter, index); any element of the
//                     stream can be generated independently, which keeps
//                     ensemble latents reproducible under any evaluation
//                     order.

namespace detail {

inline constexpr std::uint64_t splitmix_mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// Map 64 random bits to a double in [0, 1) using the top 53 bits.
inline constexpr double bits_to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Inverse standard normal CDF (Acklam's rational approximation,
// relative error below 1.2e-9 over the open unit interval).
double inverse_normal_cdf(double p);

// Stateless draw: uniform in [0, 1), fully determined by the four keys.
inline double counter_uniform(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t counter, std::uint64_t index) {
  std::uint64_t h = detail::splitmix_mix(seed + 0x9E3779B97F4A7C15ULL);
  h = detail::splitmix_mix(h ^ (stream + 0xBF58476D1CE4E5B9ULL));
  h = detail::splitmix_mix(h ^ (counter + 0x94D049BB133111EBULL));
  h = detail::splitmix_mix(h ^ (index + 0xD6E8FEB86659FD93ULL));
  return detail::bits_to_unit(h);
}

// Stateless standard normal draw via the inverse CDF.
inline double counter_normal(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t counter, std::uint64_t index) {
  // Nudge into the open interval so the inverse CDF stays finite.
  double u = counter_uniform(seed, stream, counter, index);
  u = u * (1.0 - 0x1.0p-52) + 0x1.0p-53;
  return inverse_normal_cdf(u);
}

// Sequential splitmix64 stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return detail::splitmix_mix(state_);
  }

  // Uniform in [0, 1).
  double uniform() { return detail::bits_to_unit(next_u64()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    // Modulo bias is negligible for the small n used here (< 2^32).
    return next_u64() % n;
  }

  double normal() {
    double u = uniform();
    u = u * (1.0 - 0x1.0p-52) + 0x1.0p-53;
    return inverse_normal_cdf(u);
  }

 private:
  std::uint64_t state_;
};

}  // namespace rbfgen
