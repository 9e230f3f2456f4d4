#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rbfgen/linalg.hpp"

namespace rbfgen {

enum class Activation { Tanh, ReLU };

// Small fully-connected network mapping a latent vector z to null-space
// coefficients alpha. The final layer is zero-initialized so a fresh
// network maps every z to exactly zero, which keeps an untrained ensemble
// pinned at the minimum-norm interpolant.
struct GeneratorNet {
  struct Layer {
    MatRM W;  // out x in
    Vec b;    // out
  };

  std::vector<Layer> layers;  // hidden layers then the output layer
  Activation activation = Activation::Tanh;
  int latent_dim = 0;
  int out_dim = 0;
  double alpha_scale = 1.0;  // multiplies the raw output

  int parameter_count() const;
};

// Per-layer gradients, same shapes as the network parameters.
struct GeneratorGrad {
  std::vector<GeneratorNet::Layer> layers;

  static GeneratorGrad zeros_like(const GeneratorNet& net);
  void set_zero();
};

// Activations cached during the forward pass for use in backward.
struct ForwardCache {
  Vec input;
  std::vector<Vec> pre;  // pre-activation per layer
  std::vector<Vec> act;  // post-activation per hidden layer, raw output last
};

// Hidden layers use a seeded uniform draw in +/- sqrt(6 / (fan_in + fan_out));
// the output layer starts at zero. Throws DomainError for non-positive
// dimensions or alpha_scale.
GeneratorNet init_generator(int latent_dim, int out_dim,
                            const std::vector<int>& hidden, Activation activation,
                            double alpha_scale, std::uint64_t seed);

// alpha = G(z). Throws ShapeError when z has the wrong length.
Vec generator_forward(const GeneratorNet& net, const Vec& z,
                      ForwardCache* cache = nullptr);

// Accumulate d(loss)/d(parameters) into grad given d(loss)/d(alpha).
void generator_backward(const GeneratorNet& net, const ForwardCache& cache,
                        const Vec& upstream, GeneratorGrad& grad);

// JSON checkpoint; deserialization restores outputs bit-for-bit.
std::string serialize_generator(const GeneratorNet& net);
GeneratorNet deserialize_generator(const std::string& json_text);

}  // namespace rbfgen
