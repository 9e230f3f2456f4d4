#include "rbfgen/generator.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "json.hpp"
#include "rbfgen/errors.hpp"
#include "rbfgen/rng.hpp"

namespace rbfgen {

namespace {

Vec apply_activation(Activation act, const Vec& pre) {
  if (act == Activation::Tanh) return pre.array().tanh();
  return pre.cwiseMax(0.0);
}

// Derivative in terms of pre-activation and cached activation value.
Vec activation_grad(Activation act, const Vec& pre, const Vec& post) {
  if (act == Activation::Tanh) return 1.0 - post.array().square();
  // ReLU subgradient: zero at the kink.
  return (pre.array() > 0.0).cast<double>();
}

}  // namespace

int GeneratorNet::parameter_count() const {
  int count = 0;
  for (const auto& layer : layers) {
    count += static_cast<int>(layer.W.size() + layer.b.size());
  }
  return count;
}

GeneratorGrad GeneratorGrad::zeros_like(const GeneratorNet& net) {
  GeneratorGrad g;
  g.layers.reserve(net.layers.size());
  for (const auto& layer : net.layers) {
    g.layers.push_back({MatRM::Zero(layer.W.rows(), layer.W.cols()),
                        Vec::Zero(layer.b.size())});
  }
  return g;
}

void GeneratorGrad::set_zero() {
  for (auto& layer : layers) {
    layer.W.setZero();
    layer.b.setZero();
  }
}

GeneratorNet init_generator(int latent_dim, int out_dim,
                            const std::vector<int>& hidden, Activation activation,
                            double alpha_scale, std::uint64_t seed) {
  if (latent_dim <= 0 || out_dim <= 0) {
    throw DomainError("init_generator: dimensions must be positive");
  }
  for (int h : hidden) {
    if (h <= 0) throw DomainError("init_generator: hidden widths must be positive");
  }
  if (!(alpha_scale > 0.0)) {
    throw DomainError("init_generator: alpha_scale must be positive");
  }

  GeneratorNet net;
  net.activation = activation;
  net.latent_dim = latent_dim;
  net.out_dim = out_dim;
  net.alpha_scale = alpha_scale;

  Rng rng(seed);
  int fan_in = latent_dim;
  for (int width : hidden) {
    GeneratorNet::Layer layer;
    layer.W = MatRM(width, fan_in);
    const double r = std::sqrt(6.0 / (fan_in + width));
    for (int i = 0; i < width; ++i) {
      for (int j = 0; j < fan_in; ++j) layer.W(i, j) = rng.uniform(-r, r);
    }
    layer.b = Vec::Zero(width);
    net.layers.push_back(std::move(layer));
    fan_in = width;
  }
  // Zero output layer: G(z) = 0 until training moves it.
  net.layers.push_back({MatRM::Zero(out_dim, fan_in), Vec::Zero(out_dim)});
  return net;
}

Vec generator_forward(const GeneratorNet& net, const Vec& z, ForwardCache* cache) {
  if (z.size() != net.latent_dim) {
    throw ShapeError("generator_forward: latent vector length mismatch");
  }
  if (cache != nullptr) {
    cache->input = z;
    cache->pre.clear();
    cache->act.clear();
  }
  Vec a = z;
  const int last = static_cast<int>(net.layers.size()) - 1;
  for (int l = 0; l <= last; ++l) {
    Vec pre = net.layers[l].W * a + net.layers[l].b;
    Vec post = l < last ? apply_activation(net.activation, pre) : pre;
    if (cache != nullptr) {
      cache->pre.push_back(pre);
      cache->act.push_back(post);
    }
    a = std::move(post);
  }
  return net.alpha_scale * a;
}

void generator_backward(const GeneratorNet& net, const ForwardCache& cache,
                        const Vec& upstream, GeneratorGrad& grad) {
  const int last = static_cast<int>(net.layers.size()) - 1;
  if (upstream.size() != net.out_dim) {
    throw ShapeError("generator_backward: upstream gradient length mismatch");
  }
  if (static_cast<int>(cache.pre.size()) != last + 1 ||
      static_cast<int>(grad.layers.size()) != last + 1) {
    throw ShapeError("generator_backward: cache or gradient layout mismatch");
  }

  // d(loss)/d(raw output); the output layer is linear.
  Vec delta = net.alpha_scale * upstream;
  for (int l = last; l >= 0; --l) {
    const Vec& below = l == 0 ? cache.input : cache.act[l - 1];
    grad.layers[l].W.noalias() += delta * below.transpose();
    grad.layers[l].b += delta;
    if (l == 0) break;
    Vec da = net.layers[l].W.transpose() * delta;
    delta = da.cwiseProduct(
        activation_grad(net.activation, cache.pre[l - 1], cache.act[l - 1]));
  }
}

std::string serialize_generator(const GeneratorNet& net) {
  nlohmann::json j;
  j["latentDim"] = net.latent_dim;
  j["outDim"] = net.out_dim;
  j["alphaScale"] = net.alpha_scale;
  j["activation"] = net.activation == Activation::Tanh ? "tanh" : "relu";
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : net.layers) {
    nlohmann::json jl;
    jl["rows"] = layer.W.rows();
    jl["cols"] = layer.W.cols();
    jl["W"] = std::vector<double>(layer.W.data(), layer.W.data() + layer.W.size());
    jl["b"] = std::vector<double>(layer.b.data(), layer.b.data() + layer.b.size());
    layers.push_back(std::move(jl));
  }
  j["layers"] = std::move(layers);
  return j.dump();
}

GeneratorNet deserialize_generator(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("generator checkpoint: ") + e.what());
  }
  try {
    GeneratorNet net;
    net.latent_dim = j.at("latentDim").get<int>();
    net.out_dim = j.at("outDim").get<int>();
    net.alpha_scale = j.at("alphaScale").get<double>();
    const std::string act = j.at("activation").get<std::string>();
    if (act == "tanh") {
      net.activation = Activation::Tanh;
    } else if (act == "relu") {
      net.activation = Activation::ReLU;
    } else {
      throw ConfigError("generator checkpoint: unknown activation '" + act + "'");
    }
    int expected_in = net.latent_dim;
    for (const auto& jl : j.at("layers")) {
      const int rows = jl.at("rows").get<int>();
      const int cols = jl.at("cols").get<int>();
      const auto wv = jl.at("W").get<std::vector<double>>();
      const auto bv = jl.at("b").get<std::vector<double>>();
      if (cols != expected_in || rows <= 0 ||
          static_cast<int>(wv.size()) != rows * cols ||
          static_cast<int>(bv.size()) != rows) {
        throw ShapeError("generator checkpoint: inconsistent layer shapes");
      }
      GeneratorNet::Layer layer;
      layer.W = Eigen::Map<const MatRM>(wv.data(), rows, cols);
      layer.b = Eigen::Map<const Vec>(bv.data(), rows);
      net.layers.push_back(std::move(layer));
      expected_in = rows;
    }
    if (net.layers.empty() || expected_in != net.out_dim) {
      throw ShapeError("generator checkpoint: output dimension mismatch");
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("generator checkpoint: ") + e.what());
  }
}

}  // namespace rbfgen
