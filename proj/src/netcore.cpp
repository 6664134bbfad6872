#include "rumnet/netcore.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "rumnet/text_io.hpp"

namespace rumnet {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::Elu:
      return "elu";
    case Activation::Identity:
      return "identity";
  }
  return "?";
}

Activation activation_from_string(const std::string& name) {
  if (name == "elu") return Activation::Elu;
  if (name == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

DimensionError::DimensionError(const std::string& what, std::size_t expected, std::size_t actual)
    : std::invalid_argument(what + ": expected " + std::to_string(expected) + ", got " +
                            std::to_string(actual)),
      expected_(expected),
      actual_(actual) {}

void NetworkSpec::validate() const {
  if (depth > 0 && width == 0) {
    throw std::invalid_argument("network spec: width must be positive when depth > 0");
  }
}

DenseLayer::DenseLayer(std::size_t in_dim, std::size_t out_dim)
    : in(in_dim), out(out_dim), weight(in_dim * out_dim, 0.0), bias(out_dim, 0.0) {}

namespace {

std::vector<DenseLayer> make_layers(const NetworkSpec& spec) {
  std::vector<DenseLayer> layers;
  layers.reserve(spec.depth + 1);
  std::size_t in = spec.input_dim;
  for (std::size_t t = 0; t < spec.depth; ++t) {
    layers.emplace_back(in, spec.width);
    in = spec.width;
  }
  layers.emplace_back(in, spec.output_dim);
  return layers;
}

void affine(const DenseLayer& layer, std::span<const double> x, std::vector<double>& out) {
  out.resize(layer.out);
  const double* w = layer.weight.data();
  for (std::size_t r = 0; r < layer.out; ++r) {
    double acc = layer.bias[r];
    for (std::size_t c = 0; c < layer.in; ++c) {
      acc += w[c] * x[c];
    }
    out[r] = acc;
    w += layer.in;
  }
}

void activate(Activation act, const std::vector<double>& pre, std::vector<double>& out) {
  out.resize(pre.size());
  if (act == Activation::Identity) {
    std::copy(pre.begin(), pre.end(), out.begin());
    return;
  }
  for (std::size_t i = 0; i < pre.size(); ++i) {
    out[i] = elu(pre[i]);
  }
}

double activation_derivative(Activation act, double a) {
  return act == Activation::Identity ? 1.0 : elu_derivative(a);
}

void check_cache(const DenseNetwork& net, const ForwardCache& cache) {
  const std::size_t n_layers = net.layers().size();
  if (cache.pre.size() != n_layers) {
    throw DimensionError("forward cache layer count", n_layers, cache.pre.size());
  }
  for (std::size_t t = 0; t < n_layers; ++t) {
    if (cache.pre[t].size() != net.layers()[t].out) {
      throw DimensionError("forward cache width at layer " + std::to_string(t),
                           net.layers()[t].out, cache.pre[t].size());
    }
  }
}

// Runs layers [1, L] given pre[0]; fills cache.input[1..] and cache.pre[1..].
void run_tail(const DenseNetwork& net, ForwardCache& cache) {
  const auto& layers = net.layers();
  const Activation act = net.spec().activation;
  for (std::size_t t = 1; t < layers.size(); ++t) {
    activate(act, cache.pre[t - 1], cache.input[t]);
    affine(layers[t], cache.input[t], cache.pre[t]);
  }
}

}  // namespace

DenseNetwork::DenseNetwork(const NetworkSpec& spec) : spec_(spec) {
  spec_.validate();
  layers_ = make_layers(spec_);
}

std::size_t DenseNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) {
    n += layer.weight.size() + layer.bias.size();
  }
  return n;
}

void DenseNetwork::collect_parameters(std::vector<std::span<double>>& out) {
  for (auto& layer : layers_) {
    out.emplace_back(layer.weight);
    out.emplace_back(layer.bias);
  }
}

GradientBuffer::GradientBuffer(const DenseNetwork& net) {
  layers.reserve(net.layers().size());
  for (const auto& layer : net.layers()) {
    layers.emplace_back(layer.in, layer.out);
  }
}

void GradientBuffer::zero() {
  for (auto& layer : layers) {
    std::fill(layer.weight.begin(), layer.weight.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
}

void GradientBuffer::collect_parameters(std::vector<std::span<double>>& out) {
  for (auto& layer : layers) {
    out.emplace_back(layer.weight);
    out.emplace_back(layer.bias);
  }
}

bool GradientBuffer::shape_matches(const DenseNetwork& net) const {
  if (layers.size() != net.layers().size()) return false;
  for (std::size_t t = 0; t < layers.size(); ++t) {
    if (layers[t].in != net.layers()[t].in || layers[t].out != net.layers()[t].out) return false;
  }
  return true;
}

double elu(double a) {
  return a > 0.0 ? a : std::expm1(a);
}

double elu_derivative(double a) {
  // At a = 0 both one-sided derivatives equal 1.
  return a >= 0.0 ? 1.0 : std::exp(a);
}

std::vector<double> forward(const DenseNetwork& net, std::span<const double> x, ForwardCache& cache) {
  if (x.size() != net.input_dim()) {
    throw DimensionError("network input", net.input_dim(), x.size());
  }
  const std::size_t n_layers = net.layers().size();
  cache.pre.resize(n_layers);
  cache.input.resize(n_layers);
  cache.input[0].assign(x.begin(), x.end());
  affine(net.layers()[0], x, cache.pre[0]);
  run_tail(net, cache);
  return cache.pre.back();
}

std::vector<double> forward(const DenseNetwork& net, std::span<const double> x) {
  ForwardCache cache;
  return forward(net, x, cache);
}

const std::vector<double>& forward_from_first_preactivation(const DenseNetwork& net,
                                                            std::span<const double> first_pre,
                                                            ForwardCache& cache) {
  const auto& layers = net.layers();
  if (first_pre.size() != layers[0].out) {
    throw DimensionError("first-layer pre-activation", layers[0].out, first_pre.size());
  }
  cache.pre.resize(layers.size());
  cache.input.resize(layers.size());
  cache.pre[0].assign(first_pre.begin(), first_pre.end());
  run_tail(net, cache);
  return cache.pre.back();
}

void backward_to_first_preactivation(const DenseNetwork& net, const ForwardCache& cache,
                                     std::span<const double> upstream, GradientBuffer& grads,
                                     std::span<double> first_pre_grad) {
  const auto& layers = net.layers();
  if (upstream.size() != net.output_dim()) {
    throw DimensionError("backward upstream", net.output_dim(), upstream.size());
  }
  if (!grads.shape_matches(net)) {
    throw DimensionError("gradient buffer layer count", layers.size(), grads.layers.size());
  }
  check_cache(net, cache);
  if (first_pre_grad.size() != layers[0].out) {
    throw DimensionError("first-layer gradient", layers[0].out, first_pre_grad.size());
  }
  const Activation act = net.spec().activation;

  // delta holds d(loss)/d(pre[t]) for the current layer t.
  std::vector<double> delta(upstream.begin(), upstream.end());
  std::vector<double> next;
  for (std::size_t t = layers.size() - 1; t >= 1; --t) {
    const DenseLayer& layer = layers[t];
    DenseLayer& g = grads.layers[t];
    const std::vector<double>& in = cache.input[t];
    next.assign(layer.in, 0.0);
    for (std::size_t r = 0; r < layer.out; ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      g.bias[r] += d;
      double* gw = g.weight.data() + r * layer.in;
      const double* w = layer.weight.data() + r * layer.in;
      for (std::size_t c = 0; c < layer.in; ++c) {
        gw[c] += d * in[c];
        next[c] += d * w[c];
      }
    }
    const std::vector<double>& pre_prev = cache.pre[t - 1];
    for (std::size_t c = 0; c < layer.in; ++c) {
      next[c] *= activation_derivative(act, pre_prev[c]);
    }
    delta.swap(next);
  }
  std::copy(delta.begin(), delta.end(), first_pre_grad.begin());
}

std::vector<double> backward(const DenseNetwork& net, const ForwardCache& cache,
                             std::span<const double> upstream, GradientBuffer& grads) {
  const DenseLayer& first = net.layers()[0];
  std::vector<double> delta(first.out);
  backward_to_first_preactivation(net, cache, upstream, grads, delta);
  if (cache.input.empty() || cache.input[0].size() != first.in) {
    throw DimensionError("forward cache input", first.in,
                         cache.input.empty() ? 0 : cache.input[0].size());
  }
  const std::vector<double>& x = cache.input[0];
  DenseLayer& g = grads.layers[0];
  std::vector<double> input_grad(first.in, 0.0);
  for (std::size_t r = 0; r < first.out; ++r) {
    const double d = delta[r];
    if (d == 0.0) continue;
    g.bias[r] += d;
    double* gw = g.weight.data() + r * first.in;
    const double* w = first.weight.data() + r * first.in;
    for (std::size_t c = 0; c < first.in; ++c) {
      gw[c] += d * x[c];
      input_grad[c] += d * w[c];
    }
  }
  return input_grad;
}

DenseNetwork init_network(const NetworkSpec& spec, Rng& rng) {
  DenseNetwork net(spec);
  for (auto& layer : net.layers()) {
    const std::size_t fan = layer.in + layer.out;
    if (fan == 0) continue;
    const double limit = std::sqrt(6.0 / static_cast<double>(fan));
    for (double& w : layer.weight) {
      w = uniform(rng, -limit, limit);
    }
  }
  return net;
}

double max_node_l1(const DenseNetwork& net) {
  double best = 0.0;
  for (const auto& layer : net.layers()) {
    for (std::size_t r = 0; r < layer.out; ++r) {
      double s = std::abs(layer.bias[r]);
      for (double w : layer.row(r)) {
        s += std::abs(w);
      }
      best = std::max(best, s);
    }
  }
  return best;
}

void write_network(std::ostream& os, const DenseNetwork& net) {
  const NetworkSpec& s = net.spec();
  os << "dense_network " << s.input_dim << ' ' << s.output_dim << ' ' << s.depth << ' ' << s.width
     << ' ' << to_string(s.activation) << '\n';
  for (const auto& layer : net.layers()) {
    os << "layer " << layer.out << ' ' << layer.in << '\n';
    for (std::size_t r = 0; r < layer.out; ++r) {
      os << "w";
      for (double w : layer.row(r)) {
        os << ' ' << format_double(w);
      }
      os << '\n';
    }
    os << "b";
    for (double b : layer.bias) {
      os << ' ' << format_double(b);
    }
    os << '\n';
  }
}

DenseNetwork read_network(std::istream& is) {
  TokenReader in(is);
  in.expect("dense_network");
  NetworkSpec spec;
  spec.input_dim = in.next_size("input_dim");
  spec.output_dim = in.next_size("output_dim");
  spec.depth = in.next_size("depth");
  spec.width = in.next_size("width");
  spec.activation = activation_from_string(in.next("activation"));
  DenseNetwork net(spec);
  for (auto& layer : net.layers()) {
    in.expect("layer");
    const std::size_t out = in.next_size("layer rows");
    const std::size_t cols = in.next_size("layer columns");
    if (out != layer.out) throw DimensionError("stored layer rows", layer.out, out);
    if (cols != layer.in) throw DimensionError("stored layer columns", layer.in, cols);
    for (std::size_t r = 0; r < layer.out; ++r) {
      in.expect("w");
      for (std::size_t c = 0; c < layer.in; ++c) {
        layer.w(r, c) = in.next_double("weight");
      }
    }
    in.expect("b");
    for (double& b : layer.bias) {
      b = in.next_double("bias");
    }
  }
  return net;
}

}  // namespace rumnet
