#pragma once

// Dense feed-forward networks with hand-written reverse-mode gradients.
//
// A network of depth L has L hidden layers of `width` units followed by a
// linear output layer:
//
//   a_0 = W_0 x + b_0,  o_t = act(a_t),  a_{t+1} = W_{t+1} o_t + b_{t+1}
//
// Hidden layers use the spec's activation (ELU with alpha = 1 by default);
// the output layer is always affine. Depth 0 is a single affine map.
//
// Zero-sized inputs and outputs are allowed: a network with input_dim 0 is a
// learnable constant (used for customer-sample networks when no customer
// features exist), and one with output_dim 0 produces an empty vector.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rumnet/random.hpp"

namespace rumnet {

enum class Activation { Elu, Identity };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

// Thrown on any shape disagreement. The message names expected and actual.
class DimensionError : public std::invalid_argument {
 public:
  DimensionError(const std::string& what, std::size_t expected, std::size_t actual);
  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

struct NetworkSpec {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::size_t depth = 0;
  std::size_t width = 0;
  Activation activation = Activation::Elu;

  void validate() const;
  bool operator==(const NetworkSpec&) const = default;
};

// Row-major weight matrix (out x in) and bias vector of one affine layer.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  DenseLayer() = default;
  DenseLayer(std::size_t in_dim, std::size_t out_dim);

  double& w(std::size_t row, std::size_t col) { return weight[row * in + col]; }
  double w(std::size_t row, std::size_t col) const { return weight[row * in + col]; }
  std::span<const double> row(std::size_t r) const { return {weight.data() + r * in, in}; }

  bool operator==(const DenseLayer&) const = default;
};

class DenseNetwork {
 public:
  DenseNetwork() = default;
  // All parameters zero; use init_network for a trainable start point.
  explicit DenseNetwork(const NetworkSpec& spec);

  const NetworkSpec& spec() const noexcept { return spec_; }
  std::size_t input_dim() const noexcept { return spec_.input_dim; }
  std::size_t output_dim() const noexcept { return spec_.output_dim; }

  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  std::size_t parameter_count() const;

  // Appends weight and bias spans of every layer in declaration order.
  void collect_parameters(std::vector<std::span<double>>& out);

  bool operator==(const DenseNetwork&) const = default;

 private:
  NetworkSpec spec_;
  std::vector<DenseLayer> layers_;
};

// Accumulates d(loss)/d(parameter) with the same layout as a DenseNetwork.
struct GradientBuffer {
  std::vector<DenseLayer> layers;

  GradientBuffer() = default;
  explicit GradientBuffer(const DenseNetwork& net);

  void zero();
  void collect_parameters(std::vector<std::span<double>>& out);
  bool shape_matches(const DenseNetwork& net) const;
};

// Activations recorded by forward for use by backward. pre[t] is the
// pre-activation of layer t and input[t] the vector fed into layer t, so
// input[0] is the network input.
struct ForwardCache {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> input;
};

double elu(double a);
double elu_derivative(double a);

std::vector<double> forward(const DenseNetwork& net, std::span<const double> x, ForwardCache& cache);
std::vector<double> forward(const DenseNetwork& net, std::span<const double> x);

// Accumulates parameter gradients into `grads` and returns d(loss)/d(input).
std::vector<double> backward(const DenseNetwork& net, const ForwardCache& cache,
                             std::span<const double> upstream, GradientBuffer& grads);

// Split evaluation used when the caller assembles the first layer's
// pre-activation itself (e.g. from separately projected input blocks).
// forward_from_first_preactivation runs everything after the first affine map
// and leaves cache.input[0] untouched. backward_to_first_preactivation
// accumulates gradients for layers 1.. only and writes d(loss)/d(pre[0]).
const std::vector<double>& forward_from_first_preactivation(const DenseNetwork& net,
                                                            std::span<const double> first_pre,
                                                            ForwardCache& cache);
void backward_to_first_preactivation(const DenseNetwork& net, const ForwardCache& cache,
                                     std::span<const double> upstream, GradientBuffer& grads,
                                     std::span<double> first_pre_grad);

// Fan-balanced uniform weights, zero biases.
DenseNetwork init_network(const NetworkSpec& spec, Rng& rng);

// max over nodes of (sum |incoming weights| + |bias|).
double max_node_l1(const DenseNetwork& net);

// Text container; see docs/formats.md.
void write_network(std::ostream& os, const DenseNetwork& net);
DenseNetwork read_network(std::istream& is);

}  // namespace rumnet
