#ifndef SUSLAB_NUMERICS_HPP_
#define SUSLAB_NUMERICS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "suslab/rng.hpp"

namespace suslab {

// Dense feedforward network parameters, stored flat in layer order.
// Layer stack derived from layer_sizes: every hidden dense layer is followed
// by layer normalization (when hidden_layer_norm) and ReLU; the output layer
// is linear. Flat layout per dense layer: W row-major (out x in), then bias;
// per layer-norm: gain, then bias.
struct NetParams {
  std::vector<int> layer_sizes;  // [input, hidden..., output]
  bool hidden_layer_norm = true;
  std::vector<double> values;
  std::string version_tag;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
};

// Number of flat parameters implied by the layer stack.
std::size_t param_count(const std::vector<int>& layer_sizes, bool hidden_layer_norm);

// Validates sizes, flat length and finiteness; throws ContractViolation.
void validate_net(const NetParams& params);

// Fresh network with He-uniform dense weights, zero biases, unit gains.
NetParams init_net(std::vector<int> layer_sizes, bool hidden_layer_norm, Rng& rng,
                   std::string version_tag);

// Activation record from one forward pass; holds everything backward needs.
struct ForwardCache {
  std::vector<int> layer_sizes;
  bool hidden_layer_norm = false;
  std::vector<std::vector<double>> dense_inputs;  // input vector of each dense layer
  std::vector<std::vector<double>> ln_xhat;       // normalized pre-gain values per layer-norm
  std::vector<double> ln_inv_std;                 // 1/sqrt(var + eps) per layer-norm
  std::vector<std::vector<double>> relu_inputs;   // pre-activation per ReLU
  std::vector<double> output;
};

constexpr double kLayerNormEps = 1e-5;

std::vector<double> layer_norm(std::span<const double> x, std::span<const double> gain,
                               std::span<const double> bias, double eps);

// y = net(x). Deterministic; cache suffices for exact backprop.
ForwardCache forward_mlp(const NetParams& params, std::span<const double> input);

// Exact analytic gradient of output . grad_output w.r.t. every parameter.
std::vector<double> backward_mlp(const NetParams& params, const ForwardCache& cache,
                                 std::span<const double> grad_output);

// Adam with moment vectors sized to the parameter vector.
struct OptimizerState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  int64_t step_count = 0;
  double learning_rate = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

OptimizerState init_optimizer(std::size_t n_params, double learning_rate);

// Standard bias-corrected update; increments step_count by exactly 1.
void adam_step(NetParams& params, std::span<const double> grads, OptimizerState& state);

// Exact cosine; returns 0 when either norm is below 1e-12 so degenerate
// embeddings never abort a run.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

// Test oracle: max relative deviation of backward_mlp from central finite
// differences of sum(output) over every parameter.
double finite_diff_check(const NetParams& network, std::span<const double> input, double h);

double dot(std::span<const double> u, std::span<const double> v);
double l2_norm(std::span<const double> v);

}  // namespace suslab

#endif  // SUSLAB_NUMERICS_HPP_
