#include "suslab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "suslab/common.hpp"

namespace suslab {

namespace {

struct DenseLayout {
  std::size_t w = 0;        // offset of weight matrix (out x in, row-major)
  std::size_t b = 0;        // offset of bias
  std::size_t ln_gain = 0;  // offsets of layer-norm params, valid when has_ln
  std::size_t ln_bias = 0;
  bool has_ln = false;
  int in = 0;
  int out = 0;
};

std::vector<DenseLayout> layout_of(const std::vector<int>& sizes, bool hidden_ln) {
  std::vector<DenseLayout> layers;
  std::size_t off = 0;
  const int n_dense = static_cast<int>(sizes.size()) - 1;
  for (int i = 0; i < n_dense; ++i) {
    DenseLayout l;
    l.in = sizes[i];
    l.out = sizes[i + 1];
    l.w = off;
    off += static_cast<std::size_t>(l.in) * l.out;
    l.b = off;
    off += l.out;
    if (i + 1 < n_dense && hidden_ln) {
      l.has_ln = true;
      l.ln_gain = off;
      off += l.out;
      l.ln_bias = off;
      off += l.out;
    }
    layers.push_back(l);
  }
  return layers;
}

}  // namespace

std::size_t param_count(const std::vector<int>& layer_sizes, bool hidden_layer_norm) {
  require(layer_sizes.size() >= 2, "param_count: need at least input and output layer sizes");
  std::size_t n = 0;
  const int n_dense = static_cast<int>(layer_sizes.size()) - 1;
  for (int i = 0; i < n_dense; ++i) {
    require(layer_sizes[i] > 0 && layer_sizes[i + 1] > 0, "param_count: layer sizes must be positive");
    n += static_cast<std::size_t>(layer_sizes[i]) * layer_sizes[i + 1] + layer_sizes[i + 1];
    if (i + 1 < n_dense && hidden_layer_norm) n += 2 * static_cast<std::size_t>(layer_sizes[i + 1]);
  }
  return n;
}

void validate_net(const NetParams& params) {
  const std::size_t expect = param_count(params.layer_sizes, params.hidden_layer_norm);
  if (params.values.size() != expect) {
    std::ostringstream os;
    os << "NetParams: flat length " << params.values.size() << " does not match layer layout (expected "
       << expect << ")";
    throw ContractViolation(os.str());
  }
  for (double v : params.values) {
    if (!std::isfinite(v)) throw ContractViolation("NetParams: non-finite parameter value");
  }
}

NetParams init_net(std::vector<int> layer_sizes, bool hidden_layer_norm, Rng& rng,
                   std::string version_tag) {
  NetParams p;
  p.layer_sizes = std::move(layer_sizes);
  p.hidden_layer_norm = hidden_layer_norm;
  p.version_tag = std::move(version_tag);
  p.values.assign(param_count(p.layer_sizes, p.hidden_layer_norm), 0.0);
  for (const DenseLayout& l : layout_of(p.layer_sizes, p.hidden_layer_norm)) {
    const double limit = std::sqrt(6.0 / l.in);
    for (std::size_t i = 0; i < static_cast<std::size_t>(l.in) * l.out; ++i) {
      p.values[l.w + i] = rng.uniform(-limit, limit);
    }
    if (l.has_ln) {
      for (int i = 0; i < l.out; ++i) p.values[l.ln_gain + i] = 1.0;
    }
  }
  return p;
}

std::vector<double> layer_norm(std::span<const double> x, std::span<const double> gain,
                               std::span<const double> bias, double eps) {
  require(x.size() == gain.size() && x.size() == bias.size(), "layer_norm: length mismatch");
  require(eps > 0.0, "layer_norm: eps must be positive");
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);  // population variance
  const double inv_std = 1.0 / std::sqrt(var + eps);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = gain[i] * ((x[i] - mean) * inv_std) + bias[i];
  return out;
}

namespace {

// Shape-only check for the hot path; full finiteness validation runs at
// construction and checkpoint load.
void check_shape(const NetParams& params) {
  const std::size_t expect = param_count(params.layer_sizes, params.hidden_layer_norm);
  if (params.values.size() != expect) {
    std::ostringstream os;
    os << "NetParams: flat length " << params.values.size() << " does not match layer layout (expected "
       << expect << ")";
    throw ContractViolation(os.str());
  }
}

}  // namespace

ForwardCache forward_mlp(const NetParams& params, std::span<const double> input) {
  check_shape(params);
  if (static_cast<int>(input.size()) != params.input_dim()) {
    std::ostringstream os;
    os << "forward_mlp: input length " << input.size() << " != first layer size " << params.input_dim();
    throw ContractViolation(os.str());
  }
  ForwardCache cache;
  cache.layer_sizes = params.layer_sizes;
  cache.hidden_layer_norm = params.hidden_layer_norm;

  std::vector<double> x(input.begin(), input.end());
  const auto layers = layout_of(params.layer_sizes, params.hidden_layer_norm);
  const std::size_t n_dense = layers.size();
  for (std::size_t i = 0; i < n_dense; ++i) {
    const DenseLayout& l = layers[i];
    cache.dense_inputs.push_back(x);
    std::vector<double> y(l.out);
    for (int r = 0; r < l.out; ++r) {
      double acc = params.values[l.b + r];
      const double* w = &params.values[l.w + static_cast<std::size_t>(r) * l.in];
      for (int c = 0; c < l.in; ++c) acc += w[c] * x[c];
      y[r] = acc;
    }
    if (i + 1 < n_dense) {  // hidden layer: optional norm, then ReLU
      if (l.has_ln) {
        double mean = 0.0;
        for (double v : y) mean += v;
        mean /= l.out;
        double var = 0.0;
        for (double v : y) var += (v - mean) * (v - mean);
        var /= l.out;
        const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
        std::vector<double> xhat(l.out);
        for (int r = 0; r < l.out; ++r) xhat[r] = (y[r] - mean) * inv_std;
        for (int r = 0; r < l.out; ++r) {
          y[r] = params.values[l.ln_gain + r] * xhat[r] + params.values[l.ln_bias + r];
        }
        cache.ln_xhat.push_back(std::move(xhat));
        cache.ln_inv_std.push_back(inv_std);
      }
      cache.relu_inputs.push_back(y);
      for (double& v : y) v = v > 0.0 ? v : 0.0;  // subgradient at 0 is 0
    }
    x = std::move(y);
  }
  cache.output = x;
  return cache;
}

std::vector<double> backward_mlp(const NetParams& params, const ForwardCache& cache,
                                 std::span<const double> grad_output) {
  check_shape(params);
  if (cache.layer_sizes != params.layer_sizes || cache.hidden_layer_norm != params.hidden_layer_norm) {
    throw ContractViolation("backward_mlp: cache does not match network shape");
  }
  if (static_cast<int>(grad_output.size()) != params.output_dim()) {
    std::ostringstream os;
    os << "backward_mlp: grad_output length " << grad_output.size() << " != output size "
       << params.output_dim();
    throw ContractViolation(os.str());
  }
  const auto layers = layout_of(params.layer_sizes, params.hidden_layer_norm);
  const std::size_t n_dense = layers.size();
  require(cache.dense_inputs.size() == n_dense, "backward_mlp: stale cache");

  std::vector<double> grads(params.values.size(), 0.0);
  std::vector<double> g(grad_output.begin(), grad_output.end());
  std::size_t ln_idx = cache.ln_xhat.size();

  for (std::size_t ii = n_dense; ii-- > 0;) {
    const DenseLayout& l = layers[ii];
    if (ii + 1 < n_dense) {
      const std::vector<double>& pre = cache.relu_inputs[ii];
      for (int r = 0; r < l.out; ++r) g[r] = pre[r] > 0.0 ? g[r] : 0.0;
      if (l.has_ln) {
        --ln_idx;
        const std::vector<double>& xhat = cache.ln_xhat[ln_idx];
        const double inv_std = cache.ln_inv_std[ln_idx];
        std::vector<double> gh(l.out);
        double gh_mean = 0.0, ghx_mean = 0.0;
        for (int r = 0; r < l.out; ++r) {
          grads[l.ln_gain + r] += g[r] * xhat[r];
          grads[l.ln_bias + r] += g[r];
          gh[r] = g[r] * params.values[l.ln_gain + r];
          gh_mean += gh[r];
          ghx_mean += gh[r] * xhat[r];
        }
        gh_mean /= l.out;
        ghx_mean /= l.out;
        for (int r = 0; r < l.out; ++r) g[r] = inv_std * (gh[r] - gh_mean - xhat[r] * ghx_mean);
      }
    }
    const std::vector<double>& x = cache.dense_inputs[ii];
    std::vector<double> gx(l.in, 0.0);
    for (int r = 0; r < l.out; ++r) {
      const std::size_t row = l.w + static_cast<std::size_t>(r) * l.in;
      for (int c = 0; c < l.in; ++c) {
        grads[row + c] += g[r] * x[c];
        gx[c] += params.values[row + c] * g[r];
      }
      grads[l.b + r] += g[r];
    }
    g = std::move(gx);
  }
  return grads;
}

OptimizerState init_optimizer(std::size_t n_params, double learning_rate) {
  OptimizerState s;
  s.first_moment.assign(n_params, 0.0);
  s.second_moment.assign(n_params, 0.0);
  s.learning_rate = learning_rate;
  return s;
}

void adam_step(NetParams& params, std::span<const double> grads, OptimizerState& state) {
  if (grads.size() != params.values.size() || state.first_moment.size() != params.values.size()) {
    std::ostringstream os;
    os << "adam_step: gradient length " << grads.size() << " != parameter length " << params.values.size();
    throw ContractViolation(os.str());
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      std::ostringstream os;
      os << "adam_step: non-finite gradient at index " << i;
      throw ContractViolation(os.str());
    }
  }
  state.step_count += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < grads.size(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = b1 * m + (1.0 - b1) * grads[i];
    v = b2 * v + (1.0 - b2) * grads[i] * grads[i];
    const double mhat = m / corr1;
    const double vhat = v / corr2;
    params.values[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.eps);
  }
}

double dot(std::span<const double> u, std::span<const double> v) {
  require(u.size() == v.size(), "dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

double l2_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    std::ostringstream os;
    os << "cosine_similarity: length mismatch (" << u.size() << " vs " << v.size() << ")";
    throw ContractViolation(os.str());
  }
  const double nu = l2_norm(u);
  const double nv = l2_norm(v);
  if (nu < 1e-12 || nv < 1e-12) return 0.0;
  return dot(u, v) / (nu * nv);
}

double finite_diff_check(const NetParams& network, std::span<const double> input, double h) {
  require(h > 0.0 && h <= 1e-2, "finite_diff_check: h must be in (0, 1e-2]");
  ForwardCache cache = forward_mlp(network, input);
  const std::vector<double> ones(network.output_dim(), 1.0);
  const std::vector<double> analytic = backward_mlp(network, cache, ones);

  NetParams probe = network;
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.values.size(); ++i) {
    const double saved = probe.values[i];
    probe.values[i] = saved + h;
    double up = 0.0;
    for (double v : forward_mlp(probe, input).output) up += v;
    probe.values[i] = saved - h;
    double down = 0.0;
    for (double v : forward_mlp(probe, input).output) down += v;
    probe.values[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-6});
    worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
  }
  return worst;
}

}  // namespace suslab
