#ifndef SUSLAB_TESTS_TEST_UTIL_HPP_
#define SUSLAB_TESTS_TEST_UTIL_HPP_

#include <cmath>
#include <functional>
#include <vector>

#include "suslab/numerics.hpp"
#include "suslab/rng.hpp"

namespace suslab::testutil {

// Central finite differences of a scalar loss over a parameter vector.
inline std::vector<double> finite_diff_grad(std::vector<double>& params,
                                            const std::function<double()>& loss, double h) {
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = loss();
    params[i] = saved - h;
    const double down = loss();
    params[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

inline double max_rel_err(const std::vector<double>& a, const std::vector<double>& b,
                          double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

// Random net + input whose ReLU pre-activations stay clear of the kink, so
// finite differences are trustworthy.
inline std::pair<NetParams, std::vector<double>> net_away_from_kinks(
    std::vector<int> sizes, Rng& rng, double margin = 1e-3, int max_tries = 200) {
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    Rng net_rng = rng.split(static_cast<uint64_t>(attempt));
    NetParams net = init_net(sizes, true, net_rng, "test");
    std::vector<double> input(static_cast<std::size_t>(sizes.front()));
    for (double& v : input) v = net_rng.uniform(-1.0, 1.0);
    const ForwardCache cache = forward_mlp(net, input);
    bool clean = true;
    for (const auto& layer : cache.relu_inputs) {
      for (double v : layer) clean = clean && std::abs(v) > margin;
    }
    if (clean) return {std::move(net), std::move(input)};
  }
  throw std::runtime_error("net_away_from_kinks: no clean sample found");
}

}  // namespace suslab::testutil

#endif  // SUSLAB_TESTS_TEST_UTIL_HPP_
