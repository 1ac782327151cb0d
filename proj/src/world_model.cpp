#include "suslab/world_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "suslab/common.hpp"

namespace suslab {

namespace {

std::vector<double> concat_state_action(std::span<const double> features, int action,
                                        int action_count) {
  std::vector<double> in(features.size() + static_cast<std::size_t>(action_count), 0.0);
  std::copy(features.begin(), features.end(), in.begin());
  in[features.size() + static_cast<std::size_t>(action)] = 1.0;
  return in;
}

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

WorldModelParams make_world_model(int feature_dim, int action_count, int hidden_dim, Rng& rng) {
  WorldModelParams wm;
  wm.action_count = action_count;
  wm.net = init_net({feature_dim + action_count, hidden_dim, hidden_dim, feature_dim}, true, rng,
                    "worldmodel-v1");
  return wm;
}

std::vector<double> predict_next(const WorldModelParams& wm, std::span<const double> state_features,
                                 int action) {
  if (action < 0 || action >= wm.action_count) {
    std::ostringstream os;
    os << "predict_next: action " << action << " outside [0, " << wm.action_count << ")";
    throw ContractViolation(os.str());
  }
  return forward_mlp(wm.net, concat_state_action(state_features, action, wm.action_count)).output;
}

double prediction_error(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) {
    std::ostringstream os;
    os << "prediction_error: length mismatch (" << predicted.size() << " vs " << actual.size() << ")";
    throw ContractViolation(os.str());
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - actual[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double train_world_model(WorldModelParams& wm, std::span<const WmSample> batch,
                         OptimizerState& opt) {
  require(!batch.empty(), "train_world_model: empty batch");
  const double inv_count =
      1.0 / (static_cast<double>(batch.size()) * static_cast<double>(wm.feature_dim()));
  std::vector<double> grads(wm.net.values.size(), 0.0);
  double mse = 0.0;
  for (const WmSample& s : batch) {
    const ForwardCache cache =
        forward_mlp(wm.net, concat_state_action(s.state, s.action, wm.action_count));
    require(s.next_state.size() == cache.output.size(), "train_world_model: next-state length mismatch");
    std::vector<double> g(cache.output.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double d = cache.output[k] - s.next_state[k];
      mse += d * d * inv_count;
      g[k] = 2.0 * d * inv_count;
    }
    const std::vector<double> sample_grads = backward_mlp(wm.net, cache, g);
    for (std::size_t k = 0; k < grads.size(); ++k) grads[k] += sample_grads[k];
  }
  adam_step(wm.net, grads, opt);
  return mse;
}

SuccessPredictorParams make_success_predictor(int embedding_dim, int hidden_dim, Rng& rng) {
  SuccessPredictorParams sp;
  sp.net = init_net({embedding_dim, hidden_dim, hidden_dim, 1}, true, rng, "successpred-v1");
  return sp;
}

double predict_success(const SuccessPredictorParams& sp, const StrategyEmbedding& query) {
  const double logit = forward_mlp(sp.net, query.values).output[0];
  return std::clamp(stable_sigmoid(logit), 1e-7, 1.0 - 1e-7);
}

double train_success_predictor(SuccessPredictorParams& sp, std::span<const SpSample> batch,
                               OptimizerState& opt) {
  require(!batch.empty(), "train_success_predictor: empty batch");
  std::vector<double> grads(sp.net.values.size(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double bce = 0.0;
  for (const SpSample& s : batch) {
    require(s.correct == 0 || s.correct == 1, "train_success_predictor: c must be 0 or 1");
    const ForwardCache cache = forward_mlp(sp.net, s.query.values);
    const double logit = cache.output[0];
    // BCE(logit, c) = softplus(logit) - c * logit, gradient sigmoid(logit) - c.
    bce += (softplus(logit) - static_cast<double>(s.correct) * logit) * inv_b;
    const std::vector<double> g = {(stable_sigmoid(logit) - static_cast<double>(s.correct)) * inv_b};
    const std::vector<double> sample_grads = backward_mlp(sp.net, cache, g);
    for (std::size_t k = 0; k < grads.size(); ++k) grads[k] += sample_grads[k];
  }
  adam_step(sp.net, grads, opt);
  return bce;
}

}  // namespace suslab
