#include "suslab/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "suslab/common.hpp"

namespace suslab {

namespace {

StrategyEmbedding normalize_or_e1(std::vector<double> v) {
  const double n = l2_norm(v);
  if (n < 1e-12) {
    std::fill(v.begin(), v.end(), 0.0);
    if (!v.empty()) v[0] = 1.0;
    return StrategyEmbedding{std::move(v)};
  }
  for (double& x : v) x /= n;
  return StrategyEmbedding{std::move(v)};
}

// State i of a trajectory: i = 0 is the initial observation, i >= 1 the
// post-state of transition i-1.
const std::vector<double>& state_at(const Trajectory& t, std::size_t i) {
  return i == 0 ? t.transitions.front().features : t.transitions[i - 1].next_features;
}

}  // namespace

NetParams make_encoder_net(int feature_dim, int hidden_dim, int embedding_dim, Rng& rng,
                           std::string version_tag) {
  return init_net({feature_dim, hidden_dim, hidden_dim, embedding_dim}, true, rng,
                  std::move(version_tag));
}

StrategyEmbedding encode(const NetParams& online_params, std::span<const double> features) {
  ForwardCache cache = forward_mlp(online_params, features);
  return normalize_or_e1(std::move(cache.output));
}

ContrastiveBatch build_contrastive_batch(std::span<const Trajectory> trajectories, int window,
                                         Rng& rng) {
  require(window >= 1, "build_contrastive_batch: window must be >= 1");
  ContrastiveBatch batch;
  int usable = 0;
  for (const Trajectory& t : trajectories) {
    if (t.transitions.size() >= 2) ++usable;
  }
  if (usable < 2) return batch;  // empty-batch signal: caller skips the update

  for (std::size_t ti = 0; ti < trajectories.size(); ++ti) {
    const Trajectory& t = trajectories[ti];
    const int n_states = static_cast<int>(t.transitions.size()) + 1;
    if (t.transitions.size() < 2) continue;
    const int anchor = rng.uniform_int(0, n_states - 2);
    const int max_delta = std::min(window, n_states - 1 - anchor);
    const int delta = rng.uniform_int(1, max_delta);
    batch.anchors.push_back(state_at(t, static_cast<std::size_t>(anchor)));
    batch.positives.push_back(state_at(t, static_cast<std::size_t>(anchor + delta)));
    batch.trajectory_ids.push_back(static_cast<int>(ti));
  }
  return batch;
}

InfoNceResult info_nce_loss(const NetParams& online, const NetParams& target,
                            const ContrastiveBatch& batch, double temperature) {
  const std::size_t b = batch.size();
  require(b >= 2, "info_nce_loss: batch size must be >= 2 (no negatives exist)");
  require(temperature > 0.0, "info_nce_loss: temperature must be positive");

  // Anchors through the online encoder (with caches for backprop), positives
  // through the fixed target.
  std::vector<ForwardCache> caches(b);
  std::vector<StrategyEmbedding> anchors(b), positives(b);
  std::vector<double> anchor_prenorm(b);
  for (std::size_t i = 0; i < b; ++i) {
    caches[i] = forward_mlp(online, batch.anchors[i]);
    anchor_prenorm[i] = l2_norm(caches[i].output);
    anchors[i] = normalize_or_e1(caches[i].output);
    positives[i] = encode(target, batch.positives[i]);
  }

  const double inv_tau = 1.0 / temperature;
  InfoNceResult result;
  result.grads.assign(online.values.size(), 0.0);

  for (std::size_t i = 0; i < b; ++i) {
    std::vector<double> logits(b);
    double max_logit = -1e300;
    for (std::size_t j = 0; j < b; ++j) {
      logits[j] = dot(anchors[i].values, positives[j].values) * inv_tau;
      max_logit = std::max(max_logit, logits[j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < b; ++j) denom += std::exp(logits[j] - max_logit);
    const double log_denom = std::log(denom) + max_logit;
    result.loss += log_denom - logits[i];

    // d loss_i / d z_i = (1/tau) (sum_j softmax_j p_j - p_i), then through the
    // unit normalization and the MLP.
    const std::size_t d = anchors[i].values.size();
    std::vector<double> gz(d, 0.0);
    for (std::size_t j = 0; j < b; ++j) {
      const double w = std::exp(logits[j] - log_denom) - (i == j ? 1.0 : 0.0);
      for (std::size_t k = 0; k < d; ++k) gz[k] += w * positives[j].values[k];
    }
    for (double& v : gz) v *= inv_tau / static_cast<double>(b);

    if (anchor_prenorm[i] >= 1e-12) {  // degenerate e1 outputs carry no gradient
      const double zg = dot(anchors[i].values, gz);
      std::vector<double> gy(d);
      for (std::size_t k = 0; k < d; ++k) {
        gy[k] = (gz[k] - anchors[i].values[k] * zg) / anchor_prenorm[i];
      }
      const std::vector<double> g = backward_mlp(online, caches[i], gy);
      for (std::size_t k = 0; k < g.size(); ++k) result.grads[k] += g[k];
    }
  }
  result.loss /= static_cast<double>(b);
  return result;
}

void momentum_update(const NetParams& online, NetParams& target, double m) {
  require(m >= 0.0 && m <= 1.0, "momentum_update: m must lie in [0, 1]");
  if (online.layer_sizes != target.layer_sizes || online.values.size() != target.values.size()) {
    throw ContractViolation("momentum_update: online/target shape mismatch");
  }
  for (std::size_t i = 0; i < target.values.size(); ++i) {
    target.values[i] = m * target.values[i] + (1.0 - m) * online.values[i];
  }
}

StrategyEmbedding trajectory_embedding(const NetParams& encoder, const Trajectory& trajectory) {
  require(!trajectory.transitions.empty(), "trajectory_embedding: empty trajectory");
  const std::size_t n_states = trajectory.transitions.size() + 1;
  std::vector<double> mean(static_cast<std::size_t>(encoder.output_dim()), 0.0);
  for (std::size_t i = 0; i < n_states; ++i) {
    const StrategyEmbedding z = encode(encoder, state_at(trajectory, i));
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += z.values[k];
  }
  for (double& v : mean) v /= static_cast<double>(n_states);
  return normalize_or_e1(std::move(mean));
}

}  // namespace suslab
