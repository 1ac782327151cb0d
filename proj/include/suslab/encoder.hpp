#ifndef SUSLAB_ENCODER_HPP_
#define SUSLAB_ENCODER_HPP_

#include <span>
#include <vector>

#include "suslab/embedding.hpp"
#include "suslab/envs.hpp"
#include "suslab/numerics.hpp"
#include "suslab/rng.hpp"

namespace suslab {

// Three-layer MLP (ReLU + layer norm on hidden layers) with a final L2
// normalization onto the unit sphere.
NetParams make_encoder_net(int feature_dim, int hidden_dim, int embedding_dim, Rng& rng,
                           std::string version_tag);

// Deterministic embedding of one state. A zero pre-normalization output maps
// to the fixed basis vector e1 so degenerate initializations cannot abort
// a run.
StrategyEmbedding encode(const NetParams& online_params, std::span<const double> features);

// Anchor/positive feature pairs; negatives are in-batch positives from other
// trajectories. An empty batch (< 2 usable trajectories) tells the caller to
// skip the update.
struct ContrastiveBatch {
  std::vector<std::vector<double>> anchors;
  std::vector<std::vector<double>> positives;
  std::vector<int> trajectory_ids;

  std::size_t size() const { return anchors.size(); }
  bool empty() const { return anchors.empty(); }
};

// Samples at most one anchor per trajectory; the positive is a state 1..window
// steps later in the same trajectory. Trajectories with < 2 transitions are
// skipped.
ContrastiveBatch build_contrastive_batch(std::span<const Trajectory> trajectories, int window,
                                         Rng& rng);

struct InfoNceResult {
  double loss = 0.0;
  std::vector<double> grads;  // w.r.t. online parameters only
};

// loss = -(1/B) sum_i log softmax_i(sim(a_i, p_j)/tau); anchors through the
// online encoder, positives through the frozen momentum target.
InfoNceResult info_nce_loss(const NetParams& online, const NetParams& target,
                            const ContrastiveBatch& batch, double temperature);

// target <- m * target + (1 - m) * online, elementwise.
void momentum_update(const NetParams& online, NetParams& target, double m);

// Unit-normalized mean of the per-state embeddings over all visited states.
StrategyEmbedding trajectory_embedding(const NetParams& encoder, const Trajectory& trajectory);

}  // namespace suslab

#endif  // SUSLAB_ENCODER_HPP_
