#ifndef SUSLAB_WORLD_MODEL_HPP_
#define SUSLAB_WORLD_MODEL_HPP_

#include <span>
#include <vector>

#include "suslab/embedding.hpp"
#include "suslab/numerics.hpp"
#include "suslab/rng.hpp"

namespace suslab {

// Forward dynamics in feature space: input is state features concatenated
// with a one-hot action, output the next feature vector.
struct WorldModelParams {
  NetParams net;
  int action_count = 0;

  int feature_dim() const { return net.output_dim(); }
};

WorldModelParams make_world_model(int feature_dim, int action_count, int hidden_dim, Rng& rng);

std::vector<double> predict_next(const WorldModelParams& wm, std::span<const double> state_features,
                                 int action);

// Euclidean distance between prediction and observation.
double prediction_error(std::span<const double> predicted, std::span<const double> actual);

struct WmSample {
  std::vector<double> state;
  int action = 0;
  std::vector<double> next_state;
};

// One Adam step on mean squared error (mean over samples and output dims);
// returns the pre-update batch MSE.
double train_world_model(WorldModelParams& wm, std::span<const WmSample> batch,
                         OptimizerState& opt);

// Trajectory-success probability from the query (initial state) embedding.
struct SuccessPredictorParams {
  NetParams net;  // input: strategy embedding, output: 1 logit
};

SuccessPredictorParams make_success_predictor(int embedding_dim, int hidden_dim, Rng& rng);

// sigmoid(logit), clamped to [1e-7, 1 - 1e-7] so downstream |c - p| stays in
// the open interval.
double predict_success(const SuccessPredictorParams& sp, const StrategyEmbedding& query);

struct SpSample {
  StrategyEmbedding query;
  int correct = 0;  // c in {0, 1}
};

// One Adam step on mean binary cross-entropy; returns the pre-update BCE.
double train_success_predictor(SuccessPredictorParams& sp, std::span<const SpSample> batch,
                               OptimizerState& opt);

}  // namespace suslab

#endif  // SUSLAB_WORLD_MODEL_HPP_
