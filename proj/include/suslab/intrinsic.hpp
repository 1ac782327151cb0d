#ifndef SUSLAB_INTRINSIC_HPP_
#define SUSLAB_INTRINSIC_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "suslab/embedding.hpp"

namespace suslab {

// Prediction-error clip applied after normalization, before the strategy
// surprise product: unbounded spikes would swamp the weighted mix.
constexpr double kErrorClip = 10.0;

// Per-transition record of every intrinsic signal. `ss` always stores the
// raw embedding cosine; convention and mode flags only change what enters
// r_int, so all four signals stay unambiguous in the logs.
struct IntrinsicBreakdown {
  double ss = 0.0;                // cosine(z_pre, z_post), clamped to [-1, 1]
  double pred_error = 0.0;        // raw ||s_hat - s'||
  double pred_error_norm = 0.0;   // normalized + clipped error used in sus
  double sus = 0.0;               // pred_error_norm * (1 - ss)
  double success_surprise = 0.0;  // |c - P(query)|, trajectory-level
  double r_int = 0.0;
  double r_ext = 0.0;
  double r_total = 0.0;
  bool gated = false;
};

struct IntrinsicWeights {
  double lambda_ss = 1.0;
  double lambda_sus = 0.0;
  double alpha = 0.3;
  bool adaptation_enabled = false;
  double eta = 0.05;
  double lambda_min = 0.0;
  double lambda_max = 4.0;
};

// Welford accumulator; population variance.
struct RunningStats {
  int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x);
  double variance() const { return count > 0 ? m2 / static_cast<double>(count) : 0.0; }
  double stddev() const;
};

// Eq-style cosine stability of a transition; inputs are unit embeddings so
// this is their dot product, clamped into [-1, 1] against rounding spill.
double strategy_stability(const StrategyEmbedding& z_pre, const StrategyEmbedding& z_post);

// Prediction error x strategy dissimilarity.
double strategy_surprise(double pred_error_norm, double ss);

// |c - p| mismatch between realized and predicted trajectory correctness.
double success_surprise(int c, double p);

double combined_intrinsic(double ss_component, double sus_component, const IntrinsicWeights& w);

// gate off: r_ext + alpha * r_int; gate on: intrinsic term only when c = 1.
double augment_reward(double r_ext, double r_int, double alpha, bool gate_on_success, int c);

// Updates stats with raw_error, then scales by the running std (1e-8 guard).
// Unscaled while count < 2; result clipped to [0, kErrorClip].
double normalize_error(RunningStats& stats, double raw_error);

// Scale against a frozen snapshot without mutating it; same warm-up and clip
// rules. The trainer reads last iteration's stats here and batches the
// inserts at the end of the iteration.
double normalize_error_frozen(const RunningStats& stats, double raw_error);

struct AdaptSample {
  double ss = 0.0;
  double sus = 0.0;
  double r_ext = 0.0;
};

// Bounded exponentiated-gradient step on the correlation between each
// component and extrinsic reward. Identity when disabled or batch < 4.
IntrinsicWeights adapt_weights(const IntrinsicWeights& w, std::span<const AdaptSample> batch);

}  // namespace suslab

#endif  // SUSLAB_INTRINSIC_HPP_
