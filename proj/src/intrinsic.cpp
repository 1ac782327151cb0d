#include "suslab/intrinsic.hpp"

#include <algorithm>
#include <cmath>

#include "suslab/common.hpp"
#include "suslab/numerics.hpp"

namespace suslab {

void RunningStats::push(double x) {
  count += 1;
  const double delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (x - mean);
}

double RunningStats::stddev() const { return std::sqrt(std::max(0.0, variance())); }

double strategy_stability(const StrategyEmbedding& z_pre, const StrategyEmbedding& z_post) {
  const double cos = cosine_similarity(z_pre.values, z_post.values);
  return std::clamp(cos, -1.0, 1.0);
}

double strategy_surprise(double pred_error_norm, double ss) {
  require(pred_error_norm >= 0.0, "strategy_surprise: prediction error must be nonnegative");
  require(ss >= -1.0 && ss <= 1.0, "strategy_surprise: ss outside [-1, 1]");
  return pred_error_norm * (1.0 - ss);
}

double success_surprise(int c, double p) {
  require(c == 0 || c == 1, "success_surprise: c must be 0 or 1");
  require(p > 0.0 && p < 1.0, "success_surprise: p must lie in (0, 1)");
  return std::abs(static_cast<double>(c) - p);
}

double combined_intrinsic(double ss_component, double sus_component, const IntrinsicWeights& w) {
  return w.lambda_ss * ss_component + w.lambda_sus * sus_component;
}

double augment_reward(double r_ext, double r_int, double alpha, bool gate_on_success, int c) {
  if (gate_on_success && c == 0) return r_ext;
  return r_ext + alpha * r_int;
}

double normalize_error_frozen(const RunningStats& stats, double raw_error) {
  require(raw_error >= 0.0, "normalize_error: raw error must be nonnegative");
  double scaled = raw_error;
  if (stats.count >= 2) scaled = raw_error / (stats.stddev() + 1e-8);
  return std::clamp(scaled, 0.0, kErrorClip);
}

double normalize_error(RunningStats& stats, double raw_error) {
  require(raw_error >= 0.0, "normalize_error: raw error must be nonnegative");
  stats.push(raw_error);
  return normalize_error_frozen(stats, raw_error);
}

namespace {

// Pearson correlation, 0 when either side is (numerically) constant.
double correlation(std::span<const AdaptSample> batch, double AdaptSample::*field) {
  const double n = static_cast<double>(batch.size());
  double mx = 0.0, my = 0.0;
  for (const AdaptSample& s : batch) {
    mx += s.*field;
    my += s.r_ext;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const AdaptSample& s : batch) {
    const double dx = s.*field - mx;
    const double dy = s.r_ext - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  sxx /= n;
  syy /= n;
  sxy /= n;
  if (sxx < 1e-12 || syy < 1e-12) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

IntrinsicWeights adapt_weights(const IntrinsicWeights& w, std::span<const AdaptSample> batch) {
  if (!w.adaptation_enabled || batch.size() < 4) return w;
  IntrinsicWeights out = w;
  const double rho_ss = correlation(batch, &AdaptSample::ss);
  const double rho_sus = correlation(batch, &AdaptSample::sus);
  out.lambda_ss = std::clamp(w.lambda_ss * std::exp(w.eta * rho_ss), w.lambda_min, w.lambda_max);
  out.lambda_sus = std::clamp(w.lambda_sus * std::exp(w.eta * rho_sus), w.lambda_min, w.lambda_max);
  return out;
}

}  // namespace suslab
