#include "suslab/agent.hpp"

#include <cmath>

namespace suslab {

PolicyParams make_policy(int feature_dim, int action_count, int hidden_dim, Rng& rng,
                         std::string version_tag) {
  PolicyParams p;
  p.net = init_net({feature_dim, hidden_dim, hidden_dim, action_count}, true, rng,
                   std::move(version_tag));
  return p;
}

std::vector<double> policy_probs(const PolicyParams& policy, std::span<const double> features) {
  require(policy.temperature > 0.0, "policy_probs: temperature must be positive");
  std::vector<double> logits = forward_mlp(policy.net, features).output;
  double max_logit = -1e300;
  for (double& v : logits) {
    v /= policy.temperature;
    max_logit = std::max(max_logit, v);
  }
  double denom = 0.0;
  for (double v : logits) denom += std::exp(v - max_logit);
  std::vector<double> probs(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) probs[i] = std::exp(logits[i] - max_logit) / denom;
  return probs;
}

double distribution_entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::vector<double> group_advantages(std::span<const double> rewards) {
  require(rewards.size() >= 2, "group_advantages: need at least 2 rewards");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;
  const double std_pop = std::sqrt(var);
  std::vector<double> adv(rewards.size(), 0.0);
  if (std_pop < 1e-8) return adv;  // uniformly (un)rewarded group: no pressure
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / (std_pop + 1e-8);
  return adv;
}

GrpoResult grpo_loss(const GroupBatch& batch, const PolicyParams& policy,
                     const PolicyParams& reference, double beta_kl) {
  const std::size_t K = batch.trajectories.size();
  require(K >= 1, "grpo_loss: empty group");
  require(batch.advantages.size() == K, "grpo_loss: advantages not filled");

  GrpoResult result;
  result.grads.assign(policy.net.values.size(), 0.0);
  const double inv_k = 1.0 / static_cast<double>(K);
  const double inv_tau = 1.0 / policy.temperature;

  for (std::size_t i = 0; i < K; ++i) {
    const Trajectory& traj = batch.trajectories[i];
    const double advantage = batch.advantages[i];
    const double inv_t = traj.transitions.empty() ? 0.0 : 1.0 / static_cast<double>(traj.transitions.size());
    for (const Transition& tr : traj.transitions) {
      const ForwardCache cache = forward_mlp(policy.net, tr.features);
      const std::size_t n_actions = cache.output.size();

      // log softmax of the scaled logits for both policies
      auto log_probs = [&](const std::vector<double>& logits, double temp_inv) {
        std::vector<double> lp(logits.size());
        double max_l = -1e300;
        for (std::size_t a = 0; a < logits.size(); ++a) {
          lp[a] = logits[a] * temp_inv;
          max_l = std::max(max_l, lp[a]);
        }
        double denom = 0.0;
        for (double v : lp) denom += std::exp(v - max_l);
        const double log_denom = std::log(denom) + max_l;
        for (double& v : lp) v -= log_denom;
        return lp;
      };
      const std::vector<double> lp = log_probs(cache.output, inv_tau);
      const std::vector<double> ref_logits = forward_mlp(reference.net, tr.features).output;
      const std::vector<double> ref_lp = log_probs(ref_logits, 1.0 / reference.temperature);

      double kl = 0.0;
      for (std::size_t a = 0; a < n_actions; ++a) kl += std::exp(lp[a]) * (lp[a] - ref_lp[a]);
      result.mean_kl += kl * inv_t * inv_k;
      result.loss += -advantage * lp[static_cast<std::size_t>(tr.action)] * inv_k;

      std::vector<double> g_logits(n_actions, 0.0);
      bool any = false;
      for (std::size_t a = 0; a < n_actions; ++a) {
        const double pi_a = std::exp(lp[a]);
        double g = 0.0;
        if (advantage != 0.0) {
          const double indicator = a == static_cast<std::size_t>(tr.action) ? 1.0 : 0.0;
          g += -advantage * inv_k * (indicator - pi_a) * inv_tau;
        }
        if (beta_kl != 0.0) {
          g += beta_kl * inv_k * inv_t * pi_a * ((lp[a] - ref_lp[a]) - kl) * inv_tau;
        }
        g_logits[a] = g;
        any = any || g != 0.0;
      }
      if (any) {
        const std::vector<double> g = backward_mlp(policy.net, cache, g_logits);
        for (std::size_t k = 0; k < g.size(); ++k) result.grads[k] += g[k];
      }
    }
  }
  result.loss += beta_kl * result.mean_kl;
  return result;
}

namespace detail {

void compute_breakdowns(Trajectory& traj, TrajectorySignals& sig, const TrainerState& ts,
                        const RunningStats& frozen_stats, const TrainOptions& opt,
                        std::vector<double>& raw_errors) {
  const std::size_t n_trans = traj.transitions.size();
  require(n_trans >= 1, "compute_breakdowns: empty trajectory");
  sig.state_embeddings.resize(n_trans + 1);
  sig.state_embeddings[0] = encode(ts.encoder_online, traj.transitions[0].features);
  for (std::size_t t = 0; t < n_trans; ++t) {
    sig.state_embeddings[t + 1] = encode(ts.encoder_online, traj.transitions[t].next_features);
  }
  sig.success_prob = predict_success(ts.success_pred, sig.state_embeddings[0]);
  const double succ_sur = success_surprise(traj.correct, sig.success_prob);

  traj.breakdowns.assign(n_trans, IntrinsicBreakdown{});
  for (std::size_t t = 0; t < n_trans; ++t) {
    const Transition& tr = traj.transitions[t];
    IntrinsicBreakdown& bd = traj.breakdowns[t];
    bd.ss = strategy_stability(sig.state_embeddings[t], sig.state_embeddings[t + 1]);
    const std::vector<double> predicted = predict_next(ts.world_model, tr.features, tr.action);
    bd.pred_error = prediction_error(predicted, tr.next_features);
    raw_errors.push_back(bd.pred_error);
    bd.pred_error_norm = normalize_error_frozen(frozen_stats, bd.pred_error);
    bd.sus = strategy_surprise(bd.pred_error_norm, bd.ss);
    bd.success_surprise = succ_sur;

    const double ss_component = opt.ss_convention == SsConvention::Similarity ? bd.ss : 1.0 - bd.ss;
    const double sus_component = opt.sus_mode == SusMode::Strategy ? bd.sus : bd.success_surprise;
    sig.mean_ss_component += ss_component / static_cast<double>(n_trans);
    sig.mean_sus_component += sus_component / static_cast<double>(n_trans);

    if (opt.variant == Variant::EntropyBonus) {
      bd.r_int = distribution_entropy(policy_probs(ts.policy, tr.features));
    } else {
      bd.r_int = combined_intrinsic(ss_component, sus_component, ts.weights);
    }
    bd.r_ext = tr.r_ext;
    bd.gated = opt.gate_on_success;
    bd.r_total = augment_reward(tr.r_ext, bd.r_int, ts.weights.alpha, opt.gate_on_success, traj.correct);
  }
}

double trajectory_return(const Trajectory& traj, const TrainOptions& opt, double alpha) {
  const double terminal = traj.transitions.back().r_ext;
  if (opt.variant == Variant::Baseline) return terminal;
  if (opt.gate_on_success && traj.correct == 0) return terminal;
  double intrinsic = 0.0;
  for (const IntrinsicBreakdown& bd : traj.breakdowns) intrinsic += bd.r_int;
  if (opt.aggregation == IntrinsicAggregation::Mean && !traj.breakdowns.empty()) {
    intrinsic /= static_cast<double>(traj.breakdowns.size());
  }
  return terminal + alpha * intrinsic;
}

}  // namespace detail

}  // namespace suslab
