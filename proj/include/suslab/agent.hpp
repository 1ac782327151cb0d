#ifndef SUSLAB_AGENT_HPP_
#define SUSLAB_AGENT_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "suslab/common.hpp"
#include "suslab/encoder.hpp"
#include "suslab/envs.hpp"
#include "suslab/intrinsic.hpp"
#include "suslab/numerics.hpp"
#include "suslab/rng.hpp"
#include "suslab/world_model.hpp"

namespace suslab {

struct PolicyParams {
  NetParams net;  // input: state features, output: action logits
  double temperature = 1.0;
};

PolicyParams make_policy(int feature_dim, int action_count, int hidden_dim, Rng& rng,
                         std::string version_tag = "policy-v1");

// softmax(logits / temperature), numerically stable.
std::vector<double> policy_probs(const PolicyParams& policy, std::span<const double> features);

double distribution_entropy(std::span<const double> probs);

// Exactly K trajectories for one problem plus their group-relative statistics.
struct GroupBatch {
  int problem_id = 0;
  std::vector<Trajectory> trajectories;
  std::vector<double> rewards;     // per-trajectory augmented returns
  std::vector<double> advantages;  // standardized within the group
};

// A_i = (r_i - mean) / (std_pop + 1e-8); all zero when std_pop < 1e-8 so a
// uniformly failing group produces no update pressure.
std::vector<double> group_advantages(std::span<const double> rewards);

struct GrpoResult {
  double loss = 0.0;
  double mean_kl = 0.0;  // (1/K) sum_i (1/T_i) sum_t KL(pi || ref), unscaled
  std::vector<double> grads;
};

// loss = -(1/K) sum_i A_i sum_t log pi(a_t|s_t)
//        + beta * (1/K) sum_i (1/T_i) sum_t KL(pi(.|s_t) || ref(.|s_t))
GrpoResult grpo_loss(const GroupBatch& batch, const PolicyParams& policy,
                     const PolicyParams& reference, double beta_kl);

// ---------------------------------------------------------------------------
// Rollouts (compile-time polymorphic over the environment domain)

namespace stream {
// Fixed stream ids so every draw in a run is a pure function of
// (master seed, purpose, iteration, problem, trajectory).
constexpr uint64_t kProblems = 1;
constexpr uint64_t kInit = 2;
constexpr uint64_t kCurriculum = 3;
constexpr uint64_t kRollout = 4;
constexpr uint64_t kContrastive = 5;
constexpr uint64_t kEval = 6;
constexpr uint64_t kClustering = 7;
}  // namespace stream

template <class Domain>
Trajectory rollout(const PolicyParams& policy, const typename Domain::Problem& problem, Rng rng,
                   bool greedy = false) {
  Trajectory traj;
  traj.problem_id = problem.problem_id;
  typename Domain::State state = Domain::make_reset(problem);
  std::vector<double> features = Domain::features(problem, state);
  bool done = false;
  while (!done) {
    const std::vector<double> probs = policy_probs(policy, features);
    int action = 0;
    if (greedy) {
      action = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    } else {
      const double u = rng.uniform();
      double acc = 0.0;
      action = static_cast<int>(probs.size()) - 1;
      for (std::size_t a = 0; a < probs.size(); ++a) {
        acc += probs[a];
        if (u < acc) {
          action = static_cast<int>(a);
          break;
        }
      }
    }
    const StepResult res = Domain::make_step(problem, state, action);
    std::vector<double> next = Domain::features(problem, state);
    traj.transitions.push_back({std::move(features), action, next, res.r_ext, res.done});
    features = std::move(next);
    done = res.done;
  }
  traj.correct = traj.transitions.back().r_ext == 1.0 ? 1 : 0;
  return traj;
}

// K independent rollouts; trajectory k draws from rng.split(problem_id).split(k).
template <class Domain>
GroupBatch sample_group(const PolicyParams& policy, const typename Domain::Problem& problem, int K,
                        const Rng& rng, bool greedy = false) {
  require(K >= 2, "sample_group: K must be >= 2");
  GroupBatch batch;
  batch.problem_id = problem.problem_id;
  const Rng problem_rng = rng.split(static_cast<uint64_t>(problem.problem_id));
  for (int k = 0; k < K; ++k) {
    batch.trajectories.push_back(
        rollout<Domain>(policy, problem, problem_rng.split(static_cast<uint64_t>(k)), greedy));
  }
  return batch;
}

// ---------------------------------------------------------------------------
// One training iteration

enum class Variant { Baseline, Full, SsOnly, SusOnly, EntropyBonus };
enum class SusMode { Strategy, Success };
enum class SsConvention { Similarity, Dissimilarity };
enum class IntrinsicAggregation { Mean, Sum };

struct TrainOptions {
  Variant variant = Variant::Full;
  SusMode sus_mode = SusMode::Strategy;
  SsConvention ss_convention = SsConvention::Similarity;
  bool gate_on_success = true;
  IntrinsicAggregation aggregation = IntrinsicAggregation::Mean;
  double beta_kl = 0.02;
  double info_nce_temperature = 0.1;
  double momentum = 0.99;
  int contrastive_window = 2;
  int group_size = 8;  // K
  int problems_per_iteration = 32;
};

// Everything mutated across iterations; checkpointable as a unit.
struct TrainerState {
  PolicyParams policy;
  PolicyParams reference;
  NetParams encoder_online;
  NetParams encoder_target;
  WorldModelParams world_model;
  SuccessPredictorParams success_pred;
  OptimizerState policy_opt;
  OptimizerState encoder_opt;
  OptimizerState wm_opt;
  OptimizerState sp_opt;
  RunningStats err_stats;
  IntrinsicWeights weights;
};

struct IterationReport {
  int iteration = 0;
  double mean_r_ext = 0.0;  // fraction of successful trajectories
  double mean_ss = 0.0;
  double mean_sus = 0.0;
  double mean_success_surprise = 0.0;
  double mean_r_int = 0.0;
  double policy_loss = 0.0;
  double kl = 0.0;
  double wm_mse = 0.0;
  double infonce = 0.0;
  double lambda_ss = 0.0;
  double lambda_sus = 0.0;
  std::vector<int> problem_ids;          // sampled problems, in execution order
  std::vector<Trajectory> trajectories;  // breakdowns filled, grouped by problem slot
};

namespace detail {

// Per-trajectory signals shared by the intrinsic sub-steps.
struct TrajectorySignals {
  std::vector<StrategyEmbedding> state_embeddings;
  double success_prob = 0.5;
  double mean_ss_component = 0.0;
  double mean_sus_component = 0.0;
};

void compute_breakdowns(Trajectory& traj, TrajectorySignals& sig, const TrainerState& ts,
                        const RunningStats& frozen_stats, const TrainOptions& opt,
                        std::vector<double>& raw_errors);

double trajectory_return(const Trajectory& traj, const TrainOptions& opt, double alpha);

}  // namespace detail

// Fixed sub-step order: (1) sample groups, (2) breakdowns + augmented rewards,
// (3) advantages, (4) policy update, (5) world-model update, (6) encoder
// contrastive + momentum update, (7) success-predictor update, (8) optional
// weight adaptation, (9) running-stats inserts. The baseline variant skips
// (2) and (6)-(8) and trains on extrinsic rewards alone.
//
// Normalized errors in (2) read the running stats frozen at iteration start;
// (9) inserts this iteration's raw errors afterwards, so within an iteration
// the normalizer is constant and group order cannot leak into results.
template <class Domain>
IterationReport train_iteration(TrainerState& ts,
                                const std::vector<typename Domain::Problem>& train_problems,
                                int iteration, const Rng& master, const TrainOptions& opt) {
  require(!train_problems.empty(), "train_iteration: no training problems");
  IterationReport report;
  report.iteration = iteration;
  const uint64_t iter_id = static_cast<uint64_t>(iteration);

  // (1) sample problems, then K trajectories each
  const int p_count = std::min<int>(opt.problems_per_iteration, static_cast<int>(train_problems.size()));
  Rng cur_rng = master.split(stream::kCurriculum).split(iter_id);
  std::vector<int> order(train_problems.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  for (int i = 0; i < p_count; ++i) {  // partial Fisher-Yates
    const int j = cur_rng.uniform_int(i, static_cast<int>(order.size()) - 1);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  order.resize(static_cast<std::size_t>(p_count));

  const Rng roll_rng = master.split(stream::kRollout).split(iter_id);
  std::vector<GroupBatch> groups;
  groups.reserve(order.size());
  for (int idx : order) {
    const typename Domain::Problem& problem = train_problems[static_cast<std::size_t>(idx)];
    groups.push_back(sample_group<Domain>(ts.policy, problem, opt.group_size, roll_rng));
    report.problem_ids.push_back(problem.problem_id);
  }

  // (2) intrinsic signals and augmented returns
  const bool baseline = opt.variant == Variant::Baseline;
  const RunningStats frozen_stats = ts.err_stats;
  std::vector<double> raw_errors;
  std::vector<detail::TrajectorySignals> signals;
  std::vector<AdaptSample> adapt_rows;
  int traj_count = 0, transition_count = 0;
  for (GroupBatch& g : groups) {
    for (Trajectory& traj : g.trajectories) {
      detail::TrajectorySignals sig;
      if (!baseline) {
        detail::compute_breakdowns(traj, sig, ts, frozen_stats, opt, raw_errors);
        adapt_rows.push_back({sig.mean_ss_component, sig.mean_sus_component,
                              traj.transitions.back().r_ext});
      } else {
        traj.breakdowns.assign(traj.transitions.size(), IntrinsicBreakdown{});
        for (std::size_t t = 0; t < traj.transitions.size(); ++t) {
          traj.breakdowns[t].r_ext = traj.transitions[t].r_ext;
          traj.breakdowns[t].r_total = traj.transitions[t].r_ext;
          traj.breakdowns[t].gated = opt.gate_on_success;
        }
      }
      signals.push_back(std::move(sig));
      ++traj_count;
      transition_count += static_cast<int>(traj.transitions.size());
      for (const IntrinsicBreakdown& bd : traj.breakdowns) {
        report.mean_ss += bd.ss;
        report.mean_sus += bd.sus;
        report.mean_success_surprise += bd.success_surprise;
        report.mean_r_int += bd.r_int;
      }
      report.mean_r_ext += traj.transitions.back().r_ext;
    }
    // (3) group-relative advantages over augmented returns
    g.rewards.clear();
    for (const Trajectory& traj : g.trajectories) {
      g.rewards.push_back(detail::trajectory_return(traj, opt, ts.weights.alpha));
    }
    g.advantages = group_advantages(g.rewards);
  }
  if (traj_count > 0) report.mean_r_ext /= traj_count;
  if (transition_count > 0) {
    report.mean_ss /= transition_count;
    report.mean_sus /= transition_count;
    report.mean_success_surprise /= transition_count;
    report.mean_r_int /= transition_count;
  }

  // (4) policy update: mean GRPO gradient across groups
  std::vector<double> policy_grads(ts.policy.net.values.size(), 0.0);
  const double inv_groups = groups.empty() ? 0.0 : 1.0 / static_cast<double>(groups.size());
  for (const GroupBatch& g : groups) {
    const GrpoResult res = grpo_loss(g, ts.policy, ts.reference, opt.beta_kl);
    report.policy_loss += res.loss * inv_groups;
    report.kl += res.mean_kl * inv_groups;
    for (std::size_t i = 0; i < policy_grads.size(); ++i) policy_grads[i] += res.grads[i] * inv_groups;
  }
  adam_step(ts.policy.net, policy_grads, ts.policy_opt);

  // (5) world-model update on this iteration's transitions
  std::vector<WmSample> wm_batch;
  for (const GroupBatch& g : groups) {
    for (const Trajectory& traj : g.trajectories) {
      for (const Transition& t : traj.transitions) {
        wm_batch.push_back({t.features, t.action, t.next_features});
      }
    }
  }
  if (!wm_batch.empty()) report.wm_mse = train_world_model(ts.world_model, wm_batch, ts.wm_opt);

  if (!baseline) {
    // (6) encoder contrastive step, then momentum target update
    std::vector<Trajectory> flat;
    for (const GroupBatch& g : groups) {
      for (const Trajectory& traj : g.trajectories) flat.push_back(traj);
    }
    Rng con_rng = master.split(stream::kContrastive).split(iter_id);
    const ContrastiveBatch cb = build_contrastive_batch(flat, opt.contrastive_window, con_rng);
    if (!cb.empty() && cb.size() >= 2) {
      const InfoNceResult nce =
          info_nce_loss(ts.encoder_online, ts.encoder_target, cb, opt.info_nce_temperature);
      report.infonce = nce.loss;
      adam_step(ts.encoder_online, nce.grads, ts.encoder_opt);
    }
    momentum_update(ts.encoder_online, ts.encoder_target, opt.momentum);

    // (7) success-predictor update on (query embedding, c)
    std::vector<SpSample> sp_batch;
    std::size_t sig_idx = 0;
    for (const GroupBatch& g : groups) {
      for (const Trajectory& traj : g.trajectories) {
        sp_batch.push_back({signals[sig_idx].state_embeddings.front(), traj.correct});
        ++sig_idx;
      }
    }
    if (!sp_batch.empty()) train_success_predictor(ts.success_pred, sp_batch, ts.sp_opt);

    // (8) weight adaptation on per-trajectory component/reward correlation
    if (opt.variant != Variant::EntropyBonus) {
      ts.weights = adapt_weights(ts.weights, adapt_rows);
    }

    // (9) running-stats inserts, canonical order
    for (double e : raw_errors) ts.err_stats.push(e);
  }

  report.lambda_ss = ts.weights.lambda_ss;
  report.lambda_sus = ts.weights.lambda_sus;
  for (GroupBatch& g : groups) {
    for (Trajectory& traj : g.trajectories) report.trajectories.push_back(std::move(traj));
  }
  return report;
}

}  // namespace suslab

#endif  // SUSLAB_AGENT_HPP_
