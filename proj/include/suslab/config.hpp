#ifndef SUSLAB_CONFIG_HPP_
#define SUSLAB_CONFIG_HPP_

#include <string>
#include <vector>

#include "suslab/agent.hpp"
#include "suslab/envs.hpp"
#include "suslab/intrinsic.hpp"

namespace suslab {

enum class EnvKind { ArithChain, MultiPathGrid };
enum class WeightPreset { Table3, Sensitivity, Custom };

struct LearningRates {
  double policy = 0.02;
  double encoder = 1e-3;
  double world_model = 1e-3;
  double success_predictor = 1e-3;
};

struct EnvConfig {
  EnvKind kind = EnvKind::ArithChain;
  ArithChainDifficulty difficulty;
  int train_problems = 64;
  int eval_problems = 200;
  int grid_n = 5;
};

// Full description of one experiment; the whole pipeline is a deterministic
// function of (config, seed).
struct ExperimentConfig {
  Variant variant = Variant::Full;
  EnvConfig env;
  int group_size = 8;  // K, trajectories per problem
  int iterations = 300;
  int problems_per_iteration = 32;
  int eval_every = 50;
  int eval_samples = 8;
  double eval_temperature = 1.0;
  std::vector<int> seeds = {1, 2, 3, 4, 5};
  WeightPreset preset = WeightPreset::Sensitivity;
  IntrinsicWeights weights;
  SusMode sus_mode = SusMode::Strategy;
  SsConvention ss_convention = SsConvention::Similarity;
  bool gate_on_success = true;
  IntrinsicAggregation aggregation = IntrinsicAggregation::Mean;
  double beta_kl = 0.02;
  LearningRates learning_rates;
  int embedding_dim = 128;
  int hidden_dim = 64;
  int policy_hidden_dim = 32;
  double policy_temperature = 1.0;
  double info_nce_temperature = 0.1;
  double momentum = 0.99;
  int contrastive_window = 2;
  int reference_refresh_interval = 0;  // 0 = frozen initial reference
  int breakdown_every = 50;            // per-transition CSV cadence
  int sweep_iterations = 0;            // 0 = iterations / 4
  std::string out_dir = "runs";

  TrainOptions train_options() const;
};

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// Applies the named preset's weight defaults, then explicit overrides, then
// validates every cross-field invariant. Unknown keys are listed in the error.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);

std::string dump_config(const ExperimentConfig& cfg);

// Throws ConfigError naming the field and rule on violation.
void validate_config(const ExperimentConfig& cfg);

// The ablation suite derives per-variant configs from one base.
ExperimentConfig with_variant(const ExperimentConfig& base, Variant v);

}  // namespace suslab

#endif  // SUSLAB_CONFIG_HPP_
