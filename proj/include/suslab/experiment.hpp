#ifndef SUSLAB_EXPERIMENT_HPP_
#define SUSLAB_EXPERIMENT_HPP_

#include <map>
#include <string>
#include <vector>

#include "suslab/agent.hpp"
#include "suslab/config.hpp"
#include "suslab/metrics.hpp"

namespace suslab {

struct SeedResult {
  int seed = 0;
  double pass1 = 0.0;  // final evaluation
  double pass5 = 0.0;
  double entropy = 0.0;
  bool failed = false;
  std::string error;
};

struct RunReport {
  std::vector<SeedResult> seeds;
  double mean_pass1 = 0.0, std_pass1 = 0.0;
  double mean_pass5 = 0.0, std_pass5 = 0.0;
  double mean_entropy = 0.0, std_entropy = 0.0;
};

// Full training plus periodic evaluation for one seed; CSVs, problem sets and
// the final checkpoint land under seed_dir. resume_dir, when nonempty, points
// at a checkpoint directory and continues that run bit-exactly.
SeedResult run_single_seed(const ExperimentConfig& cfg, int seed, const std::string& seed_dir,
                           const std::string& resume_dir = "");

// All seeds under out_dir/<variant>/seed-<n>/; a failing seed is recorded and
// the rest proceed.
RunReport run_experiment(const ExperimentConfig& cfg);

struct AblationReport {
  CsvTable table;  // variant, pass1, pass5, delta_vs_full
  std::map<std::string, RunReport> by_variant;
  bool full_ge_ss_only = false;  // directional flags on mean pass@5
  bool full_ge_sus_only = false;
  bool ss_only_ge_baseline = false;
  bool sus_only_ge_baseline = false;
};

// full, ss_only, sus_only, baseline over the shared seed list.
AblationReport run_ablation_suite(const ExperimentConfig& base);

struct SweepReport {
  CsvTable table;  // lambda1, lambda2, seed, pass1, pass5
};

// One reduced-budget run per (lambda1, lambda2) grid point per seed.
SweepReport sweep_lambda(const ExperimentConfig& base, const std::vector<double>& grid1,
                         const std::vector<double>& grid2);

int sweep_budget(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Checkpoint bundle: six networks, optimizer states, running stats, weights
// and the iteration cursor. Loading resumes training bit-exactly because all
// random streams are pure functions of (master seed, purpose, iteration).

struct CheckpointMeta {
  uint64_t master_seed = 0;
  int seed = 0;
  int next_iteration = 0;
};

void checkpoint_save(const TrainerState& state, const CheckpointMeta& meta,
                     const ExperimentConfig& cfg, const std::string& dir);

struct LoadedCheckpoint {
  TrainerState state;
  CheckpointMeta meta;
};

// Rejects version-tag mismatches and checkpoints whose architecture
// fingerprint (dims, action count, env kind) disagrees with cfg.
LoadedCheckpoint checkpoint_load(const std::string& dir, const ExperimentConfig& cfg);

// Shared by training and the eval CLI.
struct EvalOutcome {
  double pass1 = 0.0;
  double pass5 = 0.0;
  double entropy = 0.0;
};

EvalOutcome evaluate_checkpoint(const std::string& checkpoint_dir, const std::string& problems_path,
                                int n_samples, double temperature, int seed);

}  // namespace suslab

#endif  // SUSLAB_EXPERIMENT_HPP_
