#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "suslab/common.hpp"
#include "suslab/config.hpp"
#include "suslab/experiment.hpp"

using namespace suslab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small-but-real configuration that finishes in well under a second per seed.
ExperimentConfig tiny_config(const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.variant = Variant::Full;
  cfg.env.train_problems = 6;
  cfg.env.eval_problems = 6;
  cfg.group_size = 4;
  cfg.iterations = 4;
  cfg.problems_per_iteration = 3;
  cfg.eval_every = 2;
  cfg.eval_samples = 5;
  cfg.seeds = {1, 2};
  cfg.weights.lambda_ss = 1.0;
  cfg.weights.lambda_sus = 0.5;
  cfg.weights.alpha = 0.3;
  cfg.embedding_dim = 8;
  cfg.hidden_dim = 8;
  cfg.policy_hidden_dim = 8;
  cfg.breakdown_every = 2;
  cfg.out_dir = out_dir;
  return cfg;
}

std::string fresh_dir(const std::string& name) {
  const std::string dir = "/tmp/suslab_harness/" + name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("load_config: table3 preset supplies the published defaults") {
  const std::string text = R"({
    "schema": "susconfig-v1",
    "variant": "full",
    "weights": {"preset": "table3"}
  })";
  const ExperimentConfig cfg = config_from_json_text(text);
  CHECK(cfg.weights.lambda_ss == 1.0);
  CHECK(cfg.weights.lambda_sus == 0.0);
  CHECK(cfg.weights.alpha == doctest::Approx(0.3));
  CHECK(cfg.embedding_dim == 128);
  CHECK(cfg.group_size == 8);
}

TEST_CASE("load_config: preset defaults can be overridden explicitly") {
  const std::string text = R"({
    "weights": {"preset": "sensitivity", "alpha": 0.1}
  })";
  const ExperimentConfig cfg = config_from_json_text(text);
  CHECK(cfg.weights.lambda_sus == 0.5);
  CHECK(cfg.weights.alpha == doctest::Approx(0.1));
}

TEST_CASE("load_config: variant constraints are enforced") {
  CHECK_THROWS_AS((void)config_from_json_text(R"({
    "variant": "baseline",
    "weights": {"preset": "custom", "alpha": 0.3}
  })"),
                  ConfigError);
  CHECK_THROWS_AS((void)config_from_json_text(R"({
    "variant": "ss_only",
    "weights": {"preset": "sensitivity"}
  })"),
                  ConfigError);
  // consistent variants parse
  const ExperimentConfig ok = config_from_json_text(R"({
    "variant": "ss_only",
    "weights": {"preset": "table3"}
  })");
  CHECK(ok.weights.lambda_sus == 0.0);
}

TEST_CASE("load_config: unknown keys are listed") {
  try {
    (void)config_from_json_text(R"({"iterations": 5, "mystery_knob": 1, "another": 2})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("mystery_knob") != std::string::npos);
    CHECK(msg.find("another") != std::string::npos);
  }
}

TEST_CASE("load_config / dump_config round trip") {
  ExperimentConfig cfg = tiny_config("runs");
  cfg.sus_mode = SusMode::Success;
  cfg.ss_convention = SsConvention::Dissimilarity;
  cfg.preset = WeightPreset::Custom;
  const ExperimentConfig back = config_from_json_text(dump_config(cfg));
  CHECK(dump_config(back) == dump_config(cfg));
}

TEST_CASE("with_variant derives consistent ablation configs") {
  const ExperimentConfig base = tiny_config("runs");
  CHECK(with_variant(base, Variant::SsOnly).weights.lambda_sus == 0.0);
  CHECK(with_variant(base, Variant::SusOnly).weights.lambda_ss == 0.0);
  CHECK(with_variant(base, Variant::Baseline).weights.alpha == 0.0);
  CHECK(with_variant(base, Variant::Full).weights.lambda_sus == base.weights.lambda_sus);
}

TEST_CASE("run_single_seed: iterations = 0 is an evaluation-only run") {
  const std::string dir = fresh_dir("eval_only");
  ExperimentConfig cfg = tiny_config(dir);
  cfg.iterations = 0;
  const SeedResult res = run_single_seed(cfg, 1, dir + "/full/seed-1");
  CHECK_FALSE(res.failed);
  const std::string evals = slurp(dir + "/full/seed-1/eval_metrics.csv");
  CHECK(evals.find("\n0,full,1,") != std::string::npos);
  const std::string training = slurp(dir + "/full/seed-1/training_metrics.csv");
  CHECK(training.find('\n') == training.size() - 1);  // header only
}

TEST_CASE("run_experiment: identical configs give byte-identical CSV trees") {
  const std::string dir_a = fresh_dir("det_a");
  const std::string dir_b = fresh_dir("det_b");
  ExperimentConfig cfg_a = tiny_config(dir_a);
  ExperimentConfig cfg_b = tiny_config(dir_b);
  const RunReport rep_a = run_experiment(cfg_a);
  const RunReport rep_b = run_experiment(cfg_b);
  REQUIRE(rep_a.seeds.size() == 2);
  for (std::size_t i = 0; i < rep_a.seeds.size(); ++i) {
    CHECK_FALSE(rep_a.seeds[i].failed);
    CHECK(rep_a.seeds[i].pass5 == rep_b.seeds[i].pass5);
  }
  for (const char* name :
       {"/full/seed-1/training_metrics.csv", "/full/seed-1/eval_metrics.csv",
        "/full/seed-1/breakdown.csv", "/full/seed-2/training_metrics.csv",
        "/full/seed-2/eval_metrics.csv"}) {
    CHECK(slurp(dir_a + name) == slurp(dir_b + name));
  }
}

TEST_CASE("checkpoint bundle: save / load round trip and fingerprint rejection") {
  const std::string dir = fresh_dir("ckpt");
  ExperimentConfig cfg = tiny_config(dir);
  cfg.seeds = {1};
  (void)run_single_seed(cfg, 1, dir + "/full/seed-1");

  const LoadedCheckpoint loaded = checkpoint_load(dir + "/full/seed-1/checkpoint", cfg);
  CHECK(loaded.meta.next_iteration == cfg.iterations);
  CHECK(loaded.meta.seed == 1);
  CHECK(loaded.state.policy.net.version_tag == "policy-v1");
  CHECK(loaded.state.encoder_target.version_tag == "encoder-target-v1");

  ExperimentConfig wrong = cfg;
  wrong.embedding_dim = 16;  // different d
  CHECK_THROWS_AS((void)checkpoint_load(dir + "/full/seed-1/checkpoint", wrong), IoError);
}

TEST_CASE("checkpoint resume: midpoint restart reproduces the uninterrupted run") {
  const std::string dir = fresh_dir("resume");
  ExperimentConfig cfg = tiny_config(dir);
  cfg.seeds = {1};
  cfg.iterations = 6;
  cfg.eval_every = 3;

  (void)run_single_seed(cfg, 1, dir + "/uninterrupted");

  ExperimentConfig half = cfg;
  half.iterations = 3;
  (void)run_single_seed(half, 1, dir + "/part1");
  (void)run_single_seed(cfg, 1, dir + "/part2", dir + "/part1/checkpoint");

  // final checkpoints must agree bit for bit
  for (const char* name : {"/checkpoint/policy.json", "/checkpoint/encoder.json",
                           "/checkpoint/world_model.json", "/checkpoint/success_predictor.json",
                           "/checkpoint/state.json"}) {
    CHECK(slurp(dir + "/uninterrupted" + name) == slurp(dir + "/part2" + name));
  }

  // the resumed run's metric rows equal the uninterrupted run's tail rows
  const std::string full_training = slurp(dir + "/uninterrupted/training_metrics.csv");
  const std::string part2_training = slurp(dir + "/part2/training_metrics.csv");
  std::istringstream full_in(full_training), part_in(part2_training);
  std::string line;
  std::vector<std::string> full_rows, part_rows;
  std::getline(full_in, line);
  while (std::getline(full_in, line)) full_rows.push_back(line);
  std::getline(part_in, line);
  while (std::getline(part_in, line)) part_rows.push_back(line);
  REQUIRE(full_rows.size() == 6);
  REQUIRE(part_rows.size() == 3);
  for (std::size_t i = 0; i < part_rows.size(); ++i) {
    CHECK(part_rows[i] == full_rows[i + 3]);
  }
}

TEST_CASE("sweep cells reproduce the matching ablation variant bit-exactly") {
  const std::string dir = fresh_dir("sweep_eq");
  ExperimentConfig base = tiny_config(dir + "/sweeproot");
  base.seeds = {1};
  base.sweep_iterations = 2;

  const SweepReport sweep = sweep_lambda(base, {1.0}, {0.0});
  REQUIRE(sweep.table.rows.size() == 1);

  ExperimentConfig ss_only = with_variant(base, Variant::SsOnly);
  ss_only.iterations = 2;
  ss_only.out_dir = dir + "/variantroot";
  const RunReport rep = run_experiment(ss_only);
  REQUIRE(rep.seeds.size() == 1);

  CHECK(std::get<double>(sweep.table.rows[0][3]) == rep.seeds[0].pass1);
  CHECK(std::get<double>(sweep.table.rows[0][4]) == rep.seeds[0].pass5);
}

TEST_CASE("evaluate_checkpoint: works against a run's outputs and validates dims") {
  const std::string dir = fresh_dir("evalckpt");
  ExperimentConfig cfg = tiny_config(dir);
  cfg.seeds = {1};
  (void)run_single_seed(cfg, 1, dir + "/full/seed-1");
  const EvalOutcome out = evaluate_checkpoint(dir + "/full/seed-1/checkpoint",
                                              dir + "/full/seed-1/problems_eval.json", 5, 1.0, 1);
  CHECK(out.pass1 >= 0.0);
  CHECK(out.pass1 <= 1.0);
  CHECK(out.pass5 >= out.pass1);
}
