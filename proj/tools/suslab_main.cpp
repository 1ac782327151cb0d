// suslab: train / ablate / sweep / eval entry points around the experiment
// library. Exit codes: 0 success, 2 config error, 3 runtime error.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "suslab/common.hpp"
#include "suslab/config.hpp"
#include "suslab/experiment.hpp"

namespace {

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

std::string resolve_out_dir(const std::string& flag_value, const std::string& config_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("SUSLAB_OUT"); env != nullptr && env[0] != '\0') return env;
  return config_value;
}

void print_run_report(const suslab::RunReport& report) {
  for (const suslab::SeedResult& s : report.seeds) {
    if (s.failed) {
      std::printf("seed %d: FAILED (%s)\n", s.seed, s.error.c_str());
    } else {
      std::printf("seed %d: pass@1 %.4f  pass@5 %.4f  entropy %.4f\n", s.seed, s.pass1, s.pass5,
                  s.entropy);
    }
  }
  std::printf("mean: pass@1 %.4f (+/- %.4f)  pass@5 %.4f (+/- %.4f)  entropy %.4f (+/- %.4f)\n",
              report.mean_pass1, report.std_pass1, report.mean_pass5, report.std_pass5,
              report.mean_entropy, report.std_entropy);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strategy-aware surprise laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, resume_dir, checkpoint_dir, problems_path, grid1_csv, grid2_csv;
  int seed_flag = 0;
  bool seed_given = false;
  int eval_samples = 8;
  double eval_temperature = 1.0;
  int eval_seed = 1;

  CLI::App* train = app.add_subcommand("train", "Train one experiment configuration");
  train->add_option("--config", config_path, "Config file (susconfig-v1 JSON)")->required();
  train->add_option("--seed", seed_flag, "Run only this seed")->each([&](const std::string&) {
    seed_given = true;
  });
  train->add_option("--out", out_dir, "Output root (overrides SUSLAB_OUT and config)");
  train->add_option("--resume", resume_dir, "Checkpoint directory to resume from");

  CLI::App* ablate = app.add_subcommand("ablate", "Run full/ss_only/sus_only/baseline comparison");
  ablate->add_option("--config", config_path, "Config file")->required();
  ablate->add_option("--out", out_dir, "Output root (overrides SUSLAB_OUT and config)");

  CLI::App* sweep = app.add_subcommand("sweep", "Lambda sensitivity sweep");
  sweep->add_option("--config", config_path, "Config file")->required();
  sweep->add_option("--grid1", grid1_csv, "Comma-separated lambda_ss grid");
  sweep->add_option("--grid2", grid2_csv, "Comma-separated lambda_sus grid");
  sweep->add_option("--out", out_dir, "Output root (overrides SUSLAB_OUT and config)");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a problem set");
  eval->add_option("--checkpoint", checkpoint_dir, "Checkpoint directory")->required();
  eval->add_option("--problems", problems_path, "Problem set file (arithchain-v1 JSON)")->required();
  eval->add_option("--samples", eval_samples, "Samples per problem");
  eval->add_option("--temperature", eval_temperature, "Sampling temperature");
  eval->add_option("--seed", eval_seed, "Evaluation seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(train)) {
      suslab::ExperimentConfig cfg = suslab::load_config(config_path);
      cfg.out_dir = resolve_out_dir(out_dir, cfg.out_dir);
      if (seed_given) cfg.seeds = {seed_flag};
      if (!resume_dir.empty()) {
        if (cfg.seeds.size() != 1) {
          throw suslab::ConfigError("--resume requires a single seed (--seed N)");
        }
        const int seed = cfg.seeds.front();
        const std::string dir = cfg.out_dir + "/" + suslab::variant_name(cfg.variant) + "/seed-" +
                                std::to_string(seed);
        const suslab::SeedResult res = suslab::run_single_seed(cfg, seed, dir, resume_dir);
        std::printf("seed %d: pass@1 %.4f  pass@5 %.4f  entropy %.4f\n", res.seed, res.pass1,
                    res.pass5, res.entropy);
      } else {
        print_run_report(suslab::run_experiment(cfg));
      }
    } else if (app.got_subcommand(ablate)) {
      suslab::ExperimentConfig cfg = suslab::load_config(config_path);
      cfg.out_dir = resolve_out_dir(out_dir, cfg.out_dir);
      const suslab::AblationReport rep = suslab::run_ablation_suite(cfg);
      std::printf("%s\n", suslab::csv_to_string(rep.table).c_str());
      std::printf("directional flags (mean pass@5): full>=ss_only %s, full>=sus_only %s, "
                  "ss_only>=baseline %s, sus_only>=baseline %s\n",
                  rep.full_ge_ss_only ? "pass" : "fail", rep.full_ge_sus_only ? "pass" : "fail",
                  rep.ss_only_ge_baseline ? "pass" : "fail",
                  rep.sus_only_ge_baseline ? "pass" : "fail");
    } else if (app.got_subcommand(sweep)) {
      suslab::ExperimentConfig cfg = suslab::load_config(config_path);
      cfg.out_dir = resolve_out_dir(out_dir, cfg.out_dir);
      std::vector<double> grid1 = grid1_csv.empty() ? std::vector<double>{0.25, 0.5, 1.0, 2.0}
                                                    : parse_grid(grid1_csv);
      std::vector<double> grid2 = grid2_csv.empty() ? std::vector<double>{0.0, 0.25, 0.5, 1.0}
                                                    : parse_grid(grid2_csv);
      const suslab::SweepReport rep = suslab::sweep_lambda(cfg, grid1, grid2);
      std::printf("%s\n", suslab::csv_to_string(rep.table).c_str());
    } else if (app.got_subcommand(eval)) {
      const suslab::EvalOutcome res = suslab::evaluate_checkpoint(checkpoint_dir, problems_path,
                                                                  eval_samples, eval_temperature,
                                                                  eval_seed);
      std::printf("{\"pass1\": %.17g, \"pass5\": %.17g, \"entropy\": %.17g}\n", res.pass1, res.pass5,
                  res.entropy);
    }
  } catch (const suslab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
