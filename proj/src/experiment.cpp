#include "suslab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "suslab/checkpoint.hpp"
#include "suslab/common.hpp"

namespace suslab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kEvalKs[] = {1, 5};

struct Fingerprint {
  std::string env_kind;
  int action_count = 0;
  int feature_dim = 0;
  int embedding_dim = 0;
  int hidden_dim = 0;
  int policy_hidden_dim = 0;
  int group_size = 0;

  bool operator==(const Fingerprint&) const = default;
};

Fingerprint fingerprint_of(const ExperimentConfig& cfg, int feature_dim, int action_count) {
  Fingerprint fp;
  fp.env_kind = cfg.env.kind == EnvKind::ArithChain ? "arithchain" : "multipathgrid";
  fp.action_count = action_count;
  fp.feature_dim = feature_dim;
  fp.embedding_dim = cfg.embedding_dim;
  fp.hidden_dim = cfg.hidden_dim;
  fp.policy_hidden_dim = cfg.policy_hidden_dim;
  fp.group_size = cfg.group_size;
  return fp;
}

TrainerState init_trainer(const ExperimentConfig& cfg, int feature_dim, int action_count,
                          const Rng& master) {
  TrainerState ts;
  Rng init = master.split(stream::kInit);
  Rng policy_rng = init.split(0);
  Rng encoder_rng = init.split(1);
  Rng wm_rng = init.split(2);
  Rng sp_rng = init.split(3);
  ts.policy = make_policy(feature_dim, action_count, cfg.policy_hidden_dim, policy_rng);
  ts.policy.temperature = cfg.policy_temperature;
  ts.reference = ts.policy;
  ts.reference.net.version_tag = "policy-ref-v1";
  ts.encoder_online = make_encoder_net(feature_dim, cfg.hidden_dim, cfg.embedding_dim, encoder_rng,
                                       "encoder-v1");
  ts.encoder_target = ts.encoder_online;
  ts.encoder_target.version_tag = "encoder-target-v1";
  ts.world_model = make_world_model(feature_dim, action_count, cfg.hidden_dim, wm_rng);
  ts.success_pred = make_success_predictor(cfg.embedding_dim, cfg.hidden_dim, sp_rng);
  ts.policy_opt = init_optimizer(ts.policy.net.values.size(), cfg.learning_rates.policy);
  ts.encoder_opt = init_optimizer(ts.encoder_online.values.size(), cfg.learning_rates.encoder);
  ts.wm_opt = init_optimizer(ts.world_model.net.values.size(), cfg.learning_rates.world_model);
  ts.sp_opt = init_optimizer(ts.success_pred.net.values.size(), cfg.learning_rates.success_predictor);
  ts.weights = cfg.weights;
  return ts;
}

std::string format_double_dir(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

double population_std(const std::vector<double>& xs, double mean) {
  if (xs.empty()) return 0.0;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

// CSV schemas (fixed column order)
CsvTable make_training_table() {
  return CsvTable{{"iter", "variant", "seed", "mean_r_ext", "mean_ss", "mean_sus",
                   "mean_success_surprise", "mean_r_int", "policy_loss", "kl", "wm_mse", "infonce",
                   "lambda_ss", "lambda_sus"},
                  {}};
}

CsvTable make_eval_table() {
  return CsvTable{{"iter", "variant", "seed", "pass1", "pass5", "entropy"}, {}};
}

CsvTable make_breakdown_table() {
  return CsvTable{{"iter", "problem_id", "traj_id", "step", "ss", "pred_error", "pred_error_norm",
                   "sus", "success_surprise", "r_int", "r_ext", "r_total"},
                  {}};
}

template <class Domain>
struct ProblemSets {
  std::vector<typename Domain::Problem> train;
  std::vector<typename Domain::Problem> eval;
};

ProblemSets<ArithChainDomain> make_problems(const ExperimentConfig& cfg, const Rng& master,
                                            ArithChainDomain) {
  Rng rng = master.split(stream::kProblems);
  const int total = cfg.env.train_problems + cfg.env.eval_problems;
  // One generation pass so train and eval stay disjoint in content as well as
  // in problem_id.
  std::vector<ArithChainProblem> all = generate_problem_set(total, cfg.env.difficulty, rng, 0);
  ProblemSets<ArithChainDomain> sets;
  sets.train.assign(all.begin(), all.begin() + cfg.env.train_problems);
  sets.eval.assign(all.begin() + cfg.env.train_problems, all.end());
  return sets;
}

ProblemSets<MultiPathGridDomain> make_problems(const ExperimentConfig& cfg, const Rng&,
                                               MultiPathGridDomain) {
  ProblemSets<MultiPathGridDomain> sets;
  sets.train = generate_grid_problem_set(cfg.env.train_problems, cfg.env.grid_n, 0);
  sets.eval = generate_grid_problem_set(cfg.env.eval_problems, cfg.env.grid_n, cfg.env.train_problems);
  return sets;
}

void write_problem_files(const ProblemSets<ArithChainDomain>& sets, const std::string& dir) {
  save_problem_set(sets.train, dir + "/problems_train.json");
  save_problem_set(sets.eval, dir + "/problems_eval.json");
}

void write_problem_files(const ProblemSets<MultiPathGridDomain>&, const std::string&) {}

json fingerprint_json(const Fingerprint& fp) {
  return json{{"env_kind", fp.env_kind},
              {"action_count", fp.action_count},
              {"feature_dim", fp.feature_dim},
              {"embedding_dim", fp.embedding_dim},
              {"hidden_dim", fp.hidden_dim},
              {"policy_hidden_dim", fp.policy_hidden_dim},
              {"group_size", fp.group_size}};
}

Fingerprint fingerprint_from_json(const json& j) {
  Fingerprint fp;
  fp.env_kind = j.at("env_kind").get<std::string>();
  fp.action_count = j.at("action_count").get<int>();
  fp.feature_dim = j.at("feature_dim").get<int>();
  fp.embedding_dim = j.at("embedding_dim").get<int>();
  fp.hidden_dim = j.at("hidden_dim").get<int>();
  fp.policy_hidden_dim = j.at("policy_hidden_dim").get<int>();
  fp.group_size = j.at("group_size").get<int>();
  return fp;
}

void save_bundle(const TrainerState& ts, const CheckpointMeta& meta, const Fingerprint& fp,
                 double policy_temperature, const std::string& dir) {
  fs::create_directories(dir);
  const uint64_t seed = meta.master_seed;
  save_net_checkpoint({ts.policy.net, ts.policy_opt, seed}, dir + "/policy.json");
  save_net_checkpoint({ts.reference.net, std::nullopt, seed}, dir + "/policy_ref.json");
  save_net_checkpoint({ts.encoder_online, ts.encoder_opt, seed}, dir + "/encoder.json");
  save_net_checkpoint({ts.encoder_target, std::nullopt, seed}, dir + "/encoder_target.json");
  save_net_checkpoint({ts.world_model.net, ts.wm_opt, seed}, dir + "/world_model.json");
  save_net_checkpoint({ts.success_pred.net, ts.sp_opt, seed}, dir + "/success_predictor.json");
  json st = {
      {"schema", "suscheckpoint-v1"},
      {"master_seed", meta.master_seed},
      {"seed", meta.seed},
      {"next_iteration", meta.next_iteration},
      {"policy_temperature", policy_temperature},
      {"err_stats", {{"count", ts.err_stats.count}, {"mean", ts.err_stats.mean}, {"m2", ts.err_stats.m2}}},
      {"weights",
       {{"lambda_ss", ts.weights.lambda_ss},
        {"lambda_sus", ts.weights.lambda_sus},
        {"alpha", ts.weights.alpha},
        {"adaptation_enabled", ts.weights.adaptation_enabled},
        {"eta", ts.weights.eta},
        {"lambda_min", ts.weights.lambda_min},
        {"lambda_max", ts.weights.lambda_max}}},
      {"fingerprint", fingerprint_json(fp)},
  };
  std::ofstream out(dir + "/state.json", std::ios::binary);
  if (!out) throw IoError("cannot open for write: " + dir + "/state.json");
  out << st.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + dir + "/state.json");
}

LoadedCheckpoint load_bundle(const std::string& dir, const Fingerprint& expected_fp) {
  std::ifstream in(dir + "/state.json", std::ios::binary);
  if (!in) throw IoError("cannot open for read: " + dir + "/state.json");
  json st;
  try {
    in >> st;
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint state parse error: ") + e.what());
  }
  if (st.value("schema", "") != std::string("suscheckpoint-v1")) {
    throw IoError("checkpoint schema mismatch in " + dir);
  }
  const Fingerprint fp = fingerprint_from_json(st.at("fingerprint"));
  if (!(fp == expected_fp)) {
    throw IoError("checkpoint incompatible with config (architecture fingerprint mismatch) in " + dir);
  }

  LoadedCheckpoint loaded;
  loaded.meta.master_seed = st.at("master_seed").get<uint64_t>();
  loaded.meta.seed = st.at("seed").get<int>();
  loaded.meta.next_iteration = st.at("next_iteration").get<int>();

  TrainerState& ts = loaded.state;
  NetCheckpoint policy = load_net_checkpoint(dir + "/policy.json", "policy-v1");
  NetCheckpoint ref = load_net_checkpoint(dir + "/policy_ref.json", "policy-ref-v1");
  NetCheckpoint enc = load_net_checkpoint(dir + "/encoder.json", "encoder-v1");
  NetCheckpoint enc_t = load_net_checkpoint(dir + "/encoder_target.json", "encoder-target-v1");
  NetCheckpoint wm = load_net_checkpoint(dir + "/world_model.json", "worldmodel-v1");
  NetCheckpoint sp = load_net_checkpoint(dir + "/success_predictor.json", "successpred-v1");
  if (!policy.optimizer || !enc.optimizer || !wm.optimizer || !sp.optimizer) {
    throw IoError("checkpoint missing optimizer state in " + dir);
  }
  ts.policy.net = std::move(policy.net);
  ts.policy.temperature = st.at("policy_temperature").get<double>();
  ts.policy_opt = std::move(*policy.optimizer);
  ts.reference.net = std::move(ref.net);
  ts.reference.temperature = ts.policy.temperature;
  ts.encoder_online = std::move(enc.net);
  ts.encoder_opt = std::move(*enc.optimizer);
  ts.encoder_target = std::move(enc_t.net);
  ts.world_model.net = std::move(wm.net);
  ts.world_model.action_count = fp.action_count;
  ts.wm_opt = std::move(*wm.optimizer);
  ts.success_pred.net = std::move(sp.net);
  ts.sp_opt = std::move(*sp.optimizer);
  ts.err_stats.count = st.at("err_stats").at("count").get<int64_t>();
  ts.err_stats.mean = st.at("err_stats").at("mean").get<double>();
  ts.err_stats.m2 = st.at("err_stats").at("m2").get<double>();
  const json& w = st.at("weights");
  ts.weights.lambda_ss = w.at("lambda_ss").get<double>();
  ts.weights.lambda_sus = w.at("lambda_sus").get<double>();
  ts.weights.alpha = w.at("alpha").get<double>();
  ts.weights.adaptation_enabled = w.at("adaptation_enabled").get<bool>();
  ts.weights.eta = w.at("eta").get<double>();
  ts.weights.lambda_min = w.at("lambda_min").get<double>();
  ts.weights.lambda_max = w.at("lambda_max").get<double>();
  return loaded;
}

template <class Domain>
SeedResult run_seed_impl(const ExperimentConfig& cfg, int seed, const std::string& seed_dir,
                         const std::string& resume_dir) {
  fs::create_directories(seed_dir);
  const Rng master(static_cast<uint64_t>(seed));
  ProblemSets<Domain> sets = make_problems(cfg, master, Domain{});
  write_problem_files(sets, seed_dir);
  require(!sets.train.empty() && !sets.eval.empty(), "run_single_seed: empty problem sets");
  const int feature_dim_v = feature_dim(sets.train.front());
  const int action_count_v = Domain::action_count(sets.train.front());
  const Fingerprint fp = fingerprint_of(cfg, feature_dim_v, action_count_v);

  TrainerState ts;
  int start_iteration = 0;
  if (resume_dir.empty()) {
    ts = init_trainer(cfg, feature_dim_v, action_count_v, master);
  } else {
    LoadedCheckpoint loaded = load_bundle(resume_dir, fp);
    if (loaded.meta.seed != seed) {
      throw IoError("checkpoint seed mismatch: checkpoint has " + std::to_string(loaded.meta.seed));
    }
    if (loaded.meta.next_iteration > cfg.iterations) {
      throw ConfigError("checkpoint is ahead of config.iterations; nothing to resume");
    }
    ts = std::move(loaded.state);
    start_iteration = loaded.meta.next_iteration;
  }

  const TrainOptions opt = cfg.train_options();
  CsvTable training = make_training_table();
  CsvTable evals = make_eval_table();
  CsvTable breakdowns = make_breakdown_table();
  const std::string vname = variant_name(cfg.variant);

  SeedResult result;
  result.seed = seed;
  auto run_eval = [&](int completed) {
    const Rng eval_rng = master.split(stream::kEval).split(static_cast<uint64_t>(completed));
    const EvalReport rep = evaluate<Domain>(ts.policy, sets.eval, cfg.eval_samples, kEvalKs,
                                            ts.encoder_online, eval_rng, cfg.eval_temperature);
    evals.add_row({static_cast<int64_t>(completed), vname, static_cast<int64_t>(seed),
                   rep.pass_at.at(1), rep.pass_at.at(5), rep.entropy});
    result.pass1 = rep.pass_at.at(1);
    result.pass5 = rep.pass_at.at(5);
    result.entropy = rep.entropy;
  };

  if (start_iteration == 0) run_eval(0);
  for (int i = start_iteration; i < cfg.iterations; ++i) {
    const IterationReport rep = train_iteration<Domain>(ts, sets.train, i, master, opt);
    training.add_row({static_cast<int64_t>(i), vname, static_cast<int64_t>(seed), rep.mean_r_ext,
                      rep.mean_ss, rep.mean_sus, rep.mean_success_surprise, rep.mean_r_int,
                      rep.policy_loss, rep.kl, rep.wm_mse, rep.infonce, rep.lambda_ss,
                      rep.lambda_sus});
    if (i % cfg.breakdown_every == 0) {
      // canonical (iter, problem_id, traj_id, step) order
      std::vector<const Trajectory*> by_problem;
      for (const Trajectory& t : rep.trajectories) by_problem.push_back(&t);
      std::stable_sort(by_problem.begin(), by_problem.end(),
                       [](const Trajectory* a, const Trajectory* b) {
                         return a->problem_id < b->problem_id;
                       });
      int traj_id = 0;
      int last_problem = -1;
      for (const Trajectory* t : by_problem) {
        traj_id = t->problem_id == last_problem ? traj_id + 1 : 0;
        last_problem = t->problem_id;
        for (std::size_t s = 0; s < t->breakdowns.size(); ++s) {
          const IntrinsicBreakdown& bd = t->breakdowns[s];
          breakdowns.add_row({static_cast<int64_t>(i), static_cast<int64_t>(t->problem_id),
                              static_cast<int64_t>(traj_id), static_cast<int64_t>(s), bd.ss,
                              bd.pred_error, bd.pred_error_norm, bd.sus, bd.success_surprise,
                              bd.r_int, bd.r_ext, bd.r_total});
        }
      }
    }
    if (cfg.reference_refresh_interval > 0 && (i + 1) % cfg.reference_refresh_interval == 0) {
      ts.reference = ts.policy;
      ts.reference.net.version_tag = "policy-ref-v1";
    }
    if ((i + 1) % cfg.eval_every == 0 || i + 1 == cfg.iterations) run_eval(i + 1);
  }

  write_metrics_csv(training, seed_dir + "/training_metrics.csv");
  write_metrics_csv(evals, seed_dir + "/eval_metrics.csv");
  write_metrics_csv(breakdowns, seed_dir + "/breakdown.csv");
  checkpoint_save(ts, {static_cast<uint64_t>(seed), seed, cfg.iterations}, cfg,
                  seed_dir + "/checkpoint");
  return result;
}

void aggregate(RunReport& report) {
  std::vector<double> p1, p5, ent;
  for (const SeedResult& s : report.seeds) {
    if (s.failed) continue;
    p1.push_back(s.pass1);
    p5.push_back(s.pass5);
    ent.push_back(s.entropy);
  }
  if (p1.empty()) return;
  const double n = static_cast<double>(p1.size());
  for (double v : p1) report.mean_pass1 += v / n;
  for (double v : p5) report.mean_pass5 += v / n;
  for (double v : ent) report.mean_entropy += v / n;
  report.std_pass1 = population_std(p1, report.mean_pass1);
  report.std_pass5 = population_std(p5, report.mean_pass5);
  report.std_entropy = population_std(ent, report.mean_entropy);
}

}  // namespace

void checkpoint_save(const TrainerState& state, const CheckpointMeta& meta,
                     const ExperimentConfig& cfg, const std::string& dir) {
  const Fingerprint fp = fingerprint_of(cfg, state.policy.net.input_dim(),
                                        state.policy.net.output_dim());
  save_bundle(state, meta, fp, state.policy.temperature, dir);
}

LoadedCheckpoint checkpoint_load(const std::string& dir, const ExperimentConfig& cfg) {
  std::ifstream in(dir + "/state.json", std::ios::binary);
  if (!in) throw IoError("cannot open for read: " + dir + "/state.json");
  json st;
  try {
    in >> st;
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint state parse error: ") + e.what());
  }
  const Fingerprint stored = fingerprint_from_json(st.at("fingerprint"));
  Fingerprint expected = stored;
  expected.embedding_dim = cfg.embedding_dim;
  expected.hidden_dim = cfg.hidden_dim;
  expected.policy_hidden_dim = cfg.policy_hidden_dim;
  expected.group_size = cfg.group_size;
  expected.env_kind = cfg.env.kind == EnvKind::ArithChain ? "arithchain" : "multipathgrid";
  return load_bundle(dir, expected);
}

SeedResult run_single_seed(const ExperimentConfig& cfg, int seed, const std::string& seed_dir,
                           const std::string& resume_dir) {
  validate_config(cfg);
  if (cfg.env.kind == EnvKind::ArithChain) {
    return run_seed_impl<ArithChainDomain>(cfg, seed, seed_dir, resume_dir);
  }
  return run_seed_impl<MultiPathGridDomain>(cfg, seed, seed_dir, resume_dir);
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  RunReport report;
  for (int seed : cfg.seeds) {
    const std::string dir =
        cfg.out_dir + "/" + variant_name(cfg.variant) + "/seed-" + std::to_string(seed);
    SeedResult res;
    try {
      res = run_single_seed(cfg, seed, dir);
    } catch (const std::exception& e) {
      res.seed = seed;
      res.failed = true;
      res.error = e.what();
    }
    report.seeds.push_back(std::move(res));
  }
  aggregate(report);
  return report;
}

AblationReport run_ablation_suite(const ExperimentConfig& base) {
  validate_config(base);
  const Variant order[] = {Variant::Full, Variant::SsOnly, Variant::SusOnly, Variant::Baseline};
  AblationReport out;
  out.table.header = {"variant", "pass1", "pass5", "delta_vs_full"};
  for (Variant v : order) {
    const ExperimentConfig cfg = with_variant(base, v);
    out.by_variant[variant_name(v)] = run_experiment(cfg);
  }
  const RunReport& full = out.by_variant.at("full");
  for (Variant v : order) {
    const RunReport& rep = out.by_variant.at(variant_name(v));
    const double delta = v == Variant::Full || full.mean_pass1 == 0.0
                             ? 0.0
                             : (rep.mean_pass1 - full.mean_pass1) / full.mean_pass1;
    out.table.add_row({variant_name(v), rep.mean_pass1, rep.mean_pass5, delta});
  }
  out.full_ge_ss_only = full.mean_pass5 >= out.by_variant.at("ss_only").mean_pass5;
  out.full_ge_sus_only = full.mean_pass5 >= out.by_variant.at("sus_only").mean_pass5;
  out.ss_only_ge_baseline =
      out.by_variant.at("ss_only").mean_pass5 >= out.by_variant.at("baseline").mean_pass5;
  out.sus_only_ge_baseline =
      out.by_variant.at("sus_only").mean_pass5 >= out.by_variant.at("baseline").mean_pass5;

  fs::create_directories(base.out_dir);
  write_metrics_csv(out.table, base.out_dir + "/ablation_table.csv");
  json summary = {
      {"full_ge_ss_only", out.full_ge_ss_only},
      {"full_ge_sus_only", out.full_ge_sus_only},
      {"ss_only_ge_baseline", out.ss_only_ge_baseline},
      {"sus_only_ge_baseline", out.sus_only_ge_baseline},
  };
  for (const auto& [name, rep] : out.by_variant) {
    summary["variants"][name] = {{"mean_pass1", rep.mean_pass1}, {"std_pass1", rep.std_pass1},
                                 {"mean_pass5", rep.mean_pass5}, {"std_pass5", rep.std_pass5},
                                 {"mean_entropy", rep.mean_entropy}, {"std_entropy", rep.std_entropy}};
  }
  std::ofstream summary_out(base.out_dir + "/ablation_summary.json", std::ios::binary);
  if (!summary_out) throw IoError("cannot open for write: " + base.out_dir + "/ablation_summary.json");
  summary_out << summary.dump(2) << "\n";
  return out;
}

int sweep_budget(const ExperimentConfig& cfg) {
  return cfg.sweep_iterations > 0 ? cfg.sweep_iterations : std::max(1, cfg.iterations / 4);
}

SweepReport sweep_lambda(const ExperimentConfig& base, const std::vector<double>& grid1,
                         const std::vector<double>& grid2) {
  validate_config(base);
  require(!grid1.empty() && !grid2.empty(), "sweep_lambda: grids must be nonempty");
  SweepReport out;
  out.table.header = {"lambda1", "lambda2", "seed", "pass1", "pass5"};
  const int budget = sweep_budget(base);
  for (double g1 : grid1) {
    for (double g2 : grid2) {
      ExperimentConfig cell = base;
      cell.variant = Variant::Full;
      cell.preset = WeightPreset::Custom;
      cell.weights.lambda_ss = g1;
      cell.weights.lambda_sus = g2;
      cell.iterations = budget;
      cell.out_dir =
          base.out_dir + "/sweep/cell_" + format_double_dir(g1) + "_" + format_double_dir(g2);
      validate_config(cell);
      const RunReport rep = run_experiment(cell);
      for (const SeedResult& s : rep.seeds) {
        if (s.failed) continue;
        out.table.add_row({g1, g2, static_cast<int64_t>(s.seed), s.pass1, s.pass5});
      }
    }
  }
  fs::create_directories(base.out_dir);
  write_metrics_csv(out.table, base.out_dir + "/sweep.csv");
  return out;
}

EvalOutcome evaluate_checkpoint(const std::string& checkpoint_dir, const std::string& problems_path,
                                int n_samples, double temperature, int seed) {
  require(n_samples >= 5, "evaluate_checkpoint: need at least 5 samples for pass@5");
  const std::vector<ArithChainProblem> problems = load_problem_set(problems_path);
  require(!problems.empty(), "evaluate_checkpoint: empty problem set");
  NetCheckpoint policy_ck = load_net_checkpoint(checkpoint_dir + "/policy.json", "policy-v1");
  NetCheckpoint encoder_ck = load_net_checkpoint(checkpoint_dir + "/encoder.json", "encoder-v1");
  if (policy_ck.net.input_dim() != feature_dim(problems.front()) ||
      policy_ck.net.output_dim() != problems.front().action_count()) {
    throw IoError("checkpoint policy does not match the problem set's feature/action layout");
  }
  PolicyParams policy;
  policy.net = std::move(policy_ck.net);
  policy.temperature = temperature;
  const Rng rng = Rng(static_cast<uint64_t>(seed)).split(stream::kEval);
  const EvalReport rep = evaluate<ArithChainDomain>(policy, problems, n_samples, kEvalKs,
                                                    encoder_ck.net, rng, temperature);
  return {rep.pass_at.at(1), rep.pass_at.at(5), rep.entropy};
}

}  // namespace suslab
