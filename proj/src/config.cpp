#include "suslab/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "suslab/common.hpp"

namespace suslab {

using nlohmann::json;

TrainOptions ExperimentConfig::train_options() const {
  TrainOptions opt;
  opt.variant = variant;
  opt.sus_mode = sus_mode;
  opt.ss_convention = ss_convention;
  opt.gate_on_success = gate_on_success;
  opt.aggregation = aggregation;
  opt.beta_kl = beta_kl;
  opt.info_nce_temperature = info_nce_temperature;
  opt.momentum = momentum;
  opt.contrastive_window = contrastive_window;
  opt.group_size = group_size;
  opt.problems_per_iteration = problems_per_iteration;
  return opt;
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Baseline: return "baseline";
    case Variant::Full: return "full";
    case Variant::SsOnly: return "ss_only";
    case Variant::SusOnly: return "sus_only";
    case Variant::EntropyBonus: return "entropy_bonus";
  }
  throw ConfigError("variant_name: unknown variant");
}

Variant variant_from_name(const std::string& name) {
  if (name == "baseline") return Variant::Baseline;
  if (name == "full") return Variant::Full;
  if (name == "ss_only") return Variant::SsOnly;
  if (name == "sus_only") return Variant::SusOnly;
  if (name == "entropy_bonus") return Variant::EntropyBonus;
  throw ConfigError("variant: unknown value '" + name + "'");
}

namespace {

std::string preset_name(WeightPreset p) {
  switch (p) {
    case WeightPreset::Table3: return "table3";
    case WeightPreset::Sensitivity: return "sensitivity";
    case WeightPreset::Custom: return "custom";
  }
  throw ConfigError("preset_name: unknown preset");
}

WeightPreset preset_from_name(const std::string& name) {
  if (name == "table3") return WeightPreset::Table3;
  if (name == "sensitivity") return WeightPreset::Sensitivity;
  if (name == "custom") return WeightPreset::Custom;
  throw ConfigError("weights.preset: unknown value '" + name + "'");
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& scope) {
  std::vector<std::string> unknown;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) unknown.push_back(it.key());
  }
  if (!unknown.empty()) {
    std::ostringstream os;
    os << "unknown config key" << (unknown.size() > 1 ? "s" : "") << " in " << scope << ": ";
    for (std::size_t i = 0; i < unknown.size(); ++i) {
      if (i) os << ", ";
      os << unknown[i];
    }
    throw ConfigError(os.str());
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  check_keys(j, {"schema", "variant", "env", "group_size", "iterations", "problems_per_iteration",
                 "eval_every", "eval_samples", "eval_temperature", "seeds", "weights", "sus_mode",
                 "ss_convention", "gate_on_success", "intrinsic_aggregation", "beta_kl",
                 "learning_rates", "embedding_dim", "hidden_dim", "policy_hidden_dim",
                 "policy_temperature", "info_nce_temperature", "momentum", "contrastive_window",
                 "reference_refresh_interval", "breakdown_every", "sweep_iterations", "out_dir"},
             "root");
  if (j.contains("schema") && j.at("schema").get<std::string>() != "susconfig-v1") {
    throw ConfigError("config schema must be 'susconfig-v1'");
  }

  ExperimentConfig cfg;
  if (j.contains("variant")) cfg.variant = variant_from_name(j.at("variant").get<std::string>());

  if (j.contains("env")) {
    const json& e = j.at("env");
    check_keys(e, {"kind", "op_set", "max_steps", "start_min", "start_max", "min_walk_ops",
                   "max_walk_ops", "min_solutions", "target_abs_max", "train_problems",
                   "eval_problems", "grid_n"},
               "env");
    if (e.contains("kind")) {
      const std::string kind = e.at("kind").get<std::string>();
      if (kind == "arithchain") {
        cfg.env.kind = EnvKind::ArithChain;
      } else if (kind == "multipathgrid") {
        cfg.env.kind = EnvKind::MultiPathGrid;
      } else {
        throw ConfigError("env.kind: unknown value '" + kind + "'");
      }
    }
    if (e.contains("op_set")) {
      cfg.env.difficulty.op_pool.clear();
      for (const json& o : e.at("op_set")) {
        cfg.env.difficulty.op_pool.push_back(op_from_name(o.get<std::string>()));
      }
    }
    read_field(e, "max_steps", cfg.env.difficulty.max_steps);
    read_field(e, "start_min", cfg.env.difficulty.start_min);
    read_field(e, "start_max", cfg.env.difficulty.start_max);
    read_field(e, "min_walk_ops", cfg.env.difficulty.min_walk_ops);
    read_field(e, "max_walk_ops", cfg.env.difficulty.max_walk_ops);
    read_field(e, "min_solutions", cfg.env.difficulty.min_solutions);
    read_field(e, "target_abs_max", cfg.env.difficulty.target_abs_max);
    read_field(e, "train_problems", cfg.env.train_problems);
    read_field(e, "eval_problems", cfg.env.eval_problems);
    read_field(e, "grid_n", cfg.env.grid_n);
  }

  read_field(j, "group_size", cfg.group_size);
  read_field(j, "iterations", cfg.iterations);
  read_field(j, "problems_per_iteration", cfg.problems_per_iteration);
  read_field(j, "eval_every", cfg.eval_every);
  read_field(j, "eval_samples", cfg.eval_samples);
  read_field(j, "eval_temperature", cfg.eval_temperature);
  read_field(j, "seeds", cfg.seeds);

  if (j.contains("weights")) {
    const json& w = j.at("weights");
    check_keys(w, {"preset", "lambda_ss", "lambda_sus", "alpha", "adaptation_enabled", "eta",
                   "lambda_min", "lambda_max"},
               "weights");
    if (w.contains("preset")) cfg.preset = preset_from_name(w.at("preset").get<std::string>());
    switch (cfg.preset) {  // named preset supplies defaults, explicit keys override
      case WeightPreset::Table3:
        cfg.weights.lambda_ss = 1.0;
        cfg.weights.lambda_sus = 0.0;
        cfg.weights.alpha = 0.3;
        break;
      case WeightPreset::Sensitivity:
        cfg.weights.lambda_ss = 1.0;
        cfg.weights.lambda_sus = 0.5;
        cfg.weights.alpha = 0.3;
        break;
      case WeightPreset::Custom:
        break;
    }
    read_field(w, "lambda_ss", cfg.weights.lambda_ss);
    read_field(w, "lambda_sus", cfg.weights.lambda_sus);
    read_field(w, "alpha", cfg.weights.alpha);
    read_field(w, "adaptation_enabled", cfg.weights.adaptation_enabled);
    read_field(w, "eta", cfg.weights.eta);
    read_field(w, "lambda_min", cfg.weights.lambda_min);
    read_field(w, "lambda_max", cfg.weights.lambda_max);
  } else {
    cfg.weights.lambda_ss = 1.0;
    cfg.weights.lambda_sus = 0.5;
    cfg.weights.alpha = 0.3;
  }

  if (j.contains("sus_mode")) {
    const std::string m = j.at("sus_mode").get<std::string>();
    if (m == "strategy") {
      cfg.sus_mode = SusMode::Strategy;
    } else if (m == "success") {
      cfg.sus_mode = SusMode::Success;
    } else {
      throw ConfigError("sus_mode: unknown value '" + m + "'");
    }
  }
  if (j.contains("ss_convention")) {
    const std::string c = j.at("ss_convention").get<std::string>();
    if (c == "similarity") {
      cfg.ss_convention = SsConvention::Similarity;
    } else if (c == "dissimilarity") {
      cfg.ss_convention = SsConvention::Dissimilarity;
    } else {
      throw ConfigError("ss_convention: unknown value '" + c + "'");
    }
  }
  read_field(j, "gate_on_success", cfg.gate_on_success);
  if (j.contains("intrinsic_aggregation")) {
    const std::string a = j.at("intrinsic_aggregation").get<std::string>();
    if (a == "mean") {
      cfg.aggregation = IntrinsicAggregation::Mean;
    } else if (a == "sum") {
      cfg.aggregation = IntrinsicAggregation::Sum;
    } else {
      throw ConfigError("intrinsic_aggregation: unknown value '" + a + "'");
    }
  }
  read_field(j, "beta_kl", cfg.beta_kl);
  if (j.contains("learning_rates")) {
    const json& lr = j.at("learning_rates");
    check_keys(lr, {"policy", "encoder", "world_model", "success_predictor"}, "learning_rates");
    read_field(lr, "policy", cfg.learning_rates.policy);
    read_field(lr, "encoder", cfg.learning_rates.encoder);
    read_field(lr, "world_model", cfg.learning_rates.world_model);
    read_field(lr, "success_predictor", cfg.learning_rates.success_predictor);
  }
  read_field(j, "embedding_dim", cfg.embedding_dim);
  read_field(j, "hidden_dim", cfg.hidden_dim);
  read_field(j, "policy_hidden_dim", cfg.policy_hidden_dim);
  read_field(j, "policy_temperature", cfg.policy_temperature);
  read_field(j, "info_nce_temperature", cfg.info_nce_temperature);
  read_field(j, "momentum", cfg.momentum);
  read_field(j, "contrastive_window", cfg.contrastive_window);
  read_field(j, "reference_refresh_interval", cfg.reference_refresh_interval);
  read_field(j, "breakdown_every", cfg.breakdown_every);
  read_field(j, "sweep_iterations", cfg.sweep_iterations);
  read_field(j, "out_dir", cfg.out_dir);

  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json_text(text);
}

std::string dump_config(const ExperimentConfig& cfg) {
  json ops = json::array();
  for (ArithOp op : cfg.env.difficulty.op_pool) ops.push_back(op_name(op));
  json j = {
      {"schema", "susconfig-v1"},
      {"variant", variant_name(cfg.variant)},
      {"env",
       {{"kind", cfg.env.kind == EnvKind::ArithChain ? "arithchain" : "multipathgrid"},
        {"op_set", ops},
        {"max_steps", cfg.env.difficulty.max_steps},
        {"start_min", cfg.env.difficulty.start_min},
        {"start_max", cfg.env.difficulty.start_max},
        {"min_walk_ops", cfg.env.difficulty.min_walk_ops},
        {"max_walk_ops", cfg.env.difficulty.max_walk_ops},
        {"min_solutions", cfg.env.difficulty.min_solutions},
        {"target_abs_max", cfg.env.difficulty.target_abs_max},
        {"train_problems", cfg.env.train_problems},
        {"eval_problems", cfg.env.eval_problems},
        {"grid_n", cfg.env.grid_n}}},
      {"group_size", cfg.group_size},
      {"iterations", cfg.iterations},
      {"problems_per_iteration", cfg.problems_per_iteration},
      {"eval_every", cfg.eval_every},
      {"eval_samples", cfg.eval_samples},
      {"eval_temperature", cfg.eval_temperature},
      {"seeds", cfg.seeds},
      {"weights",
       {{"preset", preset_name(cfg.preset)},
        {"lambda_ss", cfg.weights.lambda_ss},
        {"lambda_sus", cfg.weights.lambda_sus},
        {"alpha", cfg.weights.alpha},
        {"adaptation_enabled", cfg.weights.adaptation_enabled},
        {"eta", cfg.weights.eta},
        {"lambda_min", cfg.weights.lambda_min},
        {"lambda_max", cfg.weights.lambda_max}}},
      {"sus_mode", cfg.sus_mode == SusMode::Strategy ? "strategy" : "success"},
      {"ss_convention", cfg.ss_convention == SsConvention::Similarity ? "similarity" : "dissimilarity"},
      {"gate_on_success", cfg.gate_on_success},
      {"intrinsic_aggregation", cfg.aggregation == IntrinsicAggregation::Mean ? "mean" : "sum"},
      {"beta_kl", cfg.beta_kl},
      {"learning_rates",
       {{"policy", cfg.learning_rates.policy},
        {"encoder", cfg.learning_rates.encoder},
        {"world_model", cfg.learning_rates.world_model},
        {"success_predictor", cfg.learning_rates.success_predictor}}},
      {"embedding_dim", cfg.embedding_dim},
      {"hidden_dim", cfg.hidden_dim},
      {"policy_hidden_dim", cfg.policy_hidden_dim},
      {"policy_temperature", cfg.policy_temperature},
      {"info_nce_temperature", cfg.info_nce_temperature},
      {"momentum", cfg.momentum},
      {"contrastive_window", cfg.contrastive_window},
      {"reference_refresh_interval", cfg.reference_refresh_interval},
      {"breakdown_every", cfg.breakdown_every},
      {"sweep_iterations", cfg.sweep_iterations},
      {"out_dir", cfg.out_dir},
  };
  return j.dump(2);
}

void validate_config(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& field, const std::string& rule) {
    throw ConfigError("config invariant violated: " + field + " " + rule);
  };
  if (cfg.group_size < 2) fail("group_size", "must be >= 2");
  if (cfg.iterations < 0) fail("iterations", "must be >= 0");
  if (cfg.problems_per_iteration < 1) fail("problems_per_iteration", "must be >= 1");
  if (cfg.eval_every < 1) fail("eval_every", "must be >= 1");
  if (cfg.eval_samples < 5) fail("eval_samples", "must be >= 5 (pass@5 needs k <= n)");
  if (cfg.eval_temperature <= 0.0) fail("eval_temperature", "must be > 0");
  if (cfg.seeds.empty()) fail("seeds", "must be nonempty");
  {
    std::set<int> uniq(cfg.seeds.begin(), cfg.seeds.end());
    if (uniq.size() != cfg.seeds.size()) fail("seeds", "must be distinct");
  }
  if (cfg.weights.lambda_ss < 0.0) fail("weights.lambda_ss", "must be >= 0");
  if (cfg.weights.lambda_sus < 0.0) fail("weights.lambda_sus", "must be >= 0");
  if (cfg.weights.alpha < 0.0) fail("weights.alpha", "must be >= 0");
  if (cfg.weights.eta <= 0.0) fail("weights.eta", "must be > 0");
  if (cfg.weights.lambda_min > cfg.weights.lambda_max) fail("weights.lambda_min", "must be <= lambda_max");
  if (cfg.weights.adaptation_enabled) {
    if (cfg.weights.lambda_ss < cfg.weights.lambda_min || cfg.weights.lambda_ss > cfg.weights.lambda_max) {
      fail("weights.lambda_ss", "must lie within [lambda_min, lambda_max] when adaptation is enabled");
    }
    if (cfg.weights.lambda_sus < cfg.weights.lambda_min ||
        cfg.weights.lambda_sus > cfg.weights.lambda_max) {
      fail("weights.lambda_sus", "must lie within [lambda_min, lambda_max] when adaptation is enabled");
    }
  }
  switch (cfg.variant) {  // variant constrains weights
    case Variant::SsOnly:
      if (cfg.weights.lambda_sus != 0.0) fail("weights.lambda_sus", "must be 0 for variant ss_only");
      break;
    case Variant::SusOnly:
      if (cfg.weights.lambda_ss != 0.0) fail("weights.lambda_ss", "must be 0 for variant sus_only");
      break;
    case Variant::Baseline:
      if (cfg.weights.alpha != 0.0) fail("weights.alpha", "must be 0 for variant baseline");
      break;
    default:
      break;
  }
  if (cfg.env.train_problems < 1) fail("env.train_problems", "must be >= 1");
  if (cfg.env.eval_problems < 1) fail("env.eval_problems", "must be >= 1");
  if (cfg.env.kind == EnvKind::ArithChain) {
    const ArithChainDifficulty& d = cfg.env.difficulty;
    if (d.op_pool.empty() || d.op_pool.size() > 6) fail("env.op_set", "must contain 1..6 operations");
    if (d.max_steps < 2 || d.max_steps > 8) fail("env.max_steps", "must lie in [2, 8] (oracle bound)");
    if (d.min_walk_ops < 1) fail("env.min_walk_ops", "must be >= 1");
    if (d.max_walk_ops < d.min_walk_ops) fail("env.max_walk_ops", "must be >= min_walk_ops");
    if (d.max_walk_ops > d.max_steps - 1) fail("env.max_walk_ops", "must be <= max_steps - 1");
    if (d.min_solutions < 1) fail("env.min_solutions", "must be >= 1");
    if (d.target_abs_max < 1) fail("env.target_abs_max", "must be >= 1");
    if (d.start_min > d.start_max) fail("env.start_min", "must be <= start_max");
  } else {
    if (cfg.env.grid_n < 3) fail("env.grid_n", "must be >= 3");
  }
  if (cfg.beta_kl < 0.0) fail("beta_kl", "must be >= 0");
  if (cfg.learning_rates.policy <= 0.0) fail("learning_rates.policy", "must be > 0");
  if (cfg.learning_rates.encoder <= 0.0) fail("learning_rates.encoder", "must be > 0");
  if (cfg.learning_rates.world_model <= 0.0) fail("learning_rates.world_model", "must be > 0");
  if (cfg.learning_rates.success_predictor <= 0.0) fail("learning_rates.success_predictor", "must be > 0");
  if (cfg.embedding_dim < 1) fail("embedding_dim", "must be >= 1");
  if (cfg.hidden_dim < 1) fail("hidden_dim", "must be >= 1");
  if (cfg.policy_hidden_dim < 1) fail("policy_hidden_dim", "must be >= 1");
  if (cfg.policy_temperature <= 0.0) fail("policy_temperature", "must be > 0");
  if (cfg.info_nce_temperature <= 0.0) fail("info_nce_temperature", "must be > 0");
  if (cfg.momentum < 0.0 || cfg.momentum > 1.0) fail("momentum", "must lie in [0, 1]");
  if (cfg.contrastive_window < 1) fail("contrastive_window", "must be >= 1");
  if (cfg.reference_refresh_interval < 0) fail("reference_refresh_interval", "must be >= 0");
  if (cfg.breakdown_every < 1) fail("breakdown_every", "must be >= 1");
  if (cfg.sweep_iterations < 0) fail("sweep_iterations", "must be >= 0");
  if (cfg.out_dir.empty()) fail("out_dir", "must be nonempty");
}

ExperimentConfig with_variant(const ExperimentConfig& base, Variant v) {
  ExperimentConfig cfg = base;
  cfg.variant = v;
  switch (v) {
    case Variant::SsOnly: cfg.weights.lambda_sus = 0.0; break;
    case Variant::SusOnly: cfg.weights.lambda_ss = 0.0; break;
    case Variant::Baseline: cfg.weights.alpha = 0.0; break;
    default: break;
  }
  validate_config(cfg);
  return cfg;
}

}  // namespace suslab
