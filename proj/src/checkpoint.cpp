#include "suslab/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "suslab/common.hpp"

namespace suslab {

using nlohmann::json;

std::string net_checkpoint_to_json(const NetCheckpoint& ckpt) {
  validate_net(ckpt.net);
  json j;
  j["version_tag"] = ckpt.net.version_tag;
  j["layer_sizes"] = ckpt.net.layer_sizes;
  j["hidden_layer_norm"] = ckpt.net.hidden_layer_norm;
  j["weights"] = ckpt.net.values;
  j["master_seed"] = ckpt.master_seed;
  if (ckpt.optimizer) {
    const OptimizerState& o = *ckpt.optimizer;
    j["optimizer"] = {
        {"first_moment", o.first_moment}, {"second_moment", o.second_moment},
        {"step_count", o.step_count},     {"learning_rate", o.learning_rate},
        {"beta1", o.beta1},               {"beta2", o.beta2},
        {"eps", o.eps},
    };
  }
  return j.dump(2);
}

NetCheckpoint net_checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint parse error: ") + e.what());
  }
  NetCheckpoint ckpt;
  try {
    ckpt.net.version_tag = j.at("version_tag").get<std::string>();
    ckpt.net.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    ckpt.net.hidden_layer_norm = j.at("hidden_layer_norm").get<bool>();
    ckpt.net.values = j.at("weights").get<std::vector<double>>();
    ckpt.master_seed = j.at("master_seed").get<uint64_t>();
    if (j.contains("optimizer")) {
      const json& o = j.at("optimizer");
      OptimizerState s;
      s.first_moment = o.at("first_moment").get<std::vector<double>>();
      s.second_moment = o.at("second_moment").get<std::vector<double>>();
      s.step_count = o.at("step_count").get<int64_t>();
      s.learning_rate = o.at("learning_rate").get<double>();
      s.beta1 = o.at("beta1").get<double>();
      s.beta2 = o.at("beta2").get<double>();
      s.eps = o.at("eps").get<double>();
      ckpt.optimizer = std::move(s);
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint field error: ") + e.what());
  }
  validate_net(ckpt.net);
  if (ckpt.optimizer && ckpt.optimizer->first_moment.size() != ckpt.net.values.size()) {
    throw IoError("checkpoint optimizer state does not match parameter count");
  }
  return ckpt;
}

void save_net_checkpoint(const NetCheckpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for write: " + path);
  out << net_checkpoint_to_json(ckpt) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

NetCheckpoint load_net_checkpoint(const std::string& path,
                                  const std::optional<std::string>& expected_tag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for read: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  NetCheckpoint ckpt = net_checkpoint_from_json(text);
  if (expected_tag && ckpt.net.version_tag != *expected_tag) {
    throw IoError("checkpoint version mismatch at " + path + ": expected '" + *expected_tag +
                  "', found '" + ckpt.net.version_tag + "'");
  }
  return ckpt;
}

}  // namespace suslab
