#ifndef SUSLAB_CHECKPOINT_HPP_
#define SUSLAB_CHECKPOINT_HPP_

#include <optional>
#include <string>

#include "suslab/numerics.hpp"

namespace suslab {

// One network plus its optimizer state (absent for frozen copies such as the
// reference policy and the momentum target).
struct NetCheckpoint {
  NetParams net;
  std::optional<OptimizerState> optimizer;
  uint64_t master_seed = 0;
};

// JSON round-trip is value-exact: weights are emitted as shortest decimal
// real64 representations, which parse back to identical bits.
std::string net_checkpoint_to_json(const NetCheckpoint& ckpt);
NetCheckpoint net_checkpoint_from_json(const std::string& text);

void save_net_checkpoint(const NetCheckpoint& ckpt, const std::string& path);

// expected_tag, when set, rejects checkpoints with a different version_tag.
NetCheckpoint load_net_checkpoint(const std::string& path,
                                  const std::optional<std::string>& expected_tag = std::nullopt);

}  // namespace suslab

#endif  // SUSLAB_CHECKPOINT_HPP_
