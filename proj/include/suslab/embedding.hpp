#ifndef SUSLAB_EMBEDDING_HPP_
#define SUSLAB_EMBEDDING_HPP_

#include <vector>

namespace suslab {

// Unit-norm point in strategy space (L2 norm 1 within 1e-6).
struct StrategyEmbedding {
  std::vector<double> values;

  int dim() const { return static_cast<int>(values.size()); }
};

}  // namespace suslab

#endif  // SUSLAB_EMBEDDING_HPP_
