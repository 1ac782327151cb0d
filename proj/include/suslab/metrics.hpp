#ifndef SUSLAB_METRICS_HPP_
#define SUSLAB_METRICS_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "suslab/agent.hpp"
#include "suslab/embedding.hpp"
#include "suslab/encoder.hpp"
#include "suslab/rng.hpp"

namespace suslab {

// Unbiased estimator 1 - C(n-c, k) / C(n, k), evaluated in exact integer
// arithmetic before the single division.
double pass_at_k(int n, int c, int k);

// Lloyd's algorithm with k-means++ seeding: deterministic per seed, ties to
// the lowest centroid index, stops after 100 iterations or centroid movement
// below 1e-9. objective_trace, when given, receives the within-cluster sum of
// squares after each Lloyd iteration.
std::vector<int> kmeans(std::span<const StrategyEmbedding> points, int k, uint64_t seed,
                        std::vector<double>* objective_trace = nullptr);

// Shannon entropy (natural log) of the cluster-size distribution.
double cluster_entropy(std::span<const int> assignments, int k);

struct EvalReport {
  std::map<int, double> pass_at;             // k -> mean estimate over problems
  std::vector<std::pair<int, int>> success_counts;  // per problem: (n, c)
  double entropy = 0.0;
  int64_t seed = 0;
  int iteration = 0;
};

constexpr int kEntropyClusters = 8;

// Samples n trajectories per problem at the evaluation temperature, scores
// correctness through the environment, and clusters one trajectory embedding
// per sample (sorted lexicographically so clustering is order-free).
template <class Domain>
EvalReport evaluate(const PolicyParams& policy, const std::vector<typename Domain::Problem>& problems,
                    int n_samples, std::span<const int> ks, const NetParams& encoder, const Rng& rng,
                    double eval_temperature = 1.0) {
  require(!problems.empty(), "evaluate: no problems");
  for (int k : ks) require(n_samples >= k, "evaluate: n_samples must be >= every k");

  PolicyParams eval_policy = policy;
  eval_policy.temperature = eval_temperature;

  EvalReport report;
  std::vector<StrategyEmbedding> embeddings;
  embeddings.reserve(problems.size() * static_cast<std::size_t>(n_samples));
  for (const auto& problem : problems) {
    const Rng problem_rng = rng.split(static_cast<uint64_t>(problem.problem_id));
    int correct = 0;
    for (int s = 0; s < n_samples; ++s) {
      const Trajectory traj =
          rollout<Domain>(eval_policy, problem, problem_rng.split(static_cast<uint64_t>(s)));
      correct += traj.correct;
      embeddings.push_back(trajectory_embedding(encoder, traj));
    }
    report.success_counts.push_back({n_samples, correct});
  }
  for (int k : ks) {
    double acc = 0.0;
    for (const auto& [n, c] : report.success_counts) acc += pass_at_k(n, c, k);
    report.pass_at[k] = acc / static_cast<double>(report.success_counts.size());
  }

  std::sort(embeddings.begin(), embeddings.end(),
            [](const StrategyEmbedding& a, const StrategyEmbedding& b) { return a.values < b.values; });
  const int k_eff = std::min<int>(kEntropyClusters, static_cast<int>(embeddings.size()));
  if (k_eff >= 1) {
    const std::vector<int> assignments = kmeans(embeddings, k_eff, rng.split(stream::kClustering).next_u64());
    report.entropy = cluster_entropy(assignments, k_eff);
  }
  return report;
}

// ---------------------------------------------------------------------------
// CSV emission

using CsvCell = std::variant<int64_t, double, std::string>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<CsvCell>> rows;

  void add_row(std::vector<CsvCell> row);
};

// UTF-8, header row, fixed column order, real64 printed with 17 significant
// digits; callers append rows in canonical order.
void write_metrics_csv(const CsvTable& table, const std::string& path);

std::string csv_to_string(const CsvTable& table);

}  // namespace suslab

#endif  // SUSLAB_METRICS_HPP_
