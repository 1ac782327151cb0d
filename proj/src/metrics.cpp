#include "suslab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "suslab/common.hpp"

namespace suslab {

namespace {

// C(n, k) in exact integer arithmetic; n <= 62 keeps every intermediate in
// range for the multiplicative form.
uint64_t binomial(int n, int k) {
  require(n >= 0 && k >= 0 && k <= n, "binomial: invalid arguments");
  require(n <= 62, "binomial: n above exact-arithmetic bound");
  k = std::min(k, n - k);
  uint64_t acc = 1;
  for (int i = 1; i <= k; ++i) {
    acc = acc * static_cast<uint64_t>(n - k + i) / static_cast<uint64_t>(i);
  }
  return acc;
}

}  // namespace

double pass_at_k(int n, int c, int k) {
  require(n >= 1 && c >= 0 && c <= n, "pass_at_k: need 0 <= c <= n, n >= 1");
  if (k > n || k < 1) {
    std::ostringstream os;
    os << "pass_at_k: k = " << k << " outside [1, n = " << n << "]";
    throw ContractViolation(os.str());
  }
  if (c == 0) return 0.0;
  if (n - c < k) return 1.0;  // every k-subset hits a correct sample
  // (total - fail) / total is the exact rational value of 1 - C(n-c,k)/C(n,k);
  // both integers are exact in real64, so the single division rounds once.
  const uint64_t fail = binomial(n - c, k);
  const uint64_t total = binomial(n, k);
  return static_cast<double>(total - fail) / static_cast<double>(total);
}

std::vector<int> kmeans(std::span<const StrategyEmbedding> points, int k, uint64_t seed,
                        std::vector<double>* objective_trace) {
  require(k >= 1, "kmeans: k must be >= 1");
  if (static_cast<int>(points.size()) < k) {
    std::ostringstream os;
    os << "kmeans: " << points.size() << " points cannot fill " << k << " clusters";
    throw ContractViolation(os.str());
  }
  const std::size_t n = points.size();
  const std::size_t dim = points[0].values.size();
  for (const StrategyEmbedding& p : points) {
    require(p.values.size() == dim, "kmeans: inconsistent point dimensions");
  }

  auto sq_dist = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      acc += d * d;
    }
    return acc;
  };

  // k-means++ seeding
  Rng rng(seed);
  std::vector<std::vector<double>> centroids;
  centroids.push_back(points[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(n) - 1))].values);
  std::vector<double> d2(n, 0.0);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, sq_dist(points[i].values, c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (target < acc) {
          pick = i;
          break;
        }
      }
    } else {
      // all remaining mass coincides with existing centroids
      pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(n) - 1));
    }
    centroids.push_back(points[pick].values);
  }

  // Lloyd iterations
  std::vector<int> assign(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (int c = 0; c < k; ++c) {
        const double d = sq_dist(points[i].values, centroids[static_cast<std::size_t>(c)]);
        if (d < best) {  // strict: ties stay at the lowest index
          best = d;
          best_c = c;
        }
      }
      assign[i] = best_c;
      objective += best;
    }
    if (objective_trace) objective_trace->push_back(objective);
    double movement = 0.0;
    for (int c = 0; c < k; ++c) {
      std::vector<double> mean(dim, 0.0);
      int count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (assign[i] != c) continue;
        ++count;
        for (std::size_t j = 0; j < dim; ++j) mean[j] += points[i].values[j];
      }
      if (count == 0) continue;  // empty cluster keeps its centroid
      for (double& v : mean) v /= count;
      movement = std::max(movement, std::sqrt(sq_dist(mean, centroids[static_cast<std::size_t>(c)])));
      centroids[static_cast<std::size_t>(c)] = std::move(mean);
    }
    if (movement < 1e-9) break;
  }
  return assign;
}

double cluster_entropy(std::span<const int> assignments, int k) {
  require(k >= 1, "cluster_entropy: k must be >= 1");
  if (assignments.empty()) return 0.0;
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int a : assignments) {
    require(a >= 0 && a < k, "cluster_entropy: assignment outside [0, k)");
    counts[static_cast<std::size_t>(a)] += 1;
  }
  const double n = static_cast<double>(assignments.size());
  double h = 0.0;
  for (int c : counts) {
    if (c == 0) continue;  // empty clusters contribute 0
    const double p = c / n;
    h -= p * std::log(p);
  }
  return h;
}

void CsvTable::add_row(std::vector<CsvCell> row) {
  require(row.size() == header.size(), "CsvTable: row width does not match header");
  rows.push_back(std::move(row));
}

std::string csv_to_string(const CsvTable& table) {
  std::ostringstream out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ',';
    out << table.header[i];
  }
  out << '\n';
  char buf[64];
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      if (std::holds_alternative<int64_t>(row[i])) {
        out << std::get<int64_t>(row[i]);
      } else if (std::holds_alternative<double>(row[i])) {
        std::snprintf(buf, sizeof(buf), "%.17g", std::get<double>(row[i]));
        out << buf;
      } else {
        out << std::get<std::string>(row[i]);
      }
    }
    out << '\n';
  }
  return out.str();
}

void write_metrics_csv(const CsvTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for write: " + path);
  out << csv_to_string(table);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace suslab
