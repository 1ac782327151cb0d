#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "suslab/common.hpp"
#include "suslab/metrics.hpp"

using namespace suslab;

namespace {

// Exhaustive subset enumeration: mean over all C(n, k) subsets of "contains
// at least one of the c correct samples".
double pass_at_k_brute(int n, int c, int k) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  uint64_t total = 0, hit = 0;
  while (true) {
    ++total;
    bool any = false;
    for (int i : idx) any = any || i < c;  // samples 0..c-1 are the correct ones
    if (any) ++hit;
    int pos = k - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    idx[static_cast<std::size_t>(pos)] += 1;
    for (int i = pos + 1; i < k; ++i) idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
  }
  return static_cast<double>(hit) / static_cast<double>(total);
}

StrategyEmbedding point(std::vector<double> v) { return StrategyEmbedding{std::move(v)}; }

}  // namespace

TEST_CASE("pass_at_k: endpoints, the 1-of-8 case, and contract checks") {
  CHECK(pass_at_k(8, 0, 5) == 0.0);
  CHECK(pass_at_k(8, 8, 3) == 1.0);
  CHECK(pass_at_k(8, 1, 5) == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(pass_at_k(8, 1, 5) == 1.0 - 21.0 / 56.0);
  CHECK_THROWS_AS((void)pass_at_k(4, 2, 5), ContractViolation);
  CHECK_THROWS_AS((void)pass_at_k(4, 5, 2), ContractViolation);
}

TEST_CASE("pass_at_k: exact against exhaustive subsets for all n <= 10") {
  for (int n = 1; n <= 10; ++n) {
    for (int c = 0; c <= n; ++c) {
      for (int k = 1; k <= n; ++k) {
        CHECK(pass_at_k(n, c, k) == pass_at_k_brute(n, c, k));
      }
    }
  }
}

TEST_CASE("pass_at_k: non-decreasing in k and in c") {
  for (int n = 2; n <= 10; ++n) {
    for (int c = 0; c <= n; ++c) {
      for (int k = 2; k <= n; ++k) {
        CHECK(pass_at_k(n, c, k) >= pass_at_k(n, c, k - 1));
      }
    }
    for (int c = 1; c <= n; ++c) {
      for (int k = 1; k <= n; ++k) {
        CHECK(pass_at_k(n, c, k) >= pass_at_k(n, c - 1, k));
      }
    }
  }
}

TEST_CASE("kmeans: single cluster, separation, determinism, contract") {
  std::vector<StrategyEmbedding> pts = {point({0.0, 0.0}), point({0.1, 0.0}), point({5.0, 5.0}),
                                        point({5.1, 5.0})};
  const std::vector<int> one = kmeans(pts, 1, 7);
  for (int a : one) CHECK(a == 0);

  const std::vector<int> two = kmeans(pts, 2, 7);
  CHECK(two[0] == two[1]);
  CHECK(two[2] == two[3]);
  CHECK(two[0] != two[2]);

  CHECK(kmeans(pts, 2, 1234) == kmeans(pts, 2, 1234));
  CHECK_THROWS_AS((void)kmeans(pts, 5, 7), ContractViolation);
}

TEST_CASE("kmeans: objective non-increasing across Lloyd iterations") {
  Rng rng(3);
  std::vector<StrategyEmbedding> pts;
  for (int i = 0; i < 60; ++i) {
    pts.push_back(point({rng.gaussian(), rng.gaussian(), rng.gaussian()}));
  }
  std::vector<double> trace;
  (void)kmeans(pts, 4, 11, &trace);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-12);
}

TEST_CASE("cluster_entropy: degenerate, uniform, and 3-1 split") {
  const std::vector<int> all_zero = {0, 0, 0, 0};
  CHECK(cluster_entropy(all_zero, 3) == 0.0);

  const std::vector<int> uniform = {0, 1, 2, 3, 0, 1, 2, 3};
  CHECK(cluster_entropy(uniform, 4) == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  const std::vector<int> split = {0, 0, 0, 1};
  CHECK(cluster_entropy(split, 2) ==
        doctest::Approx(-(0.75 * std::log(0.75) + 0.25 * std::log(0.25))).epsilon(1e-12));
  CHECK(cluster_entropy(split, 2) == doctest::Approx(0.5623).epsilon(1e-3));

  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> assign(40);
    for (int& a : assign) a = rng.uniform_int(0, 7);
    CHECK(cluster_entropy(assign, 8) <= std::log(8.0) + 1e-12);
  }
}

TEST_CASE("evaluate: scripted near-deterministic solver reaches pass@k ~ 1") {
  // start 1, target 2, single op +1: solution is [+1, STOP]
  ArithChainProblem p;
  p.start = 1;
  p.target = 2;
  p.op_set = {ArithOp::Add1};
  p.max_steps = 2;
  p.problem_id = 0;

  // logits read the step/L feature: +1 wins at step 0, STOP at step 1
  PolicyParams policy;
  policy.net.layer_sizes = {feature_dim(p), 2};
  policy.net.hidden_layer_norm = false;
  policy.net.values.assign(param_count(policy.net.layer_sizes, false), 0.0);
  // W row-major: action 0 (+1), action 1 (STOP); column 2 is step/L
  policy.net.values[static_cast<std::size_t>(0) * feature_dim(p) + 2] = -60.0;
  policy.net.values[static_cast<std::size_t>(1) * feature_dim(p) + 2] = 60.0;
  const std::size_t bias_off = policy.net.values.size() - 2;
  policy.net.values[bias_off] = 15.0;       // +1 logit at step 0
  policy.net.values[bias_off + 1] = -15.0;  // STOP suppressed at step 0
  policy.net.version_tag = "policy-v1";

  Rng enc_rng(5);
  const NetParams encoder = make_encoder_net(feature_dim(p), 8, 4, enc_rng, "encoder-v1");
  const std::vector<ArithChainProblem> problems = {p};
  const int ks[] = {1, 5};
  const EvalReport rep = evaluate<ArithChainDomain>(policy, problems, 8, ks, encoder, Rng(3));
  CHECK(rep.pass_at.at(1) > 0.999);
  CHECK(rep.pass_at.at(5) > 0.999);
}

TEST_CASE("evaluate: monotone in k, deterministic per seed") {
  ArithChainDifficulty diff;
  Rng gen_rng(17);
  const std::vector<ArithChainProblem> problems = generate_problem_set(10, diff, gen_rng, 0);
  Rng prng(21);
  const PolicyParams policy =
      make_policy(feature_dim(problems[0]), problems[0].action_count(), 8, prng);
  Rng erng(22);
  const NetParams encoder =
      make_encoder_net(feature_dim(problems[0]), 8, 6, erng, "encoder-v1");
  const int ks[] = {1, 5};
  const EvalReport a = evaluate<ArithChainDomain>(policy, problems, 8, ks, encoder, Rng(9));
  const EvalReport b = evaluate<ArithChainDomain>(policy, problems, 8, ks, encoder, Rng(9));
  CHECK(a.pass_at.at(5) >= a.pass_at.at(1));
  CHECK(a.pass_at.at(1) == b.pass_at.at(1));
  CHECK(a.pass_at.at(5) == b.pass_at.at(5));
  CHECK(a.entropy == b.entropy);
  CHECK(a.entropy >= 0.0);
  CHECK(a.entropy <= std::log(8.0) + 1e-12);
  REQUIRE(a.success_counts.size() == 10);
  for (const auto& [n, c] : a.success_counts) {
    CHECK(n == 8);
    CHECK(c >= 0);
    CHECK(c <= 8);
  }
}

TEST_CASE("write_metrics_csv: header-only file for empty rows") {
  CsvTable t;
  t.header = {"a", "b"};
  const std::string path = "/tmp/suslab_test_empty.csv";
  write_metrics_csv(t, path);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "a,b");
  CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("write_metrics_csv: 17-significant-digit round trip and byte determinism") {
  CsvTable t;
  t.header = {"iter", "name", "value"};
  Rng rng(13);
  std::vector<double> originals;
  for (int i = 0; i < 50; ++i) {
    const double v = rng.gaussian() * std::pow(10.0, rng.uniform_int(-8, 8));
    originals.push_back(v);
    t.add_row({static_cast<int64_t>(i), std::string("row"), v});
  }
  const std::string path1 = "/tmp/suslab_test_rt1.csv";
  const std::string path2 = "/tmp/suslab_test_rt2.csv";
  write_metrics_csv(t, path1);
  write_metrics_csv(t, path2);

  std::ifstream f1(path1), f2(path2);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());

  std::ifstream in(path1);
  std::string line;
  std::getline(in, line);  // header
  std::size_t row = 0;
  while (std::getline(in, line)) {
    const std::size_t last_comma = line.rfind(',');
    REQUIRE(last_comma != std::string::npos);
    const double parsed = std::strtod(line.c_str() + last_comma + 1, nullptr);
    CHECK(parsed == originals[row]);
    ++row;
  }
  CHECK(row == originals.size());
}
