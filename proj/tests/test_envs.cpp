#include <doctest.h>

#include <cmath>

#include "suslab/common.hpp"
#include "suslab/envs.hpp"
#include "suslab/rng.hpp"

using namespace suslab;

namespace {

ArithChainProblem demo_problem() {
  ArithChainProblem p;
  p.start = 1;
  p.target = 10;
  p.op_set = {ArithOp::Add3, ArithOp::Mul2, ArithOp::Add1};
  p.max_steps = 4;
  p.problem_id = 0;
  return p;
}

// Test-local brute force over all action sequences, written as base-(n+1)
// counting rather than recursion so it is an independent oracle.
std::set<std::vector<int>> enumerate_by_counting(const ArithChainProblem& p) {
  std::set<std::vector<int>> out;
  const int n_actions = p.action_count();
  for (int len = 1; len <= p.max_steps; ++len) {
    std::vector<int> seq(static_cast<std::size_t>(len), 0);
    while (true) {
      // validity: STOP only allowed as the final action; ops elsewhere
      bool shape_ok = true;
      for (int i = 0; i + 1 < len; ++i) shape_ok = shape_ok && seq[static_cast<std::size_t>(i)] != p.stop_action();
      const bool ends_stop = seq[static_cast<std::size_t>(len - 1)] == p.stop_action();
      if (shape_ok && (ends_stop || len == p.max_steps)) {
        ArithState s = reset(p);
        double terminal = 0.0;
        bool legal = true;
        for (int i = 0; i < len && legal; ++i) {
          if (s.done) legal = false;
          if (legal) terminal = step(p, s, seq[static_cast<std::size_t>(i)]).r_ext;
        }
        if (legal && s.done && terminal == 1.0) out.insert(seq);
      }
      // increment
      int pos = len - 1;
      while (pos >= 0) {
        seq[static_cast<std::size_t>(pos)] += 1;
        if (seq[static_cast<std::size_t>(pos)] < n_actions) break;
        seq[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("arithchain reset: fresh state regardless of history") {
  const ArithChainProblem p = demo_problem();
  ArithState s = reset(p);
  CHECK(s.value == 1);
  CHECK(s.step_index == 0);
  CHECK(s.last_action == -1);
  CHECK_FALSE(s.done);

  step(p, s, 0);
  step(p, s, 1);
  const ArithState fresh = reset(p);
  CHECK(fresh.value == 1);
  CHECK(fresh.step_index == 0);

  const ArithState again = reset(p);
  CHECK(again.value == fresh.value);
  CHECK(again.step_index == fresh.step_index);
}

TEST_CASE("arithchain step: +3 three times then STOP solves 1 -> 10") {
  const ArithChainProblem p = demo_problem();
  ArithState s = reset(p);
  StepResult r = step(p, s, 0);  // 1 -> 4
  CHECK(r.r_ext == 0.0);
  CHECK_FALSE(r.done);
  r = step(p, s, 0);  // 4 -> 7
  CHECK(r.r_ext == 0.0);
  r = step(p, s, 0);  // 7 -> 10
  CHECK(r.r_ext == 0.0);
  r = step(p, s, p.stop_action());
  CHECK(r.done);
  CHECK(r.r_ext == 1.0);
  CHECK(s.done);
  CHECK_THROWS_AS((void)step(p, s, 0), ContractViolation);
}

TEST_CASE("arithchain step: immediate STOP off-target and budget exhaustion give 0") {
  const ArithChainProblem p = demo_problem();
  ArithState s = reset(p);
  const StepResult r = step(p, s, p.stop_action());
  CHECK(r.done);
  CHECK(r.r_ext == 0.0);

  ArithState s2 = reset(p);
  StepResult r2;
  for (int i = 0; i < p.max_steps; ++i) r2 = step(p, s2, 2);  // +1 each step: 1..5, misses 10
  CHECK(r2.done);
  CHECK(r2.r_ext == 0.0);
  CHECK(s2.step_index == p.max_steps);
}

TEST_CASE("arithchain step: values clamp by self-looping at the boundary") {
  ArithChainProblem p;
  p.start = 9000;
  p.target = 5;
  p.op_set = {ArithOp::Mul3};
  p.max_steps = 3;
  ArithState s = reset(p);
  step(p, s, 0);  // 27000 would leave the range: self-loop
  CHECK(s.value == 9000);
  CHECK(s.step_index == 1);
  CHECK(s.last_action == 0);
}

TEST_CASE("arithchain features: normalized layout") {
  ArithChainProblem p = demo_problem();
  p.max_steps = 5;
  ArithState s = reset(p);
  s.value = 10;
  s.step_index = 4;
  const std::vector<double> f = state_features(p, s);
  REQUIRE(static_cast<int>(f.size()) == feature_dim(p));
  REQUIRE(static_cast<int>(f.size()) == 3 + p.action_count() + 1);
  CHECK(f[0] == doctest::Approx(1.0));
  CHECK(f[1] == doctest::Approx(1.0));
  CHECK(f[2] == doctest::Approx(0.8));
  CHECK(f[3 + static_cast<std::size_t>(p.action_count())] == 1.0);  // "none" slot

  ArithChainProblem same_start_target = p;
  same_start_target.start = 7;
  same_start_target.target = 7;
  const std::vector<double> g = state_features(same_start_target, reset(same_start_target));
  CHECK(g[0] == g[1]);

  const std::vector<double> h1 = state_features(p, s);
  const std::vector<double> h2 = state_features(p, s);
  CHECK(h1 == h2);
}

TEST_CASE("enumerate_solutions: matches the independent counting oracle") {
  const ArithChainProblem p = demo_problem();
  const std::set<std::vector<int>> got = enumerate_solutions(p);
  const std::set<std::vector<int>> expect = enumerate_by_counting(p);
  CHECK(got == expect);
  // +3 +3 +3 STOP is one of the solutions
  CHECK(got.count({0, 0, 0, p.stop_action()}) == 1);
  CHECK_FALSE(got.empty());
}

TEST_CASE("enumerate_solutions: start == target admits the bare STOP sequence") {
  ArithChainProblem p = demo_problem();
  p.target = 1;
  const auto sols = enumerate_solutions(p);
  CHECK(sols.count({p.stop_action()}) == 1);
}

TEST_CASE("enumerate_solutions: refuses out-of-bound searches") {
  ArithChainProblem p = demo_problem();
  p.max_steps = 9;
  CHECK_THROWS_AS((void)enumerate_solutions(p), ContractViolation);
  p.max_steps = 4;
  p.op_set = {ArithOp::Add1, ArithOp::Add2, ArithOp::Add3, ArithOp::Sub1, ArithOp::Mul2,
              ArithOp::Mul3, ArithOp::Add1};
  CHECK_THROWS_AS((void)enumerate_solutions(p), ContractViolation);
}

TEST_CASE("environments are deterministic and sparse") {
  const ArithChainProblem p = demo_problem();
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> actions;
    ArithState s = reset(p);
    std::vector<std::pair<int, double>> trace1;
    while (!s.done) {
      const int a = rng.uniform_int(0, p.action_count() - 1);
      actions.push_back(a);
      const StepResult r = step(p, s, a);
      trace1.push_back({s.value, r.r_ext});
      if (!r.done) CHECK(r.r_ext == 0.0);  // sparsity
    }
    ArithState s2 = reset(p);
    std::size_t idx = 0;
    while (!s2.done) {
      const StepResult r = step(p, s2, actions[idx]);
      CHECK(s2.value == trace1[idx].first);
      CHECK(r.r_ext == trace1[idx].second);
      ++idx;
    }
    CHECK(idx == trace1.size());
  }
}

TEST_CASE("successful random trajectories replay into the solution set") {
  const ArithChainProblem p = demo_problem();
  const auto sols = enumerate_solutions(p);
  Rng rng(6);
  int hits = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    ArithState s = reset(p);
    std::vector<int> actions;
    double terminal = 0.0;
    while (!s.done) {
      const int a = rng.uniform_int(0, p.action_count() - 1);
      actions.push_back(a);
      terminal = step(p, s, a).r_ext;
    }
    if (terminal == 1.0) {
      ++hits;
      CHECK(sols.count(actions) == 1);
    }
  }
  CHECK(hits > 0);  // the problem is solvable by chance at this size
}

TEST_CASE("generate_problem_set: deterministic, reachable, content-distinct") {
  ArithChainDifficulty diff;
  diff.min_solutions = 2;
  Rng r1(42), r2(42);
  const std::vector<ArithChainProblem> a = generate_problem_set(20, diff, r1, 0);
  const std::vector<ArithChainProblem> b = generate_problem_set(20, diff, r2, 0);
  REQUIRE(a.size() == 20);
  std::set<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].start == b[i].start);
    CHECK(a[i].target == b[i].target);
    CHECK(a[i].problem_id == static_cast<int>(i));
    CHECK(a[i].target != a[i].start);
    CHECK(static_cast<int>(enumerate_solutions(a[i]).size()) >= diff.min_solutions);
    pairs.insert({a[i].start, a[i].target});
  }
  CHECK(pairs.size() == a.size());  // no duplicate (start, target) pairs
}

TEST_CASE("problem set serialization round-trips") {
  ArithChainDifficulty diff;
  Rng rng(7);
  const std::vector<ArithChainProblem> problems = generate_problem_set(5, diff, rng, 100);
  const std::string path = "/tmp/suslab_test_problems.json";
  save_problem_set(problems, path);
  const std::vector<ArithChainProblem> back = load_problem_set(path);
  REQUIRE(back.size() == problems.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].problem_id == problems[i].problem_id);
    CHECK(back[i].start == problems[i].start);
    CHECK(back[i].target == problems[i].target);
    CHECK(back[i].max_steps == problems[i].max_steps);
    CHECK(back[i].op_set == problems[i].op_set);
  }
}

TEST_CASE("multipathgrid: ring structure with two equal corridors") {
  MultiPathGridProblem p;
  p.n = 5;
  p.max_steps = 8;
  CHECK(grid_cell_open(p, 0, 0));
  CHECK(grid_cell_open(p, 4, 4));
  CHECK(grid_cell_open(p, 2, 0));      // top edge
  CHECK(grid_cell_open(p, 4, 2));      // right edge
  CHECK(grid_cell_open(p, 0, 2));      // left edge
  CHECK(grid_cell_open(p, 2, 4));      // bottom edge
  CHECK_FALSE(grid_cell_open(p, 2, 2));  // interior wall
  CHECK_FALSE(grid_cell_open(p, -1, 0));
}

TEST_CASE("multipathgrid: scripted corridor paths succeed and are labeled") {
  MultiPathGridProblem p;
  p.n = 4;
  p.max_steps = 6;
  const int kRight = 3, kDown = 1;

  auto run_path = [&](const std::vector<int>& actions) {
    Trajectory traj;
    traj.problem_id = p.problem_id;
    GridState s = reset(p);
    for (int a : actions) {
      const std::vector<double> f = state_features(p, s);
      const StepResult r = step(p, s, a);
      traj.transitions.push_back({f, a, state_features(p, s), r.r_ext, r.done});
      if (r.done) break;
    }
    traj.correct = traj.transitions.back().r_ext == 1.0 ? 1 : 0;
    return traj;
  };

  const Trajectory top = run_path({kRight, kRight, kRight, kDown, kDown, kDown});
  CHECK(top.correct == 1);
  REQUIRE(corridor_label(p, top).has_value());
  CHECK(*corridor_label(p, top) == Corridor::Top);

  const Trajectory bottom = run_path({kDown, kDown, kDown, kRight, kRight, kRight});
  CHECK(bottom.correct == 1);
  REQUIRE(corridor_label(p, bottom).has_value());
  CHECK(*corridor_label(p, bottom) == Corridor::Bottom);

  // wall bump wastes the budget: failure, no label
  const Trajectory bumped = run_path({kRight, kDown, kRight, kRight, kDown, kDown});
  CHECK(bumped.correct == 0);
  CHECK_FALSE(corridor_label(p, bumped).has_value());
}

TEST_CASE("multipathgrid: every successful random trajectory stays in one corridor") {
  MultiPathGridProblem p;
  p.n = 4;
  p.max_steps = 6;  // 2 * (n - 1): success requires a shortest path
  Rng rng(11);
  int successes = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    Trajectory traj;
    GridState s = reset(p);
    while (!s.done) {
      const int a = rng.uniform_int(0, 3);
      const std::vector<double> f = state_features(p, s);
      const StepResult r = step(p, s, a);
      traj.transitions.push_back({f, a, state_features(p, s), r.r_ext, r.done});
    }
    traj.correct = traj.transitions.back().r_ext == 1.0 ? 1 : 0;
    if (traj.correct == 1) {
      ++successes;
      CHECK(corridor_label(p, traj).has_value());
    }
  }
  CHECK(successes > 0);
}

TEST_CASE("grid features and problem set generation") {
  MultiPathGridProblem p;
  p.n = 5;
  p.max_steps = 8;
  GridState s = reset(p);
  s.x = 2;
  s.y = 0;
  s.step_index = 2;
  const std::vector<double> f = state_features(p, s);
  REQUIRE(f.size() == 3);
  CHECK(f[0] == doctest::Approx(0.4));
  CHECK(f[1] == doctest::Approx(0.0));
  CHECK(f[2] == doctest::Approx(0.25));

  const std::vector<MultiPathGridProblem> set = generate_grid_problem_set(3, 5, 10);
  REQUIRE(set.size() == 3);
  CHECK(set[0].problem_id == 10);
  CHECK(set[2].problem_id == 12);
  CHECK(set[0].max_steps == 8);
}
