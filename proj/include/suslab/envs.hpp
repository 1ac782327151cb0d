#ifndef SUSLAB_ENVS_HPP_
#define SUSLAB_ENVS_HPP_

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "suslab/intrinsic.hpp"
#include "suslab/rng.hpp"

namespace suslab {

// ---------------------------------------------------------------------------
// Shared trajectory record

struct Transition {
  std::vector<double> features;       // s_t
  int action = 0;
  std::vector<double> next_features;  // s_{t+1}
  double r_ext = 0.0;
  bool done = false;
};

struct Trajectory {
  int problem_id = 0;
  std::vector<Transition> transitions;
  int correct = 0;  // 1 iff terminal extrinsic reward is 1
  std::vector<IntrinsicBreakdown> breakdowns;  // filled post hoc, aligned with transitions
};

// ---------------------------------------------------------------------------
// ArithChain: compose arithmetic operations to hit a target value.
// Actions 0..|ops|-1 apply the corresponding operation, action |ops| is STOP.
// Values clamp to [-10^4, 10^4]; a move that would leave the range self-loops.

enum class ArithOp { Add1, Add2, Add3, Sub1, Mul2, Mul3 };

constexpr int kArithValueLimit = 10000;

int apply_op(ArithOp op, int value);
std::string op_name(ArithOp op);
ArithOp op_from_name(const std::string& name);

struct ArithChainProblem {
  int start = 0;
  int target = 0;
  std::vector<ArithOp> op_set;
  int max_steps = 6;  // episode ends after this many actions
  int problem_id = 0;

  int action_count() const { return static_cast<int>(op_set.size()) + 1; }
  int stop_action() const { return static_cast<int>(op_set.size()); }
};

struct ArithState {
  int value = 0;
  int step_index = 0;
  int last_action = -1;  // -1 = none
  bool done = false;
};

struct StepResult {
  double r_ext = 0.0;
  bool done = false;
};

ArithState reset(const ArithChainProblem& problem);

// Applies the action, increments step_index; STOP or an exhausted budget
// terminates. Terminal reward is 1 iff current value equals the target.
StepResult step(const ArithChainProblem& problem, ArithState& state, int action);

// [value/scale, target/scale, step/L, one-hot(last action or none)],
// scale = max(|target|, 1). Length 3 + action_count + 1.
std::vector<double> state_features(const ArithChainProblem& problem, const ArithState& state);

int feature_dim(const ArithChainProblem& problem);

// Exact set of action sequences whose terminal value equals the target:
// op prefixes closed by STOP, plus full-length op sequences that terminate
// by budget exhaustion. Bounded exhaustive search (L <= 8, |ops| <= 6).
std::set<std::vector<int>> enumerate_solutions(const ArithChainProblem& problem);

struct ArithChainDifficulty {
  std::vector<ArithOp> op_pool = {ArithOp::Add1, ArithOp::Add3, ArithOp::Mul2, ArithOp::Sub1};
  int max_steps = 6;
  int start_min = 0;
  int start_max = 10;
  int min_walk_ops = 2;   // ops in the generating walk
  int max_walk_ops = 5;   // <= max_steps - 1 so the walk plus STOP fits
  int min_solutions = 2;  // distinct solution sequences required per problem
  int target_abs_max = 60;
};

// Reachability-verified problems (every problem has >= min_solutions oracle
// solutions), deduplicated by (start, target), ids first_id..first_id+count-1.
std::vector<ArithChainProblem> generate_problem_set(int count, const ArithChainDifficulty& difficulty,
                                                    Rng& rng, int first_id = 0);

// arithchain-v1 JSON problem-set files.
void save_problem_set(const std::vector<ArithChainProblem>& problems, const std::string& path);
std::vector<ArithChainProblem> load_problem_set(const std::string& path);

// ---------------------------------------------------------------------------
// MultiPathGrid: N x N grid, start (0,0), goal (N-1,N-1); every open cell lies
// on one of two disjoint L-shaped corridors of equal length (top-right and
// left-bottom). The step budget equals the corridor length, so a successful
// trajectory is a shortest path and stays inside a single corridor.

struct MultiPathGridProblem {
  int n = 5;
  int max_steps = 8;  // 2 * (n - 1)
  int problem_id = 0;

  int action_count() const { return 4; }  // up, down, left, right
};

struct GridState {
  int x = 0;
  int y = 0;
  int step_index = 0;
  bool done = false;
};

GridState reset(const MultiPathGridProblem& problem);
StepResult step(const MultiPathGridProblem& problem, GridState& state, int action);

// [x/N, y/N, step/L]
std::vector<double> state_features(const MultiPathGridProblem& problem, const GridState& state);
int feature_dim(const MultiPathGridProblem& problem);

bool grid_cell_open(const MultiPathGridProblem& problem, int x, int y);

enum class Corridor { Top, Bottom };

// Ground-truth strategy label for a successful trajectory; nullopt otherwise.
std::optional<Corridor> corridor_label(const MultiPathGridProblem& problem,
                                       const Trajectory& trajectory);

std::vector<MultiPathGridProblem> generate_grid_problem_set(int count, int n, int first_id = 0);

// ---------------------------------------------------------------------------
// Compile-time domain adapters so rollout code works over either environment.

struct ArithChainDomain {
  using Problem = ArithChainProblem;
  using State = ArithState;
  static State make_reset(const Problem& p) { return reset(p); }
  static StepResult make_step(const Problem& p, State& s, int a) { return step(p, s, a); }
  static std::vector<double> features(const Problem& p, const State& s) {
    return state_features(p, s);
  }
  static int action_count(const Problem& p) { return p.action_count(); }
  static int max_steps(const Problem& p) { return p.max_steps; }
};

struct MultiPathGridDomain {
  using Problem = MultiPathGridProblem;
  using State = GridState;
  static State make_reset(const Problem& p) { return reset(p); }
  static StepResult make_step(const Problem& p, State& s, int a) { return step(p, s, a); }
  static std::vector<double> features(const Problem& p, const State& s) {
    return state_features(p, s);
  }
  static int action_count(const Problem& p) { return p.action_count(); }
  static int max_steps(const Problem& p) { return p.max_steps; }
};

}  // namespace suslab

#endif  // SUSLAB_ENVS_HPP_
