#include "suslab/envs.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "suslab/common.hpp"

namespace suslab {

using nlohmann::json;

// ---------------------------------------------------------------------------
// ArithChain

int apply_op(ArithOp op, int value) {
  switch (op) {
    case ArithOp::Add1: return value + 1;
    case ArithOp::Add2: return value + 2;
    case ArithOp::Add3: return value + 3;
    case ArithOp::Sub1: return value - 1;
    case ArithOp::Mul2: return value * 2;
    case ArithOp::Mul3: return value * 3;
  }
  throw ContractViolation("apply_op: unknown operation");
}

std::string op_name(ArithOp op) {
  switch (op) {
    case ArithOp::Add1: return "+1";
    case ArithOp::Add2: return "+2";
    case ArithOp::Add3: return "+3";
    case ArithOp::Sub1: return "-1";
    case ArithOp::Mul2: return "*2";
    case ArithOp::Mul3: return "*3";
  }
  throw ContractViolation("op_name: unknown operation");
}

ArithOp op_from_name(const std::string& name) {
  if (name == "+1") return ArithOp::Add1;
  if (name == "+2") return ArithOp::Add2;
  if (name == "+3") return ArithOp::Add3;
  if (name == "-1") return ArithOp::Sub1;
  if (name == "*2") return ArithOp::Mul2;
  if (name == "*3") return ArithOp::Mul3;
  throw ContractViolation("op_from_name: unknown operation '" + name + "'");
}

ArithState reset(const ArithChainProblem& problem) {
  ArithState s;
  s.value = problem.start;
  return s;
}

StepResult step(const ArithChainProblem& problem, ArithState& state, int action) {
  require(!state.done, "step: episode already terminated");
  require(action >= 0 && action < problem.action_count(), "step: invalid action id");
  StepResult out;
  if (action != problem.stop_action()) {
    const int next = apply_op(problem.op_set[action], state.value);
    if (std::abs(next) <= kArithValueLimit) state.value = next;  // out-of-range moves self-loop
  }
  state.step_index += 1;
  state.last_action = action;
  if (action == problem.stop_action() || state.step_index >= problem.max_steps) {
    state.done = true;
    out.done = true;
    out.r_ext = state.value == problem.target ? 1.0 : 0.0;
  }
  return out;
}

std::vector<double> state_features(const ArithChainProblem& problem, const ArithState& state) {
  const double scale = std::max(std::abs(problem.target), 1);
  std::vector<double> f(static_cast<std::size_t>(feature_dim(problem)), 0.0);
  f[0] = state.value / scale;
  f[1] = problem.target / scale;
  f[2] = static_cast<double>(state.step_index) / problem.max_steps;
  const int slot = state.last_action < 0 ? problem.action_count() : state.last_action;
  f[3 + static_cast<std::size_t>(slot)] = 1.0;
  return f;
}

int feature_dim(const ArithChainProblem& problem) { return 3 + problem.action_count() + 1; }

namespace {

void enumerate_rec(const ArithChainProblem& p, int value, std::vector<int>& prefix,
                   std::set<std::vector<int>>& out) {
  const int depth = static_cast<int>(prefix.size());
  if (depth + 1 <= p.max_steps && value == p.target) {
    prefix.push_back(p.stop_action());
    out.insert(prefix);
    prefix.pop_back();
  }
  if (depth >= p.max_steps) return;
  for (int a = 0; a < static_cast<int>(p.op_set.size()); ++a) {
    int next = apply_op(p.op_set[a], value);
    if (std::abs(next) > kArithValueLimit) next = value;
    prefix.push_back(a);
    // A full-length op sequence terminates by exhaustion; it is a solution
    // without an explicit STOP.
    if (static_cast<int>(prefix.size()) == p.max_steps) {
      if (next == p.target) out.insert(prefix);
    } else {
      enumerate_rec(p, next, prefix, out);
    }
    prefix.pop_back();
  }
}

}  // namespace

std::set<std::vector<int>> enumerate_solutions(const ArithChainProblem& problem) {
  require(problem.max_steps <= 8, "enumerate_solutions: max_steps above exhaustive-search bound (8)");
  require(problem.op_set.size() <= 6, "enumerate_solutions: op_set above exhaustive-search bound (6)");
  std::set<std::vector<int>> out;
  std::vector<int> prefix;
  enumerate_rec(problem, problem.start, prefix, out);
  return out;
}

std::vector<ArithChainProblem> generate_problem_set(int count, const ArithChainDifficulty& difficulty,
                                                    Rng& rng, int first_id) {
  require(count >= 1, "generate_problem_set: count must be >= 1");
  require(difficulty.max_walk_ops <= difficulty.max_steps - 1,
          "generate_problem_set: walk must leave room for STOP");
  std::vector<ArithChainProblem> problems;
  std::set<std::pair<int, int>> seen;  // (start, target) pairs across the set
  int attempts = 0;
  const int max_attempts = count * 1000;
  while (static_cast<int>(problems.size()) < count) {
    require(++attempts <= max_attempts,
            "generate_problem_set: exhausted attempts; difficulty too restrictive");
    ArithChainProblem p;
    p.op_set = difficulty.op_pool;
    p.max_steps = difficulty.max_steps;
    p.start = rng.uniform_int(difficulty.start_min, difficulty.start_max);
    const int walk = rng.uniform_int(difficulty.min_walk_ops, difficulty.max_walk_ops);
    int value = p.start;
    for (int i = 0; i < walk; ++i) {
      const int a = rng.uniform_int(0, static_cast<int>(p.op_set.size()) - 1);
      const int next = apply_op(p.op_set[a], value);
      if (std::abs(next) <= kArithValueLimit) value = next;
    }
    p.target = value;
    if (p.target == p.start) continue;
    if (std::abs(p.target) > difficulty.target_abs_max) continue;
    if (seen.count({p.start, p.target})) continue;
    if (static_cast<int>(enumerate_solutions(p).size()) < difficulty.min_solutions) continue;
    seen.insert({p.start, p.target});
    p.problem_id = first_id + static_cast<int>(problems.size());
    problems.push_back(std::move(p));
  }
  return problems;
}

void save_problem_set(const std::vector<ArithChainProblem>& problems, const std::string& path) {
  json j;
  j["schema"] = "arithchain-v1";
  json arr = json::array();
  for (const ArithChainProblem& p : problems) {
    json ops = json::array();
    for (ArithOp op : p.op_set) ops.push_back(op_name(op));
    arr.push_back({{"problem_id", p.problem_id},
                   {"start", p.start},
                   {"target", p.target},
                   {"op_set", ops},
                   {"max_steps", p.max_steps}});
  }
  j["problems"] = std::move(arr);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for write: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

std::vector<ArithChainProblem> load_problem_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for read: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(std::string("problem set parse error: ") + e.what());
  }
  if (j.value("schema", "") != std::string("arithchain-v1")) {
    throw IoError("problem set schema mismatch in " + path);
  }
  std::vector<ArithChainProblem> problems;
  for (const json& e : j.at("problems")) {
    ArithChainProblem p;
    p.problem_id = e.at("problem_id").get<int>();
    p.start = e.at("start").get<int>();
    p.target = e.at("target").get<int>();
    p.max_steps = e.at("max_steps").get<int>();
    for (const json& o : e.at("op_set")) p.op_set.push_back(op_from_name(o.get<std::string>()));
    problems.push_back(std::move(p));
  }
  return problems;
}

// ---------------------------------------------------------------------------
// MultiPathGrid

GridState reset(const MultiPathGridProblem& problem) {
  require(problem.n >= 3, "MultiPathGrid: n must be >= 3");
  return GridState{};
}

bool grid_cell_open(const MultiPathGridProblem& problem, int x, int y) {
  const int n = problem.n;
  if (x < 0 || y < 0 || x >= n || y >= n) return false;
  // Top corridor: top edge then right edge. Bottom corridor: left edge then
  // bottom edge. Everything else is wall.
  return y == 0 || x == n - 1 || x == 0 || y == n - 1;
}

StepResult step(const MultiPathGridProblem& problem, GridState& state, int action) {
  require(!state.done, "step: episode already terminated");
  require(action >= 0 && action < 4, "step: invalid action id");
  static constexpr int dx[4] = {0, 0, -1, 1};  // up, down, left, right
  static constexpr int dy[4] = {-1, 1, 0, 0};
  const int nx = state.x + dx[action];
  const int ny = state.y + dy[action];
  if (grid_cell_open(problem, nx, ny)) {  // blocked moves self-loop
    state.x = nx;
    state.y = ny;
  }
  state.step_index += 1;
  StepResult out;
  const bool at_goal = state.x == problem.n - 1 && state.y == problem.n - 1;
  if (at_goal || state.step_index >= problem.max_steps) {
    state.done = true;
    out.done = true;
    out.r_ext = at_goal ? 1.0 : 0.0;
  }
  return out;
}

std::vector<double> state_features(const MultiPathGridProblem& problem, const GridState& state) {
  return {static_cast<double>(state.x) / problem.n, static_cast<double>(state.y) / problem.n,
          static_cast<double>(state.step_index) / problem.max_steps};
}

int feature_dim(const MultiPathGridProblem&) { return 3; }

std::optional<Corridor> corridor_label(const MultiPathGridProblem& problem,
                                       const Trajectory& trajectory) {
  if (trajectory.correct != 1 || trajectory.transitions.empty()) return std::nullopt;
  // Replay actions; cells strictly between start and goal decide the label.
  GridState s = reset(problem);
  bool top = false, bottom = false;
  for (const Transition& t : trajectory.transitions) {
    step(problem, s, t.action);
    const bool at_start = s.x == 0 && s.y == 0;
    const bool at_goal = s.x == problem.n - 1 && s.y == problem.n - 1;
    if (at_start || at_goal) continue;
    if (s.y == 0 || s.x == problem.n - 1) top = true;
    if (s.x == 0 || s.y == problem.n - 1) bottom = true;
  }
  if (top == bottom) return std::nullopt;  // mixed or empty: no well-defined label
  return top ? Corridor::Top : Corridor::Bottom;
}

std::vector<MultiPathGridProblem> generate_grid_problem_set(int count, int n, int first_id) {
  require(count >= 1, "generate_grid_problem_set: count must be >= 1");
  require(n >= 3, "generate_grid_problem_set: n must be >= 3");
  std::vector<MultiPathGridProblem> problems;
  for (int i = 0; i < count; ++i) {
    MultiPathGridProblem p;
    p.n = n;
    p.max_steps = 2 * (n - 1);
    p.problem_id = first_id + i;
    problems.push_back(p);
  }
  return problems;
}

}  // namespace suslab
