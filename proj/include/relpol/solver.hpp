#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "relpol/pstrips.hpp"

namespace relpol {

struct SolverParams {
  int horizon = 1;
  double gamma = 0.95;
  double tie_epsilon = 1e-9;
  // Budget on |states| * (horizon + 1); exceeding it raises ResourceError.
  uint64_t node_budget = 5'000'000;
};

// Explicit reachable-state graph. States are interned; goal states are
// absorbing and get no outgoing edges. The graph may be grown from several
// roots; value tables are computed over whatever is present, which cannot
// change any state's finite-horizon value (values at k steps depend only on
// states within k steps, which expansion guarantees are present).
class StateGraph {
 public:
  explicit StateGraph(const DomainDef& dom) : dom_(&dom) {}

  struct Edge {
    double probability;
    uint32_t next;
  };
  struct ActionEdges {
    GroundAction action;
    std::vector<Edge> edges;  // outcome distribution of the applicable case
  };

  const DomainDef& domain() const { return *dom_; }
  uint32_t num_states() const { return uint32_t(states_.size()); }
  const State& state(uint32_t i) const { return states_[i]; }
  bool goal(uint32_t i) const { return goal_[i] != 0; }
  const std::vector<ActionEdges>& actions(uint32_t i) const {
    return actions_[i];
  }
  uint64_t version() const { return version_; }

  // Interns q (expanding nothing) and returns its index.
  uint32_t intern(const State& q);
  std::optional<uint32_t> find(const State& q) const {
    auto it = index_.find(q);
    return it == index_.end() ? std::nullopt
                              : std::optional<uint32_t>(it->second);
  }
  // Expands everything reachable from q within `horizon` steps, respecting
  // the node budget.
  uint32_t ensure_expanded(const State& q, int horizon, uint64_t node_budget);

 private:
  void expand(uint32_t ix);

  const DomainDef* dom_;
  std::vector<State> states_;
  std::vector<char> goal_;
  std::vector<char> expanded_;
  std::vector<std::vector<ActionEdges>> actions_;
  std::unordered_map<State, uint32_t, StateHash> index_;
  uint64_t version_ = 0;
};

// reachable(q0, dom, h): fresh graph holding exactly the states reachable
// from q0 within h steps.
StateGraph reachable(const State& q0, const DomainDef& dom, int h,
                     uint64_t node_budget = SolverParams{}.node_budget);

// v[k][i] = best discounted goal probability from state i with k steps to
// go. Goal states are absorbing with value one at every k.
struct ValueTable {
  std::vector<std::vector<double>> v;  // [k][state]
  int horizon() const { return int(v.size()) - 1; }
  double value(int k, uint32_t state) const { return v[k][state]; }
};

ValueTable value_iterate(const StateGraph& graph, const SolverParams& params);

// All legal actions of q whose one-step backup at `horizon` steps-to-go is
// within tie_epsilon of the maximum. q must be a non-goal state present in
// the graph with its successors expanded.
std::vector<GroundAction> optimal_actions(const State& q,
                                          const StateGraph& graph,
                                          const ValueTable& table,
                                          const SolverParams& params);

// One-step backed-up value of every action of state index ix (k steps to go).
std::vector<double> action_values(uint32_t ix, const StateGraph& graph,
                                  const ValueTable& table, int k);

// Debug dump: one JSON object per (state, k): value and argmax actions.
std::string value_dump_jsonl(const StateGraph& graph, const ValueTable& table,
                             const SolverParams& params);

}  // namespace relpol
