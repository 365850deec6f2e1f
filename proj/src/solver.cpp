#include "relpol/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace relpol {

uint32_t StateGraph::intern(const State& q) {
  auto it = index_.find(q);
  if (it != index_.end()) return it->second;
  uint32_t ix = uint32_t(states_.size());
  states_.push_back(q);
  goal_.push_back(is_goal(q, *dom_) ? 1 : 0);
  expanded_.push_back(0);
  actions_.emplace_back();
  index_.emplace(states_.back(), ix);
  ++version_;
  return ix;
}

void StateGraph::expand(uint32_t ix) {
  if (expanded_[ix]) return;
  expanded_[ix] = 1;
  if (goal_[ix]) return;  // absorbing
  // interning successors may reallocate states_ and actions_, so build
  // locally and move in at the end
  const State q = states_[ix];
  auto legal = legal_actions(q, *dom_);
  std::vector<ActionEdges> out;
  out.reserve(legal.size());
  for (GroundAction& act : legal) {
    ActionEdges ae;
    int ci = applicable_case(q, *dom_, act);
    const auto& outcomes =
        dom_->actions[act.type].variants[act.variant].cases[ci].outcomes;
    for (size_t oi = 0; oi < outcomes.size(); ++oi) {
      State next = apply_outcome(q, *dom_, act, ci, int(oi));
      ae.edges.push_back({outcomes[oi].probability, intern(next)});
    }
    ae.action = std::move(act);
    out.push_back(std::move(ae));
  }
  actions_[ix] = std::move(out);
}

uint32_t StateGraph::ensure_expanded(const State& q, int horizon,
                                     uint64_t node_budget) {
  uint32_t root = intern(q);
  // BFS by depth; states already expanded just contribute their successors.
  std::deque<std::pair<uint32_t, int>> queue{{root, 0}};
  std::unordered_map<uint32_t, int> seen_depth{{root, 0}};
  while (!queue.empty()) {
    auto [ix, depth] = queue.front();
    queue.pop_front();
    if (depth >= horizon) continue;
    expand(ix);
    if (uint64_t(states_.size()) * uint64_t(horizon + 1) > node_budget)
      throw ResourceError(
          "state-step budget exceeded while expanding the reachable space (" +
          std::to_string(states_.size()) + " states, horizon " +
          std::to_string(horizon) + ")");
    for (const ActionEdges& ae : actions_[ix])
      for (const Edge& e : ae.edges) {
        auto it = seen_depth.find(e.next);
        if (it == seen_depth.end() || it->second > depth + 1) {
          seen_depth[e.next] = depth + 1;
          queue.emplace_back(e.next, depth + 1);
        }
      }
  }
  return root;
}

StateGraph reachable(const State& q0, const DomainDef& dom, int h,
                     uint64_t node_budget) {
  if (h < 0) throw ValidationError("horizon must be non-negative");
  StateGraph g(dom);
  g.ensure_expanded(q0, h, node_budget);
  return g;
}

ValueTable value_iterate(const StateGraph& graph, const SolverParams& params) {
  const int h = params.horizon;
  const uint32_t n = graph.num_states();
  ValueTable t;
  t.v.assign(h + 1, std::vector<double>(n, 0.0));
  for (uint32_t i = 0; i < n; ++i)
    if (graph.goal(i)) t.v[0][i] = 1.0;
  for (int k = 1; k <= h; ++k) {
    const auto& prev = t.v[k - 1];
    auto& cur = t.v[k];
    for (uint32_t i = 0; i < n; ++i) {
      if (graph.goal(i)) {
        cur[i] = 1.0;
        continue;
      }
      double best = 0.0;  // dead ends keep value zero
      for (const auto& ae : graph.actions(i)) {
        double ev = 0.0;
        for (const auto& e : ae.edges)
          ev += e.probability * (graph.goal(e.next) ? 1.0 : prev[e.next]);
        best = std::max(best, params.gamma * ev);
      }
      cur[i] = best;
    }
  }
  return t;
}

std::vector<double> action_values(uint32_t ix, const StateGraph& graph,
                                  const ValueTable& table, int k) {
  const auto& prev = table.v[k - 1];
  std::vector<double> out;
  out.reserve(graph.actions(ix).size());
  // gamma is baked into the caller's comparison; recompute here with the
  // same formula as value_iterate so ties are exact
  for (const auto& ae : graph.actions(ix)) {
    double ev = 0.0;
    for (const auto& e : ae.edges)
      ev += e.probability * (graph.goal(e.next) ? 1.0 : prev[e.next]);
    out.push_back(ev);
  }
  return out;
}

std::vector<GroundAction> optimal_actions(const State& q,
                                          const StateGraph& graph,
                                          const ValueTable& table,
                                          const SolverParams& params) {
  auto found = graph.find(q);
  if (!found)
    throw ValidationError("optimal_actions queried on a state outside the graph");
  uint32_t ix = *found;
  if (graph.goal(ix))
    throw ValidationError("optimal_actions queried on a goal state");
  if (params.horizon < 1 || params.horizon > table.horizon())
    throw ValidationError("horizon outside the value table");
  std::vector<double> ev = action_values(ix, graph, table, params.horizon);
  double best = 0.0;
  for (double v : ev) best = std::max(best, v);
  std::vector<GroundAction> out;
  for (size_t a = 0; a < ev.size(); ++a)
    if (params.gamma * ev[a] >= params.gamma * best - params.tie_epsilon)
      out.push_back(graph.actions(ix)[a].action);
  return out;
}

std::string value_dump_jsonl(const StateGraph& graph, const ValueTable& table,
                             const SolverParams& params) {
  std::ostringstream os;
  os.precision(17);
  for (uint32_t i = 0; i < graph.num_states(); ++i) {
    for (int k = 0; k <= table.horizon(); ++k) {
      os << "{\"state\":\"";
      os << print_state(graph.domain(), graph.state(i));
      os << "\",\"k\":" << k << ",\"value\":" << table.value(k, i);
      os << ",\"argmax\":[";
      if (k >= 1 && !graph.goal(i)) {
        auto ev = action_values(i, graph, table, k);
        double best = 0.0;
        for (double v : ev) best = std::max(best, v);
        bool first = true;
        for (size_t a = 0; a < ev.size(); ++a)
          if (params.gamma * ev[a] >= params.gamma * best - params.tie_epsilon) {
            if (!first) os << ',';
            first = false;
            os << '"'
               << action_to_string(graph.domain(), graph.state(i),
                                   graph.actions(i)[a].action)
               << '"';
          }
      }
      os << "]}\n";
    }
  }
  return os.str();
}

}  // namespace relpol
