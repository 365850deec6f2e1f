#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "relpol/errors.hpp"
#include "relpol/rng.hpp"

namespace relpol {

using ObjId = uint32_t;
using PredId = uint32_t;

inline constexpr ObjId kNoObj = 0xfffffffeu;

enum class PredRole : uint8_t { World, Goal };

struct PredicateDecl {
  std::string name;
  int arity = 0;  // 0, 1 or 2
  PredRole role = PredRole::World;
  PredId twin = 0;  // goal twin of a world predicate, and vice versa
};

// A ground fact packed into one word: predicate id plus up to two object
// ids (offset by one so 0 means "absent"). Keys sort by (pred, args).
using FactKey = uint64_t;

inline FactKey make_fact(PredId pred, ObjId a0 = kNoObj, ObjId a1 = kNoObj) {
  uint64_t x0 = (a0 == kNoObj) ? 0 : uint64_t(a0) + 1;
  uint64_t x1 = (a1 == kNoObj) ? 0 : uint64_t(a1) + 1;
  return (uint64_t(pred) << 40) | (x0 << 20) | x1;
}
inline PredId fact_pred(FactKey k) { return PredId(k >> 40); }
inline ObjId fact_arg0(FactKey k) {
  uint64_t x = (k >> 20) & 0xfffffu;
  return x == 0 ? kNoObj : ObjId(x - 1);
}
inline ObjId fact_arg1(FactKey k) {
  uint64_t x = k & 0xfffffu;
  return x == 0 ? kNoObj : ObjId(x - 1);
}

// Atom over schema variables; args index into params-then-aux.
struct VarAtom {
  PredId pred = 0;
  int8_t nargs = 0;
  std::array<int8_t, 2> args{-1, -1};
};

struct Literal {
  bool negated = false;
  VarAtom atom;
};

struct Outcome {
  double probability = 1.0;
  std::vector<VarAtom> add;
  std::vector<VarAtom> del;
};

// One guard + outcome distribution. Guards are checked in order at
// application time; the first case whose guard holds applies.
struct GuardedCase {
  std::vector<VarAtom> guard;
  std::vector<Outcome> outcomes;
};

// One schema variant of an action type. Variables are the action params
// followed by aux variables; aux variables are bound by matching the
// positive precondition atoms, taking the lexicographically least
// satisfying assignment.
struct Schema {
  std::vector<std::string> params;
  std::vector<std::string> aux;
  std::vector<Literal> pre;
  std::vector<GuardedCase> cases;
  int num_vars() const { return int(params.size() + aux.size()); }
};

struct ActionType {
  std::string name;
  int arity = 0;
  std::vector<Schema> variants;
};

// A derived predicate definition: the concept source is kept as text here
// and parsed by the taxonomy layer, which owns the expression language.
struct DerivedDef {
  std::string name;
  std::string concept_source;
};

struct DomainDef {
  std::string name;
  std::vector<PredicateDecl> preds;
  std::vector<ActionType> actions;
  std::vector<DerivedDef> derived;

  std::unordered_map<std::string, PredId> pred_by_name;
  std::unordered_map<std::string, uint32_t> action_by_name;

  const PredicateDecl& pred(PredId p) const { return preds[p]; }
  std::optional<PredId> find_pred(std::string_view n) const {
    auto it = pred_by_name.find(std::string(n));
    return it == pred_by_name.end() ? std::nullopt
                                    : std::optional<PredId>(it->second);
  }
  std::optional<uint32_t> find_action(std::string_view n) const {
    auto it = action_by_name.find(std::string(n));
    return it == action_by_name.end() ? std::nullopt
                                      : std::optional<uint32_t>(it->second);
  }
  bool is_world(PredId p) const { return preds[p].role == PredRole::World; }
  PredId goal_twin(PredId world) const { return preds[world].twin; }
};

// A first-order model: objects 0..num_objects-1 with display names, plus
// the sorted set of true ground facts (world and goal predicates alike).
struct State {
  uint32_t num_objects = 0;
  std::shared_ptr<const std::vector<std::string>> names;  // may be null
  std::vector<FactKey> facts;  // strictly ascending

  bool has(FactKey k) const;
  void insert(FactKey k);  // keeps order; no-op if present
  void erase(FactKey k);   // no-op if absent

  std::string object_name(ObjId o) const;
  std::optional<ObjId> object_by_name(std::string_view n) const;

  friend bool operator==(const State& a, const State& b) {
    return a.num_objects == b.num_objects && a.facts == b.facts;
  }
};

struct StateHash {
  size_t operator()(const State& s) const;
};

// A ground action: type, argument tuple, and the full variable binding
// (params then aux) under the matched schema variant.
struct GroundAction {
  uint32_t type = 0;
  uint32_t variant = 0;
  std::vector<ObjId> args;
  std::vector<ObjId> binding;

  friend bool operator==(const GroundAction& a, const GroundAction& b) {
    return a.type == b.type && a.args == b.args;
  }
};

// Total strict order on actions: action-type name, then argument numbers.
bool action_less(const DomainDef& dom, const GroundAction& a,
                 const GroundAction& b);

// --- Parsing and printing -------------------------------------------------

// Parses a domain file. Goal twins are generated automatically for world
// predicates that are not declared explicitly.
DomainDef parse_domain(std::string_view text);

// Canonical re-rendering of a domain (parse/print/parse is identity).
std::string print_domain(const DomainDef& dom);

struct SExpr;
State parse_state(const DomainDef& dom, const SExpr& form);
State parse_state(const DomainDef& dom, std::string_view text);
std::string print_state(const DomainDef& dom, const State& q);

std::string fact_to_string(const DomainDef& dom, const State& q, FactKey k);
// Accepts "pred(a,b)", "pred(a)" or "pred".
FactKey parse_fact(const DomainDef& dom, const State& q, std::string_view s);

std::string action_to_string(const DomainDef& dom, const State& q,
                             const GroundAction& a);
// Accepts "type(a,...)"; the aux binding is re-derived against q and the
// action must be legal there.
GroundAction parse_action(const DomainDef& dom, const State& q,
                          std::string_view s);

// --- Semantics --------------------------------------------------------------

// All legal ground actions in q, strictly sorted under action_less, one
// entry per (type, args) pair (least aux binding, first matching variant).
std::vector<GroundAction> legal_actions(const State& q, const DomainDef& dom);

// Least legal binding for (type, args) if the action is legal in q.
std::optional<GroundAction> ground_action(const State& q, const DomainDef& dom,
                                          uint32_t type,
                                          const std::vector<ObjId>& args);

// Index of the first case whose guard holds under act's binding.
int applicable_case(const State& q, const DomainDef& dom,
                    const GroundAction& act);

// Deterministic application of one outcome of one case.
State apply_outcome(const State& q, const DomainDef& dom,
                    const GroundAction& act, int case_index, int outcome_index);

// Applies the unique applicable case, drawing the outcome with exactly one
// uniform draw from rng.
State sample_transition(const State& q, const DomainDef& dom,
                        const GroundAction& act, Rng& rng);

// True iff every goal fact's world twin holds.
bool is_goal(const State& q, const DomainDef& dom);

// Validates facts of q against dom (declared predicates, arity, object
// membership); throws ValidationError.
void validate_state(const State& q, const DomainDef& dom);

}  // namespace relpol
