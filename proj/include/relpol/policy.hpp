#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "relpol/taxonomy.hpp"

namespace relpol {

// A rule C : a — "apply action type a to any object in C". Action types in
// rules are restricted to arity one.
struct Rule {
  ClassExpr concept_expr;
  uint32_t action_type = 0;
};

// Ordered rules; the first rule that suggests anything fires. The empty
// list is the NULL list and never suggests.
struct DecisionList {
  std::vector<Rule> rules;
};

// Bagged decision lists combined by voting.
struct Ensemble {
  std::vector<DecisionList> members;
};

// A solved training state: the state and the set of optimal actions for it.
struct TrainingInstance {
  State state;
  std::vector<GroundAction> optimal;  // sorted under action_less
};

void validate_rule(const Rule& r, const DomainDef& dom);

// Argument objects suggested by the rule: concept members for which the
// action is legal.
Bits suggest_args(const Rule& r, EvalContext& ctx);
// The same as ground actions, sorted.
std::vector<GroundAction> suggest(const Rule& r, EvalContext& ctx);

// Suggestion set of the first firing rule, plus its index.
std::pair<std::vector<GroundAction>, std::optional<size_t>> dl_suggest(
    const DecisionList& list, EvalContext& ctx);

// Least legal action in ctx's state, if any.
std::optional<GroundAction> least_legal_action(EvalContext& ctx);

// π[L]: least suggested action, falling back to the least legal action;
// nullopt only at dead ends.
std::optional<GroundAction> dl_act(const DecisionList& list, EvalContext& ctx);

// π[E]: each member casts one vote per action it suggests; max votes wins,
// ties broken by action order; same fallback as dl_act.
std::optional<GroundAction> ensemble_act(const Ensemble& e, EvalContext& ctx);

// Coverage notions from the rule-quality definitions: a list/rule covers an
// instance when it suggests any action for its state, and correctly covers
// it when additionally every suggested action is in the optimal set.
bool rule_covers(const Rule& r, const TrainingInstance& f, EvalContext& ctx);
bool rule_correctly_covers(const Rule& r, const TrainingInstance& f,
                           EvalContext& ctx);
bool list_covers(const DecisionList& l, const TrainingInstance& f,
                 EvalContext& ctx);
bool list_correctly_covers(const DecisionList& l, const TrainingInstance& f,
                           EvalContext& ctx);

// Either flavour of policy.
using Policy = std::variant<DecisionList, Ensemble>;

std::optional<GroundAction> policy_act(const Policy& p, EvalContext& ctx);

// S-expression policy files: (policy (rule CONCEPT ACTION)...) or
// (ensemble (policy ...)...). Round-trips exactly on canonical forms.
std::string print_policy(const Policy& p, const DomainDef& dom);
Policy parse_policy(std::string_view text, const DomainDef& dom,
                    const ConceptVocab& vocab);

}  // namespace relpol
