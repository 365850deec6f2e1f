#include "relpol/policy.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "relpol/sexpr.hpp"

namespace relpol {

void validate_rule(const Rule& r, const DomainDef& dom) {
  if (r.action_type >= dom.actions.size())
    throw ValidationError("rule action type out of range");
  if (dom.actions[r.action_type].arity != 1)
    throw ValidationError("rule action type '" +
                          dom.actions[r.action_type].name +
                          "' must have arity 1");
  if (!r.concept_expr.valid()) throw ValidationError("rule concept missing");
}

Bits suggest_args(const Rule& r, EvalContext& ctx) {
  Bits b = ctx.eval(r.concept_expr);
  b &= ctx.legal_args(r.action_type);
  return b;
}

namespace {

std::vector<GroundAction> materialize(uint32_t type, const Bits& args,
                                      EvalContext& ctx) {
  std::vector<GroundAction> out;
  args.for_each_set([&](uint32_t o) {
    auto ga = ground_action(ctx.state(), ctx.domain(), type, {ObjId(o)});
    out.push_back(std::move(*ga));  // legal by construction of args
  });
  return out;
}

}  // namespace

std::vector<GroundAction> suggest(const Rule& r, EvalContext& ctx) {
  return materialize(r.action_type, suggest_args(r, ctx), ctx);
}

std::pair<std::vector<GroundAction>, std::optional<size_t>> dl_suggest(
    const DecisionList& list, EvalContext& ctx) {
  for (size_t i = 0; i < list.rules.size(); ++i) {
    Bits args = suggest_args(list.rules[i], ctx);
    if (args.any())
      return {materialize(list.rules[i].action_type, args, ctx), i};
  }
  return {{}, std::nullopt};
}

std::optional<GroundAction> least_legal_action(EvalContext& ctx) {
  auto all = legal_actions(ctx.state(), ctx.domain());
  if (all.empty()) return std::nullopt;
  return all.front();
}

std::optional<GroundAction> dl_act(const DecisionList& list, EvalContext& ctx) {
  auto [suggested, ix] = dl_suggest(list, ctx);
  if (!suggested.empty()) {
    // suggest() yields one action type with ascending args, so the first
    // entry is the least
    return suggested.front();
  }
  return least_legal_action(ctx);
}

std::optional<GroundAction> ensemble_act(const Ensemble& e, EvalContext& ctx) {
  const DomainDef& dom = ctx.domain();
  // ordered by action_less so vote ties resolve to the least action
  std::map<std::pair<std::string, std::vector<ObjId>>, int> votes;
  for (const DecisionList& l : e.members) {
    auto [suggested, ix] = dl_suggest(l, ctx);
    for (const GroundAction& a : suggested)
      ++votes[{dom.actions[a.type].name, a.args}];
  }
  if (votes.empty()) return least_legal_action(ctx);
  const std::pair<std::string, std::vector<ObjId>>* best = nullptr;
  int best_votes = 0;
  for (const auto& [key, n] : votes)
    if (n > best_votes) {
      best = &key;
      best_votes = n;
    }
  uint32_t type = *dom.find_action(best->first);
  return ground_action(ctx.state(), dom, type, best->second);
}

bool rule_covers(const Rule& r, const TrainingInstance&, EvalContext& ctx) {
  return suggest_args(r, ctx).any();
}

namespace {

// Arguments of type-`type` actions in the optimal set.
Bits optimal_args(uint32_t type, const TrainingInstance& f, uint32_t n) {
  Bits b(n);
  for (const GroundAction& a : f.optimal)
    if (a.type == type && a.args.size() == 1) b.set(a.args[0]);
  return b;
}

}  // namespace

bool rule_correctly_covers(const Rule& r, const TrainingInstance& f,
                           EvalContext& ctx) {
  Bits s = suggest_args(r, ctx);
  if (s.none()) return false;
  return s.is_subset_of(optimal_args(r.action_type, f, ctx.num_objects()));
}

bool list_covers(const DecisionList& l, const TrainingInstance& f,
                 EvalContext& ctx) {
  for (const Rule& r : l.rules)
    if (rule_covers(r, f, ctx)) return true;
  return false;
}

bool list_correctly_covers(const DecisionList& l, const TrainingInstance& f,
                           EvalContext& ctx) {
  for (const Rule& r : l.rules) {
    Bits s = suggest_args(r, ctx);
    if (s.any())
      return s.is_subset_of(
          optimal_args(r.action_type, f, ctx.num_objects()));
  }
  return false;
}

std::optional<GroundAction> policy_act(const Policy& p, EvalContext& ctx) {
  if (std::holds_alternative<DecisionList>(p))
    return dl_act(std::get<DecisionList>(p), ctx);
  return ensemble_act(std::get<Ensemble>(p), ctx);
}

// --- Policy files -------------------------------------------------------------

namespace {

void print_list(std::ostringstream& os, const DecisionList& l,
                const DomainDef& dom, const char* indent) {
  os << indent << "(policy";
  for (const Rule& r : l.rules)
    os << "\n" << indent << "  (rule " << r.concept_expr.canon() << ' '
       << dom.actions[r.action_type].name << ')';
  os << ")";
}

DecisionList parse_list(const SExpr& form, const DomainDef& dom,
                        const ConceptVocab& vocab) {
  if (form.head() != "policy")
    throw ParseError("expected (policy ...)", form.line, form.col);
  DecisionList l;
  for (size_t i = 1; i < form.size(); ++i) {
    const SExpr& rf = form.items[i];
    if (rf.head() != "rule" || rf.size() != 3 || !rf.items[2].is_sym())
      throw ParseError("expected (rule CONCEPT ACTION)", rf.line, rf.col);
    Rule r;
    r.concept_expr = vocab.parse_class(rf.items[1]);
    auto t = dom.find_action(rf.items[2].sym);
    if (!t)
      throw ParseError("unknown action type '" + rf.items[2].sym + "'",
                       rf.items[2].line, rf.items[2].col);
    r.action_type = *t;
    validate_rule(r, dom);
    l.rules.push_back(std::move(r));
  }
  return l;
}

}  // namespace

std::string print_policy(const Policy& p, const DomainDef& dom) {
  std::ostringstream os;
  if (std::holds_alternative<DecisionList>(p)) {
    print_list(os, std::get<DecisionList>(p), dom, "");
  } else {
    os << "(ensemble";
    for (const DecisionList& l : std::get<Ensemble>(p).members) {
      os << "\n";
      print_list(os, l, dom, "  ");
    }
    os << ")";
  }
  os << "\n";
  return os.str();
}

Policy parse_policy(std::string_view text, const DomainDef& dom,
                    const ConceptVocab& vocab) {
  SExpr form = parse_sexpr(text);
  if (form.head() == "policy") return parse_list(form, dom, vocab);
  if (form.head() == "ensemble") {
    Ensemble e;
    for (size_t i = 1; i < form.size(); ++i)
      e.members.push_back(parse_list(form.items[i], dom, vocab));
    if (e.members.empty())
      throw ParseError("ensemble needs at least one member", form.line,
                       form.col);
    return e;
  }
  throw ParseError("expected (policy ...) or (ensemble ...)", form.line,
                   form.col);
}

}  // namespace relpol
