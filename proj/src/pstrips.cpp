#include "relpol/pstrips.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "relpol/sexpr.hpp"

namespace relpol {

// --- State ------------------------------------------------------------------

bool State::has(FactKey k) const {
  return std::binary_search(facts.begin(), facts.end(), k);
}

void State::insert(FactKey k) {
  auto it = std::lower_bound(facts.begin(), facts.end(), k);
  if (it == facts.end() || *it != k) facts.insert(it, k);
}

void State::erase(FactKey k) {
  auto it = std::lower_bound(facts.begin(), facts.end(), k);
  if (it != facts.end() && *it == k) facts.erase(it);
}

std::string State::object_name(ObjId o) const {
  if (names && o < names->size()) return (*names)[o];
  return "o" + std::to_string(o);
}

std::optional<ObjId> State::object_by_name(std::string_view n) const {
  if (names) {
    for (ObjId i = 0; i < names->size(); ++i)
      if ((*names)[i] == n) return i;
    return std::nullopt;
  }
  if (n.size() > 1 && n[0] == 'o') {
    uint32_t v = 0;
    auto res = std::from_chars(n.data() + 1, n.data() + n.size(), v);
    if (res.ec == std::errc() && res.ptr == n.data() + n.size() &&
        v < num_objects)
      return v;
  }
  return std::nullopt;
}

size_t StateHash::operator()(const State& s) const {
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (i * 8)) & 0xff;
      h *= 0x100000001b3ull;
    }
  };
  mix(s.num_objects);
  for (FactKey k : s.facts) mix(k);
  return size_t(h);
}

bool action_less(const DomainDef& dom, const GroundAction& a,
                 const GroundAction& b) {
  if (a.type != b.type)
    return dom.actions[a.type].name < dom.actions[b.type].name;
  return a.args < b.args;
}

// --- Domain parsing ---------------------------------------------------------

namespace {

int parse_arity(const SExpr& e) {
  if (!e.is_sym()) throw ParseError("expected arity", e.line, e.col);
  if (e.sym == "0") return 0;
  if (e.sym == "1") return 1;
  if (e.sym == "2") return 2;
  throw ParseError("arity must be 0, 1 or 2, got '" + e.sym + "'", e.line,
                   e.col);
}

double parse_prob(const SExpr& e) {
  if (!e.is_sym()) throw ParseError("expected probability", e.line, e.col);
  try {
    size_t used = 0;
    double v = std::stod(e.sym, &used);
    if (used != e.sym.size()) throw std::invalid_argument("");
    if (v < 0.0 || v > 1.0)
      throw ParseError("probability out of [0,1]: " + e.sym, e.line, e.col);
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("bad probability '" + e.sym + "'", e.line, e.col);
  }
}

struct SchemaCtx {
  const DomainDef* dom;
  std::unordered_map<std::string, int> var_ix;
};

VarAtom parse_var_atom(const SchemaCtx& ctx, const SExpr& e) {
  if (!e.is_list || e.items.empty() || !e.items[0].is_sym())
    throw ParseError("expected (pred var...)", e.line, e.col);
  VarAtom a;
  auto pid = ctx.dom->find_pred(e.items[0].sym);
  if (!pid)
    throw ParseError("unknown predicate '" + e.items[0].sym + "'",
                     e.items[0].line, e.items[0].col);
  a.pred = *pid;
  int arity = ctx.dom->pred(a.pred).arity;
  if (int(e.items.size()) - 1 != arity)
    throw ParseError("predicate '" + e.items[0].sym + "' expects " +
                         std::to_string(arity) + " argument(s)",
                     e.line, e.col);
  a.nargs = int8_t(arity);
  for (int i = 0; i < arity; ++i) {
    const SExpr& v = e.items[i + 1];
    if (!v.is_sym()) throw ParseError("expected variable", v.line, v.col);
    auto it = ctx.var_ix.find(v.sym);
    if (it == ctx.var_ix.end())
      throw ParseError("unknown variable '" + v.sym + "'", v.line, v.col);
    a.args[i] = int8_t(it->second);
  }
  return a;
}

Literal parse_literal(const SchemaCtx& ctx, const SExpr& e) {
  if (e.is_list && e.head() == "not") {
    if (e.size() != 2)
      throw ParseError("(not ATOM) takes one atom", e.line, e.col);
    return Literal{true, parse_var_atom(ctx, e.items[1])};
  }
  return Literal{false, parse_var_atom(ctx, e)};
}

void finish_predicates(DomainDef& dom) {
  // Pair up explicit gX declarations with their world predicate, then
  // synthesize missing goal twins.
  for (auto& [name, id] : dom.pred_by_name) {
    if (name.size() > 1 && name[0] == 'g') {
      auto world = dom.pred_by_name.find(name.substr(1));
      if (world != dom.pred_by_name.end()) {
        PredicateDecl& gp = dom.preds[id];
        PredicateDecl& wp = dom.preds[world->second];
        if (gp.arity != wp.arity)
          throw ParseError("goal predicate '" + name +
                           "' and world twin differ in arity");
        gp.role = PredRole::Goal;
        gp.twin = world->second;
        wp.twin = id;
      }
    }
  }
  size_t declared = dom.preds.size();
  for (PredId p = 0; p < declared; ++p) {
    if (dom.preds[p].role != PredRole::World) continue;
    bool has_twin = false;
    for (PredId q = 0; q < declared; ++q)
      if (q != p && dom.preds[q].role == PredRole::Goal &&
          dom.preds[q].twin == p)
        has_twin = true;
    if (has_twin) continue;
    std::string gname = "g" + dom.preds[p].name;
    if (dom.pred_by_name.count(gname))
      throw ParseError("predicate name '" + gname +
                       "' collides with the goal twin of '" +
                       dom.preds[p].name + "'");
    PredId gid = PredId(dom.preds.size());
    dom.preds.push_back({gname, dom.preds[p].arity, PredRole::Goal, p});
    dom.preds[p].twin = gid;
    dom.pred_by_name.emplace(gname, gid);
  }
}

void validate_schema(const DomainDef& dom, const ActionType& at,
                     const Schema& s, const SExpr& where) {
  size_t np = s.params.size();
  std::vector<bool> aux_bound(s.aux.size(), false);
  for (const Literal& l : s.pre) {
    if (l.negated) continue;
    for (int i = 0; i < l.atom.nargs; ++i) {
      int v = l.atom.args[i];
      if (v >= int(np)) aux_bound[v - np] = true;
    }
  }
  for (size_t i = 0; i < s.aux.size(); ++i)
    if (!aux_bound[i])
      throw ParseError("aux variable '" + s.aux[i] + "' of action '" +
                           at.name + "' not bound by any positive precondition",
                       where.line, where.col);
  if (s.cases.empty())
    throw ParseError("action '" + at.name + "' has no outcome case",
                     where.line, where.col);
  for (const GuardedCase& c : s.cases) {
    if (c.outcomes.empty())
      throw ParseError("empty outcome distribution in action '" + at.name + "'",
                       where.line, where.col);
    double sum = 0.0;
    for (const Outcome& o : c.outcomes) {
      sum += o.probability;
      for (const auto* lst : {&o.add, &o.del})
        for (const VarAtom& a : *lst)
          if (!dom.is_world(a.pred))
            throw ParseError("effects may only mention world predicates ('" +
                                 dom.pred(a.pred).name + "' in action '" +
                                 at.name + "')",
                             where.line, where.col);
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ParseError("outcome probabilities of action '" + at.name +
                           "' sum to " + std::to_string(sum) + ", expected 1",
                       where.line, where.col);
  }
}

void parse_action_block(DomainDef& dom, const SExpr& e) {
  if (e.size() < 2 || !e.items[1].is_sym())
    throw ParseError("expected (action NAME ...)", e.line, e.col);
  const std::string& name = e.items[1].sym;

  Schema schema;
  SchemaCtx ctx{&dom, {}};
  bool saw_pre = false;
  std::vector<const SExpr*> case_forms;
  for (size_t i = 2; i < e.size(); ++i) {
    const SExpr& clause = e.items[i];
    auto h = clause.head();
    if (h == "params" || h == "aux") {
      auto& dst = (h == "params") ? schema.params : schema.aux;
      for (size_t j = 1; j < clause.size(); ++j) {
        if (!clause.items[j].is_sym())
          throw ParseError("expected variable name", clause.items[j].line,
                           clause.items[j].col);
        dst.push_back(clause.items[j].sym);
      }
    } else if (h == "pre") {
      saw_pre = true;
      // vars must be registered before literals refer to them
      ctx.var_ix.clear();
      int ix = 0;
      for (const auto& v : schema.params) {
        if (!ctx.var_ix.emplace(v, ix++).second)
          throw ParseError("duplicate variable '" + v + "'", clause.line,
                           clause.col);
      }
      for (const auto& v : schema.aux) {
        if (!ctx.var_ix.emplace(v, ix++).second)
          throw ParseError("duplicate variable '" + v + "'", clause.line,
                           clause.col);
      }
      for (size_t j = 1; j < clause.size(); ++j)
        schema.pre.push_back(parse_literal(ctx, clause.items[j]));
    } else if (h == "case") {
      case_forms.push_back(&clause);
    } else {
      throw ParseError("unknown action clause", clause.line, clause.col);
    }
  }
  if (!saw_pre) {
    ctx.var_ix.clear();
    int ix = 0;
    for (const auto& v : schema.params) ctx.var_ix.emplace(v, ix++);
    for (const auto& v : schema.aux) ctx.var_ix.emplace(v, ix++);
  }

  for (const SExpr* cf : case_forms) {
    GuardedCase gc;
    for (size_t j = 1; j < cf->size(); ++j) {
      const SExpr& part = cf->items[j];
      auto h = part.head();
      if (h == "guard") {
        for (size_t k = 1; k < part.size(); ++k)
          gc.guard.push_back(parse_var_atom(ctx, part.items[k]));
      } else if (h == "outcome") {
        if (part.size() < 2)
          throw ParseError("expected (outcome PROB (add ...) (del ...))",
                           part.line, part.col);
        Outcome out;
        out.probability = parse_prob(part.items[1]);
        for (size_t k = 2; k < part.size(); ++k) {
          const SExpr& eff = part.items[k];
          auto eh = eff.head();
          if (eh != "add" && eh != "del")
            throw ParseError("expected (add ...) or (del ...)", eff.line,
                             eff.col);
          auto& dst = (eh == "add") ? out.add : out.del;
          for (size_t m = 1; m < eff.size(); ++m)
            dst.push_back(parse_var_atom(ctx, eff.items[m]));
        }
        gc.outcomes.push_back(std::move(out));
      } else {
        throw ParseError("unknown case clause", part.line, part.col);
      }
    }
    schema.cases.push_back(std::move(gc));
  }

  uint32_t tid;
  auto found = dom.find_action(name);
  if (found) {
    tid = *found;
    if (int(schema.params.size()) != dom.actions[tid].arity)
      throw ParseError("variants of action '" + name + "' differ in arity",
                       e.line, e.col);
  } else {
    tid = uint32_t(dom.actions.size());
    dom.actions.push_back({name, int(schema.params.size()), {}});
    dom.action_by_name.emplace(name, tid);
  }
  validate_schema(dom, dom.actions[tid], schema, e);
  dom.actions[tid].variants.push_back(std::move(schema));
}

}  // namespace

DomainDef parse_domain(std::string_view text) {
  SExpr top = parse_sexpr(text);
  if (top.head() != "domain" || top.size() < 2 || !top.items[1].is_sym())
    throw ParseError("expected (domain NAME ...)", top.line, top.col);
  DomainDef dom;
  dom.name = top.items[1].sym;

  // predicates first, so action blocks can refer to them in any file order
  for (size_t i = 2; i < top.size(); ++i) {
    const SExpr& clause = top.items[i];
    if (clause.head() != "predicates") continue;
    for (size_t j = 1; j < clause.size(); ++j) {
      const SExpr& p = clause.items[j];
      if (!p.is_list || p.size() != 2 || !p.items[0].is_sym())
        throw ParseError("expected (NAME ARITY)", p.line, p.col);
      const std::string& pname = p.items[0].sym;
      if (dom.pred_by_name.count(pname))
        throw ParseError("duplicate predicate '" + pname + "'", p.line, p.col);
      PredId id = PredId(dom.preds.size());
      dom.preds.push_back({pname, parse_arity(p.items[1]), PredRole::World, id});
      dom.pred_by_name.emplace(pname, id);
    }
  }
  finish_predicates(dom);

  for (size_t i = 2; i < top.size(); ++i) {
    const SExpr& clause = top.items[i];
    auto h = clause.head();
    if (h == "predicates") continue;
    if (h == "action") {
      parse_action_block(dom, clause);
    } else if (h == "derived") {
      if (clause.size() != 3 || !clause.items[1].is_sym())
        throw ParseError("expected (derived NAME CONCEPT)", clause.line,
                         clause.col);
      dom.derived.push_back(
          {clause.items[1].sym, to_string(clause.items[2])});
    } else {
      throw ParseError("unknown domain clause", clause.line, clause.col);
    }
  }
  return dom;
}

// --- Domain printing --------------------------------------------------------

namespace {

std::string format_prob(double p) {
  // shortest representation that round-trips
  for (int prec = 1; prec <= 17; ++prec) {
    std::ostringstream os;
    os.precision(prec);
    os << p;
    if (std::stod(os.str()) == p) return os.str();
  }
  return std::to_string(p);
}

void print_var_atom(std::ostringstream& os, const DomainDef& dom,
                    const Schema& s, const VarAtom& a) {
  os << '(' << dom.pred(a.pred).name;
  for (int i = 0; i < a.nargs; ++i) {
    int v = a.args[i];
    os << ' '
       << (v < int(s.params.size()) ? s.params[v] : s.aux[v - s.params.size()]);
  }
  os << ')';
}

}  // namespace

std::string print_domain(const DomainDef& dom) {
  std::ostringstream os;
  os << "(domain " << dom.name << "\n  (predicates";
  for (const auto& p : dom.preds)
    os << " (" << p.name << ' ' << p.arity << ')';
  os << ")";
  for (const auto& at : dom.actions) {
    for (const auto& v : at.variants) {
      os << "\n  (action " << at.name << "\n    (params";
      for (const auto& x : v.params) os << ' ' << x;
      os << ")";
      if (!v.aux.empty()) {
        os << " (aux";
        for (const auto& x : v.aux) os << ' ' << x;
        os << ")";
      }
      os << "\n    (pre";
      for (const Literal& l : v.pre) {
        os << ' ';
        if (l.negated) os << "(not ";
        print_var_atom(os, dom, v, l.atom);
        if (l.negated) os << ')';
      }
      os << ")";
      for (const GuardedCase& c : v.cases) {
        os << "\n    (case (guard";
        for (const VarAtom& g : c.guard) {
          os << ' ';
          print_var_atom(os, dom, v, g);
        }
        os << ")";
        for (const Outcome& o : c.outcomes) {
          os << "\n      (outcome " << format_prob(o.probability) << " (add";
          for (const VarAtom& a : o.add) {
            os << ' ';
            print_var_atom(os, dom, v, a);
          }
          os << ") (del";
          for (const VarAtom& a : o.del) {
            os << ' ';
            print_var_atom(os, dom, v, a);
          }
          os << "))";
        }
        os << ")";
      }
      os << ")";
    }
  }
  for (const auto& d : dom.derived)
    os << "\n  (derived " << d.name << ' ' << d.concept_source << ')';
  os << ")\n";
  return os.str();
}

// --- States and facts -------------------------------------------------------

namespace {

FactKey ground_atom_from_sexpr(const DomainDef& dom, const State& q,
                               const SExpr& e) {
  if (!e.is_list || e.items.empty() || !e.items[0].is_sym())
    throw ParseError("expected (pred obj...)", e.line, e.col);
  auto pid = dom.find_pred(e.items[0].sym);
  if (!pid)
    throw ParseError("unknown predicate '" + e.items[0].sym + "'", e.line,
                     e.col);
  int arity = dom.pred(*pid).arity;
  if (int(e.size()) - 1 != arity)
    throw ParseError("predicate '" + e.items[0].sym + "' expects " +
                         std::to_string(arity) + " argument(s)",
                     e.line, e.col);
  ObjId a[2] = {kNoObj, kNoObj};
  for (int i = 0; i < arity; ++i) {
    const SExpr& o = e.items[i + 1];
    if (!o.is_sym()) throw ParseError("expected object name", o.line, o.col);
    auto id = q.object_by_name(o.sym);
    if (!id) throw ParseError("unknown object '" + o.sym + "'", o.line, o.col);
    a[i] = *id;
  }
  return make_fact(*pid, a[0], a[1]);
}

}  // namespace

State parse_state(const DomainDef& dom, const SExpr& form) {
  if (form.head() != "state")
    throw ParseError("expected (state ...)", form.line, form.col);
  State q;
  auto names = std::make_shared<std::vector<std::string>>();
  const SExpr* facts_form = nullptr;
  for (size_t i = 1; i < form.size(); ++i) {
    const SExpr& clause = form.items[i];
    auto h = clause.head();
    if (h == "objects") {
      for (size_t j = 1; j < clause.size(); ++j) {
        if (!clause.items[j].is_sym())
          throw ParseError("expected object name", clause.items[j].line,
                           clause.items[j].col);
        names->push_back(clause.items[j].sym);
      }
    } else if (h == "facts") {
      facts_form = &clause;
    } else {
      throw ParseError("unknown state clause", clause.line, clause.col);
    }
  }
  q.num_objects = uint32_t(names->size());
  q.names = std::move(names);
  if (facts_form)
    for (size_t j = 1; j < facts_form->size(); ++j)
      q.insert(ground_atom_from_sexpr(dom, q, facts_form->items[j]));
  validate_state(q, dom);
  return q;
}

State parse_state(const DomainDef& dom, std::string_view text) {
  return parse_state(dom, parse_sexpr(text));
}

std::string print_state(const DomainDef& dom, const State& q) {
  std::ostringstream os;
  os << "(state (objects";
  for (ObjId o = 0; o < q.num_objects; ++o) os << ' ' << q.object_name(o);
  os << ") (facts";
  for (FactKey k : q.facts) {
    os << " (" << dom.pred(fact_pred(k)).name;
    if (fact_arg0(k) != kNoObj) os << ' ' << q.object_name(fact_arg0(k));
    if (fact_arg1(k) != kNoObj) os << ' ' << q.object_name(fact_arg1(k));
    os << ')';
  }
  os << "))";
  return os.str();
}

std::string fact_to_string(const DomainDef& dom, const State& q, FactKey k) {
  std::string s = dom.pred(fact_pred(k)).name;
  if (fact_arg0(k) == kNoObj) return s;
  s += '(' + q.object_name(fact_arg0(k));
  if (fact_arg1(k) != kNoObj) s += ',' + q.object_name(fact_arg1(k));
  s += ')';
  return s;
}

namespace {

// Splits "name(a,b)" into name and arg names.
std::pair<std::string, std::vector<std::string>> split_call(
    std::string_view s) {
  auto open = s.find('(');
  if (open == std::string_view::npos) return {std::string(s), {}};
  if (s.back() != ')') throw ParseError("expected ')' in '" + std::string(s) + "'");
  std::string name(s.substr(0, open));
  std::vector<std::string> args;
  std::string_view inner = s.substr(open + 1, s.size() - open - 2);
  size_t start = 0;
  while (start <= inner.size() && !inner.empty()) {
    auto comma = inner.find(',', start);
    auto piece = comma == std::string_view::npos
                     ? inner.substr(start)
                     : inner.substr(start, comma - start);
    args.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return {std::move(name), std::move(args)};
}

}  // namespace

FactKey parse_fact(const DomainDef& dom, const State& q, std::string_view s) {
  auto [name, args] = split_call(s);
  auto pid = dom.find_pred(name);
  if (!pid) throw ParseError("unknown predicate '" + name + "'");
  if (int(args.size()) != dom.pred(*pid).arity)
    throw ParseError("predicate '" + name + "' expects " +
                     std::to_string(dom.pred(*pid).arity) + " argument(s)");
  ObjId a[2] = {kNoObj, kNoObj};
  for (size_t i = 0; i < args.size(); ++i) {
    auto id = q.object_by_name(args[i]);
    if (!id) throw ParseError("unknown object '" + args[i] + "'");
    a[i] = *id;
  }
  return make_fact(*pid, a[0], a[1]);
}

std::string action_to_string(const DomainDef& dom, const State& q,
                             const GroundAction& a) {
  std::string s = dom.actions[a.type].name;
  if (a.args.empty()) return s;
  s += '(';
  for (size_t i = 0; i < a.args.size(); ++i) {
    if (i) s += ',';
    s += q.object_name(a.args[i]);
  }
  s += ')';
  return s;
}

GroundAction parse_action(const DomainDef& dom, const State& q,
                          std::string_view s) {
  auto [name, argnames] = split_call(s);
  auto tid = dom.find_action(name);
  if (!tid) throw ParseError("unknown action type '" + name + "'");
  if (int(argnames.size()) != dom.actions[*tid].arity)
    throw ParseError("action '" + name + "' expects " +
                     std::to_string(dom.actions[*tid].arity) + " argument(s)");
  std::vector<ObjId> args;
  for (const auto& an : argnames) {
    auto id = q.object_by_name(an);
    if (!id) throw ParseError("unknown object '" + an + "'");
    args.push_back(*id);
  }
  auto ga = ground_action(q, dom, *tid, args);
  if (!ga)
    throw ValidationError("action '" + std::string(s) + "' is not legal here");
  return *ga;
}

// --- Matching and semantics -------------------------------------------------

namespace {

FactKey ground(const VarAtom& a, const std::vector<ObjId>& binding) {
  ObjId x0 = a.nargs > 0 ? binding[a.args[0]] : kNoObj;
  ObjId x1 = a.nargs > 1 ? binding[a.args[1]] : kNoObj;
  return make_fact(a.pred, x0, x1);
}

bool literal_holds(const State& q, const Literal& l,
                   const std::vector<ObjId>& binding) {
  return q.has(ground(l.atom, binding)) != l.negated;
}

// Backtracking search for the lexicographically least aux assignment
// (aux declaration order, object numbers ascending). Literals are checked
// as soon as all their variables are bound.
struct Matcher {
  const State& q;
  const Schema& s;
  std::vector<ObjId>& binding;
  size_t np;

  bool literal_ready(const Literal& l, size_t bound_aux) const {
    for (int i = 0; i < l.atom.nargs; ++i)
      if (l.atom.args[i] >= int(np + bound_aux)) return false;
    return true;
  }

  // Checks literals that became fully bound when aux var bound_aux-1 was
  // assigned (params-only literals are checked before the search starts).
  bool check_stage(size_t bound_aux) const {
    for (const Literal& l : s.pre) {
      if (!literal_ready(l, bound_aux)) continue;
      if (literal_ready(l, bound_aux - 1)) continue;
      if (!literal_holds(q, l, binding)) return false;
    }
    return true;
  }

  bool solve(size_t aux_ix) {
    if (aux_ix == s.aux.size()) return true;
    for (ObjId v = 0; v < q.num_objects; ++v) {
      binding[np + aux_ix] = v;
      if (check_stage(aux_ix + 1) && solve(aux_ix + 1)) return true;
    }
    binding[np + aux_ix] = kNoObj;
    return false;
  }
};

// Tries one schema variant; fills binding on success.
bool match_variant(const State& q, const Schema& s,
                   const std::vector<ObjId>& args,
                   std::vector<ObjId>& binding) {
  size_t np = s.params.size();
  binding.assign(s.num_vars(), kNoObj);
  for (size_t i = 0; i < np; ++i) binding[i] = args[i];
  // check literals that involve params only
  for (const Literal& l : s.pre) {
    bool ready = true;
    for (int i = 0; i < l.atom.nargs; ++i)
      if (l.atom.args[i] >= int(np)) ready = false;
    if (ready && !literal_holds(q, l, binding)) return false;
  }
  Matcher m{q, s, binding, np};
  return m.solve(0);
}

}  // namespace

std::optional<GroundAction> ground_action(const State& q, const DomainDef& dom,
                                          uint32_t type,
                                          const std::vector<ObjId>& args) {
  const ActionType& at = dom.actions[type];
  if (int(args.size()) != at.arity)
    throw ValidationError("wrong argument count for action '" + at.name + "'");
  for (ObjId o : args)
    if (o >= q.num_objects)
      throw ValidationError("action argument outside the object set");
  std::vector<ObjId> binding;
  for (uint32_t v = 0; v < at.variants.size(); ++v) {
    if (match_variant(q, at.variants[v], args, binding)) {
      GroundAction ga;
      ga.type = type;
      ga.variant = v;
      ga.args = args;
      ga.binding = std::move(binding);
      return ga;
    }
  }
  return std::nullopt;
}

std::vector<GroundAction> legal_actions(const State& q, const DomainDef& dom) {
  std::vector<GroundAction> out;
  std::vector<ObjId> args;
  for (uint32_t t = 0; t < dom.actions.size(); ++t) {
    int arity = dom.actions[t].arity;
    if (arity == 0) {
      args.clear();
      if (auto ga = ground_action(q, dom, t, args)) out.push_back(std::move(*ga));
    } else if (arity == 1) {
      args.assign(1, 0);
      for (ObjId o = 0; o < q.num_objects; ++o) {
        args[0] = o;
        if (auto ga = ground_action(q, dom, t, args))
          out.push_back(std::move(*ga));
      }
    } else {
      args.assign(2, 0);
      for (ObjId o0 = 0; o0 < q.num_objects; ++o0)
        for (ObjId o1 = 0; o1 < q.num_objects; ++o1) {
          args[0] = o0;
          args[1] = o1;
          if (auto ga = ground_action(q, dom, t, args))
            out.push_back(std::move(*ga));
        }
    }
  }
  std::sort(out.begin(), out.end(),
            [&dom](const GroundAction& a, const GroundAction& b) {
              return action_less(dom, a, b);
            });
  return out;
}

int applicable_case(const State& q, const DomainDef& dom,
                    const GroundAction& act) {
  const Schema& s = dom.actions[act.type].variants[act.variant];
  for (size_t c = 0; c < s.cases.size(); ++c) {
    bool ok = true;
    for (const VarAtom& g : s.cases[c].guard)
      if (!q.has(ground(g, act.binding))) {
        ok = false;
        break;
      }
    if (ok) return int(c);
  }
  throw ValidationError("no outcome case applies to action '" +
                        dom.actions[act.type].name + "'");
}

namespace {

void check_legal(const State& q, const DomainDef& dom, const GroundAction& act) {
  const ActionType& at = dom.actions[act.type];
  if (act.variant >= at.variants.size())
    throw ValidationError("bad schema variant index");
  const Schema& s = at.variants[act.variant];
  if (int(act.binding.size()) != s.num_vars())
    throw ValidationError("bad action binding");
  for (ObjId o : act.binding)
    if (o >= q.num_objects) throw ValidationError("binding object out of range");
  for (const Literal& l : s.pre)
    if (!literal_holds(q, l, act.binding))
      throw ValidationError("action '" + at.name + "' is not legal here");
}

}  // namespace

State apply_outcome(const State& q, const DomainDef& dom,
                    const GroundAction& act, int case_index,
                    int outcome_index) {
  check_legal(q, dom, act);
  const Schema& s = dom.actions[act.type].variants[act.variant];
  if (case_index < 0 || case_index >= int(s.cases.size()))
    throw ValidationError("case index out of range");
  const GuardedCase& c = s.cases[case_index];
  if (outcome_index < 0 || outcome_index >= int(c.outcomes.size()))
    throw ValidationError("outcome index out of range");
  const Outcome& o = c.outcomes[outcome_index];
  State next = q;
  for (const VarAtom& a : o.del) next.erase(ground(a, act.binding));
  for (const VarAtom& a : o.add) next.insert(ground(a, act.binding));
  return next;
}

State sample_transition(const State& q, const DomainDef& dom,
                        const GroundAction& act, Rng& rng) {
  check_legal(q, dom, act);
  int ci = applicable_case(q, dom, act);
  const auto& outcomes =
      dom.actions[act.type].variants[act.variant].cases[ci].outcomes;
  double u = rng.uniform01();
  double cum = 0.0;
  int pick = int(outcomes.size()) - 1;
  for (size_t i = 0; i < outcomes.size(); ++i) {
    cum += outcomes[i].probability;
    if (u < cum) {
      pick = int(i);
      break;
    }
  }
  return apply_outcome(q, dom, act, ci, pick);
}

bool is_goal(const State& q, const DomainDef& dom) {
  for (FactKey k : q.facts) {
    const PredicateDecl& p = dom.pred(fact_pred(k));
    if (p.role != PredRole::Goal) continue;
    FactKey world = make_fact(p.twin, fact_arg0(k), fact_arg1(k));
    if (!q.has(world)) return false;
  }
  return true;
}

void validate_state(const State& q, const DomainDef& dom) {
  for (FactKey k : q.facts) {
    PredId p = fact_pred(k);
    if (p >= dom.preds.size()) throw ValidationError("undeclared predicate id");
    int arity = dom.pred(p).arity;
    ObjId a0 = fact_arg0(k), a1 = fact_arg1(k);
    int got = (a0 != kNoObj) + (a1 != kNoObj);
    if (got != arity)
      throw ValidationError("fact arity mismatch for '" + dom.pred(p).name + "'");
    if ((a0 != kNoObj && a0 >= q.num_objects) ||
        (a1 != kNoObj && a1 >= q.num_objects))
      throw ValidationError("fact argument outside the object set");
  }
}

}  // namespace relpol
