#include "relpol/taxonomy.hpp"

#include <algorithm>
#include <cassert>

#include "relpol/sexpr.hpp"

namespace relpol {

// --- Expression construction -------------------------------------------------

ClassKind ClassExpr::kind() const { return node_->kind; }

int ClassExpr::depth() const {
  if (node_->kind == ClassKind::And)
    throw ValidationError("depth is defined for intersection-free expressions");
  return node_->depth;
}

int ClassExpr::max_member_depth() const {
  if (node_->kind != ClassKind::And) return node_->depth;
  int d = 1;
  for (const auto& m : node_->conj) d = std::max(d, m.depth());
  return d;
}

int ClassExpr::num_conjuncts() const {
  return node_->kind == ClassKind::And ? int(node_->conj.size()) : 1;
}

const std::string& ClassExpr::canon() const { return node_->canon; }
const std::string& RelExpr::canon() const { return node_->canon; }

namespace {

void require_unary_world(const DomainDef& dom, PredId p, bool comparison) {
  if (dom.pred(p).arity != 1)
    throw ValidationError("class predicate '" + dom.pred(p).name +
                          "' must have arity 1");
  if (comparison && !dom.is_world(p))
    throw ValidationError("comparison predicates abbreviate world ∩ goal; '" +
                          dom.pred(p).name + "' is not a world predicate");
}

void require_binary(const DomainDef& dom, PredId p, bool comparison) {
  if (dom.pred(p).arity != 2)
    throw ValidationError("relation predicate '" + dom.pred(p).name +
                          "' must have arity 2");
  if (comparison && !dom.is_world(p))
    throw ValidationError("comparison predicates abbreviate world ∩ goal; '" +
                          dom.pred(p).name + "' is not a world predicate");
}

}  // namespace

ClassExpr c_athing() {
  static const auto node = [] {
    auto n = std::make_shared<ClassExpr::Node>();
    n->kind = ClassKind::AThing;
    n->depth = 1;
    n->canon = "a-thing";
    return n;
  }();
  return ClassExpr(node);
}

ClassExpr c_prim(const DomainDef& dom, PredId p) {
  require_unary_world(dom, p, false);
  auto n = std::make_shared<ClassExpr::Node>();
  n->kind = ClassKind::Prim;
  n->pred = p;
  n->depth = 1;
  n->canon = dom.pred(p).name;
  return ClassExpr(std::move(n));
}

ClassExpr c_comp(const DomainDef& dom, PredId world_p) {
  require_unary_world(dom, world_p, true);
  auto n = std::make_shared<ClassExpr::Node>();
  n->kind = ClassKind::Comp;
  n->pred = world_p;
  n->depth = 1;
  n->canon = "c" + dom.pred(world_p).name;
  return ClassExpr(std::move(n));
}

ClassExpr c_derived(int ix, const std::string& name) {
  auto n = std::make_shared<ClassExpr::Node>();
  n->kind = ClassKind::Derived;
  n->derived_ix = ix;
  n->depth = 1;
  n->canon = name;
  return ClassExpr(std::move(n));
}

ClassExpr c_not(const ClassExpr& c) {
  if (c.kind() == ClassKind::Not)
    throw ValidationError("double negation is excluded: " + c.canon());
  if (c.kind() == ClassKind::And)
    throw ValidationError("negation applies to intersection-free expressions");
  auto n = std::make_shared<ClassExpr::Node>();
  n->kind = ClassKind::Not;
  n->child = c.ptr();
  n->depth = c.depth() + 1;
  n->canon = "(not " + c.canon() + ")";
  return ClassExpr(std::move(n));
}

ClassExpr c_rel_app(const RelExpr& r, const ClassExpr& c) {
  if (c.kind() == ClassKind::And)
    throw ValidationError(
        "relational application applies to intersection-free expressions");
  auto n = std::make_shared<ClassExpr::Node>();
  n->kind = ClassKind::RelApp;
  n->rel = r;
  n->child = c.ptr();
  n->depth = c.depth() + 1;
  n->canon = "(" + r.canon() + " " + c.canon() + ")";
  return ClassExpr(std::move(n));
}

ClassExpr c_and(std::vector<ClassExpr> members) {
  std::vector<ClassExpr> flat;
  for (auto& m : members) {
    if (!m.valid()) throw ValidationError("invalid conjunct");
    if (m.kind() == ClassKind::And) {
      for (const auto& mm : m.node().conj) flat.push_back(mm);
    } else if (m.kind() != ClassKind::AThing) {
      flat.push_back(std::move(m));
    }
  }
  std::sort(flat.begin(), flat.end(), [](const ClassExpr& a, const ClassExpr& b) {
    if (a.depth() != b.depth()) return a.depth() < b.depth();
    return a.canon() < b.canon();
  });
  flat.erase(std::unique(flat.begin(), flat.end(),
                         [](const ClassExpr& a, const ClassExpr& b) {
                           return a.canon() == b.canon();
                         }),
             flat.end());
  if (flat.empty()) return c_athing();
  if (flat.size() == 1) return flat[0];
  auto n = std::make_shared<ClassExpr::Node>();
  n->kind = ClassKind::And;
  n->conj = std::move(flat);
  n->depth = 0;
  std::string s = "(and";
  for (const auto& m : n->conj) s += " " + m.canon();
  s += ")";
  n->canon = std::move(s);
  return ClassExpr(std::move(n));
}

RelExpr r_prim(const DomainDef& dom, PredId p) {
  require_binary(dom, p, false);
  auto n = std::make_shared<RelExpr::Node>();
  n->kind = RelKind::Prim;
  n->pred = p;
  n->canon = dom.pred(p).name;
  return RelExpr(std::move(n));
}

RelExpr r_comp(const DomainDef& dom, PredId world_p) {
  require_binary(dom, world_p, true);
  auto n = std::make_shared<RelExpr::Node>();
  n->kind = RelKind::Comp;
  n->pred = world_p;
  n->canon = "c" + dom.pred(world_p).name;
  return RelExpr(std::move(n));
}

RelExpr r_inv(const RelExpr& r) {
  if (r.node().kind == RelKind::Inv)
    throw ValidationError("inverse used twice: " + r.canon());
  if (r.node().kind == RelKind::Star)
    // (inv (star R)) and (star (inv R)) are the same relation; keep the
    // latter as canonical.
    return r_star(r_inv(RelExpr(r.node().child)));
  auto n = std::make_shared<RelExpr::Node>();
  n->kind = RelKind::Inv;
  n->child = r.ptr();
  n->canon = "(inv " + r.canon() + ")";
  return RelExpr(std::move(n));
}

RelExpr r_star(const RelExpr& r) {
  if (r.node().kind == RelKind::Star)
    throw ValidationError("star used twice: " + r.canon());
  auto n = std::make_shared<RelExpr::Node>();
  n->kind = RelKind::Star;
  n->child = r.ptr();
  n->canon = "(star " + r.canon() + ")";
  return RelExpr(std::move(n));
}

// --- Vocabulary and parsing ---------------------------------------------------

namespace {

bool is_keyword(std::string_view s) {
  return s == "a-thing" || s == "not" || s == "and" || s == "inv" ||
         s == "star";
}

}  // namespace

ConceptVocab::ConceptVocab(const DomainDef& dom) : dom_(&dom) {
  for (const auto& d : dom.derived) register_derived(d.name, d.concept_source);
}

int ConceptVocab::register_derived(const std::string& name,
                                   const ClassExpr& def) {
  if (is_keyword(name))
    throw ValidationError("derived predicate name '" + name + "' is reserved");
  if (dom_->find_pred(name) || find_derived(name))
    throw ValidationError("derived predicate '" + name +
                          "' collides with an existing name");
  if (name.size() > 1 && name[0] == 'c' &&
      dom_->find_pred(name.substr(1)))
    throw ValidationError("derived predicate '" + name +
                          "' collides with a comparison predicate");
  derived_.emplace_back(name, def);
  return int(derived_.size()) - 1;
}

int ConceptVocab::register_derived(const std::string& name,
                                   std::string_view source) {
  // parse against the vocabulary as it stands, so later definitions may use
  // earlier ones
  ClassExpr def = parse_class(source);
  return register_derived(name, def);
}

std::optional<int> ConceptVocab::find_derived(std::string_view name) const {
  for (size_t i = 0; i < derived_.size(); ++i)
    if (derived_[i].first == name) return int(i);
  return std::nullopt;
}

ClassExpr ConceptVocab::parse_class(std::string_view text) const {
  return parse_class(parse_sexpr(text));
}

ClassExpr ConceptVocab::parse_class(const SExpr& form) const {
  if (form.is_sym()) {
    const std::string& s = form.sym;
    if (s == "a-thing") return c_athing();
    if (auto p = dom_->find_pred(s)) {
      if (dom_->pred(*p).arity != 1)
        throw ParseError("'" + s + "' is not a class (arity 1) predicate",
                         form.line, form.col);
      return c_prim(*dom_, *p);
    }
    if (auto ix = find_derived(s)) return c_derived(*ix, s);
    if (s.size() > 1 && s[0] == 'c') {
      if (auto p = dom_->find_pred(s.substr(1));
          p && dom_->is_world(*p) && dom_->pred(*p).arity == 1)
        return c_comp(*dom_, *p);
    }
    throw ParseError("unknown class '" + s + "'", form.line, form.col);
  }
  auto h = form.head();
  if (h == "not") {
    if (form.size() != 2)
      throw ParseError("(not C) takes one argument", form.line, form.col);
    return c_not(parse_class(form.items[1]));
  }
  if (h == "and") {
    std::vector<ClassExpr> members;
    for (size_t i = 1; i < form.size(); ++i) {
      ClassExpr m = parse_class(form.items[i]);
      if (m.kind() == ClassKind::And)
        throw ParseError("nested intersections are not part of the language",
                         form.items[i].line, form.items[i].col);
      members.push_back(std::move(m));
    }
    return c_and(std::move(members));
  }
  // (R C)
  if (form.size() != 2)
    throw ParseError("expected (R C)", form.line, form.col);
  RelExpr r = parse_rel(form.items[0]);
  return c_rel_app(r, parse_class(form.items[1]));
}

RelExpr ConceptVocab::parse_rel(const SExpr& form) const {
  if (form.is_sym()) {
    const std::string& s = form.sym;
    if (auto p = dom_->find_pred(s)) {
      if (dom_->pred(*p).arity != 2)
        throw ParseError("'" + s + "' is not a relation (arity 2) predicate",
                         form.line, form.col);
      return r_prim(*dom_, *p);
    }
    if (s.size() > 1 && s[0] == 'c') {
      if (auto p = dom_->find_pred(s.substr(1));
          p && dom_->is_world(*p) && dom_->pred(*p).arity == 2)
        return r_comp(*dom_, *p);
    }
    throw ParseError("unknown relation '" + s + "'", form.line, form.col);
  }
  auto h = form.head();
  if (h == "inv" || h == "star") {
    if (form.size() != 2)
      throw ParseError("(" + std::string(h) + " R) takes one argument",
                       form.line, form.col);
    RelExpr r = parse_rel(form.items[1]);
    return h == "inv" ? r_inv(r) : r_star(r);
  }
  throw ParseError("expected a relation expression", form.line, form.col);
}

// --- Evaluation ---------------------------------------------------------------

EvalContext::EvalContext(const DomainDef& dom, const State& q,
                         const ConceptVocab* vocab)
    : dom_(&dom), q_(&q), vocab_(vocab) {}

const Bits& EvalContext::base_class(PredId p) {
  auto it = base1_.find(p);
  if (it != base1_.end()) return it->second;
  Bits b(num_objects());
  FactKey lo = make_fact(p);  // smallest key of this predicate
  auto first = std::lower_bound(q_->facts.begin(), q_->facts.end(), lo);
  for (auto f = first; f != q_->facts.end() && fact_pred(*f) == p; ++f)
    b.set(fact_arg0(*f));
  return base1_.emplace(p, std::move(b)).first->second;
}

const RelDen& EvalContext::base_rel(PredId p) {
  auto it = base2_.find(p);
  if (it != base2_.end()) return it->second;
  RelDen d;
  d.n = num_objects();
  d.rows.assign(d.n, Bits(d.n));
  FactKey lo = make_fact(p);
  auto first = std::lower_bound(q_->facts.begin(), q_->facts.end(), lo);
  for (auto f = first; f != q_->facts.end() && fact_pred(*f) == p; ++f)
    d.rows[fact_arg0(*f)].set(fact_arg1(*f));
  return base2_.emplace(p, std::move(d)).first->second;
}

const Bits& EvalContext::eval(const ClassExpr& c) {
  const ClassExpr::Node* key = c.ptr().get();
  auto it = class_memo_.find(key);
  if (it != class_memo_.end()) return it->second;
  Bits r(num_objects());
  switch (c.kind()) {
    case ClassKind::AThing:
      r.set_all();
      break;
    case ClassKind::Prim:
      r = base_class(c.node().pred);
      break;
    case ClassKind::Comp: {
      r = base_class(c.node().pred);
      r &= base_class(dom_->goal_twin(c.node().pred));
      break;
    }
    case ClassKind::Derived: {
      if (!vocab_)
        throw ValidationError("derived predicate '" + c.canon() +
                              "' used without a vocabulary");
      r = eval(vocab_->derived_def(c.node().derived_ix));
      break;
    }
    case ClassKind::Not:
      r = eval(ClassExpr(c.node().child)).complement();
      break;
    case ClassKind::RelApp: {
      const RelDen& rel = eval(c.node().rel);
      const Bits& sub = eval(ClassExpr(c.node().child));
      for (uint32_t o = 0; o < num_objects(); ++o)
        if (rel.rows[o].intersects(sub)) r.set(o);
      break;
    }
    case ClassKind::And: {
      r.set_all();
      for (const auto& m : c.node().conj) r &= eval(m);
      break;
    }
  }
  return class_memo_.emplace(key, std::move(r)).first->second;
}

const RelDen& EvalContext::eval(const RelExpr& r) {
  const RelExpr::Node* key = &r.node();
  auto it = rel_memo_.find(key);
  if (it != rel_memo_.end()) return it->second;
  RelDen d;
  d.n = num_objects();
  switch (r.node().kind) {
    case RelKind::Prim:
      d = base_rel(r.node().pred);
      break;
    case RelKind::Comp: {
      d = base_rel(r.node().pred);
      const RelDen& g = base_rel(dom_->goal_twin(r.node().pred));
      for (uint32_t o = 0; o < d.n; ++o) d.rows[o] &= g.rows[o];
      break;
    }
    case RelKind::Inv: {
      const RelDen& sub = eval(RelExpr(r.node().child));
      d.rows.assign(d.n, Bits(d.n));
      for (uint32_t o = 0; o < d.n; ++o)
        sub.rows[o].for_each_set([&](uint32_t o2) { d.rows[o2].set(o); });
      break;
    }
    case RelKind::Star: {
      // reflexive-transitive closure
      d = eval(RelExpr(r.node().child));
      for (uint32_t o = 0; o < d.n; ++o) d.rows[o].set(o);
      for (uint32_t k = 0; k < d.n; ++k)
        for (uint32_t i = 0; i < d.n; ++i)
          if (d.rows[i].test(k)) d.rows[i] |= d.rows[k];
      break;
    }
  }
  return rel_memo_.emplace(key, std::move(d)).first->second;
}

const Bits& EvalContext::legal_args(uint32_t action_type) {
  auto it = legal_.find(action_type);
  if (it != legal_.end()) return it->second;
  const ActionType& at = dom_->actions[action_type];
  if (at.arity != 1)
    throw ValidationError("legal_args applies to arity-1 action types");
  Bits b(num_objects());
  std::vector<ObjId> args(1);
  for (ObjId o = 0; o < num_objects(); ++o) {
    args[0] = o;
    if (ground_action(*q_, *dom_, action_type, args)) b.set(o);
  }
  return legal_.emplace(action_type, std::move(b)).first->second;
}

bool EvalContext::any_legal(uint32_t action_type) {
  auto it = any_legal_.find(action_type);
  if (it != any_legal_.end()) return it->second;
  bool found = false;
  const ActionType& at = dom_->actions[action_type];
  if (at.arity == 1) {
    found = legal_args(action_type).any();
  } else {
    std::vector<ObjId> args(at.arity);
    if (at.arity == 0) {
      found = ground_action(*q_, *dom_, action_type, args).has_value();
    } else {
      for (ObjId o0 = 0; o0 < num_objects() && !found; ++o0)
        for (ObjId o1 = 0; o1 < num_objects() && !found; ++o1) {
          args[0] = o0;
          args[1] = o1;
          found = ground_action(*q_, *dom_, action_type, args).has_value();
        }
    }
  }
  any_legal_.emplace(action_type, found);
  return found;
}

std::vector<ObjId> eval_class(const ClassExpr& c, const DomainDef& dom,
                              const State& q, const ConceptVocab* vocab) {
  EvalContext ctx(dom, q, vocab);
  std::vector<ObjId> out;
  ctx.eval(c).for_each_set([&out](uint32_t o) { out.push_back(o); });
  return out;
}

std::vector<std::pair<ObjId, ObjId>> eval_rel(const RelExpr& r,
                                              const DomainDef& dom,
                                              const State& q,
                                              const ConceptVocab* vocab) {
  EvalContext ctx(dom, q, vocab);
  std::vector<std::pair<ObjId, ObjId>> out;
  const RelDen& d = ctx.eval(r);
  for (uint32_t o = 0; o < d.n; ++o)
    d.rows[o].for_each_set([&](uint32_t o2) { out.emplace_back(o, o2); });
  return out;
}

// --- Candidate space -----------------------------------------------------------

std::vector<ClassExpr> enumerate_intersection_free(const ConceptVocab& vocab,
                                                   int d) {
  const DomainDef& dom = vocab.domain();
  if (d < 1) throw ValidationError("depth bound must be at least 1");

  std::vector<RelExpr> rel_forms;
  for (PredId p = 0; p < dom.preds.size(); ++p) {
    if (!dom.is_world(p) || dom.pred(p).arity != 2) continue;
    std::vector<RelExpr> bases = {r_prim(dom, p), r_prim(dom, dom.goal_twin(p)),
                                  r_comp(dom, p)};
    for (const RelExpr& b : bases) {
      rel_forms.push_back(b);
      rel_forms.push_back(r_inv(b));
      rel_forms.push_back(r_star(b));
      rel_forms.push_back(r_star(r_inv(b)));
    }
  }

  auto by_canon = [](const ClassExpr& a, const ClassExpr& b) {
    return a.canon() < b.canon();
  };

  std::vector<ClassExpr> level;
  level.push_back(c_athing());
  for (PredId p = 0; p < dom.preds.size(); ++p) {
    if (!dom.is_world(p) || dom.pred(p).arity != 1) continue;
    level.push_back(c_prim(dom, p));
    level.push_back(c_prim(dom, dom.goal_twin(p)));
    level.push_back(c_comp(dom, p));
  }
  for (int i = 0; i < vocab.num_derived(); ++i)
    level.push_back(c_derived(i, vocab.derived_name(i)));
  std::sort(level.begin(), level.end(), by_canon);

  std::vector<ClassExpr> out = level;
  for (int depth = 2; depth <= d; ++depth) {
    std::vector<ClassExpr> next;
    for (const ClassExpr& c : level) {
      if (c.kind() != ClassKind::Not) next.push_back(c_not(c));
      for (const RelExpr& r : rel_forms) next.push_back(c_rel_app(r, c));
    }
    std::sort(next.begin(), next.end(), by_canon);
    out.insert(out.end(), next.begin(), next.end());
    level = std::move(next);
  }
  return out;
}

std::optional<ClassExpr> conjoin(const ClassExpr& c, const ClassExpr& c2,
                                 const CandidateSpaceParams& params) {
  assert(c2.kind() != ClassKind::And);
  if (c2.kind() == ClassKind::AThing) return std::nullopt;  // identity, no-op
  if (c.kind() == ClassKind::AThing) return c2;
  if (c.kind() == ClassKind::And) {
    for (const auto& m : c.node().conj)
      if (m.canon() == c2.canon()) return std::nullopt;
    if (int(c.node().conj.size()) + 1 > params.width) return std::nullopt;
    std::vector<ClassExpr> members = c.node().conj;
    members.push_back(c2);
    return c_and(std::move(members));
  }
  if (c.canon() == c2.canon()) return std::nullopt;
  if (params.width < 2) return std::nullopt;
  return c_and({c, c2});
}

}  // namespace relpol
