#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "relpol/bits.hpp"
#include "relpol/pstrips.hpp"

namespace relpol {

// Variable-free class/relation expressions denoting object sets (pairs for
// relations) in a state. Nodes are immutable and shared; the canonical
// string and depth are fixed at construction.
//
// Canonical form invariants, enforced by the factory functions:
//   - no Not directly wrapping Not,
//   - no Star(Star(.)) and no Inv(Inv(.)); Inv(Star(r)) is rewritten to
//     Star(Inv(r)),
//   - And members are intersection-free, sorted by (depth, canonical
//     string), duplicate-free, with a-thing absorbed.

class RelExpr;

enum class ClassKind : uint8_t { AThing, Prim, Comp, Derived, Not, RelApp, And };
enum class RelKind : uint8_t { Prim, Comp, Inv, Star };

class ClassExpr {
 public:
  struct Node;
  ClassExpr() = default;
  explicit ClassExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  bool valid() const { return node_ != nullptr; }
  const Node& node() const { return *node_; }
  const std::shared_ptr<const Node>& ptr() const { return node_; }

  ClassKind kind() const;
  // Depth of an intersection-free expression; throws on And.
  int depth() const;
  // Largest member depth (== depth() when intersection-free).
  int max_member_depth() const;
  int num_conjuncts() const;  // 1 when intersection-free
  const std::string& canon() const;

  friend bool operator==(const ClassExpr& a, const ClassExpr& b) {
    return a.node_ == b.node_ || (a.node_ && b.node_ && a.canon() == b.canon());
  }

 private:
  std::shared_ptr<const Node> node_;
};

class RelExpr {
 public:
  struct Node;
  RelExpr() = default;
  explicit RelExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  bool valid() const { return node_ != nullptr; }
  const Node& node() const { return *node_; }
  const std::shared_ptr<const Node>& ptr() const { return node_; }
  const std::string& canon() const;

  friend bool operator==(const RelExpr& a, const RelExpr& b) {
    return a.node_ == b.node_ || (a.node_ && b.node_ && a.canon() == b.canon());
  }

 private:
  std::shared_ptr<const Node> node_;
};

struct RelExpr::Node {
  RelKind kind;
  PredId pred = 0;  // Prim/Comp
  std::shared_ptr<const Node> child;
  std::string canon;
};

struct ClassExpr::Node {
  ClassKind kind;
  PredId pred = 0;     // Prim/Comp
  int derived_ix = -1; // Derived
  RelExpr rel;         // RelApp
  std::shared_ptr<const Node> child;  // Not/RelApp
  std::vector<ClassExpr> conj;        // And
  int depth = 1;       // depth of intersection-free exprs; 0 marks And
  std::string canon;
};

// Factories. Predicate arguments must be world predicates of the right
// arity (arity 1 for classes, 2 for relations); Comp denotes P ∩ gP and
// Prim-of-goal-twin is expressed by passing the goal predicate id.
ClassExpr c_athing();
ClassExpr c_prim(const DomainDef& dom, PredId p);
ClassExpr c_comp(const DomainDef& dom, PredId world_p);
ClassExpr c_derived(int ix, const std::string& name);
ClassExpr c_not(const ClassExpr& c);
ClassExpr c_rel_app(const RelExpr& r, const ClassExpr& c);
// Members are flattened, sorted, deduplicated; a-thing is the identity.
ClassExpr c_and(std::vector<ClassExpr> members);

RelExpr r_prim(const DomainDef& dom, PredId p);
RelExpr r_comp(const DomainDef& dom, PredId world_p);
RelExpr r_inv(const RelExpr& r);
RelExpr r_star(const RelExpr& r);

// Named derived predicates plus parsing of the concept surface syntax.
// Derived definitions come from the domain (or later registration) and are
// usable as depth-one primitive classes.
class ConceptVocab {
 public:
  explicit ConceptVocab(const DomainDef& dom);

  const DomainDef& domain() const { return *dom_; }

  // Registers a new derived predicate; returns its index.
  int register_derived(const std::string& name, const ClassExpr& def);
  int register_derived(const std::string& name, std::string_view source);

  int num_derived() const { return int(derived_.size()); }
  const std::string& derived_name(int ix) const { return derived_[ix].first; }
  const ClassExpr& derived_def(int ix) const { return derived_[ix].second; }
  std::optional<int> find_derived(std::string_view name) const;

  ClassExpr parse_class(std::string_view text) const;
  ClassExpr parse_class(const SExpr& form) const;
  RelExpr parse_rel(const SExpr& form) const;

 private:
  const DomainDef* dom_;
  std::vector<std::pair<std::string, ClassExpr>> derived_;
};

// Denotation of a binary relation: rows[o] holds the successors of o.
struct RelDen {
  uint32_t n = 0;
  std::vector<Bits> rows;
};

// Per-state evaluation context with memoized sub-expression denotations and
// per-action-type legal-argument sets. Not shared across threads; cheap to
// construct per state.
class EvalContext {
 public:
  EvalContext(const DomainDef& dom, const State& q,
              const ConceptVocab* vocab = nullptr);

  const DomainDef& domain() const { return *dom_; }
  const State& state() const { return *q_; }
  uint32_t num_objects() const { return q_->num_objects; }

  const Bits& eval(const ClassExpr& c);
  const RelDen& eval(const RelExpr& r);

  // Arguments o for which the arity-1 action type is legal.
  const Bits& legal_args(uint32_t action_type);
  // True iff some ground action of the type is legal (any arity).
  bool any_legal(uint32_t action_type);

 private:
  const Bits& base_class(PredId p);
  const RelDen& base_rel(PredId p);

  const DomainDef* dom_;
  const State* q_;
  const ConceptVocab* vocab_;
  std::unordered_map<PredId, Bits> base1_;
  std::unordered_map<PredId, RelDen> base2_;
  std::unordered_map<const ClassExpr::Node*, Bits> class_memo_;
  std::unordered_map<const RelExpr::Node*, RelDen> rel_memo_;
  std::unordered_map<uint32_t, Bits> legal_;
  std::unordered_map<uint32_t, bool> any_legal_;
};

// Object set denoted by c in q (fresh context; convenience form).
std::vector<ObjId> eval_class(const ClassExpr& c, const DomainDef& dom,
                              const State& q,
                              const ConceptVocab* vocab = nullptr);
// Pair set denoted by r in q.
std::vector<std::pair<ObjId, ObjId>> eval_rel(const RelExpr& r,
                                              const DomainDef& dom,
                                              const State& q,
                                              const ConceptVocab* vocab = nullptr);

struct CandidateSpaceParams {
  int depth = 1;  // d: maximum intersection-free depth
  int width = 1;  // w: maximum conjunct count
};

// All canonical intersection-free class expressions of depth <= d over the
// arity-1/2 predicates of the vocabulary (world, goal, comparison, derived),
// ordered by (depth, canonical string). Relation forms per base relation:
// R, R^-1, R*, (R^-1)*.
std::vector<ClassExpr> enumerate_intersection_free(const ConceptVocab& vocab,
                                                   int d);

// Canonical conjunction of c with intersection-free c2, or nullopt when the
// width cap would be exceeded or c2 is already a conjunct of c.
std::optional<ClassExpr> conjoin(const ClassExpr& c, const ClassExpr& c2,
                                 const CandidateSpaceParams& params);

}  // namespace relpol
