#pragma once

#include <iosfwd>
#include <span>

#include "relpol/policy.hpp"
#include "relpol/rng.hpp"

namespace relpol {

struct LearnerParams {
  int depth = 1;  // d
  int width = 1;  // w: maximum conjunct count
  int beam = 1;   // b
};

struct BagParams {
  int ensemble_size = 1;  // Z
  int sample_size = 1;    // M, drawn with replacement
};

// Heuristic pairs are compared lexicographically, consistency part first.
struct HeuristicValue {
  double n = 0.0;
  double v = 0.0;
  friend bool operator<(const HeuristicValue& a, const HeuristicValue& b) {
    if (a.n != b.n) return a.n < b.n;
    return a.v < b.v;
  }
  friend bool operator==(const HeuristicValue& a, const HeuristicValue& b) {
    return a.n == b.n && a.v == b.v;
  }
};

enum class HeuristicKind { H1, H2 };

// Rule-quality measures over a training set F:
//   V  — fraction of F the rule covers;
//   N1 — mean over F_a (instances with a legal type-a action) of the chance
//        a uniformly drawn suggestion is optimal, counting an empty
//        suggestion as right exactly when no type-a action is optimal;
//   N2 — 1/(1+X) where X is the number of instances covered incorrectly.
double heuristic_V(const Rule& r, std::span<const TrainingInstance> F,
                   const DomainDef& dom, const ConceptVocab& vocab);
double heuristic_N1(const Rule& r, std::span<const TrainingInstance> F,
                    const DomainDef& dom, const ConceptVocab& vocab);
double heuristic_N2(const Rule& r, std::span<const TrainingInstance> F,
                    const DomainDef& dom, const ConceptVocab& vocab);
bool rule_consistent(const Rule& r, std::span<const TrainingInstance> F,
                     const DomainDef& dom, const ConceptVocab& vocab);

// Beam search over C_{d,w} for one action type under one heuristic:
// starts from a-thing, repeatedly specializes beam members with
// intersection-free conjuncts, keeps the b best distinct heuristic values,
// and stops on consistency or when the beam's value set stops changing.
Rule beam_search(std::span<const TrainingInstance> F,
                 const LearnerParams& params, uint32_t action_type,
                 HeuristicKind kind, const DomainDef& dom,
                 const ConceptVocab& vocab);

// Best rule across action types: H1 search per type with an H2 retry when
// inconsistent; consistent candidates win by H1 value.
Rule learn_rule(std::span<const TrainingInstance> F,
                const LearnerParams& params, const DomainDef& dom,
                const ConceptVocab& vocab, bool* consistent = nullptr);

struct LearnStats {
  std::vector<bool> rule_consistent;  // per appended rule
  int fallback_rules = 0;
  bool all_rules_consistent() const {
    for (bool c : rule_consistent)
      if (!c) return false;
    return true;
  }
};

// Iterative set covering: learn a rule against the uncovered instances,
// append, drop what it covers, repeat until everything is covered. When a
// learned rule covers nothing it is replaced by the best a-thing fallback
// rule so the loop always makes progress.
DecisionList learn_decision_list(std::span<const TrainingInstance> F,
                                 const LearnerParams& params,
                                 const DomainDef& dom,
                                 const ConceptVocab& vocab,
                                 LearnStats* stats = nullptr);

// Bagging: Z bootstrap samples of size M, one decision list per sample.
// Each member draws from its own child stream of rng, so results do not
// depend on construction order. jobs > 1 trains members concurrently.
Ensemble bag_learn(std::span<const TrainingInstance> F,
                   const LearnerParams& params, const BagParams& bag, Rng& rng,
                   const DomainDef& dom, const ConceptVocab& vocab,
                   int jobs = 1);

// JSON-lines training files:
// {"state":{"objects":[...],"facts":[...]},"optimal":["unstack(b)",...]}
std::vector<TrainingInstance> parse_training_jsonl(const DomainDef& dom,
                                                   std::string_view text);
std::string training_to_jsonl(const DomainDef& dom,
                              std::span<const TrainingInstance> F);

}  // namespace relpol
