#include "relpol/learner.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "json.hpp"

namespace relpol {

namespace {

struct RuleStats {
  double v = 0.0, n1 = 0.0, n2 = 1.0;
  int covered = 0, incorrect = 0;
  bool consistent = true;
  HeuristicValue h(HeuristicKind kind) const {
    return kind == HeuristicKind::H1 ? HeuristicValue{n1, v}
                                     : HeuristicValue{n2, v};
  }
};

struct StatsAccum {
  int total = 0, fa = 0, covered = 0, incorrect = 0;
  double psum = 0.0;

  void add_outside_fa() { ++total; }
  void add(bool has_alpha, uint32_t sugg_n, uint32_t inter_n, bool subset) {
    ++total;
    ++fa;
    if (sugg_n == 0) {
      psum += has_alpha ? 0.0 : 1.0;
      return;
    }
    ++covered;
    if (!subset) ++incorrect;
    psum += double(inter_n) / double(sugg_n);
  }
  RuleStats finish() const {
    RuleStats s;
    s.v = total ? double(covered) / double(total) : 0.0;
    s.n1 = fa ? psum / double(fa) : 0.0;
    s.n2 = 1.0 / (1.0 + double(incorrect));
    s.covered = covered;
    s.incorrect = incorrect;
    s.consistent = incorrect == 0;
    return s;
  }
};

Bits optimal_args_of_type(uint32_t type, const TrainingInstance& f) {
  Bits b(f.state.num_objects);
  for (const GroundAction& a : f.optimal)
    if (a.type == type && a.args.size() == 1) b.set(a.args[0]);
  return b;
}

bool optimal_has_type(uint32_t type, const TrainingInstance& f) {
  for (const GroundAction& a : f.optimal)
    if (a.type == type) return true;
  return false;
}

// Stats for an arbitrary rule via per-state evaluation contexts; the entry
// points below and the tests use this path, the beam search uses the
// precomputed Session matrices.
RuleStats rule_stats_generic(const Rule& r,
                             std::span<const TrainingInstance> F,
                             const DomainDef& dom, const ConceptVocab& vocab) {
  StatsAccum acc;
  for (const TrainingInstance& f : F) {
    EvalContext ctx(dom, f.state, &vocab);
    if (!ctx.any_legal(r.action_type)) {
      acc.add_outside_fa();
      continue;
    }
    Bits sugg = suggest_args(r, ctx);
    Bits alpha = optimal_args_of_type(r.action_type, f);
    Bits inter = sugg;
    inter &= alpha;
    acc.add(optimal_has_type(r.action_type, f), sugg.count(), inter.count(),
            sugg.is_subset_of(alpha));
  }
  return acc.finish();
}

// --- Fast learning session ----------------------------------------------------

using Conj = std::vector<uint16_t>;  // sorted ifree indices; empty = a-thing

struct ConjHash {
  size_t operator()(const std::pair<int, Conj>& key) const {
    uint64_t h = 0xcbf29ce484222325ull ^ uint64_t(key.first);
    for (uint16_t c : key.second) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    return size_t(h);
  }
};

class Session {
 public:
  Session(std::span<const TrainingInstance> F, const LearnerParams& params,
          const DomainDef& dom, const ConceptVocab& vocab)
      : dom_(dom), vocab_(vocab), params_(params), F_(F) {
    ifree_ = enumerate_intersection_free(vocab, params.depth);
    if (ifree_.size() > 0xffff)
      throw ValidationError("candidate space too large for this learner");
    for (size_t i = 0; i < ifree_.size(); ++i) {
      if (ifree_[i].kind() == ClassKind::AThing) athing_ix_ = int(i);
      depth_of_.push_back(ifree_[i].depth());
    }
    for (uint32_t t = 0; t < dom.actions.size(); ++t)
      if (dom.actions[t].arity == 1) atypes_.push_back(t);
    if (atypes_.empty())
      throw ValidationError("rule learning needs at least one arity-1 action type");
    insts_.reserve(F.size());
    for (const TrainingInstance& f : F) insts_.push_back(build(f));
  }

  const std::vector<uint32_t>& atypes() const { return atypes_; }

  DecisionList learn_list(LearnStats* stats) {
    DecisionList list;
    std::vector<uint32_t> active(insts_.size());
    for (uint32_t i = 0; i < active.size(); ++i) active[i] = i;
    while (!active.empty()) {
      auto [rule_conj, tslot, rstats] = learn_rule_ix(active);
      std::vector<uint32_t> still;
      bool any_covered = false;
      for (uint32_t ix : active)
        if (covers(rule_conj, tslot, ix))
          any_covered = true;
        else
          still.push_back(ix);
      if (!any_covered) {
        // progress fallback: best a-thing rule on what remains
        int best_slot = -1;
        RuleStats best_stats;
        for (size_t s = 0; s < atypes_.size(); ++s) {
          RuleStats st = eval_conj({}, int(s), active);
          int correct = st.covered - st.incorrect;
          int best_correct = best_stats.covered - best_stats.incorrect;
          bool better =
              best_slot < 0 || correct > best_correct ||
              (correct == best_correct && st.covered > best_stats.covered) ||
              (correct == best_correct && st.covered == best_stats.covered &&
               dom_.actions[atypes_[s]].name <
                   dom_.actions[atypes_[best_slot]].name);
          if (better) {
            best_slot = int(s);
            best_stats = st;
          }
        }
        rule_conj = {};
        tslot = best_slot;
        rstats = best_stats;
        still.clear();
        for (uint32_t ix : active)
          if (!covers(rule_conj, tslot, ix)) still.push_back(ix);
        if (stats) ++stats->fallback_rules;
        if (still.size() == active.size())
          throw ValidationError(
              "training instance admits no legal rule action; cannot cover");
      }
      list.rules.push_back(make_rule(rule_conj, tslot));
      if (stats) stats->rule_consistent.push_back(rstats.consistent);
      active = std::move(still);
    }
    return list;
  }

  Rule learn_rule_public(bool* consistent) {
    std::vector<uint32_t> active(insts_.size());
    for (uint32_t i = 0; i < active.size(); ++i) active[i] = i;
    auto [conj, tslot, stats] = learn_rule_ix(active);
    if (consistent) *consistent = stats.consistent;
    return make_rule(conj, tslot);
  }

  Rule beam_public(uint32_t action_type, HeuristicKind kind) {
    std::vector<uint32_t> active(insts_.size());
    for (uint32_t i = 0; i < active.size(); ++i) active[i] = i;
    int tslot = slot_of(action_type);
    memo_.clear();
    auto cand = beam(tslot, kind, active);
    return make_rule(cand.conj, tslot);
  }

 private:
  struct Inst {
    const TrainingInstance* f;
    uint32_t n = 0, words = 0;
    std::vector<uint64_t> den;    // [expr * words + w]
    std::vector<uint64_t> legal;  // [slot * words + w]
    std::vector<uint64_t> alpha;  // [slot * words + w]
    std::vector<char> has_legal, has_alpha;
  };

  struct Cand {
    Conj conj;
    RuleStats stats;
    int maxdepth = 1;
  };

  int slot_of(uint32_t action_type) const {
    for (size_t s = 0; s < atypes_.size(); ++s)
      if (atypes_[s] == action_type) return int(s);
    throw ValidationError("action type is not learnable (arity must be 1)");
  }

  Inst build(const TrainingInstance& f) {
    Inst inst;
    inst.f = &f;
    inst.n = f.state.num_objects;
    inst.words = std::max(1u, (inst.n + 63) / 64);
    EvalContext ctx(dom_, f.state, &vocab_);
    inst.den.assign(ifree_.size() * inst.words, 0);
    for (size_t i = 0; i < ifree_.size(); ++i) {
      const Bits& b = ctx.eval(ifree_[i]);
      std::copy(b.data(), b.data() + b.words(), inst.den.begin() + i * inst.words);
    }
    inst.legal.assign(atypes_.size() * inst.words, 0);
    inst.alpha.assign(atypes_.size() * inst.words, 0);
    inst.has_legal.assign(atypes_.size(), 0);
    inst.has_alpha.assign(atypes_.size(), 0);
    for (size_t s = 0; s < atypes_.size(); ++s) {
      const Bits& lg = ctx.legal_args(atypes_[s]);
      std::copy(lg.data(), lg.data() + lg.words(),
                inst.legal.begin() + s * inst.words);
      inst.has_legal[s] = lg.any();
      Bits al = optimal_args_of_type(atypes_[s], f);
      std::copy(al.data(), al.data() + al.words(),
                inst.alpha.begin() + s * inst.words);
      inst.has_alpha[s] = optimal_has_type(atypes_[s], f);
    }
    return inst;
  }

  bool covers(const Conj& conj, int tslot, uint32_t ix) const {
    const Inst& f = insts_[ix];
    if (!f.has_legal[tslot]) return false;
    for (uint32_t w = 0; w < f.words; ++w) {
      uint64_t m = f.legal[tslot * f.words + w];
      for (uint16_t c : conj) m &= f.den[c * f.words + w];
      if (m) return true;
    }
    return false;
  }

  RuleStats eval_conj(const Conj& conj, int tslot,
                      const std::vector<uint32_t>& active) const {
    StatsAccum acc;
    for (uint32_t ix : active) {
      const Inst& f = insts_[ix];
      if (!f.has_legal[tslot]) {
        acc.add_outside_fa();
        continue;
      }
      uint32_t sugg_n = 0, inter_n = 0;
      bool subset = true;
      for (uint32_t w = 0; w < f.words; ++w) {
        uint64_t m = f.legal[tslot * f.words + w];
        for (uint16_t c : conj) m &= f.den[c * f.words + w];
        uint64_t a = f.alpha[tslot * f.words + w];
        sugg_n += uint32_t(__builtin_popcountll(m));
        inter_n += uint32_t(__builtin_popcountll(m & a));
        if (m & ~a) subset = false;
      }
      acc.add(f.has_alpha[tslot] != 0, sugg_n, inter_n, subset);
    }
    return acc.finish();
  }

  const RuleStats& eval_memo(const Conj& conj, int tslot,
                             const std::vector<uint32_t>& active) {
    auto key = std::make_pair(tslot, conj);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    return memo_.emplace(std::move(key), eval_conj(conj, tslot, active))
        .first->second;
  }

  int conj_maxdepth(const Conj& conj) const {
    int d = 1;
    for (uint16_t c : conj) d = std::max(d, depth_of_[c]);
    return d;
  }

  // Beam ordering: higher heuristic first; equal values prefer smaller
  // depth, then fewer conjuncts, then the canonical member strings.
  bool cand_before(const Cand& a, const Cand& b, HeuristicKind kind) const {
    HeuristicValue ha = a.stats.h(kind), hb = b.stats.h(kind);
    if (!(ha == hb)) return hb < ha;
    if (a.maxdepth != b.maxdepth) return a.maxdepth < b.maxdepth;
    if (a.conj.size() != b.conj.size()) return a.conj.size() < b.conj.size();
    for (size_t i = 0; i < a.conj.size(); ++i)
      if (a.conj[i] != b.conj[i])
        return ifree_[a.conj[i]].canon() < ifree_[b.conj[i]].canon();
    return false;
  }

  Cand beam(int tslot, HeuristicKind kind, const std::vector<uint32_t>& active) {
    Cand athing{{}, eval_memo({}, tslot, active), 1};
    std::vector<Cand> beam_set{athing};
    Cand best = athing;
    if (best.stats.consistent) return best;
    std::vector<HeuristicValue> prev_h{best.stats.h(kind)};

    for (;;) {
      std::unordered_map<std::pair<int, Conj>, Cand, ConjHash> gen;
      auto add_cand = [&](Conj conj) {
        auto key = std::make_pair(tslot, conj);
        if (gen.count(key)) return;
        Cand c;
        c.maxdepth = conj_maxdepth(conj);
        c.stats = eval_memo(conj, tslot, active);
        c.conj = std::move(conj);
        gen.emplace(std::move(key), std::move(c));
      };
      for (const Cand& c : beam_set) add_cand(c.conj);
      for (const Cand& c : beam_set) {
        // a-thing has zero real conjuncts; adding to a full-width member
        // would exceed w
        if (!c.conj.empty() && int(c.conj.size()) + 1 > params_.width) continue;
        for (uint16_t k = 0; k < uint16_t(ifree_.size()); ++k) {
          if (int(k) == athing_ix_) continue;
          if (std::binary_search(c.conj.begin(), c.conj.end(), k)) continue;
          Conj conj = c.conj;
          conj.insert(std::lower_bound(conj.begin(), conj.end(), k), k);
          add_cand(std::move(conj));
        }
      }

      std::vector<Cand> pool;
      pool.reserve(gen.size());
      for (auto& [key, c] : gen) pool.push_back(std::move(c));
      std::sort(pool.begin(), pool.end(), [&](const Cand& a, const Cand& b) {
        return cand_before(a, b, kind);
      });
      std::vector<Cand> next;
      std::vector<HeuristicValue> taken;
      for (Cand& c : pool) {
        HeuristicValue h = c.stats.h(kind);
        bool dup = false;
        for (const HeuristicValue& t : taken)
          if (t == h) {
            dup = true;
            break;
          }
        if (dup) continue;
        taken.push_back(h);
        next.push_back(std::move(c));
        if (int(next.size()) >= params_.beam) break;
      }
      best = next.front();
      if (best.stats.consistent) return best;
      std::vector<HeuristicValue> cur_h = taken;
      std::sort(cur_h.begin(), cur_h.end());
      std::vector<HeuristicValue> prev_sorted = prev_h;
      std::sort(prev_sorted.begin(), prev_sorted.end());
      if (cur_h == prev_sorted) return best;
      prev_h = std::move(cur_h);
      beam_set = std::move(next);
    }
  }

  std::tuple<Conj, int, RuleStats> learn_rule_ix(
      const std::vector<uint32_t>& active) {
    memo_.clear();
    struct Entry {
      Conj conj;
      int tslot;
      RuleStats stats;
    };
    std::vector<Entry> entries;
    for (size_t s = 0; s < atypes_.size(); ++s) {
      Cand c = beam(int(s), HeuristicKind::H1, active);
      if (!c.stats.consistent) {
        Cand c2 = beam(int(s), HeuristicKind::H2, active);
        if (c2.stats.consistent) c = c2;
      }
      entries.push_back({std::move(c.conj), int(s), c.stats});
    }
    bool any_consistent = false;
    for (const Entry& e : entries) any_consistent |= e.stats.consistent;
    const Entry* winner = nullptr;
    for (const Entry& e : entries) {
      if (any_consistent && !e.stats.consistent) continue;
      if (!winner) {
        winner = &e;
        continue;
      }
      HeuristicValue he{e.stats.n1, e.stats.v};
      HeuristicValue hw{winner->stats.n1, winner->stats.v};
      bool better = hw < he;
      if (he == hw) {
        const std::string& ne = dom_.actions[atypes_[e.tslot]].name;
        const std::string& nw = dom_.actions[atypes_[winner->tslot]].name;
        if (ne != nw)
          better = ne < nw;
        else
          better = conj_canon(e.conj) < conj_canon(winner->conj);
      }
      if (better) winner = &e;
    }
    return {winner->conj, winner->tslot, winner->stats};
  }

  std::string conj_canon(const Conj& conj) const {
    if (conj.empty()) return "a-thing";
    std::string s;
    for (uint16_t c : conj) {
      if (!s.empty()) s += ' ';
      s += ifree_[c].canon();
    }
    return s;
  }

  Rule make_rule(const Conj& conj, int tslot) const {
    ClassExpr expr;
    if (conj.empty()) {
      expr = c_athing();
    } else if (conj.size() == 1) {
      expr = ifree_[conj[0]];
    } else {
      std::vector<ClassExpr> members;
      for (uint16_t c : conj) members.push_back(ifree_[c]);
      expr = c_and(std::move(members));
    }
    return Rule{expr, atypes_[tslot]};
  }

  const DomainDef& dom_;
  const ConceptVocab& vocab_;
  LearnerParams params_;
  std::span<const TrainingInstance> F_;
  std::vector<ClassExpr> ifree_;
  std::vector<int> depth_of_;
  int athing_ix_ = -1;
  std::vector<uint32_t> atypes_;
  std::vector<Inst> insts_;
  std::unordered_map<std::pair<int, Conj>, RuleStats, ConjHash> memo_;
};

void check_params(const LearnerParams& p) {
  if (p.depth < 1 || p.width < 1 || p.beam < 1)
    throw ValidationError("learner parameters must be at least 1");
}

}  // namespace

// --- Public operations ---------------------------------------------------------

double heuristic_V(const Rule& r, std::span<const TrainingInstance> F,
                   const DomainDef& dom, const ConceptVocab& vocab) {
  if (F.empty()) throw ValidationError("V is undefined on an empty instance set");
  return rule_stats_generic(r, F, dom, vocab).v;
}

double heuristic_N1(const Rule& r, std::span<const TrainingInstance> F,
                    const DomainDef& dom, const ConceptVocab& vocab) {
  return rule_stats_generic(r, F, dom, vocab).n1;
}

double heuristic_N2(const Rule& r, std::span<const TrainingInstance> F,
                    const DomainDef& dom, const ConceptVocab& vocab) {
  return rule_stats_generic(r, F, dom, vocab).n2;
}

bool rule_consistent(const Rule& r, std::span<const TrainingInstance> F,
                     const DomainDef& dom, const ConceptVocab& vocab) {
  return rule_stats_generic(r, F, dom, vocab).consistent;
}

Rule beam_search(std::span<const TrainingInstance> F,
                 const LearnerParams& params, uint32_t action_type,
                 HeuristicKind kind, const DomainDef& dom,
                 const ConceptVocab& vocab) {
  check_params(params);
  if (F.empty()) throw ValidationError("beam search needs training instances");
  Session session(F, params, dom, vocab);
  return session.beam_public(action_type, kind);
}

Rule learn_rule(std::span<const TrainingInstance> F,
                const LearnerParams& params, const DomainDef& dom,
                const ConceptVocab& vocab, bool* consistent) {
  check_params(params);
  if (F.empty()) throw ValidationError("learn_rule needs training instances");
  Session session(F, params, dom, vocab);
  return session.learn_rule_public(consistent);
}

DecisionList learn_decision_list(std::span<const TrainingInstance> F,
                                 const LearnerParams& params,
                                 const DomainDef& dom,
                                 const ConceptVocab& vocab, LearnStats* stats) {
  check_params(params);
  if (F.empty()) return DecisionList{};
  Session session(F, params, dom, vocab);
  return session.learn_list(stats);
}

Ensemble bag_learn(std::span<const TrainingInstance> F,
                   const LearnerParams& params, const BagParams& bag, Rng& rng,
                   const DomainDef& dom, const ConceptVocab& vocab, int jobs) {
  check_params(params);
  if (bag.ensemble_size < 1 || bag.sample_size < 1)
    throw ValidationError("bagging parameters must be at least 1");
  if (F.empty()) throw ValidationError("bagging needs training instances");
  Ensemble e;
  e.members.resize(bag.ensemble_size);
  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= bag.ensemble_size) return;
      Rng member_rng = rng.child("bag-member", uint64_t(i));
      std::vector<TrainingInstance> sample;
      sample.reserve(bag.sample_size);
      for (int m = 0; m < bag.sample_size; ++m)
        sample.push_back(F[member_rng.uniform_int(F.size())]);
      e.members[i] = learn_decision_list(sample, params, dom, vocab);
    }
  };
  int workers = std::max(1, std::min(jobs, bag.ensemble_size));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return e;
}

// --- Training file I/O -----------------------------------------------------------

std::vector<TrainingInstance> parse_training_jsonl(const DomainDef& dom,
                                                   std::string_view text) {
  std::vector<TrainingInstance> out;
  size_t lineno = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& ex) {
      throw ParseError("bad training line: " + std::string(ex.what()),
                       int(lineno));
    }
    try {
      TrainingInstance inst;
      auto names = std::make_shared<std::vector<std::string>>();
      for (const auto& o : j.at("state").at("objects"))
        names->push_back(o.get<std::string>());
      inst.state.num_objects = uint32_t(names->size());
      inst.state.names = std::move(names);
      for (const auto& f : j.at("state").at("facts"))
        inst.state.insert(parse_fact(dom, inst.state, f.get<std::string>()));
      validate_state(inst.state, dom);
      for (const auto& a : j.at("optimal"))
        inst.optimal.push_back(
            parse_action(dom, inst.state, a.get<std::string>()));
      std::sort(inst.optimal.begin(), inst.optimal.end(),
                [&dom](const GroundAction& x, const GroundAction& y) {
                  return action_less(dom, x, y);
                });
      out.push_back(std::move(inst));
    } catch (const Error& ex) {
      throw ParseError("training line " + std::to_string(lineno) + ": " +
                       ex.what());
    }
  }
  return out;
}

std::string training_to_jsonl(const DomainDef& dom,
                              std::span<const TrainingInstance> F) {
  std::string out;
  for (const TrainingInstance& f : F) {
    nlohmann::json j;
    nlohmann::json objs = nlohmann::json::array();
    for (ObjId o = 0; o < f.state.num_objects; ++o)
      objs.push_back(f.state.object_name(o));
    nlohmann::json facts = nlohmann::json::array();
    for (FactKey k : f.state.facts)
      facts.push_back(fact_to_string(dom, f.state, k));
    j["state"] = {{"objects", objs}, {"facts", facts}};
    nlohmann::json opt = nlohmann::json::array();
    for (const GroundAction& a : f.optimal)
      opt.push_back(action_to_string(dom, f.state, a));
    j["optimal"] = opt;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace relpol
