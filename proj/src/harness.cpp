#include "relpol/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "json.hpp"

namespace relpol {

namespace {

// index-ordered parallel loop; results must be written into per-index slots
template <typename F>
void parallel_for(int n, int jobs, F&& body) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
}

struct Trajectory {
  std::vector<TrainingInstance> instances;
  bool skipped = false;
};

Trajectory run_trajectory(const TrainConfig& cfg, const DomainDef& dom,
                          uint64_t index) {
  Trajectory out;
  Rng rng(Rng::derive(cfg.seed, "trajectory", index));
  State q = sample_problem({cfg.domain, cfg.size}, rng);

  SolverParams sp;
  sp.horizon = cfg.horizon;
  sp.gamma = cfg.gamma;
  sp.tie_epsilon = cfg.tie_epsilon;
  sp.node_budget = cfg.node_budget;

  StateGraph graph(dom);
  ValueTable table;
  uint64_t table_version = ~uint64_t(0);

  for (int step = 0; step < cfg.horizon; ++step) {
    if (is_goal(q, dom)) break;
    graph.ensure_expanded(q, cfg.horizon, cfg.node_budget);
    if (graph.version() != table_version) {
      table = value_iterate(graph, sp);
      table_version = graph.version();
    }
    uint32_t ix = *graph.find(q);
    if (table.value(cfg.horizon, ix) <= 0.0) {
      // goal unreachable within the horizon from here
      if (step == 0) out.skipped = true;
      break;
    }
    std::vector<GroundAction> alpha = optimal_actions(q, graph, table, sp);
    out.instances.push_back({q, alpha});
    const GroundAction& act = alpha[rng.uniform_int(alpha.size())];
    q = sample_transition(q, dom, act, rng);
  }
  return out;
}

}  // namespace

TrainResult generate_training(const TrainConfig& cfg, int jobs) {
  if (cfg.trajectories < 1 || cfg.horizon < 1)
    throw ValidationError("trajectory count and horizon must be at least 1");
  const DomainDef& dom = builtin_domain(cfg.domain);

  std::vector<Trajectory> trajs(cfg.trajectories);
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  parallel_for(cfg.trajectories, jobs, [&](int i) {
    if (failed.load()) return;
    try {
      trajs[i] = run_trajectory(cfg, dom, uint64_t(i));
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  TrainResult result;
  std::unordered_set<std::string> seen;
  for (const Trajectory& t : trajs) {
    if (t.skipped) ++result.skipped_unsolvable;
    for (const TrainingInstance& inst : t.instances) {
      std::string key = print_state(dom, inst.state);
      if (seen.insert(std::move(key)).second)
        result.instances.push_back(inst);
    }
  }
  return result;
}

EpisodeResult run_episode(const Policy& pol, const DomainDef& dom,
                          const ConceptVocab& vocab, const State& q0, int e,
                          Rng& rng) {
  if (e < 1) throw ValidationError("episode horizon must be at least 1");
  State q = q0;
  int steps = 0;
  for (;;) {
    if (is_goal(q, dom)) return {true, steps};
    if (steps >= e) return {false, steps};
    EvalContext ctx(dom, q, &vocab);
    auto act = policy_act(pol, ctx);
    if (!act) return {false, steps};  // dead end
    q = sample_transition(q, dom, *act, rng);
    ++steps;
  }
}

EvalResult evaluate(const Policy& pol, const DomainDef& dom,
                    const ConceptVocab& vocab, const EvalConfig& cfg, int jobs,
                    bool keep_log) {
  if (cfg.episodes < 1) throw ValidationError("episode count must be at least 1");
  std::vector<EpisodeResult> results(cfg.episodes);
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  parallel_for(cfg.episodes, jobs, [&](int i) {
    if (failed.load()) return;
    try {
      Rng draw_rng(Rng::derive(cfg.seed, "episode-init", uint64_t(i)));
      State q0 = sample_problem({cfg.domain, cfg.size}, draw_rng);
      Rng ep_rng(Rng::derive(cfg.seed, "episode-run", uint64_t(i)));
      results[i] = run_episode(pol, dom, vocab, q0, cfg.horizon, ep_rng);
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  EvalResult out;
  out.episodes = cfg.episodes;
  int successes = 0;
  long long step_sum = 0;
  for (const EpisodeResult& r : results) {
    if (r.success) {
      ++successes;
      step_sum += r.steps;
    }
  }
  out.phi = double(successes) / double(cfg.episodes);
  if (successes > 0) out.psi = double(step_sum) / double(successes);
  if (keep_log) out.log = std::move(results);
  return out;
}

ResultRow run_experiment(const ExperimentConfig& cfg, int jobs,
                         const TrialSink& sink) {
  if (cfg.trials < 1) throw ValidationError("trial count must be at least 1");
  const DomainDef& dom = builtin_domain(cfg.train.domain);
  ConceptVocab vocab(dom);

  ResultRow row;
  row.trials = cfg.trials;
  for (int tr = 0; tr < cfg.trials; ++tr) {
    TrainConfig train = cfg.train;
    train.seed = Rng::derive(cfg.seed, "train", uint64_t(tr));
    TrainResult data = generate_training(train, jobs);
    if (data.instances.empty())
      throw ValidationError("trial " + std::to_string(tr) +
                            " produced an empty training set");

    Policy pol;
    if (cfg.bag) {
      Rng learn_rng(Rng::derive(cfg.seed, "learn", uint64_t(tr)));
      pol = bag_learn(data.instances, cfg.learner, *cfg.bag, learn_rng, dom,
                      vocab, jobs);
    } else {
      pol = learn_decision_list(data.instances, cfg.learner, dom, vocab);
    }

    EvalConfig ev = cfg.eval;
    ev.seed = cfg.fixed_test_set ? Rng::derive(cfg.seed, "eval-fixed")
                                 : Rng::derive(cfg.seed, "eval", uint64_t(tr));
    EvalResult res = evaluate(pol, dom, vocab, ev, jobs);
    row.per_trial.push_back({res.phi, res.psi});
    if (sink) sink(tr, pol, row.per_trial.back());
  }

  double phi_sum = 0.0, psi_sum = 0.0;
  int psi_count = 0;
  for (const TrialOutcome& t : row.per_trial) {
    phi_sum += t.phi;
    if (t.psi) {
      psi_sum += *t.psi;
      ++psi_count;
    }
  }
  row.phi = phi_sum / double(cfg.trials);
  if (psi_count > 0) row.psi = psi_sum / double(psi_count);
  return row;
}

// --- Config files and result formatting ----------------------------------------

ExperimentConfig parse_experiment_config(std::string_view text) {
  std::map<std::string, std::string> kv;
  size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
      if (eol == text.size()) break;
      continue;
    }
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key=value", lineno);
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    if (!kv.emplace(key, val).second)
      throw ParseError("duplicate key '" + key + "'", lineno);
    if (eol == text.size()) break;
  }

  auto require = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("missing config key '" + key + "'");
    return it->second;
  };
  auto get_int = [&](const std::string& key) {
    const std::string& s = require(key);
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ParseError("bad integer for '" + key + "': " + s);
    return v;
  };
  auto get_u64 = [&](const std::string& key) {
    const std::string& s = require(key);
    uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ParseError("bad integer for '" + key + "': " + s);
    return v;
  };

  ExperimentConfig cfg;
  cfg.train.domain = require("domain");
  cfg.train.size = parse_size(require("train_size"));
  cfg.train.trajectories = get_int("trajectories");
  cfg.train.horizon = get_int("train_horizon");
  if (kv.count("gamma")) cfg.train.gamma = std::stod(kv["gamma"]);
  if (kv.count("tie_epsilon")) cfg.train.tie_epsilon = std::stod(kv["tie_epsilon"]);
  if (kv.count("node_budget")) cfg.train.node_budget = get_u64("node_budget");
  cfg.learner.depth = get_int("depth");
  cfg.learner.width = get_int("width");
  cfg.learner.beam = get_int("beam");
  if (kv.count("bag")) {
    BagParams bag;
    bag.ensemble_size = get_int("bag");
    bag.sample_size = get_int("sample");
    cfg.bag = bag;
  } else if (kv.count("sample")) {
    throw ParseError("'sample' requires 'bag'");
  }
  cfg.eval.domain = cfg.train.domain;
  cfg.eval.size = parse_size(require("eval_size"));
  cfg.eval.episodes = get_int("episodes");
  cfg.eval.horizon = get_int("eval_horizon");
  cfg.trials = get_int("trials");
  cfg.seed = get_u64("seed");
  if (kv.count("fixed_test")) cfg.fixed_test_set = kv["fixed_test"] == "1";

  static const std::unordered_set<std::string> known = {
      "domain",      "train_size",  "trajectories", "train_horizon",
      "gamma",       "tie_epsilon", "node_budget",  "depth",
      "width",       "beam",        "bag",          "sample",
      "eval_size",   "episodes",    "eval_horizon", "trials",
      "seed",        "fixed_test"};
  for (const auto& [key, val] : kv)
    if (!known.count(key)) throw ParseError("unknown config key '" + key + "'");
  return cfg;
}

namespace {

nlohmann::json trial_json(const TrialOutcome& t) {
  nlohmann::json j;
  j["phi"] = t.phi;
  if (t.psi)
    j["psi"] = *t.psi;
  else
    j["psi"] = nullptr;
  return j;
}

}  // namespace

std::string result_row_json(const ResultRow& row) {
  nlohmann::json j;
  j["phi"] = row.phi;
  if (row.psi)
    j["psi"] = *row.psi;
  else
    j["psi"] = nullptr;
  j["trials"] = row.trials;
  nlohmann::json per = nlohmann::json::array();
  for (const TrialOutcome& t : row.per_trial) per.push_back(trial_json(t));
  j["per_trial"] = per;
  return j.dump();
}

std::string result_row_csv(const ExperimentConfig& cfg, const ResultRow& row) {
  std::ostringstream os;
  os << "domain,mode,trials,phi,psi\n";
  os << cfg.train.domain << ','
     << (cfg.bag ? "bag-Z" + std::to_string(cfg.bag->ensemble_size)
                 : "t=" + std::to_string(cfg.train.trajectories))
     << ',' << row.trials << ',' << row.phi << ',';
  if (row.psi) os << *row.psi;
  os << "\n";
  return os.str();
}

}  // namespace relpol
