#pragma once

#include <functional>
#include <optional>
#include <string>

#include "relpol/domains.hpp"
#include "relpol/learner.hpp"
#include "relpol/solver.hpp"

namespace relpol {

struct TrainConfig {
  std::string domain;
  ProblemSize size;
  int trajectories = 1;  // t
  int horizon = 1;       // h
  uint64_t seed = 0;
  double gamma = 0.95;
  double tie_epsilon = 1e-9;
  uint64_t node_budget = SolverParams{}.node_budget;
};

struct TrainResult {
  std::vector<TrainingInstance> instances;
  int skipped_unsolvable = 0;  // sampled initial states with zero value
};

// Solves t sampled problems and records <state, all-optimal-actions> pairs
// along one sampled optimal trajectory each (re-solving every step at the
// full horizon; within a trajectory the value table is reused while the
// reachable space is unchanged, which cannot alter the action sets).
// Duplicate instances are recorded once.
TrainResult generate_training(const TrainConfig& cfg, int jobs = 1);

struct EvalConfig {
  std::string domain;
  ProblemSize size;
  int episodes = 1000;
  int horizon = 1;  // e
  uint64_t seed = 0;
};

struct EpisodeResult {
  bool success = false;
  int steps = 0;
};

// Runs the policy from q0 until a goal state, a dead end, or e executed
// actions.
EpisodeResult run_episode(const Policy& pol, const DomainDef& dom,
                          const ConceptVocab& vocab, const State& q0, int e,
                          Rng& rng);

struct EvalResult {
  double phi = 0.0;                  // success fraction
  std::optional<double> psi;         // mean successful length; empty if none
  int episodes = 0;
  std::vector<EpisodeResult> log;    // filled when keep_log
};

EvalResult evaluate(const Policy& pol, const DomainDef& dom,
                    const ConceptVocab& vocab, const EvalConfig& cfg,
                    int jobs = 1, bool keep_log = false);

struct ExperimentConfig {
  TrainConfig train;
  LearnerParams learner;
  std::optional<BagParams> bag;
  EvalConfig eval;
  int trials = 1;
  uint64_t seed = 0;
  bool fixed_test_set = false;  // reuse one test draw across trials
};

struct TrialOutcome {
  double phi = 0.0;
  std::optional<double> psi;
};

struct ResultRow {
  double phi = 0.0;
  std::optional<double> psi;
  int trials = 0;
  std::vector<TrialOutcome> per_trial;
};

// Called after each trial with the trial index, the learned policy and its
// outcome (e.g. to retain artifacts).
using TrialSink =
    std::function<void(int, const Policy&, const TrialOutcome&)>;

// Per trial: fresh training set, fresh policy, fresh test draw (unless
// fixed_test_set), all from named child streams of the master seed.
ResultRow run_experiment(const ExperimentConfig& cfg, int jobs = 1,
                         const TrialSink& sink = {});

// Flat key=value config files (see share/configs).
ExperimentConfig parse_experiment_config(std::string_view text);

std::string result_row_json(const ResultRow& row);
std::string result_row_csv(const ExperimentConfig& cfg, const ResultRow& row);

}  // namespace relpol
