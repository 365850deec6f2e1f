// relpol command-line front end: gen-data, learn, eval, experiment,
// inspect, domains. Machine output goes to stdout, diagnostics to stderr.
// Exit codes: 2 bad flags, 3 input parse/validation error, 4 solver
// resource limit, 5 empty training set, 6 policy parse error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "relpol/harness.hpp"
#include "relpol/sexpr.hpp"

namespace fs = std::filesystem;
using namespace relpol;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitResource = 4;
constexpr int kExitEmptyTrain = 5;
constexpr int kExitPolicyParse = 6;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << content;
}

// A domain argument is a built-in name or a path to a domain file.
const DomainDef& load_domain(const std::string& arg,
                             std::optional<DomainDef>& storage) {
  if (is_builtin_domain(arg)) return builtin_domain(arg);
  storage = parse_domain(read_file(arg));
  return *storage;
}

int cmd_gen_data(const std::string& domain, const std::string& size_str,
                 int trajectories, int horizon, uint64_t seed, double gamma,
                 double tie_eps, uint64_t node_budget, const std::string& out,
                 int jobs) {
  TrainConfig cfg;
  cfg.domain = domain;
  cfg.size = parse_size(size_str);
  cfg.trajectories = trajectories;
  cfg.horizon = horizon;
  cfg.seed = seed;
  cfg.gamma = gamma;
  cfg.tie_epsilon = tie_eps;
  cfg.node_budget = node_budget;

  const DomainDef& dom = builtin_domain(domain);
  TrainResult result = generate_training(cfg, jobs);
  write_file(out, training_to_jsonl(dom, result.instances));

  nlohmann::json meta;
  meta["domain"] = domain;
  meta["size"] = size_to_string(cfg.size);
  meta["trajectories"] = trajectories;
  meta["horizon"] = horizon;
  meta["seed"] = seed;
  meta["gamma"] = gamma;
  meta["tie_epsilon"] = tie_eps;
  meta["node_budget"] = node_budget;
  meta["instances"] = result.instances.size();
  meta["skipped_unsolvable"] = result.skipped_unsolvable;
  write_file(out + ".meta.json", meta.dump() + "\n");

  std::cerr << "wrote " << result.instances.size() << " instances to " << out
            << " (" << result.skipped_unsolvable << " unsolvable starts skipped)\n";
  return 0;
}

int cmd_learn(const std::string& train_path, std::string domain_arg, int depth,
              int width, int beam, int bag, int sample, uint64_t seed,
              const std::string& out, int jobs) {
  if (domain_arg.empty()) {
    // fall back to the sidecar metadata written by gen-data
    std::string meta_path = train_path + ".meta.json";
    std::ifstream meta_in(meta_path);
    if (!meta_in)
      throw ParseError("no --domain given and no sidecar at '" + meta_path + "'");
    nlohmann::json meta = nlohmann::json::parse(meta_in);
    domain_arg = meta.at("domain").get<std::string>();
  }
  std::optional<DomainDef> storage;
  const DomainDef& dom = load_domain(domain_arg, storage);
  ConceptVocab vocab(dom);

  std::vector<TrainingInstance> F =
      parse_training_jsonl(dom, read_file(train_path));
  if (F.empty()) {
    std::cerr << "error: training set '" << train_path << "' is empty\n";
    return kExitEmptyTrain;
  }

  LearnerParams params{depth, width, beam};
  Policy pol;
  if (bag > 0) {
    Rng rng(seed);
    pol = bag_learn(F, params, BagParams{bag, sample}, rng, dom, vocab, jobs);
  } else {
    pol = learn_decision_list(F, params, dom, vocab);
  }
  write_file(out, print_policy(pol, dom));
  std::cerr << "wrote policy to " << out << "\n";
  return 0;
}

int cmd_eval(const std::string& policy_path, const std::string& domain,
             const std::string& size_str, int episodes, int horizon,
             uint64_t seed, bool verbose, int jobs) {
  const DomainDef& dom = builtin_domain(domain);
  ConceptVocab vocab(dom);
  Policy pol;
  try {
    pol = parse_policy(read_file(policy_path), dom, vocab);
  } catch (const Error& ex) {
    std::cerr << "error: policy '" << policy_path << "': " << ex.what() << "\n";
    return kExitPolicyParse;
  }

  EvalConfig cfg;
  cfg.domain = domain;
  cfg.size = parse_size(size_str);
  cfg.episodes = episodes;
  cfg.horizon = horizon;
  cfg.seed = seed;
  EvalResult res = evaluate(pol, dom, vocab, cfg, jobs, verbose);

  nlohmann::json j;
  j["phi"] = res.phi;
  if (res.psi)
    j["psi"] = *res.psi;
  else
    j["psi"] = nullptr;
  if (verbose) {
    nlohmann::json eps = nlohmann::json::array();
    for (const EpisodeResult& r : res.log)
      eps.push_back({{"success", r.success}, {"steps", r.steps}});
    j["episodes"] = eps;
  }
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir,
                   const std::string& csv_path, int jobs) {
  ExperimentConfig cfg = parse_experiment_config(read_file(config_path));
  const DomainDef& dom = builtin_domain(cfg.train.domain);

  TrialSink sink;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    sink = [&](int trial, const Policy& pol, const TrialOutcome& outcome) {
      write_file(out_dir + "/policy-" + std::to_string(trial) + ".sexp",
                 print_policy(pol, dom));
      nlohmann::json j;
      j["trial"] = trial;
      j["phi"] = outcome.phi;
      if (outcome.psi)
        j["psi"] = *outcome.psi;
      else
        j["psi"] = nullptr;
      write_file(out_dir + "/trial-" + std::to_string(trial) + ".json",
                 j.dump() + "\n");
    };
  }

  ResultRow row = run_experiment(cfg, jobs, sink);
  std::cout << result_row_json(row) << "\n";
  if (!csv_path.empty()) write_file(csv_path, result_row_csv(cfg, row));
  if (!out_dir.empty())
    write_file(out_dir + "/result.json", result_row_json(row) + "\n");
  return 0;
}

int cmd_inspect(const std::string& path, const std::string& domain_arg) {
  std::string text = read_file(path);
  auto first = text.find_first_not_of(" \t\r\n;");
  // s-expression files: sniff the head symbol
  std::string head;
  if (first != std::string::npos && text[first] == '(') {
    SExpr form = parse_sexpr(text);
    head = std::string(form.head());
  }
  if (head == "domain") {
    DomainDef dom = parse_domain(text);
    ConceptVocab vocab(dom);  // validates derived definitions
    std::cout << print_domain(dom);
    return 0;
  }
  if (domain_arg.empty())
    throw ParseError("--domain is required to inspect '" + path + "'");
  std::optional<DomainDef> storage;
  const DomainDef& dom = load_domain(domain_arg, storage);
  ConceptVocab vocab(dom);
  if (head == "policy" || head == "ensemble") {
    try {
      std::cout << print_policy(parse_policy(text, dom, vocab), dom);
    } catch (const Error& ex) {
      std::cerr << "error: " << ex.what() << "\n";
      return kExitPolicyParse;
    }
    return 0;
  }
  if (head == "state") {
    std::cout << print_state(dom, parse_state(dom, text)) << "\n";
    return 0;
  }
  // otherwise treat as a JSON-lines training file
  std::cout << training_to_jsonl(dom, parse_training_jsonl(dom, text));
  return 0;
}

int cmd_domains(const std::string& name) {
  if (name.empty()) {
    for (const std::string& n : builtin_domain_names())
      std::cout << n << "\n";
    return 0;
  }
  std::cout << builtin_domain_source(name);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalizing policy learning for relational planning problems"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand(
      "gen-data", "Solve sampled problems and write a training set");
  std::string g_domain, g_size, g_out;
  int g_traj = 0, g_horizon = 0, g_jobs = 1;
  uint64_t g_seed = 0, g_budget = SolverParams{}.node_budget;
  double g_gamma = 0.95, g_tie = 1e-9;
  gen->add_option("--domain", g_domain, "Built-in domain name")->required();
  gen->add_option("--size", g_size, "Problem size (e.g. 6 or 1-2,2,2,3)")
      ->required();
  gen->add_option("--trajectories", g_traj, "Number of sampled problems")
      ->required()
      ->check(CLI::PositiveNumber);
  gen->add_option("--horizon", g_horizon, "Solver horizon")
      ->required()
      ->check(CLI::PositiveNumber);
  gen->add_option("--seed", g_seed, "Random seed")->required();
  gen->add_option("--gamma", g_gamma, "Discount factor");
  gen->add_option("--tie-eps", g_tie, "Optimal-action tie tolerance");
  gen->add_option("--node-budget", g_budget, "State-step budget");
  gen->add_option("--jobs", g_jobs, "Worker threads");
  gen->add_option("-o,--out", g_out, "Output JSONL path")->required();

  // learn
  auto* learn = app.add_subcommand("learn", "Induce a policy from a training set");
  std::string l_train, l_domain, l_out;
  int l_depth = 0, l_width = 0, l_beam = 0, l_bag = 0, l_sample = 0, l_jobs = 1;
  uint64_t l_seed = 0;
  learn->add_option("--train", l_train, "Training JSONL path")->required();
  learn->add_option("--domain", l_domain,
                    "Domain (built-in name or file; default: sidecar)");
  learn->add_option("--depth", l_depth, "Concept depth d")
      ->required()
      ->check(CLI::PositiveNumber);
  learn->add_option("--width", l_width, "Concept width w")
      ->required()
      ->check(CLI::PositiveNumber);
  learn->add_option("--beam", l_beam, "Beam width b")
      ->required()
      ->check(CLI::PositiveNumber);
  auto* bag_opt =
      learn->add_option("--bag", l_bag, "Ensemble size Z")->check(CLI::PositiveNumber);
  auto* sample_opt = learn->add_option("--sample", l_sample, "Bootstrap sample size M")
      ->check(CLI::PositiveNumber)
      ->needs(bag_opt);
  bag_opt->needs(sample_opt);
  learn->add_option("--seed", l_seed, "Random seed (required with --bag)");
  learn->add_option("--jobs", l_jobs, "Worker threads");
  learn->add_option("-o,--out", l_out, "Output policy path")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a policy file");
  std::string e_policy, e_domain, e_size;
  int e_episodes = 1000, e_horizon = 0, e_jobs = 1;
  uint64_t e_seed = 0;
  bool e_verbose = false;
  ev->add_option("--policy", e_policy, "Policy file")->required();
  ev->add_option("--domain", e_domain, "Built-in domain name")->required();
  ev->add_option("--size", e_size, "Test problem size")->required();
  ev->add_option("--episodes", e_episodes, "Episode count")
      ->check(CLI::PositiveNumber);
  ev->add_option("--horizon", e_horizon, "Evaluation horizon e")
      ->required()
      ->check(CLI::PositiveNumber);
  ev->add_option("--seed", e_seed, "Random seed")->required();
  ev->add_flag("-v,--verbose", e_verbose, "Include per-episode results");
  ev->add_option("--jobs", e_jobs, "Worker threads");

  // experiment
  auto* ex = app.add_subcommand("experiment", "Run a multi-trial experiment");
  std::string x_config, x_out, x_csv;
  int x_jobs = 1;
  ex->add_option("config", x_config, "key=value config file")->required();
  ex->add_option("--out", x_out, "Directory for per-trial artifacts");
  ex->add_option("--csv", x_csv, "Write a CSV summary row to this path");
  ex->add_option("--jobs", x_jobs, "Worker threads");

  // inspect
  auto* ins = app.add_subcommand("inspect", "Parse and canonically reprint a file");
  std::string i_path, i_domain;
  ins->add_option("file", i_path, "domain/policy/state/training file")->required();
  ins->add_option("--domain", i_domain, "Domain for non-domain files");

  // domains
  auto* doms = app.add_subcommand("domains", "Print built-in domain files");
  std::string d_name;
  doms->add_option("name", d_name, "Domain name (omit to list)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen)
      return cmd_gen_data(g_domain, g_size, g_traj, g_horizon, g_seed, g_gamma,
                          g_tie, g_budget, g_out, g_jobs);
    if (*learn) {
      if (l_bag > 0 && learn->count("--seed") == 0) {
        std::cerr << "error: --bag requires --seed\n";
        return kExitUsage;
      }
      return cmd_learn(l_train, l_domain, l_depth, l_width, l_beam, l_bag,
                       l_sample, l_seed, l_out, l_jobs);
    }
    if (*ev)
      return cmd_eval(e_policy, e_domain, e_size, e_episodes, e_horizon, e_seed,
                      e_verbose, e_jobs);
    if (*ex) return cmd_experiment(x_config, x_out, x_csv, x_jobs);
    if (*ins) return cmd_inspect(i_path, i_domain);
    if (*doms) return cmd_domains(d_name);
  } catch (const ResourceError& ex2) {
    std::cerr << "error: " << ex2.what() << "\n";
    return kExitResource;
  } catch (const Error& ex2) {
    std::cerr << "error: " << ex2.what() << "\n";
    return kExitParse;
  } catch (const std::exception& ex2) {
    std::cerr << "error: " << ex2.what() << "\n";
    return kExitParse;
  }
  return 0;
}
