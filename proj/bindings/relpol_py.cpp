// Python bindings for the main pipeline operations. The surface is
// intentionally string-oriented: domains, states, policies and training
// sets move through the same file formats the CLI uses.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "relpol/harness.hpp"

namespace py = pybind11;
using namespace relpol;

namespace {

struct PyDomain {
  // def lives behind a stable pointer so the vocabulary's reference
  // survives moves of this wrapper
  std::unique_ptr<DomainDef> def_ptr;
  std::unique_ptr<ConceptVocab> vocab;
  const DomainDef& def;

  explicit PyDomain(DomainDef d)
      : def_ptr(std::make_unique<DomainDef>(std::move(d))),
        vocab(std::make_unique<ConceptVocab>(*def_ptr)),
        def(*def_ptr) {}

  static PyDomain builtin(const std::string& name) {
    return PyDomain(builtin_domain(name));
  }
  static PyDomain from_text(const std::string& text) {
    return PyDomain(parse_domain(text));
  }
};

struct PyRng {
  Rng rng;
  explicit PyRng(uint64_t seed) : rng(seed) {}
};

py::int_ big_to_py(const BigInt& v) {
  std::string s = v.str();
  PyObject* obj = PyLong_FromString(s.c_str(), nullptr, 10);
  if (!obj) throw py::error_already_set();
  return py::reinterpret_steal<py::int_>(obj);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Generalizing policy learning for relational planning problems";

  py::register_exception<ResourceError>(m, "ResourceError");
  py::register_exception<Error>(m, "ToolkitError");

  py::class_<PyRng>(m, "Rng")
      .def(py::init<uint64_t>(), py::arg("seed"))
      .def("uniform", [](PyRng& r) { return r.rng.uniform01(); });

  py::class_<State>(m, "State");

  py::class_<PyDomain>(m, "Domain")
      .def_static("builtin", &PyDomain::builtin, py::arg("name"))
      .def_static("from_text", &PyDomain::from_text, py::arg("text"))
      .def_property_readonly("name",
                             [](const PyDomain& d) { return d.def.name; })
      .def_property_readonly("action_types",
                             [](const PyDomain& d) {
                               std::vector<std::string> out;
                               for (const auto& a : d.def.actions)
                                 out.push_back(a.name);
                               return out;
                             })
      .def_property_readonly("predicates",
                             [](const PyDomain& d) {
                               std::vector<std::pair<std::string, int>> out;
                               for (const auto& p : d.def.preds)
                                 out.emplace_back(p.name, p.arity);
                               return out;
                             })
      .def("source", [](const PyDomain& d) { return print_domain(d.def); })
      .def("parse_state",
           [](const PyDomain& d, const std::string& text) {
             return parse_state(d.def, text);
           })
      .def("print_state",
           [](const PyDomain& d, const State& q) {
             return print_state(d.def, q);
           })
      .def("is_goal",
           [](const PyDomain& d, const State& q) { return is_goal(q, d.def); })
      .def("legal_actions",
           [](const PyDomain& d, const State& q) {
             std::vector<std::string> out;
             for (const GroundAction& a : legal_actions(q, d.def))
               out.push_back(action_to_string(d.def, q, a));
             return out;
           })
      .def("apply",
           [](const PyDomain& d, const State& q, const std::string& action,
              int case_index, int outcome_index) {
             GroundAction a = parse_action(d.def, q, action);
             return apply_outcome(q, d.def, a, case_index, outcome_index);
           },
           py::arg("state"), py::arg("action"), py::arg("case_index") = 0,
           py::arg("outcome_index") = 0)
      .def("sample_transition",
           [](const PyDomain& d, const State& q, const std::string& action,
              PyRng& rng) {
             GroundAction a = parse_action(d.def, q, action);
             return sample_transition(q, d.def, a, rng.rng);
           })
      .def("eval_concept",
           [](const PyDomain& d, const std::string& concept_text,
              const State& q) {
             ClassExpr c = d.vocab->parse_class(concept_text);
             std::vector<std::string> out;
             for (ObjId o : eval_class(c, d.def, q, d.vocab.get()))
               out.push_back(q.object_name(o));
             return out;
           })
      .def("policy_act",
           [](const PyDomain& d, const std::string& policy_text,
              const State& q) -> std::optional<std::string> {
             Policy p = parse_policy(policy_text, d.def, *d.vocab);
             EvalContext ctx(d.def, q, d.vocab.get());
             auto act = policy_act(p, ctx);
             if (!act) return std::nullopt;
             return action_to_string(d.def, q, *act);
           });

  m.def("builtin_domains", [] { return builtin_domain_names(); });
  m.def(
      "count_bw_states",
      [](int n) { return big_to_py(count_bw_states(n)); }, py::arg("n"),
      "Number of distinct arm-empty blocks-world configurations");
  m.def(
      "uniform_bw_state",
      [](int n, PyRng& rng) { return uniform_bw_state(n, rng.rng); },
      py::arg("n"), py::arg("rng"));
  m.def(
      "sample_problem",
      [](const PyDomain& d, const std::string& size, PyRng& rng) {
        return sample_problem({d.def.name, parse_size(size)}, rng.rng);
      },
      py::arg("domain"), py::arg("size"), py::arg("rng"));

  m.def(
      "generate_training",
      [](const std::string& domain, const std::string& size, int trajectories,
         int horizon, uint64_t seed, double gamma, int jobs) {
        TrainConfig cfg;
        cfg.domain = domain;
        cfg.size = parse_size(size);
        cfg.trajectories = trajectories;
        cfg.horizon = horizon;
        cfg.seed = seed;
        cfg.gamma = gamma;
        TrainResult r = generate_training(cfg, jobs);
        return py::make_tuple(
            training_to_jsonl(builtin_domain(domain), r.instances),
            r.skipped_unsolvable);
      },
      py::arg("domain"), py::arg("size"), py::arg("trajectories"),
      py::arg("horizon"), py::arg("seed"), py::arg("gamma") = 0.95,
      py::arg("jobs") = 1,
      "Returns (training_jsonl, skipped_unsolvable)");

  m.def(
      "learn",
      [](const PyDomain& d, const std::string& training_jsonl, int depth,
         int width, int beam, std::optional<std::pair<int, int>> bag,
         uint64_t seed, int jobs) {
        auto F = parse_training_jsonl(d.def, training_jsonl);
        LearnerParams params{depth, width, beam};
        Policy pol;
        if (bag) {
          Rng rng(seed);
          pol = bag_learn(F, params, BagParams{bag->first, bag->second}, rng,
                          d.def, *d.vocab, jobs);
        } else {
          pol = learn_decision_list(F, params, d.def, *d.vocab);
        }
        return print_policy(pol, d.def);
      },
      py::arg("domain"), py::arg("training_jsonl"), py::arg("depth"),
      py::arg("width"), py::arg("beam"), py::arg("bag") = std::nullopt,
      py::arg("seed") = 0, py::arg("jobs") = 1,
      "Returns the learned policy file text; bag is (Z, M)");

  m.def(
      "evaluate",
      [](const PyDomain& d, const std::string& policy_text,
         const std::string& size, int episodes, int horizon, uint64_t seed,
         int jobs) {
        Policy pol = parse_policy(policy_text, d.def, *d.vocab);
        EvalConfig cfg;
        cfg.domain = d.def.name;
        cfg.size = parse_size(size);
        cfg.episodes = episodes;
        cfg.horizon = horizon;
        cfg.seed = seed;
        EvalResult r = evaluate(pol, d.def, *d.vocab, cfg, jobs);
        return py::make_tuple(r.phi, r.psi ? py::object(py::float_(*r.psi))
                                           : py::object(py::none()));
      },
      py::arg("domain"), py::arg("policy"), py::arg("size"),
      py::arg("episodes"), py::arg("horizon"), py::arg("seed"),
      py::arg("jobs") = 1, "Returns (phi, psi_or_None)");

  m.def(
      "run_experiment",
      [](const std::string& config_text, int jobs) {
        ResultRow row = run_experiment(parse_experiment_config(config_text), jobs);
        return result_row_json(row);
      },
      py::arg("config_text"), py::arg("jobs") = 1,
      "Runs a key=value experiment config; returns the result row as JSON");

  m.attr("__version__") = "0.1.0";
}
