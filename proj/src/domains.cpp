#include "relpol/domains.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

namespace relpol {

// --- Built-in domain files ----------------------------------------------------
//
// The paper-style operator prose is pinned down here once; these strings are
// also what `relpol domains` prints and what ships under share/domains.

namespace {

const char* kBw1 = R"((domain bw1
  ;; Blocks world with a gripper. Goal facts are gon/gon-table atoms.
  ;; faststack moves a table block directly onto the block it belongs on
  ;; (from the goal), succeeding with probability 0.8.
  (predicates (on 2) (on-table 1) (clear 1) (holding 1) (arm-empty 0))
  (action pick-up
    (params X)
    (pre (on-table X) (clear X) (arm-empty))
    (case (guard)
      (outcome 1 (add (holding X)) (del (on-table X) (clear X) (arm-empty)))))
  (action put-down
    (params X)
    (pre (holding X))
    (case (guard)
      (outcome 1 (add (on-table X) (clear X) (arm-empty)) (del (holding X)))))
  (action unstack
    (params X) (aux Y)
    (pre (on X Y) (clear X) (arm-empty))
    (case (guard)
      (outcome 1 (add (holding X) (clear Y)) (del (on X Y) (clear X) (arm-empty)))))
  (action stack
    ;; stack the held block onto clear block X
    (params X) (aux Y)
    (pre (clear X) (holding Y))
    (case (guard)
      (outcome 1 (add (on Y X) (clear Y) (arm-empty)) (del (clear X) (holding Y)))))
  (action faststack
    (params X) (aux Y)
    (pre (on-table X) (clear X) (arm-empty) (gon X Y) (clear Y))
    (case (guard)
      (outcome 0.8 (add (on X Y)) (del (on-table X) (clear Y)))
      (outcome 0.2 (add) (del)))))
)";

const char* kBwDet = R"((domain bwdet
  ;; Deterministic blocks world: bw1 without faststack. Used for the
  ;; head-to-head comparison against prior decision-list learners.
  (predicates (on 2) (on-table 1) (clear 1) (holding 1) (arm-empty 0))
  (action pick-up
    (params X)
    (pre (on-table X) (clear X) (arm-empty))
    (case (guard)
      (outcome 1 (add (holding X)) (del (on-table X) (clear X) (arm-empty)))))
  (action put-down
    (params X)
    (pre (holding X))
    (case (guard)
      (outcome 1 (add (on-table X) (clear X) (arm-empty)) (del (holding X)))))
  (action unstack
    (params X) (aux Y)
    (pre (on X Y) (clear X) (arm-empty))
    (case (guard)
      (outcome 1 (add (holding X) (clear Y)) (del (on X Y) (clear X) (arm-empty)))))
  (action stack
    (params X) (aux Y)
    (pre (clear X) (holding Y))
    (case (guard)
      (outcome 1 (add (on Y X) (clear Y) (arm-empty)) (del (clear X) (holding Y))))))
)";

const char* kBw2 = R"((domain bw2
  ;; As bw1, with block colors: faststack succeeds with 0.8 for black
  ;; blocks and 0.2 for gold blocks. Colors are static here.
  (predicates (on 2) (on-table 1) (clear 1) (holding 1) (arm-empty 0)
              (black 1) (gold 1))
  (action pick-up
    (params X)
    (pre (on-table X) (clear X) (arm-empty))
    (case (guard)
      (outcome 1 (add (holding X)) (del (on-table X) (clear X) (arm-empty)))))
  (action put-down
    (params X)
    (pre (holding X))
    (case (guard)
      (outcome 1 (add (on-table X) (clear X) (arm-empty)) (del (holding X)))))
  (action unstack
    (params X) (aux Y)
    (pre (on X Y) (clear X) (arm-empty))
    (case (guard)
      (outcome 1 (add (holding X) (clear Y)) (del (on X Y) (clear X) (arm-empty)))))
  (action stack
    (params X) (aux Y)
    (pre (clear X) (holding Y))
    (case (guard)
      (outcome 1 (add (on Y X) (clear Y) (arm-empty)) (del (clear X) (holding Y)))))
  (action faststack
    (params X) (aux Y)
    (pre (on-table X) (clear X) (arm-empty) (gon X Y) (clear Y))
    (case (guard (black X))
      (outcome 0.8 (add (on X Y)) (del (on-table X) (clear Y)))
      (outcome 0.2 (add) (del)))
    (case (guard (gold X))
      (outcome 0.2 (add (on X Y)) (del (on-table X) (clear Y)))
      (outcome 0.8 (add) (del)))))
)";

const char* kPw1 = R"((domain pw1
  ;; Paint world: no faststack; stack success depends on the held block's
  ;; color (0.8 black, 0.2 gold; not stated numerically in the source
  ;; material — fixed here); paint flips the held block's color half the
  ;; time.
  (predicates (on 2) (on-table 1) (clear 1) (holding 1) (arm-empty 0)
              (black 1) (gold 1))
  (action pick-up
    (params X)
    (pre (on-table X) (clear X) (arm-empty))
    (case (guard)
      (outcome 1 (add (holding X)) (del (on-table X) (clear X) (arm-empty)))))
  (action put-down
    (params X)
    (pre (holding X))
    (case (guard)
      (outcome 1 (add (on-table X) (clear X) (arm-empty)) (del (holding X)))))
  (action unstack
    (params X) (aux Y)
    (pre (on X Y) (clear X) (arm-empty))
    (case (guard)
      (outcome 1 (add (holding X) (clear Y)) (del (on X Y) (clear X) (arm-empty)))))
  (action stack
    (params X) (aux Y)
    (pre (clear X) (holding Y))
    (case (guard (black Y))
      (outcome 0.8 (add (on Y X) (clear Y) (arm-empty)) (del (clear X) (holding Y)))
      (outcome 0.2 (add) (del)))
    (case (guard (gold Y))
      (outcome 0.2 (add (on Y X) (clear Y) (arm-empty)) (del (clear X) (holding Y)))
      (outcome 0.8 (add) (del))))
  (action paint
    (params X)
    (pre (holding X))
    (case (guard (black X))
      (outcome 0.5 (add (gold X)) (del (black X)))
      (outcome 0.5 (add) (del)))
    (case (guard (gold X))
      (outcome 0.5 (add (black X)) (del (gold X)))
      (outcome 0.5 (add) (del)))))
)";

const char* kPw2 = R"((domain pw2
  ;; As pw1, but stack success also depends on the destination color: the
  ;; held-color rate (0.8 black / 0.2 gold) is halved onto gold
  ;; destinations.
  (predicates (on 2) (on-table 1) (clear 1) (holding 1) (arm-empty 0)
              (black 1) (gold 1))
  (action pick-up
    (params X)
    (pre (on-table X) (clear X) (arm-empty))
    (case (guard)
      (outcome 1 (add (holding X)) (del (on-table X) (clear X) (arm-empty)))))
  (action put-down
    (params X)
    (pre (holding X))
    (case (guard)
      (outcome 1 (add (on-table X) (clear X) (arm-empty)) (del (holding X)))))
  (action unstack
    (params X) (aux Y)
    (pre (on X Y) (clear X) (arm-empty))
    (case (guard)
      (outcome 1 (add (holding X) (clear Y)) (del (on X Y) (clear X) (arm-empty)))))
  (action stack
    (params X) (aux Y)
    (pre (clear X) (holding Y))
    (case (guard (black Y) (black X))
      (outcome 0.8 (add (on Y X) (clear Y) (arm-empty)) (del (clear X) (holding Y)))
      (outcome 0.2 (add) (del)))
    (case (guard (black Y) (gold X))
      (outcome 0.4 (add (on Y X) (clear Y) (arm-empty)) (del (clear X) (holding Y)))
      (outcome 0.6 (add) (del)))
    (case (guard (gold Y) (black X))
      (outcome 0.2 (add (on Y X) (clear Y) (arm-empty)) (del (clear X) (holding Y)))
      (outcome 0.8 (add) (del)))
    (case (guard (gold Y) (gold X))
      (outcome 0.1 (add (on Y X) (clear Y) (arm-empty)) (del (clear X) (holding Y)))
      (outcome 0.9 (add) (del))))
  (action paint
    (params X)
    (pre (holding X))
    (case (guard (black X))
      (outcome 0.5 (add (gold X)) (del (black X)))
      (outcome 0.5 (add) (del)))
    (case (guard (gold X))
      (outcome 0.5 (add (black X)) (del (gold X)))
      (outcome 0.5 (add) (del)))))
)";

const char* kLw1 = R"((domain lw1
  ;; Logistics. selected(.) marks the one vehicle the next action applies
  ;; to; load/unload move a package between the selected vehicle and its
  ;; city; drive moves the selected vehicle (success 0.9 for cars, 0.2 for
  ;; trucks). Goals are gin(package, city) facts only.
  (predicates (city 1) (package 1) (truck 1) (car 1) (in 2) (selected 1))
  (action select
    (params V) (aux W)
    (pre (truck V) (not (selected V)) (selected W))
    (case (guard) (outcome 1 (add (selected V)) (del (selected W)))))
  (action select
    (params V) (aux W)
    (pre (car V) (not (selected V)) (selected W))
    (case (guard) (outcome 1 (add (selected V)) (del (selected W)))))
  (action load
    (params P) (aux V C)
    (pre (package P) (selected V) (city C) (in V C) (in P C))
    (case (guard) (outcome 1 (add (in P V)) (del (in P C)))))
  (action unload
    (params P) (aux V C)
    (pre (package P) (selected V) (in P V) (city C) (in V C))
    (case (guard) (outcome 1 (add (in P C)) (del (in P V)))))
  (action drive
    (params C) (aux V C2)
    (pre (city C) (selected V) (city C2) (in V C2) (not (in V C)))
    (case (guard (truck V))
      (outcome 0.2 (add (in V C)) (del (in V C2)))
      (outcome 0.8 (add) (del)))
    (case (guard (car V))
      (outcome 0.9 (add (in V C)) (del (in V C2)))
      (outcome 0.1 (add) (del)))))
)";

const char* kLw2 = R"((domain lw2
  ;; As lw1 with static rain. Rain is read at the destination city: driving
  ;; into rain succeeds with 0.8 for trucks and 0.9 for cars; otherwise the
  ;; lw1 rates apply.
  (predicates (city 1) (package 1) (truck 1) (car 1) (in 2) (selected 1)
              (rain 1))
  (action select
    (params V) (aux W)
    (pre (truck V) (not (selected V)) (selected W))
    (case (guard) (outcome 1 (add (selected V)) (del (selected W)))))
  (action select
    (params V) (aux W)
    (pre (car V) (not (selected V)) (selected W))
    (case (guard) (outcome 1 (add (selected V)) (del (selected W)))))
  (action load
    (params P) (aux V C)
    (pre (package P) (selected V) (city C) (in V C) (in P C))
    (case (guard) (outcome 1 (add (in P V)) (del (in P C)))))
  (action unload
    (params P) (aux V C)
    (pre (package P) (selected V) (in P V) (city C) (in V C))
    (case (guard) (outcome 1 (add (in P C)) (del (in P V)))))
  (action drive
    (params C) (aux V C2)
    (pre (city C) (selected V) (city C2) (in V C2) (not (in V C)))
    (case (guard (truck V) (rain C))
      (outcome 0.8 (add (in V C)) (del (in V C2)))
      (outcome 0.2 (add) (del)))
    (case (guard (car V) (rain C))
      (outcome 0.9 (add (in V C)) (del (in V C2)))
      (outcome 0.1 (add) (del)))
    (case (guard (truck V))
      (outcome 0.2 (add (in V C)) (del (in V C2)))
      (outcome 0.8 (add) (del)))
    (case (guard (car V))
      (outcome 0.9 (add (in V C)) (del (in V C2)))
      (outcome 0.1 (add) (del)))))
)";

const std::map<std::string, const char*>& source_table() {
  static const std::map<std::string, const char*> table = {
      {"bw1", kBw1}, {"bw2", kBw2},   {"bwdet", kBwDet}, {"pw1", kPw1},
      {"pw2", kPw2}, {"lw1", kLw1},   {"lw2", kLw2}};
  return table;
}

}  // namespace

const std::vector<std::string>& builtin_domain_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, src] : source_table()) v.push_back(name);
    return v;
  }();
  return names;
}

bool is_builtin_domain(std::string_view name) {
  return source_table().count(std::string(name)) > 0;
}

const std::string& builtin_domain_source(std::string_view name) {
  static const auto* strings = new std::map<std::string, std::string>([] {
    std::map<std::string, std::string> m;
    for (const auto& [n, src] : source_table()) m.emplace(n, src);
    return m;
  }());
  auto it = strings->find(std::string(name));
  if (it == strings->end())
    throw ValidationError("unknown built-in domain '" + std::string(name) + "'");
  return it->second;
}

const DomainDef& builtin_domain(std::string_view name) {
  static const auto* defs = new std::map<std::string, DomainDef>([] {
    std::map<std::string, DomainDef> m;
    for (const auto& [n, src] : source_table()) m.emplace(n, parse_domain(src));
    return m;
  }());
  auto it = defs->find(std::string(name));
  if (it == defs->end())
    throw ValidationError("unknown built-in domain '" + std::string(name) + "'");
  return it->second;
}

// --- Problem sizes --------------------------------------------------------------

ProblemSize parse_size(std::string_view text) {
  ProblemSize size;
  size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    auto piece = comma == std::string_view::npos ? text.substr(start)
                                                 : text.substr(start, comma - start);
    auto dash = piece.find('-');
    ProblemSize::Range r;
    auto parse_int = [&](std::string_view s) {
      int v = 0;
      auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v < 0)
        throw ParseError("bad size component '" + std::string(piece) + "'");
      return v;
    };
    if (dash == std::string_view::npos) {
      r.lo = r.hi = parse_int(piece);
    } else {
      r.lo = parse_int(piece.substr(0, dash));
      r.hi = parse_int(piece.substr(dash + 1));
      if (r.hi < r.lo) throw ParseError("empty size range '" + std::string(piece) + "'");
    }
    size.components.push_back(r);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (size.components.empty()) throw ParseError("empty problem size");
  return size;
}

std::string size_to_string(const ProblemSize& size) {
  std::string s;
  for (size_t i = 0; i < size.components.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(size.components[i].lo);
    if (size.components[i].hi != size.components[i].lo)
      s += '-' + std::to_string(size.components[i].hi);
  }
  return s;
}

// --- Uniform blocks-world configurations ----------------------------------------
//
// A configuration is a partition of n labeled blocks into ordered towers.
// Configurations are built by inserting blocks in label order: block i can
// slot into any of the i + T positions inside the T existing towers or
// start a new tower, and every configuration arises from exactly one
// insertion sequence. N(i, T) counts completions from i placed blocks in T
// towers, giving both the exact count and an exactly uniform sampler when
// each choice is weighted by its completion count.

namespace {

// completions[i][T] for a fixed n; row i has entries T = 0..i.
std::vector<std::vector<BigInt>> completion_table(int n) {
  std::vector<std::vector<BigInt>> t(n + 1);
  for (int i = 0; i <= n; ++i) t[i].assign(i + 1, BigInt(0));
  for (int T = 0; T <= n; ++T) t[n][T] = 1;
  for (int i = n - 1; i >= 0; --i)
    for (int T = 0; T <= i; ++T)
      t[i][T] = BigInt(i + T) * t[i + 1][T] + t[i + 1][T + 1];
  return t;
}

BigInt uniform_big(Rng& rng, const BigInt& m) {
  if (m <= 1) return 0;
  BigInt hi = m - 1;
  unsigned bits = boost::multiprecision::msb(hi) + 1;
  unsigned words = (bits + 63) / 64;
  for (;;) {
    BigInt r = 0;
    for (unsigned w = 0; w < words; ++w) r = (r << 64) | rng.next_u64();
    r >>= (words * 64 - bits);
    if (r < m) return r;
  }
}

}  // namespace

BigInt count_bw_states(int n) {
  if (n < 0) throw ValidationError("block count must be non-negative");
  if (n == 0) return 1;
  return completion_table(n)[0][0];
}

BwConfig uniform_bw_state(int n, Rng& rng) {
  if (n < 1) throw ValidationError("block count must be positive");
  auto table = completion_table(n);
  BwConfig towers;
  for (uint32_t block = 0; block < uint32_t(n); ++block) {
    int i = int(block);
    int T = int(towers.size());
    BigInt existing = BigInt(i + T) * table[i + 1][T];
    BigInt r = uniform_big(rng, table[i][T]);
    if (r < existing) {
      auto slot = uint64_t(BigInt(r / table[i + 1][T]));
      for (auto& tower : towers) {
        if (slot <= tower.size()) {
          tower.insert(tower.begin() + slot, block);
          break;
        }
        slot -= tower.size() + 1;
      }
    } else {
      towers.push_back({block});
    }
  }
  return towers;
}

// --- Problem sampling -------------------------------------------------------------

namespace {

int draw_component(const ProblemSize::Range& r, Rng& rng) {
  return r.lo + int(rng.uniform_int(uint64_t(r.hi - r.lo + 1)));
}

struct BwPreds {
  PredId on, on_table, clear, holding, arm_empty, gon, gon_table;
  std::optional<PredId> black, gold;
};

BwPreds bw_preds(const DomainDef& dom) {
  BwPreds p;
  p.on = *dom.find_pred("on");
  p.on_table = *dom.find_pred("on-table");
  p.clear = *dom.find_pred("clear");
  p.holding = *dom.find_pred("holding");
  p.arm_empty = *dom.find_pred("arm-empty");
  p.gon = dom.goal_twin(p.on);
  p.gon_table = dom.goal_twin(p.on_table);
  p.black = dom.find_pred("black");
  p.gold = dom.find_pred("gold");
  return p;
}

State sample_bw_problem(const DomainDef& dom, int n, Rng& rng) {
  BwPreds p = bw_preds(dom);
  State q;
  q.num_objects = uint32_t(n);
  auto names = std::make_shared<std::vector<std::string>>();
  for (int i = 1; i <= n; ++i) names->push_back("b" + std::to_string(i));
  q.names = std::move(names);

  BwConfig init = uniform_bw_state(n, rng);
  BwConfig goal = uniform_bw_state(n, rng);
  for (const auto& tower : init) {
    q.insert(make_fact(p.on_table, tower.front()));
    q.insert(make_fact(p.clear, tower.back()));
    for (size_t i = 1; i < tower.size(); ++i)
      q.insert(make_fact(p.on, tower[i], tower[i - 1]));
  }
  q.insert(make_fact(p.arm_empty));
  for (const auto& tower : goal) {
    q.insert(make_fact(p.gon_table, tower.front()));
    for (size_t i = 1; i < tower.size(); ++i)
      q.insert(make_fact(p.gon, tower[i], tower[i - 1]));
  }
  if (p.black) {
    for (int b = 0; b < n; ++b)
      q.insert(make_fact(rng.coin() ? *p.black : *p.gold, ObjId(b)));
  }
  return q;
}

State sample_lw_problem(const DomainDef& dom, int cities, int cars, int trucks,
                        int pkgs, Rng& rng) {
  PredId p_city = *dom.find_pred("city");
  PredId p_package = *dom.find_pred("package");
  PredId p_truck = *dom.find_pred("truck");
  PredId p_car = *dom.find_pred("car");
  PredId p_in = *dom.find_pred("in");
  PredId p_selected = *dom.find_pred("selected");
  PredId p_gin = dom.goal_twin(p_in);
  auto p_rain = dom.find_pred("rain");

  State q;
  auto names = std::make_shared<std::vector<std::string>>();
  auto add_objs = [&names](const char* prefix, int count) {
    for (int i = 1; i <= count; ++i)
      names->push_back(prefix + std::to_string(i));
  };
  add_objs("city", cities);
  add_objs("car", cars);
  add_objs("truck", trucks);
  add_objs("pkg", pkgs);
  q.num_objects = uint32_t(names->size());
  q.names = std::move(names);

  auto city_obj = [&](int i) { return ObjId(i); };
  auto car_obj = [&](int i) { return ObjId(cities + i); };
  auto truck_obj = [&](int i) { return ObjId(cities + cars + i); };
  auto pkg_obj = [&](int i) { return ObjId(cities + cars + trucks + i); };
  int vehicles = cars + trucks;
  auto vehicle_obj = [&](int i) { return ObjId(cities + i); };

  for (int i = 0; i < cities; ++i) q.insert(make_fact(p_city, city_obj(i)));
  for (int i = 0; i < cars; ++i) q.insert(make_fact(p_car, car_obj(i)));
  for (int i = 0; i < trucks; ++i) q.insert(make_fact(p_truck, truck_obj(i)));
  for (int i = 0; i < pkgs; ++i) q.insert(make_fact(p_package, pkg_obj(i)));

  // vehicles uniform over cities
  for (int i = 0; i < vehicles; ++i)
    q.insert(make_fact(p_in, vehicle_obj(i),
                       city_obj(int(rng.uniform_int(uint64_t(cities))))));
  // packages uniform over vehicles and cities
  for (int i = 0; i < pkgs; ++i) {
    int place = int(rng.uniform_int(uint64_t(vehicles + cities)));
    ObjId where = place < vehicles ? vehicle_obj(place)
                                   : city_obj(place - vehicles);
    q.insert(make_fact(p_in, pkg_obj(i), where));
  }
  // one goal city per package, no other goal facts
  for (int i = 0; i < pkgs; ++i)
    q.insert(make_fact(p_gin, pkg_obj(i),
                       city_obj(int(rng.uniform_int(uint64_t(cities))))));
  // exactly one vehicle pre-selected
  if (vehicles > 0)
    q.insert(make_fact(p_selected,
                       vehicle_obj(int(rng.uniform_int(uint64_t(vehicles))))));
  if (p_rain) {
    for (int i = 0; i < cities; ++i)
      if (rng.coin()) q.insert(make_fact(*p_rain, city_obj(i)));
  }
  return q;
}

}  // namespace

State sample_problem(const GeneratorSpec& spec, Rng& rng) {
  const DomainDef& dom = builtin_domain(spec.domain);
  std::vector<int> dims;
  for (const auto& r : spec.size.components) dims.push_back(draw_component(r, rng));
  if (spec.domain == "lw1" || spec.domain == "lw2") {
    if (dims.size() != 4)
      throw ValidationError(
          "logistics sizes need 4 components: cities,cars,trucks,packages");
    if (dims[0] < 1) throw ValidationError("at least one city is required");
    return sample_lw_problem(dom, dims[0], dims[1], dims[2], dims[3], rng);
  }
  if (dims.size() != 1)
    throw ValidationError("blocks-world sizes have a single component");
  if (dims[0] < 1) throw ValidationError("at least one block is required");
  return sample_bw_problem(dom, dims[0], rng);
}

}  // namespace relpol
