#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "relpol/pstrips.hpp"
#include "relpol/rng.hpp"

namespace relpol {

using BigInt = boost::multiprecision::cpp_int;

// Built-in benchmark domains: bw1, bw2, pw1, pw2, lw1, lw2, plus bwdet
// (the deterministic blocks world used for the head-to-head comparison
// experiment — bw1 without faststack).
const std::vector<std::string>& builtin_domain_names();
bool is_builtin_domain(std::string_view name);
// Source text of the built-in domain file (also shipped under share/domains).
const std::string& builtin_domain_source(std::string_view name);
// Parsed definition; cached, one instance per name.
const DomainDef& builtin_domain(std::string_view name);

// Per-component inclusive size ranges; a fixed size is lo == hi. Blocks
// worlds use one component (block count); logistics uses four (cities,
// cars, trucks, packages).
struct ProblemSize {
  struct Range {
    int lo = 1, hi = 1;
  };
  std::vector<Range> components;
};

// "6", "2-4" or "1-2,2,2,3".
ProblemSize parse_size(std::string_view text);
std::string size_to_string(const ProblemSize& size);

struct GeneratorSpec {
  std::string domain;  // built-in name
  ProblemSize size;
};

// Number of distinct arm-empty configurations of n labeled blocks
// (partitions of the blocks into ordered towers).
BigInt count_bw_states(int n);

// Towers bottom-to-top; exactly uniform over the count_bw_states(n)
// configurations.
using BwConfig = std::vector<std::vector<uint32_t>>;
BwConfig uniform_bw_state(int n, Rng& rng);

// Draws an initial state (with goal facts) from the domain's problem
// distribution at the given size.
State sample_problem(const GeneratorSpec& spec, Rng& rng);

}  // namespace relpol
