#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "relpol/errors.hpp"

namespace relpol {

// Minimal s-expression reader shared by the domain, state, concept and
// policy file formats. Symbols are bare tokens; ';' starts a line comment.
struct SExpr {
  bool is_list = false;
  std::string sym;            // when !is_list
  std::vector<SExpr> items;   // when is_list
  int line = 0, col = 0;

  bool is_sym() const { return !is_list; }
  bool is_sym(std::string_view s) const { return !is_list && sym == s; }
  size_t size() const { return items.size(); }
  const SExpr& at(size_t i) const {
    if (!is_list || i >= items.size())
      throw ParseError("malformed expression", line, col);
    return items[i];
  }
  // First element as a keyword symbol, or "" if not a symbol-headed list.
  std::string_view head() const {
    if (is_list && !items.empty() && items[0].is_sym()) return items[0].sym;
    return {};
  }
};

// Parses every top-level form in the text.
std::vector<SExpr> parse_sexprs(std::string_view text);

// Parses exactly one form (error if there is trailing material).
SExpr parse_sexpr(std::string_view text);

// Compact single-line rendering.
std::string to_string(const SExpr& e);

}  // namespace relpol
