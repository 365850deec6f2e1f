#pragma once

#include <stdexcept>
#include <string>

namespace relpol {

// Base for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Syntax or structural error in an input file. Lines/columns are 1-based;
// 0 means "not tied to a location" (e.g. validation after parsing).
struct ParseError : Error {
  int line = 0;
  int col = 0;
  ParseError(const std::string& msg, int line_ = 0, int col_ = 0)
      : Error(line_ > 0 ? msg + " (line " + std::to_string(line_) + ", col " +
                              std::to_string(col_) + ")"
                        : msg),
        line(line_),
        col(col_) {}
};

// Semantic violation: arity mismatch, unknown predicate, bad probability
// mass, illegal action application and the like.
struct ValidationError : Error {
  using Error::Error;
};

// A configured resource limit was exceeded (e.g. solver node budget).
// Never raised silently; callers decide whether to retry with a bigger
// budget.
struct ResourceError : Error {
  using Error::Error;
};

}  // namespace relpol
