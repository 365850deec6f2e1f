#include "relpol/sexpr.hpp"

namespace relpol {
namespace {

struct Reader {
  std::string_view text;
  size_t pos = 0;
  int line = 1, col = 1;

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  void advance() {
    if (text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skip_ws() {
    while (!eof()) {
      char c = peek();
      if (c == ';') {
        while (!eof() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  static bool sym_char(char c) {
    return !(c == '(' || c == ')' || c == ';' || c == ' ' || c == '\t' ||
             c == '\r' || c == '\n');
  }

  SExpr read() {
    skip_ws();
    if (eof()) throw ParseError("unexpected end of input", line, col);
    SExpr e;
    e.line = line;
    e.col = col;
    if (peek() == '(') {
      advance();
      e.is_list = true;
      for (;;) {
        skip_ws();
        if (eof()) throw ParseError("unterminated list", e.line, e.col);
        if (peek() == ')') {
          advance();
          break;
        }
        e.items.push_back(read());
      }
    } else if (peek() == ')') {
      throw ParseError("unexpected ')'", line, col);
    } else {
      size_t start = pos;
      while (!eof() && sym_char(peek())) advance();
      e.sym.assign(text.substr(start, pos - start));
    }
    return e;
  }
};

}  // namespace

std::vector<SExpr> parse_sexprs(std::string_view text) {
  Reader r{text};
  std::vector<SExpr> out;
  for (;;) {
    r.skip_ws();
    if (r.eof()) break;
    out.push_back(r.read());
  }
  return out;
}

SExpr parse_sexpr(std::string_view text) {
  Reader r{text};
  SExpr e = r.read();
  r.skip_ws();
  if (!r.eof()) throw ParseError("trailing input after expression", r.line, r.col);
  return e;
}

std::string to_string(const SExpr& e) {
  if (!e.is_list) return e.sym;
  std::string s = "(";
  for (size_t i = 0; i < e.items.size(); ++i) {
    if (i) s += ' ';
    s += to_string(e.items[i]);
  }
  s += ')';
  return s;
}

}  // namespace relpol
