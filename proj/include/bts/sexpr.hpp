#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bts/errors.hpp"

namespace bts {

/// One node of an s-expression: either a bare symbol or a parenthesized list.
/// line/column locate the symbol or the opening parenthesis (1-based).
struct Sexpr {
  bool is_list = false;
  std::string text;           // symbol payload
  std::vector<Sexpr> items;   // list payload
  int line = 0;
  int column = 0;

  const Sexpr& at(std::size_t i) const {
    if (!is_list || i >= items.size())
      throw TextError(line, column, "expected at least " + std::to_string(i + 1) +
                                        " elements in list");
    return items[i];
  }

  /// Head symbol of a list, or "" when this is not a tagged list.
  std::string_view head() const {
    if (!is_list || items.empty() || items[0].is_list) return {};
    return items[0].text;
  }
};

/// Reads a whole text as a sequence of top-level s-expressions.
/// Whitespace-insensitive; `;` starts a comment running to end of line.
inline std::vector<Sexpr> parse_sexprs(std::string_view text) {
  std::vector<Sexpr> roots;
  std::vector<Sexpr*> stack;
  int line = 1, col = 1;
  std::size_t i = 0;

  auto push = [&](Sexpr s) -> Sexpr* {
    std::vector<Sexpr>& into = stack.empty() ? roots : stack.back()->items;
    into.push_back(std::move(s));
    return &into.back();
  };

  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++col;
      ++i;
      continue;
    }
    if (c == ';') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '(') {
      Sexpr s;
      s.is_list = true;
      s.line = line;
      s.column = col;
      stack.push_back(push(std::move(s)));
      ++col;
      ++i;
      continue;
    }
    if (c == ')') {
      if (stack.empty()) throw TextError(line, col, "unmatched ')'");
      stack.pop_back();
      ++col;
      ++i;
      continue;
    }
    std::size_t start = i;
    int start_col = col;
    while (i < text.size()) {
      char d = text[i];
      if (d == '(' || d == ')' || d == ';' || d == ' ' || d == '\t' || d == '\r' || d == '\n')
        break;
      ++i;
      ++col;
    }
    Sexpr s;
    s.text = std::string(text.substr(start, i - start));
    s.line = line;
    s.column = start_col;
    push(std::move(s));
  }
  if (!stack.empty())
    throw TextError(stack.back()->line, stack.back()->column, "unclosed '('");
  return roots;
}

}  // namespace bts
