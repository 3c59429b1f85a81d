#pragma once

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bts {

/// True for identifiers of the form [a-z][a-z0-9_]*.
inline bool is_identifier(std::string_view s) {
  if (s.empty() || s[0] < 'a' || s[0] > 'z') return false;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

/// Ground symbol: a lowercase predicate or action name plus ordered lowercase
/// arguments. Two atoms are equal iff name and argument lists are equal.
struct Atom {
  std::string name;
  std::vector<std::string> args;

  Atom() = default;
  explicit Atom(std::string n, std::vector<std::string> a = {})
      : name(std::move(n)), args(std::move(a)) {
    if (!is_identifier(name)) throw std::invalid_argument("bad atom name: '" + name + "'");
    for (const auto& x : args)
      if (!is_identifier(x)) throw std::invalid_argument("bad atom argument: '" + x + "'");
  }

  auto operator<=>(const Atom&) const = default;
  bool operator==(const Atom&) const = default;
};

/// Renders "name(a,b)"; zero-argument atoms as "name()".
inline std::string to_string(const Atom& a) {
  std::string out = a.name;
  out += '(';
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ',';
    out += a.args[i];
  }
  out += ')';
  return out;
}

}  // namespace bts
