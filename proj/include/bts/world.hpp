#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bts/atom.hpp"

namespace bts {

inline bool is_variable(std::string_view s) { return !s.empty() && s[0] == '?'; }

/// Well-formed variable token: '?' followed by one or more of [a-z0-9_].
inline bool is_variable_token(std::string_view s) {
  if (s.size() < 2 || s[0] != '?') return false;
  for (char c : s.substr(1)) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

/// Atom pattern inside an action template: arguments are either constants or
/// `?`-prefixed variables bound by the template's parameter list.
struct LiftedAtom {
  std::string pred;
  std::vector<std::string> args;

  auto operator<=>(const LiftedAtom&) const = default;
  bool operator==(const LiftedAtom&) const = default;
};

inline std::string to_string(const LiftedAtom& a) {
  std::string out = a.pred;
  out += '(';
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ',';
    out += a.args[i];
  }
  out += ')';
  return out;
}

/// STRIPS-like action schema. pre/add/del keep declaration order: the
/// planner expands preconditions in exactly this order. fail_add/fail_del
/// are the effects applied when an execution attempt fails.
struct ActionTemplate {
  std::string name;
  std::vector<std::string> params;  // "?x" names
  std::vector<LiftedAtom> pre;
  std::vector<LiftedAtom> add;
  std::vector<LiftedAtom> del;
  std::vector<LiftedAtom> fail_add;
  std::vector<LiftedAtom> fail_del;
  int duration = 1;
  double p_fail = 0.0;
};

/// Fully instantiated action: atom is the name plus bound arguments.
struct GroundAction {
  Atom atom;
  std::vector<Atom> pre;
  std::vector<Atom> add;
  std::vector<Atom> del;
  std::vector<Atom> fail_add;
  std::vector<Atom> fail_del;
  int duration = 1;
  double p_fail = 0.0;
};

/// Closed world: a fact not in the set is false.
using WorldState = std::set<Atom>;

struct Disturbance {
  int tick = 0;
  std::vector<Atom> add;
  std::vector<Atom> del;
};

struct Scenario {
  std::string name;
  WorldState init;
  std::set<Atom> goal;
  std::vector<Disturbance> disturbances;  // ticks strictly increasing
  int max_ticks = 1;
};

struct DemoStep {
  WorldState before;
  Atom action;
  WorldState after;
};

/// Chained observation of one demonstrated execution: step k's after-state
/// equals step k+1's before-state.
using DemoTrace = std::vector<DemoStep>;

struct Domain {
  std::string name;
  std::set<std::string> objects;
  std::set<std::pair<std::string, int>> predicates;  // (name, arity)
  std::vector<ActionTemplate> actions;
};

inline bool holds(const WorldState& state, const Atom& atom) {
  return state.contains(atom);
}

template <typename Atoms>
inline bool entails(const WorldState& state, const Atoms& atoms) {
  return std::all_of(atoms.begin(), atoms.end(),
                     [&](const Atom& a) { return state.contains(a); });
}

/// (state \ del) ∪ add; inputs untouched.
template <typename AddSet, typename DelSet>
inline WorldState apply(const WorldState& state, const AddSet& add, const DelSet& del) {
  WorldState out = state;
  for (const Atom& a : del) out.erase(a);
  for (const Atom& a : add) out.insert(a);
  return out;
}

/// Structural checks a Domain must satisfy; empty result means well-formed.
inline std::vector<std::string> domain_problems(const Domain& d) {
  std::vector<std::string> out;
  std::set<std::string> names;
  auto arity_of = [&](const std::string& pred) -> int {
    for (const auto& [n, k] : d.predicates)
      if (n == pred) return k;
    return -1;
  };
  for (const auto& t : d.actions) {
    if (!names.insert(t.name).second)
      out.push_back("duplicate action name '" + t.name + "'");
    if (t.duration < 1)
      out.push_back("action '" + t.name + "': duration must be >= 1");
    if (t.p_fail < 0.0 || t.p_fail > 1.0)
      out.push_back("action '" + t.name + "': pfail outside [0,1]");
    std::set<std::string> params(t.params.begin(), t.params.end());
    auto check_set = [&](const std::vector<LiftedAtom>& atoms, const char* which) {
      for (const auto& a : atoms) {
        int arity = arity_of(a.pred);
        if (arity < 0)
          out.push_back("action '" + t.name + "' " + which + ": unknown predicate '" +
                        a.pred + "'");
        else if (arity != static_cast<int>(a.args.size()))
          out.push_back("action '" + t.name + "' " + which + ": '" + a.pred + "' expects " +
                        std::to_string(arity) + " arguments");
        for (const auto& x : a.args)
          if (is_variable(x) && !params.contains(x))
            out.push_back("action '" + t.name + "' " + which + ": unbound variable '" + x + "'");
      }
    };
    check_set(t.pre, "pre");
    check_set(t.add, "add");
    check_set(t.del, "del");
    check_set(t.fail_add, "onfail add");
    check_set(t.fail_del, "onfail del");
    for (const auto& a : t.add)
      if (std::find(t.del.begin(), t.del.end(), a) != t.del.end())
        out.push_back("action '" + t.name + "': pattern " + to_string(a) +
                      " appears in both add and del");
  }
  return out;
}

namespace detail {

inline Atom instantiate(const LiftedAtom& p, const std::map<std::string, std::string>& binding) {
  std::vector<std::string> args;
  args.reserve(p.args.size());
  for (const auto& x : p.args) {
    auto it = binding.find(x);
    args.push_back(it == binding.end() ? x : it->second);
  }
  return Atom(p.pred, std::move(args));
}

}  // namespace detail

/// Every substitution of objects into every template, templates in
/// declaration order and bindings in lexicographic object order. Nonsensical
/// bindings are kept: their preconditions simply never hold.
inline std::vector<GroundAction> ground_actions(const Domain& d) {
  std::vector<std::string> objs(d.objects.begin(), d.objects.end());
  std::vector<GroundAction> out;
  for (const auto& t : d.actions) {
    std::size_t k = t.params.size();
    if (k > 0 && objs.empty()) continue;
    std::vector<std::size_t> odo(k, 0);
    auto advance = [&]() -> bool {  // odometer; leftmost digit most significant
      for (std::size_t pos = k; pos-- > 0;) {
        if (++odo[pos] < objs.size()) return true;
        odo[pos] = 0;
      }
      return false;
    };
    do {
      std::map<std::string, std::string> binding;
      std::vector<std::string> args;
      args.reserve(k);
      for (std::size_t i = 0; i < k; ++i) {
        binding[t.params[i]] = objs[odo[i]];
        args.push_back(objs[odo[i]]);
      }
      GroundAction g;
      g.atom = Atom(t.name, std::move(args));
      for (const auto& p : t.pre) g.pre.push_back(detail::instantiate(p, binding));
      for (const auto& p : t.add) g.add.push_back(detail::instantiate(p, binding));
      for (const auto& p : t.del) g.del.push_back(detail::instantiate(p, binding));
      for (const auto& p : t.fail_add) g.fail_add.push_back(detail::instantiate(p, binding));
      for (const auto& p : t.fail_del) g.fail_del.push_back(detail::instantiate(p, binding));
      g.duration = t.duration;
      g.p_fail = t.p_fail;
      out.push_back(std::move(g));
    } while (k > 0 && advance());
  }
  return out;
}

/// Ground actions whose add effects contain `atom`, in ground_actions order.
inline std::vector<GroundAction> achievers(const std::vector<GroundAction>& ground,
                                           const Atom& atom) {
  std::vector<GroundAction> out;
  for (const auto& g : ground)
    if (std::find(g.add.begin(), g.add.end(), atom) != g.add.end()) out.push_back(g);
  return out;
}

inline std::vector<GroundAction> achievers(const Domain& d, const Atom& atom) {
  return achievers(ground_actions(d), atom);
}

struct CapExceededError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Breadth-first closure of `init` under the success effects of all
/// applicable ground actions. Throws CapExceededError when more than `cap`
/// states are discovered.
inline std::set<WorldState> enumerate_reachable(const Domain& d, const WorldState& init,
                                                std::size_t cap) {
  std::vector<GroundAction> ground = ground_actions(d);
  std::set<WorldState> seen{init};
  std::vector<WorldState> frontier{init};
  while (!frontier.empty()) {
    std::vector<WorldState> next;
    for (const auto& s : frontier) {
      for (const auto& g : ground) {
        if (!entails(s, g.pre)) continue;
        WorldState s2 = apply(s, g.add, g.del);
        if (seen.insert(s2).second) {
          if (seen.size() > cap)
            throw CapExceededError("reachable state count exceeds cap " + std::to_string(cap));
          next.push_back(std::move(s2));
        }
      }
    }
    frontier = std::move(next);
  }
  return seen;
}

}  // namespace bts
