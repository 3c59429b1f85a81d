#pragma once

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "bts/sexpr.hpp"
#include "bts/world.hpp"

namespace bts {

namespace detail {

inline TextError semantic_error(const Sexpr& at, const std::string& msg) {
  return TextError(at.line, at.column, msg);
}

inline std::string require_symbol(const Sexpr& s, const char* what) {
  if (s.is_list) throw semantic_error(s, std::string("expected ") + what);
  return s.text;
}

inline std::string require_identifier(const Sexpr& s, const char* what) {
  std::string t = require_symbol(s, what);
  if (!is_identifier(t))
    throw semantic_error(s, std::string("bad ") + what + " '" + t + "'");
  return t;
}

inline LiftedAtom parse_pattern(const Sexpr& s) {
  if (!s.is_list || s.items.empty() || s.items[0].is_list)
    throw semantic_error(s, "expected an atom like (pred arg ...)");
  LiftedAtom out;
  out.pred = require_identifier(s.items[0], "predicate name");
  for (std::size_t i = 1; i < s.items.size(); ++i) {
    std::string t = require_symbol(s.items[i], "argument");
    if (is_variable(t)) {
      if (!is_variable_token(t))
        throw semantic_error(s.items[i], "bad variable '" + t + "'");
    } else if (!is_identifier(t)) {
      throw semantic_error(s.items[i], "bad argument '" + t + "'");
    }
    out.args.push_back(std::move(t));
  }
  return out;
}

inline Atom parse_ground_atom(const Sexpr& s) {
  LiftedAtom p = parse_pattern(s);
  for (const auto& a : p.args)
    if (is_variable(a))
      throw semantic_error(s, "variable '" + a + "' not allowed in a ground atom");
  return Atom(p.pred, p.args);
}

inline int parse_int(const Sexpr& s, const char* what, long min_value) {
  std::string t = require_symbol(s, what);
  try {
    std::size_t used = 0;
    long v = std::stol(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    if (v < min_value)
      throw semantic_error(s, std::string(what) + " must be >= " + std::to_string(min_value));
    return static_cast<int>(v);
  } catch (const TextError&) {
    throw;
  } catch (const std::exception&) {
    throw semantic_error(s, std::string("bad ") + what + " '" + t + "'");
  }
}

inline double parse_double(const Sexpr& s, const char* what) {
  std::string t = require_symbol(s, what);
  try {
    std::size_t used = 0;
    double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw semantic_error(s, std::string("bad ") + what + " '" + t + "'");
  }
}

/// Checks atoms against declared predicates (and objects, when ground).
struct DeclChecker {
  const Domain& domain;

  void check(const Sexpr& at, const Atom& a) const {
    if (!domain.predicates.contains({a.name, static_cast<int>(a.args.size())}))
      throw semantic_error(at, "unknown predicate '" + a.name + "/" +
                                   std::to_string(a.args.size()) + "'");
    for (const auto& x : a.args)
      if (!domain.objects.contains(x))
        throw semantic_error(at, "unknown object '" + x + "' in " + to_string(a));
  }
};

}  // namespace detail

/// Parses the (domain ...) form:
///   (domain NAME (objects ...) (predicates (name arity) ...)
///     (action NAME (params ?a ...) (pre ...) (add ...) (del ...)
///       (dur N) (pfail X) (onfail (add ...) (del ...)))*)
inline Domain parse_domain(std::string_view text) {
  auto roots = parse_sexprs(text);
  if (roots.size() != 1 || roots[0].head() != "domain")
    throw TextError(1, 1, "expected a single (domain ...) form");
  const Sexpr& top = roots[0];
  Domain d;
  d.name = detail::require_identifier(top.at(1), "domain name");
  for (std::size_t i = 2; i < top.items.size(); ++i) {
    const Sexpr& clause = top.items[i];
    auto head = clause.head();
    if (head == "objects") {
      for (std::size_t j = 1; j < clause.items.size(); ++j)
        d.objects.insert(detail::require_identifier(clause.items[j], "object"));
    } else if (head == "predicates") {
      for (std::size_t j = 1; j < clause.items.size(); ++j) {
        const Sexpr& p = clause.items[j];
        if (!p.is_list || p.items.size() != 2)
          throw detail::semantic_error(p, "expected (name arity)");
        std::string name = detail::require_identifier(p.items[0], "predicate name");
        int arity = detail::parse_int(p.items[1], "arity", 0);
        d.predicates.insert({std::move(name), arity});
      }
    } else if (head == "action") {
      ActionTemplate t;
      t.name = detail::require_identifier(clause.at(1), "action name");
      for (std::size_t j = 2; j < clause.items.size(); ++j) {
        const Sexpr& part = clause.items[j];
        auto ph = part.head();
        auto fill = [&](std::vector<LiftedAtom>& into) {
          for (std::size_t k = 1; k < part.items.size(); ++k)
            into.push_back(detail::parse_pattern(part.items[k]));
        };
        if (ph == "params") {
          for (std::size_t k = 1; k < part.items.size(); ++k) {
            std::string v = detail::require_symbol(part.items[k], "parameter");
            if (!is_variable_token(v))
              throw detail::semantic_error(part.items[k], "parameters must look like ?x");
            t.params.push_back(std::move(v));
          }
        } else if (ph == "pre") {
          fill(t.pre);
        } else if (ph == "add") {
          fill(t.add);
        } else if (ph == "del") {
          fill(t.del);
        } else if (ph == "dur") {
          t.duration = detail::parse_int(part.at(1), "duration", 1);
        } else if (ph == "pfail") {
          t.p_fail = detail::parse_double(part.at(1), "pfail");
        } else if (ph == "onfail") {
          for (std::size_t k = 1; k < part.items.size(); ++k) {
            const Sexpr& eff = part.items[k];
            auto eh = eff.head();
            std::vector<LiftedAtom>* into = eh == "add"  ? &t.fail_add
                                            : eh == "del" ? &t.fail_del
                                                          : nullptr;
            if (!into) throw detail::semantic_error(eff, "onfail takes (add ...) and (del ...)");
            for (std::size_t m = 1; m < eff.items.size(); ++m)
              into->push_back(detail::parse_pattern(eff.items[m]));
          }
        } else {
          throw detail::semantic_error(part, "unknown action clause");
        }
      }
      d.actions.push_back(std::move(t));
    } else {
      throw detail::semantic_error(clause, "unknown domain clause");
    }
  }
  auto problems = domain_problems(d);
  if (!problems.empty())
    throw TextError(top.line, top.column, "invalid domain: " + problems.front());
  return d;
}

/// Parses the (scenario ...) form and cross-checks every atom against the
/// domain's predicates and objects.
inline Scenario parse_scenario(std::string_view text, const Domain& domain) {
  auto roots = parse_sexprs(text);
  if (roots.size() != 1 || roots[0].head() != "scenario")
    throw TextError(1, 1, "expected a single (scenario ...) form");
  const Sexpr& top = roots[0];
  detail::DeclChecker checker{domain};
  Scenario s;
  s.name = detail::require_identifier(top.at(1), "scenario name");
  bool saw_maxticks = false;
  for (std::size_t i = 2; i < top.items.size(); ++i) {
    const Sexpr& clause = top.items[i];
    auto head = clause.head();
    auto fill = [&](auto& into, std::size_t from) {
      for (std::size_t j = from; j < clause.items.size(); ++j) {
        Atom a = detail::parse_ground_atom(clause.items[j]);
        checker.check(clause.items[j], a);
        into.insert(into.end(), std::move(a));
      }
    };
    if (head == "init") {
      fill(s.init, 1);
    } else if (head == "goal") {
      fill(s.goal, 1);
    } else if (head == "maxticks") {
      s.max_ticks = detail::parse_int(clause.at(1), "maxticks", 1);
      saw_maxticks = true;
    } else if (head == "disturb") {
      Disturbance dist;
      dist.tick = detail::parse_int(clause.at(1), "disturbance tick", 1);
      for (std::size_t j = 2; j < clause.items.size(); ++j) {
        const Sexpr& eff = clause.items[j];
        auto eh = eff.head();
        std::vector<Atom>* into = eh == "add"  ? &dist.add
                                  : eh == "del" ? &dist.del
                                                : nullptr;
        if (!into) throw detail::semantic_error(eff, "disturb takes (add ...) and (del ...)");
        for (std::size_t m = 1; m < eff.items.size(); ++m) {
          Atom a = detail::parse_ground_atom(eff.items[m]);
          checker.check(eff.items[m], a);
          into->push_back(std::move(a));
        }
      }
      if (!s.disturbances.empty() && s.disturbances.back().tick >= dist.tick)
        throw detail::semantic_error(clause, "disturbance ticks must be strictly increasing");
      s.disturbances.push_back(std::move(dist));
    } else {
      throw detail::semantic_error(clause, "unknown scenario clause");
    }
  }
  if (!saw_maxticks)
    throw TextError(top.line, top.column, "scenario is missing (maxticks N)");
  return s;
}

/// Parses the (trace ...) form. Cross-checks atoms against `domain` when one
/// is supplied (learning-from-demonstration reads traces with no domain yet).
inline DemoTrace parse_trace(std::string_view text, const Domain* domain = nullptr) {
  auto roots = parse_sexprs(text);
  if (roots.size() != 1 || roots[0].head() != "trace")
    throw TextError(1, 1, "expected a single (trace ...) form");
  const Sexpr& top = roots[0];
  detail::require_identifier(top.at(1), "trace name");
  DemoTrace trace;
  for (std::size_t i = 2; i < top.items.size(); ++i) {
    const Sexpr& st = top.items[i];
    if (st.head() != "step")
      throw detail::semantic_error(st, "expected a (step ...) form");
    DemoStep step;
    bool saw_pre = false, saw_act = false, saw_post = false;
    for (std::size_t j = 1; j < st.items.size(); ++j) {
      const Sexpr& part = st.items[j];
      auto ph = part.head();
      if (ph == "pre" || ph == "post") {
        WorldState& into = ph == "pre" ? step.before : step.after;
        (ph == "pre" ? saw_pre : saw_post) = true;
        for (std::size_t k = 1; k < part.items.size(); ++k) {
          Atom a = detail::parse_ground_atom(part.items[k]);
          if (domain) detail::DeclChecker{*domain}.check(part.items[k], a);
          into.insert(std::move(a));
        }
      } else if (ph == "act") {
        saw_act = true;
        step.action = detail::parse_ground_atom(part.at(1));
      } else {
        throw detail::semantic_error(part, "step takes (pre ...) (act ...) (post ...)");
      }
    }
    if (!saw_pre || !saw_act || !saw_post)
      throw detail::semantic_error(st, "step needs (pre ...), (act ...) and (post ...)");
    if (!trace.empty() && trace.back().after != step.before)
      throw detail::semantic_error(
          st, "step " + std::to_string(trace.size() + 1) +
                  " does not chain: (pre ...) differs from the previous (post ...)");
    trace.push_back(std::move(step));
  }
  return trace;
}

/// Canonical domain text; parse_domain reproduces the domain exactly.
inline std::string serialize_domain(const Domain& d) {
  std::string out = "(domain " + d.name + "\n  (objects";
  for (const auto& o : d.objects) out += " " + o;
  out += ")\n  (predicates";
  for (const auto& [name, arity] : d.predicates)
    out += " (" + name + " " + std::to_string(arity) + ")";
  out += ")";
  auto emit_patterns = [&](const char* tag, const std::vector<LiftedAtom>& atoms) {
    out += " (";
    out += tag;
    for (const auto& a : atoms) {
      out += " (" + a.pred;
      for (const auto& x : a.args) out += " " + x;
      out += ")";
    }
    out += ")";
  };
  for (const auto& t : d.actions) {
    out += "\n  (action " + t.name + " (params";
    for (const auto& p : t.params) out += " " + p;
    out += ")\n   ";
    emit_patterns("pre", t.pre);
    emit_patterns("add", t.add);
    emit_patterns("del", t.del);
    out += "\n    (dur " + std::to_string(t.duration) + ")";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t.p_fail);
    out += " (pfail " + std::string(buf) + ")";
    if (!t.fail_add.empty() || !t.fail_del.empty()) {
      out += "\n    (onfail";
      emit_patterns("add", t.fail_add);
      emit_patterns("del", t.fail_del);
      out += ")";
    }
    out += ")";
  }
  out += ")\n";
  return out;
}

}  // namespace bts
