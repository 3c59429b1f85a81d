#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bts/planner.hpp"
#include "bts/world.hpp"

namespace bts {

struct LfdError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// demos_to_bt raises this when the demonstrations pin down no goal.
struct NoGoalError : LfdError {
  NoGoalError() : LfdError("no goal inferred from the demonstrations") {}
};

namespace detail {

/// Positional lifting: an argument equal to the action's k-th argument
/// becomes ?k (smallest k wins). Atoms mentioning any constant outside the
/// action's arguments do not lift and are filtered out — effects must be
/// parameter-relative, and preconditions keep only action-relevant facts.
inline std::optional<LiftedAtom> lift(const Atom& atom, const std::vector<std::string>& args) {
  LiftedAtom out;
  out.pred = atom.name;
  for (const auto& tok : atom.args) {
    auto it = std::find(args.begin(), args.end(), tok);
    if (it == args.end()) return std::nullopt;
    out.args.push_back("?" + std::to_string(it - args.begin()));
  }
  return out;
}

inline std::set<LiftedAtom> lift_all(const WorldState& atoms, const std::vector<std::string>& args) {
  std::set<LiftedAtom> out;
  for (const Atom& a : atoms) {
    if (auto l = lift(a, args)) out.insert(std::move(*l));
  }
  return out;
}

inline void intersect_into(std::optional<std::set<LiftedAtom>>& acc, std::set<LiftedAtom> next) {
  if (!acc) {
    acc = std::move(next);
    return;
  }
  std::set<LiftedAtom> merged;
  std::set_intersection(acc->begin(), acc->end(), next.begin(), next.end(),
                        std::inserter(merged, merged.begin()));
  *acc = std::move(merged);
}

}  // namespace detail

/// Lifts every observed ground action into a template: add effects are the
/// intersection over occurrences of what became true, delete effects of what
/// became false, preconditions of the action-relevant facts that held
/// before. Observed actions get duration 1 and never fail (demonstrations
/// carry no timing or failure information).
inline Domain infer_action_models(const std::vector<DemoTrace>& traces) {
  if (traces.empty()) throw LfdError("no demonstration traces given");
  for (const auto& t : traces)
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
      if (t[i].after != t[i + 1].before)
        throw LfdError("trace steps do not chain at step " + std::to_string(i + 2));

  struct Accum {
    std::size_t arity;
    std::optional<std::set<LiftedAtom>> pre, add, del;
  };
  std::map<std::string, Accum> by_name;
  Domain d;
  d.name = "learned";
  for (const auto& trace : traces) {
    for (const auto& step : trace) {
      const std::vector<std::string>& args = step.action.args;
      auto [it, fresh] = by_name.try_emplace(step.action.name, Accum{args.size(), {}, {}, {}});
      if (!fresh && it->second.arity != args.size())
        throw LfdError("action '" + step.action.name + "' observed with arities " +
                       std::to_string(it->second.arity) + " and " + std::to_string(args.size()));
      WorldState gained, lost;
      std::set_difference(step.after.begin(), step.after.end(), step.before.begin(),
                          step.before.end(), std::inserter(gained, gained.begin()));
      std::set_difference(step.before.begin(), step.before.end(), step.after.begin(),
                          step.after.end(), std::inserter(lost, lost.begin()));
      detail::intersect_into(it->second.add, detail::lift_all(gained, args));
      detail::intersect_into(it->second.del, detail::lift_all(lost, args));
      detail::intersect_into(it->second.pre, detail::lift_all(step.before, args));
      d.objects.insert(args.begin(), args.end());
      for (const WorldState* st : {&step.before, &step.after})
        for (const Atom& a : *st) {
          d.predicates.insert({a.name, static_cast<int>(a.args.size())});
          d.objects.insert(a.args.begin(), a.args.end());
        }
    }
  }
  for (const auto& [name, acc] : by_name) {  // map order keeps this deterministic
    ActionTemplate t;
    t.name = name;
    for (std::size_t i = 0; i < acc.arity; ++i) t.params.push_back("?" + std::to_string(i));
    t.pre.assign(acc.pre->begin(), acc.pre->end());
    t.add.assign(acc.add->begin(), acc.add->end());
    t.del.assign(acc.del->begin(), acc.del->end());
    d.actions.push_back(std::move(t));
  }
  auto problems = domain_problems(d);
  if (!problems.empty()) throw LfdError("inferred domain is inconsistent: " + problems.front());
  return d;
}

/// Facts true at the end of every demonstration but not universally true at
/// the start: (∩ finals) − (∩ initials).
inline std::set<Atom> infer_goal(const std::vector<DemoTrace>& traces) {
  if (traces.empty()) throw LfdError("no demonstration traces given");
  for (const auto& t : traces)
    if (t.empty()) throw LfdError("empty demonstration trace");
  auto intersect = [](std::set<Atom> acc, const WorldState& next) {
    std::set<Atom> out;
    std::set_intersection(acc.begin(), acc.end(), next.begin(), next.end(),
                          std::inserter(out, out.begin()));
    return out;
  };
  std::set<Atom> finals(traces[0].back().after.begin(), traces[0].back().after.end());
  std::set<Atom> initials(traces[0].front().before.begin(), traces[0].front().before.end());
  for (std::size_t i = 1; i < traces.size(); ++i) {
    finals = intersect(std::move(finals), traces[i].back().after);
    initials = intersect(std::move(initials), traces[i].front().before);
  }
  std::set<Atom> goal;
  std::set_difference(finals.begin(), finals.end(), initials.begin(), initials.end(),
                      std::inserter(goal, goal.begin()));
  return goal;
}

/// Demonstrations to a reactive tree: infer the models, infer the goal,
/// backward-chain.
inline NodePtr demos_to_bt(const std::vector<DemoTrace>& traces, const PlannerConfig& cfg = {}) {
  std::set<Atom> goal = infer_goal(traces);
  if (goal.empty()) throw NoGoalError();
  return plan_bt(infer_action_models(traces), goal, cfg);
}

}  // namespace bts
