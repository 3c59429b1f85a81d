#pragma once

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bts/bt.hpp"
#include "bts/world.hpp"

namespace bts {

enum class AchieverOrder { Declaration, FewestPreconditions };

struct PlannerConfig {
  int max_expansion_depth = 20;
  AchieverOrder achiever_order = AchieverOrder::Declaration;
};

namespace detail {

/// Backward chaining: a condition becomes a fallback over the condition
/// itself and one sequence per achieving action; each achiever's
/// preconditions expand the same way. Cycles and exhausted depth budgets
/// degrade to a bare condition check.
inline NodePtr expand_impl(const std::vector<GroundAction>& ground, const Atom& atom,
                           const std::set<Atom>& visited, int depth,
                           const PlannerConfig& cfg) {
  std::vector<GroundAction> ach = achievers(ground, atom);
  if (ach.empty() || visited.contains(atom) || depth >= cfg.max_expansion_depth)
    return BtNode::condition(atom);
  if (cfg.achiever_order == AchieverOrder::FewestPreconditions)
    std::stable_sort(ach.begin(), ach.end(),
                     [](const GroundAction& a, const GroundAction& b) {
                       return a.pre.size() < b.pre.size();
                     });
  std::set<Atom> v2 = visited;
  v2.insert(atom);
  std::vector<NodePtr> branches;
  branches.push_back(BtNode::condition(atom));
  for (const auto& g : ach) {
    std::vector<NodePtr> seq;
    for (const Atom& p : g.pre) seq.push_back(expand_impl(ground, p, v2, depth + 1, cfg));
    seq.push_back(BtNode::action(g.atom));
    branches.push_back(BtNode::sequence(std::move(seq)));
  }
  return BtNode::fallback(std::move(branches));
}

}  // namespace detail

inline NodePtr expand_condition(const Domain& domain, const Atom& atom,
                                const std::set<Atom>& visited, const PlannerConfig& cfg = {}) {
  if (cfg.max_expansion_depth < 1)
    throw std::invalid_argument("max_expansion_depth must be >= 1");
  return detail::expand_impl(ground_actions(domain), atom, visited, 0, cfg);
}

/// Backward-chained tree for a conjunctive goal: one expansion per goal atom
/// in lexicographic order, under a sequence when there is more than one.
inline NodePtr plan_bt(const Domain& domain, const std::set<Atom>& goal,
                       const PlannerConfig& cfg = {}) {
  if (goal.empty()) throw std::invalid_argument("plan_bt: empty goal");
  if (cfg.max_expansion_depth < 1)
    throw std::invalid_argument("max_expansion_depth must be >= 1");
  std::vector<GroundAction> ground = ground_actions(domain);
  std::vector<NodePtr> subs;
  for (const Atom& g : goal)  // std::set iterates in lexicographic order
    subs.push_back(detail::expand_impl(ground, g, {}, 0, cfg));
  NodePtr out = subs.size() == 1 ? subs.front() : BtNode::sequence(std::move(subs));
  auto violations = validate(out);
  if (!violations.empty())
    throw std::logic_error("plan_bt produced an invalid tree: " + violations.front().message);
  return out;
}

}  // namespace bts
