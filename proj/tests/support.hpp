#pragma once

// Shared fixtures for the test suite: a scriptable sink, an independent
// brute-force tick evaluator (kept deliberately separate from the engine),
// exhaustive tree-shape enumeration and random tree generation.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bts/bt.hpp"
#include "bts/rng.hpp"
#include "bts/tick.hpp"

namespace testsupport {

using namespace bts;

/// Sink returning scripted statuses and logging every call it receives.
struct ScriptSink final : TickSink {
  std::map<Atom, Status> conditions;
  std::map<Atom, Status> actions;
  std::vector<Atom> condition_calls;
  std::vector<Atom> action_calls;
  std::vector<Atom> halt_calls;

  Status evaluate_condition(const Atom& a) override {
    condition_calls.push_back(a);
    return conditions.at(a);
  }
  Status tick_action(const Atom& a) override {
    action_calls.push_back(a);
    return actions.at(a);
  }
  void halt_action(const Atom& a) override { halt_calls.push_back(a); }

  void clear_calls() {
    condition_calls.clear();
    action_calls.clear();
    halt_calls.clear();
  }
};

/// Brute-force rule evaluator used as the tick-semantics oracle. It reads
/// statuses from the same maps a ScriptSink would, but implements the
/// control rules directly and knows nothing about sessions or preemption.
inline Status oracle_eval(const BtNode& n, const std::map<Atom, Status>& conditions,
                          const std::map<Atom, Status>& actions) {
  switch (n.kind()) {
    case NodeKind::Condition: return conditions.at(n.atom());
    case NodeKind::Action: return actions.at(n.atom());
    case NodeKind::Sequence: {
      for (const auto& c : n.children()) {
        Status s = oracle_eval(*c, conditions, actions);
        if (s == Status::Failure || s == Status::Running) return s;
      }
      return Status::Success;
    }
    case NodeKind::Fallback: {
      for (const auto& c : n.children()) {
        Status s = oracle_eval(*c, conditions, actions);
        if (s == Status::Success || s == Status::Running) return s;
      }
      return Status::Failure;
    }
    case NodeKind::Parallel: {
      int succ = 0, fail = 0, total = 0;
      for (const auto& c : n.children()) {
        Status s = oracle_eval(*c, conditions, actions);
        succ += s == Status::Success;
        fail += s == Status::Failure;
        ++total;
      }
      if (succ >= n.threshold()) return Status::Success;
      if (fail > total - n.threshold()) return Status::Failure;
      return Status::Running;
    }
  }
  return Status::Failure;
}

/// Tree shape for exhaustive enumeration: kind 0..4 = seq, fb, par(thr),
/// cond, act.
struct Shape {
  int kind;
  int threshold = 0;
  std::vector<Shape> kids;
};

/// All shapes of the given depth bound with 1..max_children per control.
inline std::vector<Shape> enumerate_shapes(int depth, int max_children) {
  std::vector<Shape> out{{3, 0, {}}, {4, 0, {}}};
  if (depth <= 1) return out;
  std::vector<Shape> subs = enumerate_shapes(depth - 1, max_children);
  for (int n = 1; n <= max_children; ++n) {
    std::vector<std::size_t> odo(static_cast<std::size_t>(n), 0);
    for (;;) {
      std::vector<Shape> kids;
      for (std::size_t i : odo) kids.push_back(subs[i]);
      out.push_back({0, 0, kids});
      out.push_back({1, 0, kids});
      for (int m = 1; m <= n; ++m) out.push_back({2, m, kids});
      std::size_t pos = odo.size();
      bool carried = true;
      while (pos-- > 0) {
        if (++odo[pos] < subs.size()) {
          carried = false;
          break;
        }
        odo[pos] = 0;
      }
      if (carried) break;
    }
  }
  return out;
}

/// Instantiates a shape with distinct leaf atoms a0, a1, ...; appends the
/// leaves (atom, is_condition) in left-to-right order.
inline NodePtr instantiate(const Shape& s, int& counter,
                           std::vector<std::pair<Atom, bool>>& leaves) {
  if (s.kind == 3 || s.kind == 4) {
    Atom a("a" + std::to_string(counter++));
    leaves.push_back({a, s.kind == 3});
    return s.kind == 3 ? BtNode::condition(a) : BtNode::action(a);
  }
  std::vector<NodePtr> kids;
  for (const auto& k : s.kids) kids.push_back(instantiate(k, counter, leaves));
  if (s.kind == 0) return BtNode::sequence(std::move(kids));
  if (s.kind == 1) return BtNode::fallback(std::move(kids));
  return BtNode::parallel(s.threshold, std::move(kids));
}

/// Random valid tree for property tests. Unlike gp::random_tree this one
/// samples parallels and single-child controls too, to cover the whole
/// structure space.
inline NodePtr random_test_tree(RngStream& rng, int max_depth, bool with_parallel = true,
                                int* counter = nullptr) {
  int local = 0;
  if (!counter) counter = &local;
  auto leaf = [&]() -> NodePtr {
    Atom a("a" + std::to_string((*counter)++));
    return rng.below(2) ? BtNode::action(a) : BtNode::condition(a);
  };
  auto gen = [&](auto&& self, int depth) -> NodePtr {
    if (depth >= max_depth || (depth > 1 && rng.below(2) == 0)) return leaf();
    std::size_t n = 1 + rng.below(3);
    std::vector<NodePtr> kids;
    for (std::size_t i = 0; i < n; ++i) kids.push_back(self(self, depth + 1));
    std::uint64_t kind = rng.below(with_parallel ? 3 : 2);
    if (kind == 0) return BtNode::sequence(std::move(kids));
    if (kind == 1) return BtNode::fallback(std::move(kids));
    return BtNode::parallel(1 + static_cast<int>(rng.below(n)), std::move(kids));
  };
  return gen(gen, 1);
}

inline void collect_leaves(const NodePtr& t, std::vector<std::pair<Atom, bool>>& leaves) {
  if (t->kind() == NodeKind::Condition) {
    leaves.push_back({t->atom(), true});
  } else if (t->kind() == NodeKind::Action) {
    leaves.push_back({t->atom(), false});
  } else {
    for (const auto& c : t->children()) collect_leaves(c, leaves);
  }
}

}  // namespace testsupport
