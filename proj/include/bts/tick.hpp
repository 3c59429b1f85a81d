#pragma once

#include <set>
#include <stdexcept>

#include "bts/bt.hpp"

namespace bts {

/// The engine's only view of the world. evaluate_condition must never return
/// Running; tick_action drives one unit of work and reports its status;
/// halt_action tells the world to abandon a running action.
class TickSink {
 public:
  virtual ~TickSink() = default;
  virtual Status evaluate_condition(const Atom& atom) = 0;
  virtual Status tick_action(const Atom& atom) = 0;
  virtual void halt_action(const Atom& atom) = 0;
};

/// One executing instance of a tree.
///
/// Semantics are memoryless (reactive): every tick re-evaluates from the
/// leftmost child, so nothing about traversal progress survives between
/// ticks. The only cross-tick state is the set of action atoms that were
/// left Running, kept so that an action dropped from the active path can be
/// halted exactly once.
///
/// A session is single-threaded; the tree value it holds may be shared
/// freely with other sessions.
class TickSession {
 public:
  explicit TickSession(NodePtr root) : root_(std::move(root)) {
    if (!root_) throw std::invalid_argument("null tree");
  }

  /// Propagates one tick from the root, left to right. After the traversal,
  /// halts every action that was Running on the previous tick but was not
  /// ticked on this one.
  Status tick(TickSink& sink) {
    std::set<Atom> ticked;
    std::set<Atom> running_now;
    Status result = eval(*root_, sink, ticked, running_now);
    for (const Atom& a : prev_running_)
      if (!ticked.contains(a)) sink.halt_action(a);
    prev_running_ = std::move(running_now);
    return result;
  }

  /// Action atoms that returned Running on the most recent tick.
  const std::set<Atom>& running() const { return prev_running_; }

 private:
  static Status eval(const BtNode& n, TickSink& sink, std::set<Atom>& ticked,
                     std::set<Atom>& running_now) {
    switch (n.kind()) {
      case NodeKind::Condition: {
        Status s = sink.evaluate_condition(n.atom());
        if (s == Status::Running)
          throw std::logic_error("evaluate_condition returned RUNNING for " +
                                 to_string(n.atom()));
        return s;
      }
      case NodeKind::Action: {
        ticked.insert(n.atom());
        Status s = sink.tick_action(n.atom());
        if (s == Status::Running) running_now.insert(n.atom());
        return s;
      }
      case NodeKind::Sequence:
        for (const auto& c : n.children()) {
          Status s = eval(*c, sink, ticked, running_now);
          if (s != Status::Success) return s;
        }
        return Status::Success;
      case NodeKind::Fallback:
        for (const auto& c : n.children()) {
          Status s = eval(*c, sink, ticked, running_now);
          if (s != Status::Failure) return s;
        }
        return Status::Failure;
      case NodeKind::Parallel: {
        // Ticks every child each cycle; succeeds at >= M successes and fails
        // as soon as success is impossible (more than N-M failures).
        int succ = 0, fail = 0;
        for (const auto& c : n.children()) {
          Status s = eval(*c, sink, ticked, running_now);
          if (s == Status::Success) ++succ;
          if (s == Status::Failure) ++fail;
        }
        int n_children = static_cast<int>(n.children().size());
        if (succ >= n.threshold()) return Status::Success;
        if (fail > n_children - n.threshold()) return Status::Failure;
        return Status::Running;
      }
    }
    throw std::logic_error("unreachable node kind");
  }

  NodePtr root_;
  std::set<Atom> prev_running_;
};

/// Single-shot convenience: one tick of a fresh session.
inline Status tick_root(const NodePtr& root, TickSink& sink) {
  TickSession session(root);
  return session.tick(sink);
}

}  // namespace bts
