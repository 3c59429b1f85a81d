#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bts/bt.hpp"
#include "bts/rng.hpp"
#include "bts/tick.hpp"
#include "bts/world.hpp"

namespace bts {

enum class EventKind {
  ActionStarted,
  ActionSucceeded,
  ActionFailed,
  ActionHalted,
  DisturbanceApplied,
  GoalReached,
  GoalLost,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::ActionStarted: return "action_started";
    case EventKind::ActionSucceeded: return "action_succeeded";
    case EventKind::ActionFailed: return "action_failed";
    case EventKind::ActionHalted: return "action_halted";
    case EventKind::DisturbanceApplied: return "disturbance_applied";
    case EventKind::GoalReached: return "goal_reached";
    default: return "goal_lost";
  }
}

struct EpisodeEvent {
  int tick;
  EventKind kind;
  std::optional<Atom> atom;

  bool operator==(const EpisodeEvent&) const = default;
};

struct EpisodeResult {
  bool success = false;
  int ticks_used = 0;
  double goal_fraction_end = 0.0;
  std::vector<EpisodeEvent> trace;

  bool operator==(const EpisodeResult&) const = default;
};

/// Raised before the first tick when the tree references an atom the domain
/// does not define.
struct UnknownAtomError : std::runtime_error {
  Atom atom;

  UnknownAtomError(Atom a, const std::string& msg)
      : std::runtime_error(msg + ": " + bts::to_string(a)), atom(std::move(a)) {}
};

namespace detail {

struct RunningAction {
  const GroundAction* action;
  int ticks_remaining;
  bool failure_predrawn;
};

/// TickSink bound to one episode's state. Conditions read the live state;
/// actions progress at most once per root tick (repeated leaves with the
/// same atom see the memoized status).
class EpisodeSink final : public TickSink {
 public:
  EpisodeSink(const std::map<Atom, const GroundAction*>& by_atom, WorldState init,
              const std::set<Atom>& goal, RngStream& rng, std::vector<EpisodeEvent>& trace)
      : by_atom_(by_atom), state_(std::move(init)), goal_(goal), rng_(rng), trace_(trace) {
    goal_entailed_ = entails(state_, goal_);
  }

  void begin_tick(int tick) {
    tick_ = tick;
    memo_.clear();
    events_this_tick_ = 0;
  }

  Status evaluate_condition(const Atom& a) override {
    return holds(state_, a) ? Status::Success : Status::Failure;
  }

  Status tick_action(const Atom& a) override {
    if (auto it = memo_.find(a); it != memo_.end()) return it->second;
    Status s = step_action(a);
    memo_.emplace(a, s);
    return s;
  }

  void halt_action(const Atom& a) override {
    if (running_.erase(a)) log(EventKind::ActionHalted, a);
  }

  void apply_disturbance(const Disturbance& d) {
    state_ = bts::apply(state_, d.add, d.del);
    log(EventKind::DisturbanceApplied, std::nullopt);
    log_goal_transition();
  }

  const WorldState& state() const { return state_; }
  bool goal_entailed() const { return goal_entailed_; }
  bool any_running() const { return !running_.empty(); }
  int events_this_tick() const { return events_this_tick_; }

  double goal_fraction() const {
    if (goal_.empty()) return 1.0;
    std::size_t have = 0;
    for (const Atom& g : goal_)
      if (state_.contains(g)) ++have;
    return static_cast<double>(have) / static_cast<double>(goal_.size());
  }

 private:
  Status step_action(const Atom& a) {
    auto run = running_.find(a);
    if (run == running_.end()) {
      const GroundAction* g = by_atom_.at(a);
      if (!entails(state_, g->pre)) return Status::Failure;
      // Failure is drawn exactly once per attempt, at start, so stochastic
      // runs consume the same number of draws whatever the tree looks like.
      bool fail = rng_.uniform01() < g->p_fail;
      running_.emplace(a, RunningAction{g, g->duration, fail});
      log(EventKind::ActionStarted, a);
      return Status::Running;
    }
    RunningAction& ra = run->second;
    if (--ra.ticks_remaining > 0) return Status::Running;
    const GroundAction* g = ra.action;
    bool fail = ra.failure_predrawn;
    running_.erase(run);
    if (fail) {
      state_ = bts::apply(state_, g->fail_add, g->fail_del);
      log(EventKind::ActionFailed, a);
    } else {
      state_ = bts::apply(state_, g->add, g->del);
      log(EventKind::ActionSucceeded, a);
    }
    log_goal_transition();
    return fail ? Status::Failure : Status::Success;
  }

  void log(EventKind k, std::optional<Atom> a) {
    trace_.push_back({tick_, k, std::move(a)});
    ++events_this_tick_;
  }

  void log_goal_transition() {
    bool now = entails(state_, goal_);
    if (now != goal_entailed_) {
      goal_entailed_ = now;
      log(now ? EventKind::GoalReached : EventKind::GoalLost, std::nullopt);
    }
  }

  const std::map<Atom, const GroundAction*>& by_atom_;
  WorldState state_;
  const std::set<Atom>& goal_;
  RngStream& rng_;
  std::vector<EpisodeEvent>& trace_;
  std::map<Atom, RunningAction> running_;
  std::map<Atom, Status> memo_;
  bool goal_entailed_ = false;
  int tick_ = 0;
  int events_this_tick_ = 0;
};

inline void check_tree_atoms(const BtNode& n, const Domain& domain,
                             const std::map<Atom, const GroundAction*>& by_atom) {
  if (n.kind() == NodeKind::Action) {
    if (!by_atom.contains(n.atom()))
      throw UnknownAtomError(n.atom(), "tree action does not match any ground action");
  } else if (n.kind() == NodeKind::Condition) {
    if (!domain.predicates.contains({n.atom().name, static_cast<int>(n.atom().args.size())}))
      throw UnknownAtomError(n.atom(), "tree condition uses an undeclared predicate");
  }
  for (const auto& c : n.children()) check_tree_atoms(*c, domain, by_atom);
}

}  // namespace detail

/// Runs one episode: each tick applies due disturbances, propagates one root
/// tick, and stops with success once the goal is entailed and no disturbance
/// is still pending (so recovery behaviour stays observable), or with
/// failure at max_ticks.
///
/// Identical (tree, domain, scenario, seed) always produce an identical
/// EpisodeResult including the full trace. When a tick produced no events,
/// nothing is running and no disturbance is pending, every later tick would
/// repeat it exactly, so the runner skips ahead; `fast_forward = false`
/// forces the literal loop (the two are equivalent, which tests verify).
inline EpisodeResult run_episode(const NodePtr& tree, const Domain& domain,
                                 const Scenario& scenario, std::uint64_t seed,
                                 bool fast_forward = true) {
  auto violations = validate(tree);
  if (!violations.empty())
    throw std::invalid_argument("run_episode: invalid tree: " + violations.front().message);

  std::vector<GroundAction> ground = ground_actions(domain);
  std::map<Atom, const GroundAction*> by_atom;
  for (const auto& g : ground) by_atom.emplace(g.atom, &g);
  detail::check_tree_atoms(*tree, domain, by_atom);

  EpisodeResult result;
  RngStream rng(seed);
  detail::EpisodeSink sink(by_atom, scenario.init, scenario.goal, rng, result.trace);
  TickSession session(tree);

  std::size_t next_disturbance = 0;
  int tick = 1;
  result.ticks_used = scenario.max_ticks;
  while (tick <= scenario.max_ticks) {
    sink.begin_tick(tick);
    while (next_disturbance < scenario.disturbances.size() &&
           scenario.disturbances[next_disturbance].tick == tick) {
      sink.apply_disturbance(scenario.disturbances[next_disturbance]);
      ++next_disturbance;
    }
    session.tick(sink);
    bool pending = next_disturbance < scenario.disturbances.size();
    if (sink.goal_entailed() && !pending) {
      result.success = true;
      result.ticks_used = tick;
      break;
    }
    if (fast_forward && sink.events_this_tick() == 0 && !sink.any_running()) {
      if (!pending) break;  // quiescent forever: fails at max_ticks
      int jump = scenario.disturbances[next_disturbance].tick;
      tick = jump <= scenario.max_ticks ? jump : scenario.max_ticks + 1;
      continue;
    }
    ++tick;
  }
  result.goal_fraction_end = sink.goal_fraction();
  return result;
}

/// Fraction of successful episodes over seeds base_seed .. base_seed+episodes-1.
inline double estimate_success_rate(const NodePtr& tree, const Domain& domain,
                                    const Scenario& scenario, std::uint64_t base_seed,
                                    int episodes) {
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  int ok = 0;
  for (int i = 0; i < episodes; ++i)
    if (run_episode(tree, domain, scenario, base_seed + static_cast<std::uint64_t>(i)).success)
      ++ok;
  return static_cast<double>(ok) / static_cast<double>(episodes);
}

/// Line-oriented human report.
inline std::string report_text(const EpisodeResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", r.goal_fraction_end);
  std::string out = "success=" + std::string(r.success ? "true" : "false") +
                    " ticks=" + std::to_string(r.ticks_used) + " goal_fraction=" + buf + "\n";
  for (const auto& e : r.trace) {
    out += "  " + std::to_string(e.tick) + " " + to_string(e.kind);
    if (e.atom) out += " " + to_string(*e.atom);
    out += "\n";
  }
  return out;
}

/// Machine-readable report; field names match the EpisodeResult type.
inline nlohmann::json report_json(const EpisodeResult& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& e : r.trace) {
    nlohmann::json item{{"tick", e.tick}, {"event", to_string(e.kind)}};
    if (e.atom) item["atom"] = to_string(*e.atom);
    trace.push_back(std::move(item));
  }
  return nlohmann::json{{"success", r.success},
                        {"ticks_used", r.ticks_used},
                        {"goal_fraction_end", r.goal_fraction_end},
                        {"trace", std::move(trace)}};
}

}  // namespace bts
