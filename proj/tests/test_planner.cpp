#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <string>

#include "bts/planner.hpp"
#include "bts/simulator.hpp"
#include "bts/world_text.hpp"
#include "domains.hpp"

using namespace bts;
using testsupport::kFetchDomain;
using testsupport::kFetchScenario;
using testsupport::kStack3Domain;
using testsupport::kStack3Scenario;

namespace {

Atom A(const std::string& n, std::vector<std::string> args = {}) {
  return Atom(n, std::move(args));
}

/// Static soundness of the backward-chained shape: every action leaf sits
/// last in a sequence whose earlier siblings check all its preconditions
/// (either as a bare condition or as the head of an expansion fallback).
void check_structure(const NodePtr& node, const std::vector<GroundAction>& ground) {
  if (node->kind() == NodeKind::Sequence && node->children().back()->kind() == NodeKind::Action) {
    const Atom& atom = node->children().back()->atom();
    const GroundAction* action = nullptr;
    for (const auto& g : ground)
      if (g.atom == atom) action = &g;
    REQUIRE(action != nullptr);
    std::set<Atom> checked;
    for (const auto& sib : node->children()) {
      if (sib->kind() == NodeKind::Condition) checked.insert(sib->atom());
      if (sib->kind() == NodeKind::Fallback &&
          sib->children().front()->kind() == NodeKind::Condition)
        checked.insert(sib->children().front()->atom());
    }
    for (const auto& p : action->pre) REQUIRE(checked.contains(p));
  }
  for (const auto& c : node->children()) check_structure(c, ground);
}

}  // namespace

TEST_CASE("expand_condition: base cases") {
  Domain d = parse_domain(kFetchDomain);

  // no achiever: a bare condition check
  NodePtr bare = expand_condition(d, A("item_at", {"cube1", "loc1"}), {});
  CHECK(bare->kind() == NodeKind::Condition);

  // achiever present: fallback of the condition and one sequence per achiever
  NodePtr exp = expand_condition(d, A("delivered", {"cube1"}), {});
  REQUIRE(exp->kind() == NodeKind::Fallback);
  CHECK(exp->children().front()->atom() == A("delivered", {"cube1"}));
  REQUIRE(exp->children().size() == 2);  // exactly one achiever: place(cube1)
  const NodePtr& branch = exp->children()[1];
  REQUIRE(branch->kind() == NodeKind::Sequence);
  CHECK(branch->children().back()->kind() == NodeKind::Action);
  CHECK(branch->children().back()->atom() == A("place", {"cube1"}));

  // visited atoms do not expand again
  NodePtr cut = expand_condition(d, A("delivered", {"cube1"}), {A("delivered", {"cube1"})});
  CHECK(cut->kind() == NodeKind::Condition);

  // exhausted depth budget degrades to a bare condition
  PlannerConfig tight;
  tight.max_expansion_depth = 1;
  NodePtr shallow = expand_condition(d, A("delivered", {"cube1"}), {}, tight);
  REQUIRE(shallow->kind() == NodeKind::Fallback);
  for (const auto& c : shallow->children()[1]->children())
    CHECK(c->is_leaf());  // sub-conditions stayed unexpanded
}

TEST_CASE("expand_condition: cyclic domain truncates via the visited set") {
  Domain d = parse_domain("(domain loop (objects) (predicates (a 0))"
                          " (action mk (params) (pre (a)) (add (a)) (del)))");
  NodePtr t = expand_condition(d, A("a"), {});
  REQUIRE(t->kind() == NodeKind::Fallback);
  const NodePtr& branch = t->children()[1];
  REQUIRE(branch->kind() == NodeKind::Sequence);
  CHECK(branch->children()[0]->kind() == NodeKind::Condition);  // inner a left bare
  CHECK(branch->children()[0]->atom() == A("a"));
  CHECK(branch->children()[1]->atom() == A("mk"));
  CHECK(node_count(t) == 5);
}

TEST_CASE("plan_bt: structure, determinism, frozen sizes") {
  Domain fetch = parse_domain(kFetchDomain);
  NodePtr tree = plan_bt(fetch, {A("delivered", {"cube1"})});
  CHECK(validate(tree).empty());
  CHECK(node_count(tree) == 1707);  // frozen by the pre-build oracle
  CHECK(depth(tree) == 15);
  CHECK(structural_equal(tree, plan_bt(fetch, {A("delivered", {"cube1"})})));
  check_structure(tree, ground_actions(fetch));

  Domain stack3 = parse_domain(kStack3Domain);
  NodePtr tower = plan_bt(stack3, {A("on", {"c2", "c1"}), A("on", {"c3", "c2"})});
  CHECK(node_count(tower) == 51);  // frozen by the pre-build oracle
  CHECK(depth(tower) == 8);
  REQUIRE(tower->kind() == NodeKind::Sequence);  // conjunctive goal, lexicographic order
  REQUIRE(tower->children().size() == 2);
  CHECK(tower->children()[0]->children()[0]->atom() == A("on", {"c2", "c1"}));
  CHECK(tower->children()[1]->children()[0]->atom() == A("on", {"c3", "c2"}));
  check_structure(tower, ground_actions(stack3));

  CHECK_THROWS_AS(plan_bt(fetch, {}), std::invalid_argument);
}

TEST_CASE("plan_bt: never-achievable goal atom fails in deprived states") {
  Domain d = parse_domain(kFetchDomain);
  Scenario s = parse_scenario(kFetchScenario, d);
  s.goal = {A("item_at", {"cube1", "delivery"})};  // nothing ever adds item_at
  NodePtr tree = plan_bt(d, s.goal);
  CHECK(tree->kind() == NodeKind::Condition);
  EpisodeResult r = run_episode(tree, d, s, 1);
  CHECK_FALSE(r.success);
  CHECK(std::count_if(r.trace.begin(), r.trace.end(), [](const EpisodeEvent& e) {
          return e.kind == EventKind::ActionStarted;
        }) == 0);
}

TEST_CASE("plan_bt: FETCH soundness from every reachable state") {
  Domain d = parse_domain(kFetchDomain);
  Scenario s = parse_scenario(kFetchScenario, d);
  NodePtr tree = plan_bt(d, s.goal);
  auto states = enumerate_reachable(d, s.init, 10000);
  REQUIRE(states.size() == 9);
  for (const auto& st : states) {
    Scenario from = s;
    from.init = st;
    CAPTURE(st.size());
    REQUIRE(run_episode(tree, d, from, 7).success);
  }
}

TEST_CASE("plan_bt: achiever order FEWEST_PRECONDITIONS") {
  // `easy` is declared after `hard` but has no preconditions
  Domain d = parse_domain("(domain x (objects a) (predicates (p 1) (q 1))"
                          " (action hard (params ?v) (pre (q ?v)) (add (p ?v)) (del))"
                          " (action easy (params ?v) (pre) (add (p ?v)) (del)))");
  PlannerConfig decl;
  NodePtr by_decl = expand_condition(d, A("p", {"a"}), {}, decl);
  REQUIRE(by_decl->children().size() == 3);
  CHECK(by_decl->children()[1]->children().back()->atom() == A("hard", {"a"}));

  PlannerConfig fewest;
  fewest.achiever_order = AchieverOrder::FewestPreconditions;
  NodePtr by_pre = expand_condition(d, A("p", {"a"}), {}, fewest);
  CHECK(by_pre->children()[1]->children().back()->atom() == A("easy", {"a"}));
  CHECK(by_pre->children()[2]->children().back()->atom() == A("hard", {"a"}));
}
