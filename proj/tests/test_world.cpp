#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>

#include "bts/world.hpp"
#include "bts/world_text.hpp"
#include "domains.hpp"

using namespace bts;
using testsupport::kFetchDomain;
using testsupport::kFetchScenario;

namespace {

Atom A(const std::string& n, std::vector<std::string> args = {}) {
  return Atom(n, std::move(args));
}

}  // namespace

TEST_CASE("parse_domain: FETCH listing") {
  Domain d = parse_domain(kFetchDomain);
  CHECK(d.name == "fetch");
  CHECK(d.actions.size() == 3);
  CHECK(d.predicates.size() == 5);
  CHECK(d.objects == std::set<std::string>{"cube1", "loc1", "delivery"});
  const ActionTemplate& pick = d.actions[1];
  CHECK(pick.name == "pick");
  CHECK(pick.params == std::vector<std::string>{"?i", "?l"});
  CHECK(pick.duration == 1);
  CHECK(pick.fail_add.size() == 2);
  CHECK(pick.fail_del.size() == 1);
  CHECK(d.actions[0].duration == 2);
}

TEST_CASE("parse_domain: minimal and malformed inputs") {
  Domain d = parse_domain("(domain tiny (objects) (predicates (flag 0)))");
  CHECK(d.actions.empty());
  CHECK(d.predicates.size() == 1);

  // unknown predicate in an action
  CHECK_THROWS_AS(parse_domain("(domain x (objects a) (predicates (p 1))"
                               " (action go (params ?v) (pre (q ?v)) (add (p ?v)) (del)))"),
                  TextError);
  // arity mismatch
  CHECK_THROWS_AS(parse_domain("(domain x (objects a) (predicates (p 1))"
                               " (action go (params ?v) (pre (p ?v ?v)) (add (p ?v)) (del)))"),
                  TextError);
  // unbound variable
  CHECK_THROWS_AS(parse_domain("(domain x (objects a) (predicates (p 1))"
                               " (action go (params ?v) (pre) (add (p ?w)) (del)))"),
                  TextError);
  // duplicate action names
  CHECK_THROWS_AS(parse_domain("(domain x (objects a) (predicates (p 1))"
                               " (action go (params ?v) (add (p ?v)))"
                               " (action go (params ?v) (add (p ?v))))"),
                  TextError);
  // pfail outside [0,1]
  CHECK_THROWS_AS(parse_domain("(domain x (objects a) (predicates (p 1))"
                               " (action go (params ?v) (add (p ?v)) (pfail 1.5)))"),
                  TextError);
  // add/del overlap on the identical pattern
  CHECK_THROWS_AS(parse_domain("(domain x (objects a) (predicates (p 1))"
                               " (action go (params ?v) (add (p ?v)) (del (p ?v))))"),
                  TextError);
  // unclosed parenthesis
  CHECK_THROWS_AS(parse_domain("(domain x (objects a)"), TextError);
}

TEST_CASE("parse_scenario: declarations are enforced") {
  Domain d = parse_domain(kFetchDomain);
  Scenario s = parse_scenario(kFetchScenario, d);
  CHECK(s.name == "s1");
  CHECK(s.init.size() == 3);
  CHECK(s.goal == std::set<Atom>{A("delivered", {"cube1"})});
  CHECK(s.max_ticks == 200);

  // unknown object: the error names the atom's offender
  try {
    parse_scenario("(scenario bad (init (item_at cube9 loc1)) (goal) (maxticks 5))", d);
    FAIL("expected a semantic error");
  } catch (const TextError& e) {
    CHECK(std::string(e.what()).find("cube9") != std::string::npos);
  }
  CHECK_THROWS_AS(
      parse_scenario("(scenario bad (init (nosuch cube1)) (goal) (maxticks 5))", d),
      TextError);
  CHECK_THROWS_AS(parse_scenario("(scenario bad (init) (goal))", d), TextError);

  // disturbance ticks must increase strictly
  CHECK_THROWS_AS(parse_scenario("(scenario bad (init) (goal)"
                                 " (disturb 5 (del (hand_empty)))"
                                 " (disturb 5 (add (hand_empty))) (maxticks 9))",
                                 d),
                  TextError);
  Scenario ok = parse_scenario("(scenario ok (init) (goal)"
                               " (disturb 3 (add (hand_empty)))"
                               " (disturb 8 (del (hand_empty))) (maxticks 9))",
                               d);
  CHECK(ok.disturbances.size() == 2);
}

TEST_CASE("parse_trace: chaining and declarations") {
  Domain d = parse_domain(kFetchDomain);
  const char* good =
      "(trace t1 (step (pre (hand_empty) (robot_at loc1) (item_at cube1 loc1))"
      " (act (pick cube1 loc1))"
      " (post (robot_at loc1) (holding cube1))))";
  DemoTrace t = parse_trace(good, &d);
  REQUIRE(t.size() == 1);
  CHECK(t[0].action == A("pick", {"cube1", "loc1"}));
  CHECK(t[0].before.size() == 3);

  const char* broken =
      "(trace t1"
      " (step (pre (hand_empty)) (act (pick cube1 loc1)) (post (holding cube1)))"
      " (step (pre (hand_empty)) (act (place cube1)) (post (delivered cube1))))";
  try {
    parse_trace(broken, &d);
    FAIL("expected a chaining error");
  } catch (const TextError& e) {
    CHECK(std::string(e.what()).find("step 2") != std::string::npos);
  }

  // without a domain, syntax and chaining still hold but nothing is declared
  CHECK_NOTHROW(parse_trace("(trace t (step (pre (anything x)) (act (go x))"
                            " (post (anything x))))"));
}

TEST_CASE("holds / entails / apply") {
  WorldState empty;
  CHECK_FALSE(holds(empty, A("a")));
  WorldState s{A("p")};
  CHECK(apply(s, std::vector<Atom>{A("q")}, std::vector<Atom>{A("p")}) == WorldState{A("q")});
  CHECK(entails(s, std::vector<Atom>{}));
  CHECK(entails(s, std::vector<Atom>{A("p")}));
  CHECK_FALSE(entails(s, std::vector<Atom>{A("p"), A("q")}));
  CHECK(apply(s, std::vector<Atom>{}, std::vector<Atom>{}) == s);

  // apply then inverse restores the original when del ⊆ state, add ∩ state = ∅
  RngStream rng(31);
  for (int i = 0; i < 200; ++i) {
    WorldState state;
    for (int f = 0; f < 6; ++f)
      if (rng.below(2)) state.insert(A("f" + std::to_string(f)));
    std::vector<Atom> add, del;
    for (int f = 0; f < 6; ++f) {
      Atom a = A("f" + std::to_string(f));
      if (state.contains(a)) {
        if (rng.below(2)) del.push_back(a);
      } else if (rng.below(2)) {
        add.push_back(a);
      }
    }
    WorldState forward = apply(state, add, del);
    CHECK(apply(forward, del, add) == state);
  }
}

TEST_CASE("ground_actions: order and counts") {
  Domain d = parse_domain(kFetchDomain);
  auto ground = ground_actions(d);
  CHECK(ground.size() == 21);  // 9 move + 9 pick + 3 place

  std::size_t moves = 0;
  for (const auto& g : ground) moves += g.atom.name == "move";
  CHECK(moves == 9);

  // templates in declaration order, bindings lexicographic
  CHECK(ground[0].atom == A("move", {"cube1", "cube1"}));
  CHECK(ground[1].atom == A("move", {"cube1", "delivery"}));
  CHECK(ground[2].atom == A("move", {"cube1", "loc1"}));
  CHECK(ground[3].atom == A("move", {"delivery", "cube1"}));
  CHECK(ground[20].atom == A("place", {"loc1"}));

  // Σ |objects|^|params| holds exactly
  std::size_t expect = 0;
  for (const auto& t : d.actions) {
    std::size_t n = 1;
    for (std::size_t i = 0; i < t.params.size(); ++i) n *= d.objects.size();
    expect += n;
  }
  CHECK(ground.size() == expect);

  // zero objects: any template with parameters grounds to nothing
  Domain none = parse_domain("(domain e (objects) (predicates (p 1))"
                             " (action go (params ?v) (add (p ?v))))");
  CHECK(ground_actions(none).empty());
}

TEST_CASE("achievers") {
  Domain d = parse_domain(kFetchDomain);
  auto ground = ground_actions(d);

  auto deliver = achievers(ground, A("delivered", {"cube1"}));
  REQUIRE(deliver.size() == 1);
  CHECK(deliver[0].atom == A("place", {"cube1"}));

  // every pick(cube1, L) adds holding(cube1); bindings stay lexicographic
  auto hold = achievers(ground, A("holding", {"cube1"}));
  REQUIRE(hold.size() == 3);
  CHECK(hold[0].atom == A("pick", {"cube1", "cube1"}));
  CHECK(hold[1].atom == A("pick", {"cube1", "delivery"}));
  CHECK(hold[2].atom == A("pick", {"cube1", "loc1"}));

  CHECK(achievers(ground, A("item_at", {"cube1", "loc1"})).empty());
  for (const auto& g : hold) {
    bool adds = false;
    for (const auto& a : g.add) adds = adds || a == A("holding", {"cube1"});
    CHECK(adds);
  }
}

TEST_CASE("enumerate_reachable") {
  Domain d = parse_domain(kFetchDomain);
  Scenario s = parse_scenario(kFetchScenario, d);

  // frozen oracle value: 3 robot positions x 3 item phases
  CHECK(enumerate_reachable(d, s.init, 10000).size() == 9);
  CHECK_THROWS_AS(enumerate_reachable(d, s.init, 1), CapExceededError);

  Domain inert = parse_domain("(domain e (objects a) (predicates (p 1)))");
  WorldState init{A("p", {"a"})};
  CHECK(enumerate_reachable(inert, init, 10) == std::set<WorldState>{init});
}

TEST_CASE("serialize_domain round-trips") {
  Domain d = parse_domain(kFetchDomain);
  std::string text = serialize_domain(d);
  Domain back = parse_domain(text);
  CHECK(back.name == d.name);
  CHECK(back.objects == d.objects);
  CHECK(back.predicates == d.predicates);
  REQUIRE(back.actions.size() == d.actions.size());
  for (std::size_t i = 0; i < d.actions.size(); ++i) {
    CHECK(back.actions[i].name == d.actions[i].name);
    CHECK(back.actions[i].params == d.actions[i].params);
    CHECK(back.actions[i].pre == d.actions[i].pre);
    CHECK(back.actions[i].add == d.actions[i].add);
    CHECK(back.actions[i].del == d.actions[i].del);
    CHECK(back.actions[i].fail_add == d.actions[i].fail_add);
    CHECK(back.actions[i].fail_del == d.actions[i].fail_del);
    CHECK(back.actions[i].duration == d.actions[i].duration);
    CHECK(back.actions[i].p_fail == d.actions[i].p_fail);
  }
  CHECK(serialize_domain(back) == text);
}
