#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "bts/bt.hpp"
#include "bts/rng.hpp"
#include "bts/simulator.hpp"
#include "bts/world.hpp"

namespace bts {

struct GpConfig {
  int population_size = 64;
  int generations_max = 100;
  int tournament_size = 3;
  int elitism_count = 2;
  double p_crossover = 0.6;
  double p_mutation = 0.3;  // remainder is plain reproduction
  double mutation_add_weight = 1.0;
  double mutation_delete_weight = 1.0;
  double mutation_change_weight = 1.0;
  int max_depth = 6;
  int max_nodes = 60;
  double w_goal = 100.0;
  double w_time = 10.0;
  double w_size = 0.5;
  int episodes_per_eval = 5;
  std::uint64_t seed = 0;
  std::vector<NodePtr> seed_trees;
  std::optional<double> target_fitness;
  bool allow_parallel = false;
};

inline std::vector<std::string> config_problems(const GpConfig& c) {
  std::vector<std::string> out;
  if (c.population_size < 1) out.push_back("population_size must be >= 1");
  if (c.generations_max < 1) out.push_back("generations_max must be >= 1");
  if (c.tournament_size < 1) out.push_back("tournament_size must be >= 1");
  if (c.elitism_count < 0) out.push_back("elitism_count must be >= 0");
  if (c.population_size <= c.elitism_count)
    out.push_back("population_size must exceed elitism_count");
  if (c.p_crossover < 0 || c.p_crossover > 1) out.push_back("p_crossover outside [0,1]");
  if (c.p_mutation < 0 || c.p_mutation > 1) out.push_back("p_mutation outside [0,1]");
  if (c.p_crossover + c.p_mutation > 1) out.push_back("p_crossover + p_mutation must be <= 1");
  if (c.mutation_add_weight < 0 || c.mutation_delete_weight < 0 || c.mutation_change_weight < 0)
    out.push_back("mutation kind weights must be >= 0");
  if (c.max_depth < 2) out.push_back("max_depth must be >= 2");
  if (c.max_nodes < 1) out.push_back("max_nodes must be >= 1");
  if (c.w_goal < 0 || c.w_time < 0 || c.w_size < 0) out.push_back("fitness weights must be >= 0");
  if (c.episodes_per_eval < 1) out.push_back("episodes_per_eval must be >= 1");
  return out;
}

struct ConfigError : std::runtime_error {
  std::string key;

  ConfigError(std::string k, const std::string& msg)
      : std::runtime_error("config key '" + k + "': " + msg), key(std::move(k)) {}
};

/// Reads `key = value` lines; '#' starts a comment, blank lines are skipped,
/// unknown keys are errors. seed_trees cannot be set from a file.
inline GpConfig parse_gp_config(std::string_view text) {
  GpConfig cfg;
  std::size_t start = 0;
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
      s.remove_suffix(1);
    return s;
  };
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    std::string_view line = text.substr(
        start, end == std::string_view::npos ? text.size() - start : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(std::string(line), "expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    auto as_int = [&](int& slot) {
      try {
        std::size_t used = 0;
        slot = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw ConfigError(key, "bad integer '" + value + "'");
      }
    };
    auto as_double = [&](double& slot) {
      try {
        std::size_t used = 0;
        slot = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw ConfigError(key, "bad number '" + value + "'");
      }
    };
    if (key == "population_size") as_int(cfg.population_size);
    else if (key == "generations_max") as_int(cfg.generations_max);
    else if (key == "tournament_size") as_int(cfg.tournament_size);
    else if (key == "elitism_count") as_int(cfg.elitism_count);
    else if (key == "p_crossover") as_double(cfg.p_crossover);
    else if (key == "p_mutation") as_double(cfg.p_mutation);
    else if (key == "mutation_add_weight") as_double(cfg.mutation_add_weight);
    else if (key == "mutation_delete_weight") as_double(cfg.mutation_delete_weight);
    else if (key == "mutation_change_weight") as_double(cfg.mutation_change_weight);
    else if (key == "max_depth") as_int(cfg.max_depth);
    else if (key == "max_nodes") as_int(cfg.max_nodes);
    else if (key == "w_goal") as_double(cfg.w_goal);
    else if (key == "w_time") as_double(cfg.w_time);
    else if (key == "w_size") as_double(cfg.w_size);
    else if (key == "episodes_per_eval") as_int(cfg.episodes_per_eval);
    else if (key == "seed") {
      try {
        std::size_t used = 0;
        cfg.seed = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw ConfigError(key, "bad seed '" + value + "'");
      }
    } else if (key == "target_fitness") {
      double v{};
      as_double(v);
      cfg.target_fitness = v;
    } else if (key == "allow_parallel") {
      if (value == "true") cfg.allow_parallel = true;
      else if (value == "false") cfg.allow_parallel = false;
      else throw ConfigError(key, "expected true or false");
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  auto problems = config_problems(cfg);
  if (!problems.empty()) throw ConfigError("config", problems.front());
  return cfg;
}

/// Decomposed fitness. total is exactly
/// w_goal*goal_term - w_time*time_term - w_size*size_term.
struct FitnessReport {
  double goal_term = 0.0;
  double time_term = 0.0;
  std::size_t size_term = 0;
  double total = 0.0;
};

struct GenerationStats {
  int generation = 0;
  double best_total = 0.0;
  double mean_total = 0.0;
  std::size_t best_size = 0;
  std::uint64_t evaluations = 0;  // cumulative fitness() calls
};

namespace detail {

/// Leaf sampling pool: every ground condition atom over the declared
/// predicates followed by every ground action atom, both in deterministic
/// order. Leaves are drawn uniformly over the union.
struct LeafPool {
  std::vector<Atom> conditions;
  std::vector<Atom> actions;

  explicit LeafPool(const Domain& d) {
    std::vector<std::string> objs(d.objects.begin(), d.objects.end());
    for (const auto& [pred, arity] : d.predicates) {
      std::vector<std::size_t> odo(static_cast<std::size_t>(arity), 0);
      auto advance = [&]() -> bool {
        for (std::size_t pos = odo.size(); pos-- > 0;) {
          if (++odo[pos] < objs.size()) return true;
          odo[pos] = 0;
        }
        return false;
      };
      if (arity > 0 && objs.empty()) continue;
      do {
        std::vector<std::string> args;
        for (std::size_t i : odo) args.push_back(objs[i]);
        conditions.push_back(Atom(pred, std::move(args)));
      } while (arity > 0 && advance());
    }
    for (const auto& g : ground_actions(d)) actions.push_back(g.atom);
  }

  std::size_t size() const { return conditions.size() + actions.size(); }

  NodePtr draw(RngStream& rng) const {
    std::size_t i = rng.below(size());
    if (i < conditions.size()) return BtNode::condition(conditions[i]);
    return BtNode::action(actions[i - conditions.size()]);
  }
};

inline NodePtr random_control(const LeafPool& pool, RngStream& rng, int depth, int max_depth,
                              bool allow_parallel) {
  int kinds = allow_parallel ? 3 : 2;
  std::uint64_t kind = rng.below(static_cast<std::uint64_t>(kinds));
  std::size_t n_children = 2 + rng.below(3);  // uniform 2..4
  std::vector<NodePtr> children;
  children.reserve(n_children);
  for (std::size_t i = 0; i < n_children; ++i) {
    // Grow-style: past the depth bound only leaves; otherwise a fair coin
    // decides between leaf and control.
    if (depth + 1 >= max_depth || rng.below(2) == 0)
      children.push_back(pool.draw(rng));
    else
      children.push_back(random_control(pool, rng, depth + 1, max_depth, allow_parallel));
  }
  if (kind == 0) return BtNode::sequence(std::move(children));
  if (kind == 1) return BtNode::fallback(std::move(children));
  int threshold = 1 + static_cast<int>(rng.below(n_children));
  return BtNode::parallel(threshold, std::move(children));
}

}  // namespace detail

/// Random control-rooted tree of depth <= max_depth. Control kinds sample
/// uniformly over sequence/fallback (parallel only when allow_parallel),
/// child counts uniformly over 2..4, leaves uniformly over the domain's
/// ground condition atoms and ground actions.
inline NodePtr random_tree(const Domain& domain, RngStream& rng, int max_depth,
                           bool allow_parallel = false) {
  if (max_depth < 2) throw std::invalid_argument("random_tree: max_depth must be >= 2");
  detail::LeafPool pool(domain);
  if (pool.actions.empty() || pool.conditions.empty())
    throw std::invalid_argument("random_tree: domain has no ground actions or no predicates");
  return detail::random_control(pool, rng, 1, max_depth, allow_parallel);
}

namespace detail {

inline bool within_bounds(const NodePtr& t, const GpConfig& cfg) {
  return node_count(t) <= static_cast<std::size_t>(cfg.max_nodes) &&
         depth(t) <= static_cast<std::size_t>(cfg.max_depth);
}

inline NodePtr mutate_once(const NodePtr& tree, const LeafPool& pool, RngStream& rng,
                           const GpConfig& cfg, int kind) {
  if (kind == 0) {  // ADD: new leaf at a uniform (control node, index) slot
    std::vector<std::pair<NodePath, std::size_t>> slots;
    NodePath cur;
    auto walk = [&](auto&& self, const BtNode& n) -> void {
      if (n.is_control())
        for (std::size_t i = 0; i <= n.children().size(); ++i) slots.push_back({cur, i});
      for (std::size_t i = 0; i < n.children().size(); ++i) {
        cur.push_back(i);
        self(self, *n.children()[i]);
        cur.pop_back();
      }
    };
    walk(walk, *tree);
    if (slots.empty()) return nullptr;  // lone leaf: nowhere to insert
    auto [path, index] = slots[rng.below(slots.size())];
    return insert_child(tree, path, index, pool.draw(rng));
  }
  if (kind == 1) {  // DELETE: uniform non-root node, cascading removal
    std::vector<NodePath> paths = all_paths(tree);
    if (paths.size() <= 1) return nullptr;
    const NodePath& victim = paths[1 + rng.below(paths.size() - 1)];
    try {
      return delete_node(tree, victim);
    } catch (const TreeEditError&) {
      return nullptr;  // would delete the whole tree (or break a threshold)
    }
  }
  // CHANGE: rewrite a uniform node in kind-preserving fashion.
  std::vector<NodePath> paths = all_paths(tree);
  const NodePath& at = paths[rng.below(paths.size())];
  NodePtr node = get_subtree(tree, at);
  if (node->is_leaf()) {
    for (int tries = 0; tries < 16; ++tries) {
      NodePtr leaf = pool.draw(rng);
      if (leaf->kind() != node->kind() || leaf->atom() != node->atom())
        return replace_subtree(tree, at, leaf);
    }
    return nullptr;  // pool too small to find a different leaf
  }
  if (node->kind() == NodeKind::Parallel && !cfg.allow_parallel) return nullptr;
  std::vector<NodeKind> others;
  for (NodeKind k : {NodeKind::Sequence, NodeKind::Fallback, NodeKind::Parallel}) {
    if (k == node->kind()) continue;
    if (k == NodeKind::Parallel && !cfg.allow_parallel) continue;
    others.push_back(k);
  }
  NodeKind pick = others[rng.below(others.size())];
  auto ch = node->children();
  NodePtr replacement;
  if (pick == NodeKind::Sequence) replacement = BtNode::sequence(std::move(ch));
  else if (pick == NodeKind::Fallback) replacement = BtNode::fallback(std::move(ch));
  else
    replacement = BtNode::parallel(1 + static_cast<int>(rng.below(node->children().size())),
                                   std::move(ch));
  return replace_subtree(tree, at, replacement);
}

}  // namespace detail

/// One mutation drawn from the add/delete/change kinds by weight. Results
/// violating the validity or size bounds are resampled up to 20 times;
/// after that the input comes back unchanged.
inline NodePtr mutate(const NodePtr& tree, const Domain& domain, RngStream& rng,
                      const GpConfig& cfg) {
  detail::LeafPool pool(domain);
  double wsum = cfg.mutation_add_weight + cfg.mutation_delete_weight + cfg.mutation_change_weight;
  if (wsum <= 0.0) return tree;
  for (int attempt = 0; attempt < 20; ++attempt) {
    double r = rng.uniform01() * wsum;
    int kind = r < cfg.mutation_add_weight                              ? 0
               : r < cfg.mutation_add_weight + cfg.mutation_delete_weight ? 1
                                                                          : 2;
    NodePtr out = detail::mutate_once(tree, pool, rng, cfg, kind);
    if (out && validate(out).empty() && detail::within_bounds(out, cfg)) return out;
  }
  return tree;
}

/// Subtree swap at a uniform random node of each parent (roots included).
/// An offspring that breaks the size bounds is replaced by its parent.
inline std::pair<NodePtr, NodePtr> crossover(const NodePtr& a, const NodePtr& b, RngStream& rng,
                                             const GpConfig& cfg) {
  std::vector<NodePath> pa = all_paths(a);
  std::vector<NodePath> pb = all_paths(b);
  const NodePath& cut_a = pa[rng.below(pa.size())];
  const NodePath& cut_b = pb[rng.below(pb.size())];
  NodePtr sub_a = get_subtree(a, cut_a);
  NodePtr sub_b = get_subtree(b, cut_b);
  NodePtr c1 = replace_subtree(a, cut_a, sub_b);
  NodePtr c2 = replace_subtree(b, cut_b, sub_a);
  if (!detail::within_bounds(c1, cfg)) c1 = a;
  if (!detail::within_bounds(c2, cfg)) c2 = b;
  return {c1, c2};
}

/// Mean goal fraction, mean normalized run time and tree size over
/// episodes_per_eval seeded episodes. Deterministic given its inputs.
inline FitnessReport fitness(const NodePtr& tree, const Domain& domain, const Scenario& scenario,
                             const GpConfig& cfg, std::uint64_t eval_seed) {
  FitnessReport report;
  for (int i = 0; i < cfg.episodes_per_eval; ++i) {
    EpisodeResult ep = run_episode(tree, domain, scenario, eval_seed + static_cast<std::uint64_t>(i));
    report.goal_term += ep.goal_fraction_end;
    report.time_term += static_cast<double>(ep.ticks_used) / scenario.max_ticks;
  }
  report.goal_term /= cfg.episodes_per_eval;
  report.time_term /= cfg.episodes_per_eval;
  report.size_term = node_count(tree);
  report.total = cfg.w_goal * report.goal_term - cfg.w_time * report.time_term -
                 cfg.w_size * static_cast<double>(report.size_term);
  return report;
}

struct Individual {
  NodePtr tree;
  FitnessReport fit;
  std::size_t size = 0;  // node_count(tree), cached for tie-breaks
};

namespace detail {

/// Selection order: higher total, then smaller tree, then earlier index.
inline bool better(const Individual& a, std::size_t ia, const Individual& b, std::size_t ib) {
  if (a.fit.total != b.fit.total) return a.fit.total > b.fit.total;
  if (a.size != b.size) return a.size < b.size;
  return ia < ib;
}

}  // namespace detail

/// Tournament of k uniform draws with replacement; returns the winner's index.
inline std::size_t select_tournament(const std::vector<Individual>& population, RngStream& rng,
                                     int k) {
  if (population.empty()) throw std::invalid_argument("empty population");
  if (k < 1) throw std::invalid_argument("tournament size must be >= 1");
  std::size_t best = rng.below(population.size());
  for (int i = 1; i < k; ++i) {
    std::size_t challenger = rng.below(population.size());
    if (detail::better(population[challenger], challenger, population[best], best))
      best = challenger;
  }
  return best;
}

struct EvolveResult {
  NodePtr best;
  FitnessReport best_fit;
  std::vector<GenerationStats> stats;
};

/// Generational evolution with elitism.
///
/// Generation 0 is the deduplicated seed trees padded with random trees;
/// every later generation keeps the elitism_count best and fills up with
/// crossover/mutation/reproduction offspring chosen by tournament.
///
/// Reproducibility contract: every random draw comes from one stream seeded
/// with cfg.seed, and each individual's evaluation seed derives from
/// (cfg.seed, generation, slot), never from evaluation order — so `jobs`
/// changes wall time, not results.
inline EvolveResult evolve(const Domain& domain, const Scenario& scenario, const GpConfig& cfg,
                           int jobs = 1) {
  auto problems = config_problems(cfg);
  if (!problems.empty()) throw std::invalid_argument("invalid GP config: " + problems.front());
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");

  RngStream rng(cfg.seed);
  auto eval_seed = [&](int generation, std::size_t slot) {
    std::uint64_t h = RngStream::mix(cfg.seed ^ RngStream::mix(static_cast<std::uint64_t>(generation)));
    return RngStream::mix(h ^ (0x9E3779B97F4A7C15ULL * (slot + 1)));
  };

  std::vector<Individual> population;
  population.reserve(static_cast<std::size_t>(cfg.population_size));
  for (const NodePtr& s : cfg.seed_trees) {
    if (static_cast<int>(population.size()) >= cfg.population_size) break;
    bool dup = false;
    for (const auto& p : population) dup = dup || structural_equal(p.tree, s);
    if (dup) continue;
    auto v = validate(s);
    if (!v.empty()) throw std::invalid_argument("invalid seed tree: " + v.front().message);
    population.push_back({s, {}, node_count(s)});
  }
  while (static_cast<int>(population.size()) < cfg.population_size) {
    NodePtr t = random_tree(domain, rng, cfg.max_depth, cfg.allow_parallel);
    if (node_count(t) > static_cast<std::size_t>(cfg.max_nodes)) continue;
    population.push_back({t, {}, node_count(t)});
  }

  std::uint64_t evaluations = 0;
  auto evaluate = [&](std::vector<Individual>& pop, int generation,
                      const std::vector<std::size_t>& slots) {
    auto work = [&](std::size_t worker) {
      for (std::size_t i = worker; i < slots.size(); i += static_cast<std::size_t>(jobs)) {
        std::size_t slot = slots[i];
        pop[slot].fit = fitness(pop[slot].tree, domain, scenario, cfg, eval_seed(generation, slot));
      }
    };
    if (jobs == 1 || slots.size() <= 1) {
      work(0);
    } else {
      std::vector<std::thread> threads;
      for (int w = 0; w < jobs; ++w) threads.emplace_back(work, static_cast<std::size_t>(w));
      for (auto& t : threads) t.join();
    }
    evaluations += slots.size();
  };

  std::vector<std::size_t> all_slots(population.size());
  for (std::size_t i = 0; i < all_slots.size(); ++i) all_slots[i] = i;
  evaluate(population, 0, all_slots);

  Individual best_ever = population.front();
  EvolveResult result;
  auto account = [&](int generation) {
    const Individual* best = &population.front();
    std::size_t best_idx = 0;
    double sum = 0;
    for (std::size_t i = 0; i < population.size(); ++i) {
      sum += population[i].fit.total;
      if (detail::better(population[i], i, *best, best_idx)) {
        best = &population[i];
        best_idx = i;
      }
    }
    if (detail::better(*best, 1, best_ever, 0)) best_ever = *best;  // first winner kept on ties
    result.stats.push_back({generation, best->fit.total,
                            sum / static_cast<double>(population.size()), best->size,
                            evaluations});
    return cfg.target_fitness && best_ever.fit.total >= *cfg.target_fitness;
  };

  bool done = account(0);
  for (int gen = 1; gen < cfg.generations_max && !done; ++gen) {
    std::vector<std::size_t> order(population.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return detail::better(population[x], x, population[y], y);
    });
    std::vector<Individual> next;
    std::vector<std::size_t> fresh;
    next.reserve(population.size());
    for (int e = 0; e < cfg.elitism_count; ++e)
      next.push_back(population[order[static_cast<std::size_t>(e)]]);  // fitness carried
    while (static_cast<int>(next.size()) < cfg.population_size) {
      double r = rng.uniform01();
      if (r < cfg.p_crossover) {
        const Individual& pa = population[select_tournament(population, rng, cfg.tournament_size)];
        const Individual& pb = population[select_tournament(population, rng, cfg.tournament_size)];
        auto [c1, c2] = crossover(pa.tree, pb.tree, rng, cfg);
        fresh.push_back(next.size());
        next.push_back({c1, {}, node_count(c1)});
        if (static_cast<int>(next.size()) < cfg.population_size) {
          fresh.push_back(next.size());
          next.push_back({c2, {}, node_count(c2)});
        }
      } else if (r < cfg.p_crossover + cfg.p_mutation) {
        const Individual& p = population[select_tournament(population, rng, cfg.tournament_size)];
        NodePtr m = mutate(p.tree, domain, rng, cfg);
        fresh.push_back(next.size());
        next.push_back({m, {}, node_count(m)});
      } else {
        const Individual& p = population[select_tournament(population, rng, cfg.tournament_size)];
        next.push_back(p);  // reproduction keeps the evaluated fitness
      }
    }
    population = std::move(next);
    evaluate(population, gen, fresh);
    done = account(gen);
  }
  result.best = best_ever.tree;
  result.best_fit = best_ever.fit;
  return result;
}

/// Stats log header used by the CLI and the bench harness.
inline std::string stats_csv(const std::vector<GenerationStats>& stats) {
  std::string out = "generation,best,mean,best_size,evaluations\n";
  char buf[96];
  for (const auto& s : stats) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%zu,%llu\n", s.generation, s.best_total,
                  s.mean_total, s.best_size, static_cast<unsigned long long>(s.evaluations));
    out += buf;
  }
  return out;
}

}  // namespace bts
