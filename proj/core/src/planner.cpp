#include "affordsim/planner.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <unordered_map>

#include "affordsim/rng.hpp"

namespace affordsim::planner {

using pddl::Domain;
using pddl::Formula;
using pddl::GroundAction;
using pddl::GroundAtom;
using pddl::Problem;
using pddl::State;

std::string PlanStep::signature() const {
  std::string s = "(" + action;
  for (const auto& a : args) {
    s += ' ';
    s += a;
  }
  s += ')';
  return s;
}

namespace {

// ---- goal compilation -----------------------------------------------------

struct Disjunct {
  std::vector<GroundAtom> pos;
  std::vector<GroundAtom> neg;
};

using Binding = std::map<std::string, std::string>;

GroundAtom bind_atom(const pddl::Atom& a, const Binding& env) {
  GroundAtom g;
  g.pred = a.pred;
  for (const auto& arg : a.args) {
    if (!arg.empty() && arg[0] == '?') {
      g.args.push_back(env.at(arg));
    } else {
      g.args.push_back(arg);
    }
  }
  return g;
}

// DNF of the goal with quantifiers expanded over the problem objects.
// `negate` tracks polarity so (not (exists ...)) and friends work too.
class GoalCompiler {
 public:
  GoalCompiler(const Domain& d, const Problem& p, std::size_t cap)
      : d_(d), p_(p), cap_(cap) {
    // Static literals (predicates no action touches) are decided against the
    // initial state right away. Quantified goals over type-constant guards
    // would otherwise cross into astronomically many dead disjuncts.
    for (const auto& a : d.actions) {
      for (const auto& atom : a.add) fluent_.insert(atom.pred);
      for (const auto& atom : a.del) fluent_.insert(atom.pred);
    }
    for (const auto& atom : p.init) init_.insert(GroundAtom{atom.pred, atom.args});
  }

  std::vector<Disjunct> compile(const Formula& goal) {
    Binding env;
    auto dnf = walk(goal, false, env);
    // Drop internally contradictory disjuncts and exact duplicates.
    std::vector<Disjunct> out;
    for (auto& dj : dnf) {
      std::sort(dj.pos.begin(), dj.pos.end());
      dj.pos.erase(std::unique(dj.pos.begin(), dj.pos.end()), dj.pos.end());
      std::sort(dj.neg.begin(), dj.neg.end());
      dj.neg.erase(std::unique(dj.neg.begin(), dj.neg.end()), dj.neg.end());
      bool contradiction = false;
      for (const auto& a : dj.pos) {
        if (std::binary_search(dj.neg.begin(), dj.neg.end(), a)) {
          contradiction = true;
          break;
        }
      }
      if (contradiction) continue;
      bool dup = false;
      for (const auto& seen : out) {
        if (seen.pos == dj.pos && seen.neg == dj.neg) {
          dup = true;
          break;
        }
      }
      if (!dup) out.push_back(std::move(dj));
    }
    return out;
  }

 private:
  std::vector<Disjunct> walk(const Formula& f, bool negate, Binding& env) {
    switch (f.kind) {
      case Formula::Kind::Literal: {
        bool neg = f.lit.negated != negate;
        GroundAtom g = bind_atom(f.lit.atom, env);
        if (!fluent_.count(g.pred)) {
          bool holds = init_.count(g) > 0;
          if (holds != neg) return {Disjunct{}};  // true forever: no constraint
          return {};                              // false forever: dead branch
        }
        Disjunct dj;
        (neg ? dj.neg : dj.pos).push_back(std::move(g));
        return {dj};
      }
      case Formula::Kind::Not:
        return walk(f.children[0], !negate, env);
      case Formula::Kind::And: {
        // under negation a conjunction is a disjunction of negated parts
        if (negate) {
          std::vector<Disjunct> out;
          for (const auto& c : f.children) {
            append(out, walk(c, true, env));
          }
          return out;
        }
        std::vector<Disjunct> acc = {Disjunct{}};
        for (const auto& c : f.children) {
          acc = cross(acc, walk(c, false, env));
        }
        return acc;
      }
      case Formula::Kind::Exists:
      case Formula::Kind::Forall: {
        bool disjunctive = (f.kind == Formula::Kind::Exists) != negate;
        std::function<std::vector<Disjunct>(std::size_t)> go =
            [&](std::size_t vi) -> std::vector<Disjunct> {
          if (vi == f.vars.size()) return walk(f.children[0], negate, env);
          std::vector<Disjunct> acc;
          if (!disjunctive) acc = {Disjunct{}};
          for (const auto& obj : p_.objects_of_type(d_, f.vars[vi].type)) {
            env[f.vars[vi].name] = obj;
            auto sub = go(vi + 1);
            env.erase(f.vars[vi].name);
            if (disjunctive) {
              append(acc, std::move(sub));
            } else {
              acc = cross(acc, sub);
            }
          }
          return acc;
        };
        return go(0);
      }
    }
    return {};
  }

  void append(std::vector<Disjunct>& acc, std::vector<Disjunct> more) {
    for (auto& dj : more) {
      acc.push_back(std::move(dj));
      check(acc.size());
    }
  }

  std::vector<Disjunct> cross(const std::vector<Disjunct>& a,
                              const std::vector<Disjunct>& b) {
    std::vector<Disjunct> out;
    for (const auto& x : a) {
      for (const auto& y : b) {
        Disjunct dj = x;
        dj.pos.insert(dj.pos.end(), y.pos.begin(), y.pos.end());
        dj.neg.insert(dj.neg.end(), y.neg.begin(), y.neg.end());
        out.push_back(std::move(dj));
        check(out.size());
      }
    }
    return out;
  }

  void check(std::size_t n) const {
    if (n > cap_) {
      throw pddl::GroundingExplosion(
          "goal formula expands to more than " + std::to_string(cap_) +
          " disjuncts");
    }
  }

  const Domain& d_;
  const Problem& p_;
  std::size_t cap_;
  std::set<std::string> fluent_;
  std::set<GroundAtom> init_;
};

// ---- interned task --------------------------------------------------------

struct IntAction {
  std::vector<int> pre;     // positive precondition fact ids
  std::vector<int> preneg;  // negated precondition fact ids (base ids)
  std::vector<int> add;
  std::vector<int> del;
  int cost = 1;
};

struct IntDisjunct {
  std::vector<int> pos;
  std::vector<int> neg;  // base ids
};

struct IntTask {
  std::map<GroundAtom, int> ids;
  int n_facts = 0;
  std::vector<IntAction> acts;
  std::vector<int> init;
  std::vector<IntDisjunct> goal;
  // complement bookkeeping for the relaxation: comp[f] is the id representing
  // "f is false", or -1 when no negative occurrence needs it
  std::vector<int> comp;
  int n_relaxed = 0;  // facts + allocated complements

  int intern(const GroundAtom& a) {
    auto it = ids.find(a);
    if (it != ids.end()) return it->second;
    ids.emplace(a, n_facts);
    return n_facts++;
  }
};

IntTask build_task(const Domain& d, const Problem& p,
                   const std::vector<GroundAction>& actions,
                   const PlannerConfig& cfg) {
  IntTask t;
  for (const auto& a : p.init) t.init.push_back(t.intern({a.pred, a.args}));

  t.acts.reserve(actions.size());
  for (const auto& ga : actions) {
    IntAction ia;
    for (const auto& a : ga.pre_pos) ia.pre.push_back(t.intern(a));
    for (const auto& a : ga.pre_neg) ia.preneg.push_back(t.intern(a));
    for (const auto& a : ga.add) ia.add.push_back(t.intern(a));
    for (const auto& a : ga.del) ia.del.push_back(t.intern(a));
    ia.cost = ga.cost;
    t.acts.push_back(std::move(ia));
  }

  GoalCompiler gc(d, p, cfg.max_goal_disjuncts);
  for (const auto& dj : gc.compile(p.goal)) {
    IntDisjunct idj;
    for (const auto& a : dj.pos) idj.pos.push_back(t.intern(a));
    for (const auto& a : dj.neg) idj.neg.push_back(t.intern(a));
    t.goal.push_back(std::move(idj));
  }

  t.comp.assign(t.n_facts, -1);
  t.n_relaxed = t.n_facts;
  auto want_comp = [&](int f) {
    if (t.comp[f] < 0) t.comp[f] = t.n_relaxed++;
  };
  for (const auto& ia : t.acts) {
    for (int f : ia.preneg) want_comp(f);
  }
  for (const auto& dj : t.goal) {
    for (int f : dj.neg) want_comp(f);
  }
  return t;
}

// ---- packed state bitset --------------------------------------------------

using Bits = std::vector<std::uint64_t>;

Bits make_bits(int n) { return Bits((n + 63) / 64, 0); }
void set_bit(Bits& b, int i) { b[i >> 6] |= (1ull << (i & 63)); }
void clear_bit(Bits& b, int i) { b[i >> 6] &= ~(1ull << (i & 63)); }
bool test_bit(const Bits& b, int i) { return (b[i >> 6] >> (i & 63)) & 1; }

struct BitsHash {
  std::size_t operator()(const Bits& b) const {
    std::uint64_t h = kFnvOffset;
    for (std::uint64_t w : b) h = fnv1a_u64(w, h);
    return static_cast<std::size_t>(h);
  }
};

bool int_applicable(const IntAction& a, const Bits& s) {
  for (int f : a.pre) {
    if (!test_bit(s, f)) return false;
  }
  for (int f : a.preneg) {
    if (test_bit(s, f)) return false;
  }
  return true;
}

bool disjunct_holds(const IntDisjunct& dj, const Bits& s) {
  for (int f : dj.pos) {
    if (!test_bit(s, f)) return false;
  }
  for (int f : dj.neg) {
    if (test_bit(s, f)) return false;
  }
  return true;
}

bool int_goal(const IntTask& t, const Bits& s) {
  for (const auto& dj : t.goal) {
    if (disjunct_holds(dj, s)) return true;
  }
  return false;
}

// ---- delete-relaxation heuristic -------------------------------------------
//
// Builds the relaxed planning graph with precondition counters, then extracts
// a relaxed plan backwards, always taking the earliest achiever. Negated
// preconditions and goal literals go through complement facts: "not f" is
// relaxed-true at layer 0 when f is false now, and is relaxed-achieved by any
// action that deletes f.

class HffEvaluator {
 public:
  explicit HffEvaluator(const IntTask& t) : t_(t) {
    // per relaxed action: preconditions in relaxed space, adds in relaxed space
    for (std::size_t i = 0; i < t.acts.size(); ++i) {
      const auto& a = t.acts[i];
      RAction ra;
      ra.pre = a.pre;
      for (int f : a.preneg) ra.pre.push_back(t.comp[f]);
      ra.add = a.add;
      for (int f : a.del) {
        if (t.comp[f] >= 0) ra.add.push_back(t.comp[f]);
      }
      ra.idx = static_cast<int>(i);
      racts_.push_back(std::move(ra));
    }
    achievers_.resize(t.n_relaxed);
    for (std::size_t i = 0; i < racts_.size(); ++i) {
      for (int f : racts_[i].add) achievers_[f].push_back(static_cast<int>(i));
    }
    consumers_.resize(t.n_relaxed);
    for (std::size_t i = 0; i < racts_.size(); ++i) {
      for (int f : racts_[i].pre) consumers_[f].push_back(static_cast<int>(i));
    }
  }

  int evaluate(const Bits& state) {
    const int INF = kUnreachable;
    fact_level_.assign(t_.n_relaxed, INF);
    act_level_.assign(racts_.size(), INF);
    remaining_.assign(racts_.size(), 0);
    for (std::size_t i = 0; i < racts_.size(); ++i) {
      remaining_[i] = static_cast<int>(racts_[i].pre.size());
    }

    std::vector<int> frontier;
    auto reach_fact = [&](int f, int level) {
      if (fact_level_[f] != INF) return;
      fact_level_[f] = level;
      frontier.push_back(f);
    };

    for (int f = 0; f < t_.n_facts; ++f) {
      if (test_bit(state, f)) {
        reach_fact(f, 0);
      } else if (t_.comp[f] >= 0) {
        reach_fact(t_.comp[f], 0);
      }
    }
    // zero-precondition actions fire in the first wave
    std::vector<int> ready;
    for (std::size_t i = 0; i < racts_.size(); ++i) {
      if (remaining_[i] == 0) ready.push_back(static_cast<int>(i));
    }

    int level = 0;
    while (true) {
      // goal reachable at this fact layer?
      int best = best_disjunct();
      if (best >= 0) return extract(state, best);

      for (int f : frontier) {
        for (int ai : consumers_[f]) {
          if (--remaining_[ai] == 0) ready.push_back(ai);
        }
      }
      frontier.clear();
      if (ready.empty()) return kUnreachable;
      ++level;
      std::vector<int> firing;
      firing.swap(ready);
      for (int ai : firing) {
        act_level_[ai] = level - 1;
        for (int f : racts_[ai].add) reach_fact(f, level);
      }
      if (frontier.empty() && ready.empty()) {
        // no new facts will ever appear
        int final_best = best_disjunct();
        return final_best >= 0 ? extract(state, final_best) : kUnreachable;
      }
    }
  }

 private:
  struct RAction {
    std::vector<int> pre;
    std::vector<int> add;
    int idx = 0;
  };

  int disjunct_layer(const IntDisjunct& dj) const {
    int layer = 0;
    for (int f : dj.pos) {
      if (fact_level_[f] == kUnreachable) return kUnreachable;
      layer = std::max(layer, fact_level_[f]);
    }
    for (int f : dj.neg) {
      int cf = t_.comp[f];
      if (fact_level_[cf] == kUnreachable) return kUnreachable;
      layer = std::max(layer, fact_level_[cf]);
    }
    return layer;
  }

  int best_disjunct() const {
    int best = -1;
    int best_layer = kUnreachable;
    for (std::size_t i = 0; i < t_.goal.size(); ++i) {
      int layer = disjunct_layer(t_.goal[i]);
      if (layer < best_layer) {
        best_layer = layer;
        best = static_cast<int>(i);
      }
    }
    return best_layer == kUnreachable ? -1 : best;
  }

  int extract(const Bits& state, int disjunct) {
    const auto& dj = t_.goal[disjunct];
    std::vector<int> goals;
    for (int f : dj.pos) goals.push_back(f);
    for (int f : dj.neg) goals.push_back(t_.comp[f]);

    int max_layer = 0;
    for (int g : goals) max_layer = std::max(max_layer, fact_level_[g]);
    std::vector<std::vector<int>> by_layer(max_layer + 1);
    std::vector<bool> marked(t_.n_relaxed, false);
    for (int g : goals) {
      if (fact_level_[g] > 0 && !marked[g]) {
        marked[g] = true;
        by_layer[fact_level_[g]].push_back(g);
      }
    }
    std::set<int> chosen;
    for (int layer = max_layer; layer >= 1; --layer) {
      for (std::size_t gi = 0; gi < by_layer[layer].size(); ++gi) {
        int g = by_layer[layer][gi];
        // earliest achiever, first index wins for determinism
        int pick = -1;
        for (int ai : achievers_[g]) {
          if (act_level_[ai] <= layer - 1) {
            pick = ai;
            break;
          }
        }
        if (pick < 0) continue;  // should not happen on a reachable goal
        chosen.insert(pick);
        for (int f : racts_[pick].pre) {
          if (fact_level_[f] > 0 && !marked[f]) {
            marked[f] = true;
            by_layer[fact_level_[f]].push_back(f);
          }
        }
      }
    }
    return static_cast<int>(chosen.size());
  }

  const IntTask& t_;
  std::vector<RAction> racts_;
  std::vector<std::vector<int>> achievers_;
  std::vector<std::vector<int>> consumers_;
  std::vector<int> fact_level_;
  std::vector<int> act_level_;
  std::vector<int> remaining_;
};

Bits state_to_bits(const IntTask& t, int n) {
  Bits b = make_bits(std::max(n, 1));
  for (int f : t.init) set_bit(b, f);
  return b;
}

// ---- best-first search ------------------------------------------------------

struct OpenEntry {
  long long key;        // h for greedy, g for uniform cost
  std::uint64_t seq;    // FIFO tie-break keeps everything deterministic
  int node;
  bool operator>(const OpenEntry& o) const {
    return std::tie(key, seq) > std::tie(o.key, o.seq);
  }
};

PlanResult search(const Domain& d, const Problem& p,
                  const std::vector<GroundAction>& actions,
                  const PlannerConfig& cfg) {
  IntTask task = build_task(d, p, actions, cfg);
  if (task.goal.empty()) {
    // every disjunct was contradictory: nothing can satisfy the goal
    return {PlanStatus::Unsolvable, {}, 0};
  }

  struct Node {
    Bits state;
    int g = 0;
    int parent = -1;
    int via = -1;
  };

  const bool greedy = cfg.strategy == Strategy::GreedyBestFirst;
  HffEvaluator hffe(task);

  std::vector<Node> nodes;
  std::unordered_map<Bits, int, BitsHash> best_g;  // state -> node index
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;

  Bits init = state_to_bits(task, std::max(task.n_facts, 1));
  nodes.push_back({init, 0, -1, -1});
  best_g[init] = 0;
  {
    long long key = 0;
    if (greedy) {
      int h = hffe.evaluate(init);
      if (h == kUnreachable) return {PlanStatus::Unsolvable, {}, 0};
      key = h;
    }
    open.push({key, 0, 0});
  }

  std::uint64_t seq = 1;
  std::size_t expansions = 0;

  auto emit_plan = [&](int node_idx) {
    Plan plan;
    std::vector<int> chain;
    for (int n = node_idx; n >= 0; n = nodes[n].parent) {
      if (nodes[n].via >= 0) chain.push_back(nodes[n].via);
    }
    std::reverse(chain.begin(), chain.end());
    for (int ai : chain) {
      const GroundAction& ga = actions[ai];
      plan.steps.push_back({ga.name, ga.args, ga.cost});
      plan.total_cost += ga.cost;
    }
    return plan;
  };

  while (!open.empty()) {
    OpenEntry top = open.top();
    open.pop();
    // copy out of the node pool: pushing successors may reallocate it
    const Bits cur_state = nodes[top.node].state;
    const int cur_g = nodes[top.node].g;
    auto it = best_g.find(cur_state);
    if (it == best_g.end() || it->second != top.node) continue;  // stale entry

    if (int_goal(task, cur_state)) {
      return {PlanStatus::Solved, emit_plan(top.node), expansions};
    }
    if (++expansions > cfg.max_expansions) {
      return {PlanStatus::BudgetExceeded, {}, expansions};
    }

    for (std::size_t ai = 0; ai < task.acts.size(); ++ai) {
      const IntAction& a = task.acts[ai];
      if (!int_applicable(a, cur_state)) continue;
      Bits succ = cur_state;
      for (int f : a.del) clear_bit(succ, f);
      for (int f : a.add) set_bit(succ, f);
      int g2 = cur_g + a.cost;

      auto bit = best_g.find(succ);
      if (bit != best_g.end()) {
        if (greedy || nodes[bit->second].g <= g2) continue;
      }
      long long key;
      if (greedy) {
        int h = hffe.evaluate(succ);
        if (h == kUnreachable) continue;
        key = h;
      } else {
        key = g2;
      }
      nodes.push_back({std::move(succ), g2, top.node, static_cast<int>(ai)});
      int idx = static_cast<int>(nodes.size()) - 1;
      best_g[nodes.back().state] = idx;
      open.push({key, seq++, idx});
    }
  }
  return {PlanStatus::Unsolvable, {}, expansions};
}

}  // namespace

PlanResult plan(const Domain& d, const Problem& p, const PlannerConfig& cfg) {
  auto actions = pddl::ground(d, p);
  return search(d, p, actions, cfg);
}

PlanResult plan_grounded(const Domain& d, const Problem& p,
                         const std::vector<GroundAction>& actions,
                         const PlannerConfig& cfg) {
  return search(d, p, actions, cfg);
}

int hff(const Domain& d, const Problem& p, const State& state,
        const PlannerConfig& cfg) {
  auto actions = pddl::ground(d, p);
  IntTask task = build_task(d, p, actions, cfg);
  if (task.goal.empty()) return kUnreachable;
  Bits bits = make_bits(std::max(task.n_facts, 1));
  for (const auto& atom : state) {
    auto it = task.ids.find(atom);
    if (it != task.ids.end() && it->second < task.n_facts) {
      set_bit(bits, it->second);
    }
  }
  HffEvaluator hffe(task);
  return hffe.evaluate(bits);
}

bool validate_plan(const Domain& d, const Problem& p, const Plan& plan,
                   std::string* why) {
  auto actions = pddl::ground(d, p);
  std::map<std::string, const GroundAction*> by_sig;
  for (const auto& a : actions) by_sig[a.signature()] = &a;

  State s = pddl::initial_state(p);
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    auto it = by_sig.find(plan.steps[i].signature());
    if (it == by_sig.end()) {
      if (why) *why = "step " + std::to_string(i) + " is not a ground action: " +
                      plan.steps[i].signature();
      return false;
    }
    if (!pddl::applicable(s, *it->second)) {
      if (why) *why = "step " + std::to_string(i) + " not applicable: " +
                      plan.steps[i].signature();
      return false;
    }
    s = pddl::apply(s, *it->second);
  }
  if (!pddl::goal_satisfied(s, d, p)) {
    if (why) *why = "goal not satisfied after final step";
    return false;
  }
  if (why) why->clear();
  return true;
}

}  // namespace affordsim::planner
