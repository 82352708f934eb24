#include <doctest.h>

#include <map>
#include <set>
#include <string>

#include "affordsim/pddl.hpp"
#include "affordsim/rng.hpp"

using namespace affordsim;
using pddl::GroundAction;

namespace {

const char* kToyDomain = R"(
(define (domain toyrooms)
  (:requirements :strips :typing)
  (:types box key - item
          item room)
  (:predicates
    (in ?i - item ?r - room)
    (robotAt ?r - room)
    (door ?a - room ?b - room)
    (locked ?a - room ?b - room)
    (holding ?i - item)
    (handEmpty))
  (:action move
    :parameters (?a - room ?b - room)
    :precondition (and (robotAt ?a) (door ?a ?b) (not (locked ?a ?b)))
    :effect (and (robotAt ?b) (not (robotAt ?a))))
  (:action take
    :parameters (?i - item ?r - room)
    :precondition (and (robotAt ?r) (in ?i ?r) (handEmpty))
    :effect (and (holding ?i) (not (in ?i ?r)) (not (handEmpty))))
  (:action drop
    :parameters (?i - item ?r - room)
    :precondition (and (robotAt ?r) (holding ?i))
    :effect (and (in ?i ?r) (handEmpty) (not (holding ?i))))
  (:action unlock
    :parameters (?k - key ?a - room ?b - room)
    :precondition (and (robotAt ?a) (holding ?k) (door ?a ?b) (locked ?a ?b))
    :effect (and (not (locked ?a ?b)))
    :cost 3)
)
)";

const char* kToyProblem = R"(
(define (problem toy1)
  (:domain toyrooms)
  (:objects r1 r2 r3 - room
            b1 b2 - box
            k1 - key)
  (:init (robotAt r1) (handEmpty)
         (in b1 r1) (in b2 r2) (in k1 r1)
         (door r1 r2) (door r2 r1) (door r2 r3) (door r3 r2)
         (locked r2 r3))
  (:goal (and (exists (?b - box) (in ?b r3))
              (forall (?k - key) (not (holding ?k)))))
)
)";

// Same domain with `?v # type` variable annotations, which the reader must
// treat exactly like `?v - type`.
std::string hash_typed(std::string text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    // only rewrite the ` - ` separators inside parameter/quantifier lists;
    // the toy fixtures never use '-' anywhere else
    if (text[i] == '-' && i > 0 && text[i - 1] == ' ' && i + 1 < text.size() &&
        text[i + 1] == ' ') {
      out += '#';
    } else {
      out += text[i];
    }
  }
  return out;
}

// Every type-consistent binding, no pruning: the reference the grounder is
// checked against.
std::vector<GroundAction> enumerate_bindings(const pddl::Domain& d,
                                             const pddl::Problem& p) {
  std::vector<GroundAction> out;
  for (const auto& schema : d.actions) {
    std::vector<std::vector<std::string>> pools;
    for (const auto& prm : schema.params) {
      pools.push_back(p.objects_of_type(d, prm.type));
    }
    std::vector<std::size_t> idx(pools.size(), 0);
    while (true) {
      std::map<std::string, std::string> env;
      for (std::size_t i = 0; i < pools.size(); ++i) {
        env[schema.params[i].name] = pools[i][idx[i]];
      }
      auto subst = [&](const pddl::Atom& a) {
        pddl::GroundAtom g{a.pred, {}};
        for (const auto& arg : a.args) {
          g.args.push_back(arg[0] == '?' ? env.at(arg) : arg);
        }
        return g;
      };
      GroundAction ga;
      ga.name = schema.name;
      for (const auto& prm : schema.params) ga.args.push_back(env.at(prm.name));
      for (const auto& l : schema.precond) {
        (l.negated ? ga.pre_neg : ga.pre_pos).push_back(subst(l.atom));
      }
      for (const auto& a : schema.add) ga.add.push_back(subst(a));
      for (const auto& a : schema.del) ga.del.push_back(subst(a));
      ga.cost = schema.base_cost;
      out.push_back(std::move(ga));

      std::size_t k = 0;
      while (k < pools.size() && ++idx[k] == pools[k].size()) idx[k++] = 0;
      if (k == pools.size()) break;
      if (pools.empty()) break;
    }
    if (!schema.params.empty() &&
        std::any_of(schema.params.begin(), schema.params.end(),
                    [&](const pddl::TypedVar& v) {
                      return p.objects_of_type(d, v.type).empty();
                    })) {
      // a parameter with no candidates contributes nothing; handled above
    }
  }
  return out;
}

// Second interpreter over plain strings, sharing no state machinery with
// pddl::apply.
using StrState = std::set<std::string>;

StrState to_strings(const pddl::State& s) {
  StrState out;
  for (const auto& a : s) out.insert(a.str());
  return out;
}

bool str_applicable(const StrState& s, const GroundAction& a) {
  for (const auto& pre : a.pre_pos) {
    if (!s.count(pre.str())) return false;
  }
  for (const auto& pre : a.pre_neg) {
    if (s.count(pre.str())) return false;
  }
  return true;
}

StrState str_apply(StrState s, const GroundAction& a) {
  for (const auto& atom : a.del) s.erase(atom.str());
  for (const auto& atom : a.add) s.insert(atom.str());
  return s;
}

}  // namespace

TEST_SUITE("pddl") {

TEST_CASE("parses the toy domain") {
  auto d = pddl::parse_domain(kToyDomain);
  CHECK(d.name == "toyrooms");
  CHECK(d.types.size() >= 4);
  CHECK(d.predicates.size() == 6);
  CHECK(d.actions.size() == 4);
  CHECK(d.find_action("unlock")->base_cost == 3);
  CHECK(d.find_action("move")->base_cost == 1);
  CHECK(d.is_subtype("box", "item"));
  CHECK(d.is_subtype("key", "item"));
  CHECK(d.is_subtype("item", "item"));
  CHECK_FALSE(d.is_subtype("item", "box"));
  CHECK_FALSE(d.is_subtype("room", "item"));
}

TEST_CASE("hash and dash type annotations parse identically") {
  auto dash = pddl::parse_domain(kToyDomain);
  auto hash = pddl::parse_domain(hash_typed(kToyDomain));
  CHECK(dash == hash);

  auto p1 = pddl::parse_problem(kToyProblem, dash);
  auto p2 = pddl::parse_problem(hash_typed(kToyProblem), dash);
  CHECK(p1 == p2);
}

TEST_CASE("problem parses with typed objects and quantified goal") {
  auto d = pddl::parse_domain(kToyDomain);
  auto p = pddl::parse_problem(kToyProblem, d);
  CHECK(p.name == "toy1");
  CHECK(p.objects.size() == 6);
  CHECK(p.init.size() == 10);
  CHECK(p.objects_of_type(d, "item") ==
        std::vector<std::string>{"b1", "b2", "k1"});
  CHECK(p.objects_of_type(d, "key") == std::vector<std::string>{"k1"});
  CHECK(*p.type_of("b2") == "box");
  CHECK(p.type_of("nope") == nullptr);
  CHECK(pddl::goal_conditions(p).size() == 2);
}

TEST_CASE("print and reparse is the identity on the ast") {
  auto d = pddl::parse_domain(kToyDomain);
  auto p = pddl::parse_problem(kToyProblem, d);
  auto d2 = pddl::parse_domain(pddl::print_domain(d));
  CHECK(d == d2);
  auto p2 = pddl::parse_problem(pddl::print_problem(p, d), d2);
  CHECK(p == p2);
}

TEST_CASE("parse errors carry position and reason") {
  CHECK_THROWS_AS(pddl::parse_domain("(define (domain x) (:predicates (p ?a - nosuch)))"),
                  pddl::TypeCheckError);
  auto d = pddl::parse_domain(kToyDomain);
  // wrong arity in init
  CHECK_THROWS_AS(
      pddl::parse_problem("(define (problem q) (:domain toyrooms)"
                          "(:objects r1 - room) (:init (robotAt r1 r1))"
                          "(:goal (robotAt r1)))",
                          d),
      pddl::ArityError);
  // unknown predicate
  CHECK_THROWS_AS(
      pddl::parse_problem("(define (problem q) (:domain toyrooms)"
                          "(:objects r1 - room) (:init (zap r1))"
                          "(:goal (robotAt r1)))",
                          d),
      pddl::ParseError);
  // type mismatch: a box where a room is required
  CHECK_THROWS_AS(
      pddl::parse_problem("(define (problem q) (:domain toyrooms)"
                          "(:objects b - box) (:init (robotAt b))"
                          "(:goal (robotAt b)))",
                          d),
      pddl::TypeCheckError);
  // unbound variable in the goal
  CHECK_THROWS_AS(
      pddl::parse_problem("(define (problem q) (:domain toyrooms)"
                          "(:objects r1 - room) (:init (robotAt r1))"
                          "(:goal (in ?x r1)))",
                          d),
      pddl::ParseError);
  // missing goal
  CHECK_THROWS_AS(
      pddl::parse_problem("(define (problem q) (:domain toyrooms)"
                          "(:objects r1 - room) (:init (robotAt r1)))",
                          d),
      pddl::ParseError);
}

TEST_CASE("grounding equals exhaustive enumeration filtered by statics") {
  auto d = pddl::parse_domain(kToyDomain);
  auto p = pddl::parse_problem(kToyProblem, d);
  auto init = pddl::initial_state(p);

  std::set<std::string> fluent;
  for (const auto& a : d.actions) {
    for (const auto& atom : a.add) fluent.insert(atom.pred);
    for (const auto& atom : a.del) fluent.insert(atom.pred);
  }
  auto statics_hold = [&](const GroundAction& ga) {
    for (const auto& pre : ga.pre_pos) {
      if (!fluent.count(pre.pred) && !init.count(pre)) return false;
    }
    for (const auto& pre : ga.pre_neg) {
      if (!fluent.count(pre.pred) && init.count(pre)) return false;
    }
    return true;
  };

  std::set<std::string> expected;
  for (const auto& ga : enumerate_bindings(d, p)) {
    if (statics_hold(ga)) expected.insert(ga.signature());
  }
  std::set<std::string> actual;
  for (const auto& ga : pddl::ground(d, p)) actual.insert(ga.signature());
  CHECK(actual == expected);

  // without pruning the grounder must enumerate every binding
  pddl::GroundOptions raw;
  raw.prune_statics = false;
  std::set<std::string> all_expected, all_actual;
  for (const auto& ga : enumerate_bindings(d, p)) all_expected.insert(ga.signature());
  for (const auto& ga : pddl::ground(d, p, raw)) all_actual.insert(ga.signature());
  CHECK(all_actual == all_expected);
}

TEST_CASE("grounded actions arrive sorted and deduplicated") {
  auto d = pddl::parse_domain(kToyDomain);
  auto p = pddl::parse_problem(kToyProblem, d);
  auto actions = pddl::ground(d, p);
  for (std::size_t i = 1; i < actions.size(); ++i) {
    CHECK(std::tie(actions[i - 1].name, actions[i - 1].args) <
          std::tie(actions[i].name, actions[i].args));
  }
}

TEST_CASE("grounding cap throws") {
  auto d = pddl::parse_domain(kToyDomain);
  auto p = pddl::parse_problem(kToyProblem, d);
  pddl::GroundOptions opts;
  opts.max_actions = 3;
  CHECK_THROWS_AS(pddl::ground(d, p, opts), pddl::GroundingExplosion);
}

TEST_CASE("apply agrees with a string-set interpreter along random walks") {
  auto d = pddl::parse_domain(kToyDomain);
  auto p = pddl::parse_problem(kToyProblem, d);
  auto actions = pddl::ground(d, p);

  Rng rng(rng_key(99, "pddl-walks"));
  for (int walk = 0; walk < 50; ++walk) {
    pddl::State s = pddl::initial_state(p);
    StrState t = to_strings(s);
    for (int depth = 0; depth < 40; ++depth) {
      std::vector<const GroundAction*> usable;
      for (const auto& a : actions) {
        bool lib = pddl::applicable(s, a);
        bool naive = str_applicable(t, a);
        REQUIRE(lib == naive);
        if (lib) usable.push_back(&a);
      }
      if (usable.empty()) break;
      const GroundAction* pick = usable[rng.below(usable.size())];
      s = pddl::apply(s, *pick);
      t = str_apply(t, *pick);
      CHECK(to_strings(s) == t);
    }
  }
}

TEST_CASE("apply rejects inapplicable actions") {
  auto d = pddl::parse_domain(kToyDomain);
  auto p = pddl::parse_problem(kToyProblem, d);
  auto actions = pddl::ground(d, p);
  auto s = pddl::initial_state(p);
  bool checked = false;
  for (const auto& a : actions) {
    if (!pddl::applicable(s, a)) {
      CHECK_THROWS_AS(pddl::apply(s, a), pddl::NotApplicable);
      checked = true;
      break;
    }
  }
  CHECK(checked);
}

TEST_CASE("formula evaluation handles quantifiers and negation") {
  auto d = pddl::parse_domain(kToyDomain);
  auto p = pddl::parse_problem(kToyProblem, d);
  auto s = pddl::initial_state(p);

  auto eval_goal = [&](const std::string& text) {
    std::string prob = "(define (problem g) (:domain toyrooms)"
                       "(:objects r1 r2 r3 - room b1 b2 - box k1 - key)"
                       "(:init) (:goal " + text + "))";
    auto q = pddl::parse_problem(prob, d);
    return pddl::formula_satisfied(q.goal, s, d, q);
  };

  CHECK(eval_goal("(robotAt r1)"));
  CHECK_FALSE(eval_goal("(robotAt r2)"));
  CHECK(eval_goal("(not (robotAt r2))"));
  CHECK(eval_goal("(exists (?b - box) (in ?b r1))"));
  CHECK_FALSE(eval_goal("(exists (?b - box) (in ?b r3))"));
  // quantification over a supertype ranges over all subtypes
  CHECK(eval_goal("(exists (?i - item) (in ?i r2))"));
  CHECK(eval_goal("(forall (?k - key) (in ?k r1))"));
  CHECK_FALSE(eval_goal("(forall (?i - item) (in ?i r1))"));
  CHECK(eval_goal("(forall (?r - room) (not (holding b1)))"));
  CHECK(eval_goal("(and (robotAt r1) (handEmpty) (not (locked r1 r2)))"));
  CHECK_FALSE(eval_goal("(and (robotAt r1) (locked r1 r2))"));
  CHECK(eval_goal("(exists (?a - room ?b - room) (locked ?a ?b))"));
  CHECK(eval_goal("(forall (?b - box) (exists (?r - room) (in ?b ?r)))"));
  CHECK(eval_goal("(not (exists (?b - box) (in ?b r3)))"));
}

TEST_CASE("goal conditions split only at the top level") {
  auto d = pddl::parse_domain(kToyDomain);
  std::string prob = "(define (problem g) (:domain toyrooms)"
                     "(:objects r1 - room) (:init (robotAt r1))"
                     "(:goal (exists (?b - box) (in ?b r1))))";
  auto q = pddl::parse_problem(prob, d);
  CHECK(pddl::goal_conditions(q).size() == 1);
}

}
