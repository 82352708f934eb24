#pragma once

// Typed STRIPS subset: conjunctive action preconditions with negation,
// add/delete effects, and goal formulas built from and / not / exists /
// forall over typed variables. Variables accept both `?v - type` and
// `?v # type` annotations. No conditional effects, no numeric fluents.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace affordsim::pddl {

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ", col " +
                           std::to_string(col) + ")"),
        line(line),
        col(col) {}
  int line = 0;
  int col = 0;
};

struct ArityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TypeCheckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GroundingExplosion : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotApplicable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TypedVar {
  std::string name;  // includes the leading '?' for variables
  std::string type;
  auto operator<=>(const TypedVar&) const = default;
};

struct Atom {
  std::string pred;
  std::vector<std::string> args;  // variables (leading '?') or constants
  auto operator<=>(const Atom&) const = default;
};

struct Literal {
  Atom atom;
  bool negated = false;
  auto operator<=>(const Literal&) const = default;
};

struct Formula {
  enum class Kind { Literal, And, Not, Exists, Forall };
  Kind kind = Kind::Literal;
  Literal lit;                     // Kind::Literal
  std::vector<TypedVar> vars;      // Exists / Forall
  std::vector<Formula> children;   // And: n-ary; Not/Exists/Forall: exactly 1

  bool operator==(const Formula&) const = default;

  static Formula make_literal(Literal l);
  static Formula make_and(std::vector<Formula> parts);
  static Formula make_not(Formula f);
  static Formula make_exists(std::vector<TypedVar> vars, Formula f);
  static Formula make_forall(std::vector<TypedVar> vars, Formula f);
};

struct PredicateDecl {
  std::string name;
  std::vector<TypedVar> params;
  auto operator<=>(const PredicateDecl&) const = default;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedVar> params;
  std::vector<Literal> precond;  // conjunction
  std::vector<Atom> add;
  std::vector<Atom> del;
  int base_cost = 1;
  bool operator==(const ActionSchema&) const = default;
};

struct TypeDecl {
  std::string name;
  std::string parent;  // empty for roots
  auto operator<=>(const TypeDecl&) const = default;
};

struct Domain {
  std::string name;
  std::vector<TypeDecl> types;
  std::vector<PredicateDecl> predicates;
  std::vector<ActionSchema> actions;

  bool operator==(const Domain&) const = default;

  bool has_type(const std::string& t) const;
  // Reflexive subtype test following parent links.
  bool is_subtype(const std::string& t, const std::string& ancestor) const;
  const PredicateDecl* find_predicate(const std::string& name) const;
  const ActionSchema* find_action(const std::string& name) const;
};

struct Problem {
  std::string name;
  std::string domain_name;
  std::vector<TypedVar> objects;  // constant name (no '?'), type
  std::vector<Atom> init;         // ground positive atoms
  Formula goal = Formula::make_and({});

  bool operator==(const Problem&) const = default;

  std::vector<std::string> objects_of_type(const Domain& d,
                                           const std::string& type) const;
  const std::string* type_of(const std::string& obj) const;
};

Domain parse_domain(const std::string& text);
Problem parse_problem(const std::string& text, const Domain& domain);

std::string print_domain(const Domain& d);
std::string print_problem(const Problem& p, const Domain& d);
std::string print_formula(const Formula& f);

// ---- grounding and state transition semantics ----

struct GroundAtom {
  std::string pred;
  std::vector<std::string> args;
  auto operator<=>(const GroundAtom&) const = default;
  std::string str() const;
};

using State = std::set<GroundAtom>;

struct GroundAction {
  std::string name;
  std::vector<std::string> args;
  std::vector<GroundAtom> pre_pos;
  std::vector<GroundAtom> pre_neg;
  std::vector<GroundAtom> add;
  std::vector<GroundAtom> del;
  int cost = 1;

  bool operator==(const GroundAction&) const = default;
  std::string signature() const;  // "(name arg ...)"
};

struct GroundOptions {
  std::size_t max_actions = 1000000;
  bool prune_statics = true;
};

// Enumerates type-consistent bindings schema by schema, pruning bindings whose
// static preconditions cannot hold in the initial state. The result is sorted
// by (name, args) so downstream iteration order is deterministic.
std::vector<GroundAction> ground(const Domain& d, const Problem& p,
                                 const GroundOptions& opts = {});

State initial_state(const Problem& p);
bool applicable(const State& s, const GroundAction& a);
// Set-semantics apply; throws NotApplicable if preconditions do not hold.
State apply(const State& s, const GroundAction& a);

bool formula_satisfied(const Formula& f, const State& s, const Domain& d,
                       const Problem& p);
bool goal_satisfied(const State& s, const Domain& d, const Problem& p);
// Top-level conjuncts of the goal; a lone non-conjunction goal yields one.
std::vector<Formula> goal_conditions(const Problem& p);

}  // namespace affordsim::pddl
