#include <algorithm>
#include <functional>
#include <map>
#include <tuple>

#include "affordsim/pddl.hpp"

namespace affordsim::pddl {

std::string GroundAtom::str() const {
  std::string s = "(" + pred;
  for (const auto& a : args) {
    s += ' ';
    s += a;
  }
  s += ')';
  return s;
}

std::string GroundAction::signature() const {
  std::string s = "(" + name;
  for (const auto& a : args) {
    s += ' ';
    s += a;
  }
  s += ')';
  return s;
}

namespace {

using Env = std::map<std::string, std::string>;

GroundAtom substitute(const Atom& a, const Env& env) {
  GroundAtom g;
  g.pred = a.pred;
  g.args.reserve(a.args.size());
  for (const auto& arg : a.args) {
    if (!arg.empty() && arg[0] == '?') {
      auto it = env.find(arg);
      if (it == env.end()) {
        throw TypeCheckError("unbound variable " + arg + " in " + a.pred);
      }
      g.args.push_back(it->second);
    } else {
      g.args.push_back(arg);
    }
  }
  return g;
}

bool fully_bound(const Atom& a, const Env& env) {
  for (const auto& arg : a.args) {
    if (!arg.empty() && arg[0] == '?' && !env.count(arg)) return false;
  }
  return true;
}

}  // namespace

State initial_state(const Problem& p) {
  State s;
  for (const auto& a : p.init) {
    s.insert(GroundAtom{a.pred, a.args});
  }
  return s;
}

std::vector<GroundAction> ground(const Domain& d, const Problem& p,
                                 const GroundOptions& opts) {
  // A predicate no action can add or delete is static: bindings that violate a
  // static precondition can never become applicable and are dropped up front.
  std::set<std::string> fluent;
  for (const auto& a : d.actions) {
    for (const auto& atom : a.add) fluent.insert(atom.pred);
    for (const auto& atom : a.del) fluent.insert(atom.pred);
  }
  const State init = initial_state(p);

  std::map<std::string, std::vector<std::string>> candidates_by_type;
  auto candidates = [&](const std::string& type) -> const std::vector<std::string>& {
    auto it = candidates_by_type.find(type);
    if (it == candidates_by_type.end()) {
      it = candidates_by_type.emplace(type, p.objects_of_type(d, type)).first;
    }
    return it->second;
  };

  std::vector<GroundAction> out;
  for (const auto& schema : d.actions) {
    // For early pruning we need to know, per precondition, when all of its
    // variables are bound: record the highest parameter index it mentions.
    std::vector<int> ready_at(schema.precond.size(), -1);
    for (std::size_t li = 0; li < schema.precond.size(); ++li) {
      int hi = -1;
      for (const auto& arg : schema.precond[li].atom.args) {
        for (std::size_t pi = 0; pi < schema.params.size(); ++pi) {
          if (schema.params[pi].name == arg) {
            hi = std::max(hi, static_cast<int>(pi));
          }
        }
      }
      ready_at[li] = hi;
    }

    Env env;
    std::function<void(std::size_t)> bind = [&](std::size_t pi) {
      if (pi == schema.params.size()) {
        GroundAction ga;
        ga.name = schema.name;
        for (const auto& prm : schema.params) ga.args.push_back(env.at(prm.name));
        for (const auto& l : schema.precond) {
          (l.negated ? ga.pre_neg : ga.pre_pos).push_back(substitute(l.atom, env));
        }
        for (const auto& atom : schema.add) ga.add.push_back(substitute(atom, env));
        for (const auto& atom : schema.del) ga.del.push_back(substitute(atom, env));
        ga.cost = schema.base_cost;
        if (out.size() >= opts.max_actions) {
          throw GroundingExplosion(
              "grounding exceeded the cap of " +
              std::to_string(opts.max_actions) + " actions");
        }
        out.push_back(std::move(ga));
        return;
      }
      for (const auto& obj : candidates(schema.params[pi].type)) {
        env[schema.params[pi].name] = obj;
        bool viable = true;
        if (opts.prune_statics) {
          for (std::size_t li = 0; li < schema.precond.size() && viable; ++li) {
            if (ready_at[li] != static_cast<int>(pi)) continue;
            const Literal& l = schema.precond[li];
            if (fluent.count(l.atom.pred) || !fully_bound(l.atom, env)) continue;
            bool holds = init.count(substitute(l.atom, env)) > 0;
            if (holds == l.negated) viable = false;
          }
        }
        if (viable) bind(pi + 1);
      }
      env.erase(schema.params[pi].name);
    };
    bind(0);
  }

  std::sort(out.begin(), out.end(), [](const GroundAction& a, const GroundAction& b) {
    return std::tie(a.name, a.args) < std::tie(b.name, b.args);
  });
  return out;
}

bool applicable(const State& s, const GroundAction& a) {
  for (const auto& atom : a.pre_pos) {
    if (!s.count(atom)) return false;
  }
  for (const auto& atom : a.pre_neg) {
    if (s.count(atom)) return false;
  }
  return true;
}

State apply(const State& s, const GroundAction& a) {
  if (!applicable(s, a)) {
    throw NotApplicable("action not applicable in state: " + a.signature());
  }
  State out = s;
  for (const auto& atom : a.del) out.erase(atom);
  for (const auto& atom : a.add) out.insert(atom);
  return out;
}

namespace {

bool eval_formula(const Formula& f, const State& s, const Domain& d,
                  const Problem& p, Env& env) {
  switch (f.kind) {
    case Formula::Kind::Literal: {
      GroundAtom g = substitute(f.lit.atom, env);
      bool present = s.count(g) > 0;
      return f.lit.negated ? !present : present;
    }
    case Formula::Kind::And:
      for (const auto& c : f.children) {
        if (!eval_formula(c, s, d, p, env)) return false;
      }
      return true;
    case Formula::Kind::Not:
      return !eval_formula(f.children[0], s, d, p, env);
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      bool exists = f.kind == Formula::Kind::Exists;
      // bind quantified variables one at a time, leftmost first
      std::function<bool(std::size_t)> go = [&](std::size_t vi) -> bool {
        if (vi == f.vars.size()) return eval_formula(f.children[0], s, d, p, env);
        for (const auto& obj : p.objects_of_type(d, f.vars[vi].type)) {
          env[f.vars[vi].name] = obj;
          bool r = go(vi + 1);
          env.erase(f.vars[vi].name);
          if (r == exists) return exists;
        }
        return !exists;
      };
      return go(0);
    }
  }
  return false;
}

}  // namespace

bool formula_satisfied(const Formula& f, const State& s, const Domain& d,
                       const Problem& p) {
  Env env;
  return eval_formula(f, s, d, p, env);
}

bool goal_satisfied(const State& s, const Domain& d, const Problem& p) {
  return formula_satisfied(p.goal, s, d, p);
}

std::vector<Formula> goal_conditions(const Problem& p) {
  if (p.goal.kind == Formula::Kind::And) return p.goal.children;
  return {p.goal};
}

}  // namespace affordsim::pddl
