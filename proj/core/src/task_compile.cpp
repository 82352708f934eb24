#include "affordsim/task_compile.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace affordsim::compile {

using genbench::EpisodeSpec;
using genbench::TaskSpec;
using genbench::TaskType;
using pddl::Atom;
using pddl::Formula;
using pddl::GroundAtom;
using pddl::Literal;
using pddl::TypedVar;
using world::ObjectCategory;
using world::Scene;

namespace {

// The fixed schema set. Openable and plain-surface receptacles get separate
// pickup/put schemas so preconditions stay pure conjunctions; occupied
// appliances block on the positive twin fact notOccupied rather than on a
// negation. WaitTick/WaitDone implement the busy countdown described in the
// header.
constexpr const char* kDomainText = R"PDDL(
(define (domain household)
  (:requirements :strips :typing)
  (:types appliance - receptacle
          object receptacle location tickval otype rtype)
  (:predicates
    (agentAt ?l - location)
    (atLocation ?r - receptacle ?l - location)
    (objectType ?o - object ?t - otype)
    (receptacleType ?r - receptacle ?t - rtype)
    (inReceptacle ?o - object ?r - receptacle)
    (inReceptacleObject ?o - object ?mo - object)
    (isReceptacleObject ?o - object)
    (opened ?r - receptacle)
    (closed ?r - receptacle)
    (openable ?r - receptacle)
    (surface ?r - receptacle)
    (holds ?o - object)
    (handEmpty)
    (cleanable ?o - object)
    (isClean ?o - object)
    (isUsed ?o - object)
    (isHot ?o - object)
    (isCold ?o - object)
    (heatable ?a - appliance)
    (coolable ?a - appliance)
    (isOccupied ?r - receptacle)
    (notOccupied ?r - receptacle)
    (occBusy ?a - appliance ?t - tickval)
    (occNext ?t1 - tickval ?t2 - tickval)
    (occLast ?t - tickval)
    (isOn ?a - appliance)
    (isOff ?a - appliance)
    (isSinkLocation ?l - location)
    (distinct ?a - object ?b - object))
  (:action GotoLocation
    :parameters (?from - location ?to - location)
    :precondition (and (agentAt ?from))
    :effect (and (agentAt ?to) (not (agentAt ?from))))
  (:action PickupFromSurface
    :parameters (?o - object ?r - receptacle ?l - location)
    :precondition (and (agentAt ?l) (atLocation ?r ?l) (surface ?r)
                       (inReceptacle ?o ?r) (handEmpty))
    :effect (and (holds ?o) (not (inReceptacle ?o ?r)) (not (handEmpty))))
  (:action PickupFromOpen
    :parameters (?o - object ?r - receptacle ?l - location)
    :precondition (and (agentAt ?l) (atLocation ?r ?l) (openable ?r) (opened ?r)
                       (inReceptacle ?o ?r) (handEmpty))
    :effect (and (holds ?o) (not (inReceptacle ?o ?r)) (not (handEmpty))))
  (:action PutOnSurface
    :parameters (?o - object ?r - receptacle ?l - location)
    :precondition (and (agentAt ?l) (atLocation ?r ?l) (surface ?r) (holds ?o))
    :effect (and (inReceptacle ?o ?r) (handEmpty) (not (holds ?o))))
  (:action PutInOpen
    :parameters (?o - object ?r - receptacle ?l - location)
    :precondition (and (agentAt ?l) (atLocation ?r ?l) (openable ?r) (opened ?r)
                       (holds ?o))
    :effect (and (inReceptacle ?o ?r) (handEmpty) (not (holds ?o))))
  (:action PutIntoMovableOnSurface
    :parameters (?o - object ?mo - object ?r - receptacle ?l - location)
    :precondition (and (agentAt ?l) (atLocation ?r ?l) (surface ?r)
                       (holds ?o) (isReceptacleObject ?mo) (isClean ?mo)
                       (inReceptacle ?mo ?r))
    :effect (and (inReceptacleObject ?o ?mo) (handEmpty) (not (holds ?o))))
  (:action PutIntoMovableInOpen
    :parameters (?o - object ?mo - object ?r - receptacle ?l - location)
    :precondition (and (agentAt ?l) (atLocation ?r ?l) (openable ?r) (opened ?r)
                       (holds ?o) (isReceptacleObject ?mo) (isClean ?mo)
                       (inReceptacle ?mo ?r))
    :effect (and (inReceptacleObject ?o ?mo) (handEmpty) (not (holds ?o))))
  (:action OpenObject
    :parameters (?r - receptacle ?l - location)
    :precondition (and (agentAt ?l) (atLocation ?r ?l) (openable ?r) (closed ?r)
                       (notOccupied ?r))
    :effect (and (opened ?r) (not (closed ?r))))
  (:action CloseObject
    :parameters (?r - receptacle ?l - location)
    :precondition (and (agentAt ?l) (atLocation ?r ?l) (openable ?r) (opened ?r)
                       (notOccupied ?r))
    :effect (and (closed ?r) (not (opened ?r))))
  (:action CleanObject
    :parameters (?o - object ?l - location)
    :precondition (and (agentAt ?l) (isSinkLocation ?l) (holds ?o) (cleanable ?o))
    :effect (and (isClean ?o) (not (isUsed ?o))))
  (:action HeatObject
    :parameters (?o - object ?a - appliance ?l - location)
    :precondition (and (agentAt ?l) (atLocation ?a ?l) (heatable ?a)
                       (notOccupied ?a) (holds ?o))
    :effect (and (isHot ?o) (not (isCold ?o)))
    :cost 4)
  (:action CoolObject
    :parameters (?o - object ?a - appliance ?l - location)
    :precondition (and (agentAt ?l) (atLocation ?a ?l) (coolable ?a)
                       (notOccupied ?a) (holds ?o))
    :effect (and (isCold ?o) (not (isHot ?o)))
    :cost 4)
  (:action ToggleOnObject
    :parameters (?a - appliance ?l - location)
    :precondition (and (agentAt ?l) (atLocation ?a ?l) (notOccupied ?a) (isOff ?a))
    :effect (and (isOn ?a) (not (isOff ?a))))
  (:action ToggleOffObject
    :parameters (?a - appliance ?l - location)
    :precondition (and (agentAt ?l) (atLocation ?a ?l) (notOccupied ?a) (isOn ?a))
    :effect (and (isOff ?a) (not (isOn ?a))))
  (:action WaitTick
    :parameters (?a - appliance ?t1 - tickval ?t2 - tickval)
    :precondition (and (occBusy ?a ?t1) (occNext ?t1 ?t2))
    :effect (and (occBusy ?a ?t2) (not (occBusy ?a ?t1))))
  (:action WaitDone
    :parameters (?a - appliance ?t - tickval)
    :precondition (and (occBusy ?a ?t) (occLast ?t))
    :effect (and (notOccupied ?a) (not (occBusy ?a ?t)) (not (isOccupied ?a))))
)
)PDDL";

std::string loc_name(world::LocationId l) { return "loc_" + std::to_string(l); }
std::string type_const(const std::string& cls) { return cls + "Type"; }

Formula lit(const std::string& pred, std::vector<std::string> args) {
  return Formula::make_literal({Atom{pred, std::move(args)}, false});
}

Formula exists1(const std::string& var, const std::string& type, Formula body) {
  return Formula::make_exists({{var, type}}, std::move(body));
}

}  // namespace

const pddl::Domain& household_domain() {
  static const pddl::Domain domain = pddl::parse_domain(kDomainText);
  return domain;
}

pddl::Formula task_goal(const TaskSpec& task) {
  const bool target_cleanable =
      world::class_info(task.target_class).cleanable();
  const std::string ot = type_const(task.target_class);
  const std::string rt = type_const(task.receptacle_class);

  std::vector<Formula> conjuncts;

  auto clean_witness = [&](const std::string& cls) {
    // weak cleanliness conjunct, same shape as the stacked-container goal
    return exists1("?mo", "object",
                   Formula::make_and({lit("objectType", {"?mo", type_const(cls)}),
                                      lit("cleanable", {"?mo"}),
                                      lit("isClean", {"?mo"})}));
  };

  auto placed_in = [&](const std::string& obj_var) {
    return exists1("?r", "receptacle",
                   Formula::make_and({lit("receptacleType", {"?r", rt}),
                                      lit("inReceptacle", {obj_var, "?r"})}));
  };

  switch (task.type) {
    case TaskType::PickAndPlace:
    case TaskType::CleanAndPlace: {
      if (target_cleanable) conjuncts.push_back(clean_witness(task.target_class));
      std::vector<Formula> inner = {lit("objectType", {"?o", ot})};
      if (target_cleanable) inner.push_back(lit("isClean", {"?o"}));
      inner.push_back(placed_in("?o"));
      conjuncts.push_back(exists1("?o", "object", Formula::make_and(inner)));
      break;
    }
    case TaskType::HeatAndPlace:
    case TaskType::CoolAndPlace: {
      const char* temp = task.type == TaskType::HeatAndPlace ? "isHot" : "isCold";
      if (target_cleanable) conjuncts.push_back(clean_witness(task.target_class));
      conjuncts.push_back(exists1(
          "?o", "object",
          Formula::make_and({lit("objectType", {"?o", ot}), lit(temp, {"?o"})})));
      std::vector<Formula> inner = {lit("objectType", {"?o", ot})};
      if (target_cleanable) inner.push_back(lit("isClean", {"?o"}));
      inner.push_back(lit(temp, {"?o"}));
      inner.push_back(placed_in("?o"));
      conjuncts.push_back(exists1("?o", "object", Formula::make_and(inner)));
      break;
    }
    case TaskType::PickTwoAndPlace: {
      if (target_cleanable) conjuncts.push_back(clean_witness(task.target_class));
      std::vector<Formula> inner = {lit("distinct", {"?o1", "?o2"}),
                                    lit("objectType", {"?o1", ot}),
                                    lit("objectType", {"?o2", ot})};
      if (target_cleanable) {
        inner.push_back(lit("isClean", {"?o1"}));
        inner.push_back(lit("isClean", {"?o2"}));
      }
      inner.push_back(exists1(
          "?r", "receptacle",
          Formula::make_and({lit("receptacleType", {"?r", rt}),
                             lit("inReceptacle", {"?o1", "?r"}),
                             lit("inReceptacle", {"?o2", "?r"})})));
      conjuncts.push_back(Formula::make_exists({{"?o1", "object"}, {"?o2", "object"}},
                                               Formula::make_and(inner)));
      break;
    }
    case TaskType::StackAndPlace: {
      const std::string mt = type_const(task.mrecep_class);
      conjuncts.push_back(exists1(
          "?mo", "object",
          Formula::make_and({lit("objectType", {"?mo", mt}),
                             lit("isReceptacleObject", {"?mo"}),
                             lit("cleanable", {"?mo"}),
                             lit("isClean", {"?mo"})})));
      conjuncts.push_back(exists1(
          "?mo", "object",
          Formula::make_and(
              {lit("objectType", {"?mo", mt}),
               exists1("?r", "receptacle",
                       Formula::make_and(
                           {lit("receptacleType", {"?r", rt}),
                            exists1("?o", "object",
                                    Formula::make_and(
                                        {lit("objectType", {"?o", ot}),
                                         lit("inReceptacleObject", {"?o", "?mo"}),
                                         lit("inReceptacle", {"?mo", "?r"})}))}))})));
      break;
    }
  }

  conjuncts.push_back(Formula::make_forall(
      {{"?re", "receptacle"}},
      Formula::make_not(lit("opened", {"?re"}))));
  return Formula::make_and(std::move(conjuncts));
}

pddl::State project(const sim::EpisodeState& state) {
  pddl::State s;
  const Scene& scene = state.scene;
  auto put = [&s](const std::string& pred, std::vector<std::string> args) {
    s.insert(GroundAtom{pred, std::move(args)});
  };

  put("agentAt", {loc_name(state.agent_location)});
  put("isSinkLocation", {loc_name(scene.sink_location)});
  if (state.holding) {
    put("holds", {*state.holding});
  } else {
    put("handEmpty", {});
  }

  std::vector<std::string> portables;
  for (const auto& [id, obj] : scene.objects) {
    const auto& cls = obj.cls();
    if (cls.portable()) {
      portables.push_back(id);
      put("objectType", {id, type_const(obj.class_name)});
      if (cls.movable_receptacle) put("isReceptacleObject", {id});
      if (cls.cleanable()) {
        put("cleanable", {id});
        if (obj.clean && !obj.used) put("isClean", {id});
      }
      if (obj.used) put("isUsed", {id});
      if (obj.heated) put("isHot", {id});
      if (obj.cooled) put("isCold", {id});
      if (obj.inside && (!state.holding || *state.holding != id)) {
        const auto& container = scene.object(*obj.inside);
        if (container.cls().portable()) {
          put("inReceptacleObject", {id, *obj.inside});
        } else {
          put("inReceptacle", {id, *obj.inside});
        }
      }
    } else {
      put("receptacleType", {id, type_const(obj.class_name)});
      put("atLocation", {id, loc_name(obj.location)});
      if (cls.openable) {
        put("openable", {id});
        put(obj.open ? "opened" : "closed", {id});
      } else {
        put("surface", {id});
      }
      if (cls.heats) put("heatable", {id});
      if (cls.cools) put("coolable", {id});
      if (cls.category == ObjectCategory::Appliance) {
        put(obj.toggled_on ? "isOn" : "isOff", {id});
        if (obj.busy_remaining > 0) {
          put("isOccupied", {id});
          put("occBusy", {id, "tick_" + std::to_string(obj.busy_remaining)});
        } else {
          put("notOccupied", {id});
        }
      } else if (cls.openable) {
        put("notOccupied", {id});
      }
    }
  }
  for (const auto& a : portables) {
    for (const auto& b : portables) {
      if (a != b) put("distinct", {a, b});
    }
  }
  return s;
}

pddl::Problem goal_problem(const Scene& scene, const TaskSpec& task) {
  pddl::Problem p;
  p.name = "episode";
  p.domain_name = household_domain().name;

  for (int l = 0; l < scene.graph.node_count; ++l) {
    p.objects.push_back({loc_name(l), "location"});
  }
  std::set<std::string> otype_consts, rtype_consts;
  for (const auto& [id, obj] : scene.objects) {
    const auto& cls = obj.cls();
    if (cls.portable()) {
      p.objects.push_back({id, "object"});
      otype_consts.insert(type_const(obj.class_name));
    } else {
      p.objects.push_back(
          {id, cls.category == ObjectCategory::Appliance ? "appliance"
                                                         : "receptacle"});
      rtype_consts.insert(type_const(obj.class_name));
    }
  }
  for (const auto& t : otype_consts) p.objects.push_back({t, "otype"});
  for (const auto& t : rtype_consts) p.objects.push_back({t, "rtype"});

  p.goal = task_goal(task);
  return p;
}

CompiledTask compile_task(const Scene& scene, const EpisodeSpec& spec) {
  const pddl::Domain& domain = household_domain();
  sim::EpisodeState start = sim::reset(scene, spec);

  CompiledTask out;
  out.problem = goal_problem(scene, spec.task);
  pddl::Problem& p = out.problem;
  if (!spec.id().empty()) p.name = spec.id();

  int max_busy = 0;
  for (const auto& inj : spec.injections) {
    if (inj.category == world::AffordanceCategory::Occupied) {
      max_busy = std::max(max_busy, inj.busy_duration);
    }
  }
  for (int t = 1; t <= max_busy; ++t) {
    p.objects.push_back({"tick_" + std::to_string(t), "tickval"});
  }

  for (const auto& atom : project(start)) {
    p.init.push_back(Atom{atom.pred, atom.args});
  }
  // countdown furniture for the busy-timer compilation
  if (max_busy > 0) {
    p.init.push_back(Atom{"occLast", {"tick_1"}});
    for (int t = 2; t <= max_busy; ++t) {
      p.init.push_back(Atom{"occNext",
                            {"tick_" + std::to_string(t),
                             "tick_" + std::to_string(t - 1)}});
    }
  }

  auto grounded = pddl::ground(domain, p);
  out.actions.reserve(grounded.size());
  for (auto& ga : grounded) {
    if (ga.name == "GotoLocation") {
      if (ga.args[0] == ga.args[1]) continue;  // no zero-cost self moves
      int from = std::stoi(ga.args[0].substr(4));
      int to = std::stoi(ga.args[1].substr(4));
      ga.cost = world::shortest_path(scene.graph, from, to);
    }
    out.actions.push_back(std::move(ga));
  }
  return out;
}

std::vector<sim::Action> to_sim_actions(const planner::Plan& plan) {
  std::vector<sim::Action> out;
  out.reserve(plan.steps.size());
  for (const auto& step : plan.steps) {
    sim::Action a;
    const auto& n = step.action;
    if (n == "GotoLocation") {
      a.type = sim::ActionType::Goto;
      a.location = std::stoi(step.args[1].substr(4));
    } else if (n == "PickupFromSurface" || n == "PickupFromOpen") {
      a.type = sim::ActionType::Pickup;
      a.target = step.args[0];
    } else if (n == "PutOnSurface" || n == "PutInOpen") {
      a.type = sim::ActionType::Put;
      a.target = step.args[1];
    } else if (n == "PutIntoMovableOnSurface" || n == "PutIntoMovableInOpen") {
      a.type = sim::ActionType::Put;
      a.target = step.args[1];
    } else if (n == "OpenObject") {
      a.type = sim::ActionType::Open;
      a.target = step.args[0];
    } else if (n == "CloseObject") {
      a.type = sim::ActionType::Close;
      a.target = step.args[0];
    } else if (n == "CleanObject") {
      a.type = sim::ActionType::Clean;
      a.target = step.args[0];
    } else if (n == "HeatObject") {
      a.type = sim::ActionType::Heat;
      a.target = step.args[1];
    } else if (n == "CoolObject") {
      a.type = sim::ActionType::Cool;
      a.target = step.args[1];
    } else if (n == "ToggleOnObject") {
      a.type = sim::ActionType::ToggleOn;
      a.target = step.args[0];
    } else if (n == "ToggleOffObject") {
      a.type = sim::ActionType::ToggleOff;
      a.target = step.args[0];
    } else if (n == "WaitTick" || n == "WaitDone") {
      a.type = sim::ActionType::Wait;
    } else {
      throw std::logic_error("no simulator action for schema " + n);
    }
    out.push_back(std::move(a));
  }
  return out;
}

Demonstration generate_demonstration(const Scene& scene, const EpisodeSpec& spec,
                                     const planner::PlannerConfig& cfg) {
  CompiledTask task = compile_task(scene, spec);
  planner::PlanResult res =
      planner::plan_grounded(household_domain(), task.problem, task.actions, cfg);
  Demonstration demo;
  demo.status = res.status;
  if (res.status == planner::PlanStatus::Solved) {
    demo.plan = std::move(res.plan);
    demo.actions = to_sim_actions(demo.plan);
    demo.total_cost = demo.plan.total_cost;
  }
  return demo;
}

}  // namespace affordsim::compile
