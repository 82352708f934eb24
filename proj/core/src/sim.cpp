#include "affordsim/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "affordsim/rng.hpp"
#include "affordsim/task_compile.hpp"

namespace affordsim::sim {

using world::AffordanceCategory;
using world::ObjectCategory;
using world::ObjectInstance;

std::string to_string(ActionType t) {
  switch (t) {
    case ActionType::Goto: return "goto";
    case ActionType::Pickup: return "pickup";
    case ActionType::Put: return "put";
    case ActionType::Open: return "open";
    case ActionType::Close: return "close";
    case ActionType::ToggleOn: return "toggle_on";
    case ActionType::ToggleOff: return "toggle_off";
    case ActionType::Clean: return "clean";
    case ActionType::Heat: return "heat";
    case ActionType::Cool: return "cool";
    case ActionType::Wait: return "wait";
  }
  return "wait";
}

ActionType action_type_from_string(const std::string& s) {
  static const std::map<std::string, ActionType> table = {
      {"goto", ActionType::Goto},       {"pickup", ActionType::Pickup},
      {"put", ActionType::Put},         {"open", ActionType::Open},
      {"close", ActionType::Close},     {"toggle_on", ActionType::ToggleOn},
      {"toggle_off", ActionType::ToggleOff}, {"clean", ActionType::Clean},
      {"heat", ActionType::Heat},       {"cool", ActionType::Cool},
      {"wait", ActionType::Wait},
  };
  auto it = table.find(s);
  if (it == table.end()) throw std::invalid_argument("unknown action type: " + s);
  return it->second;
}

std::string to_string(FailReason r) {
  switch (r) {
    case FailReason::None: return "none";
    case FailReason::NotVisible: return "not_visible";
    case FailReason::InvalidTarget: return "invalid_target";
    case FailReason::PreconditionViolated: return "precondition_violated";
    case FailReason::Malformed: return "malformed";
  }
  return "none";
}

std::string Action::str() const {
  if (type == ActionType::Goto) {
    return "goto(loc_" + std::to_string(location) + ")";
  }
  return to_string(type) + "(" + target + ")";
}

Json Action::to_json() const {
  Json j;
  j["type"] = to_string(type);
  if (type == ActionType::Goto) {
    j["location"] = location;
  } else if (!target.empty()) {
    j["target"] = target;
  }
  return j;
}

Action Action::from_json(const Json& j) {
  Action a;
  a.type = action_type_from_string(j.at("type").get<std::string>());
  if (j.contains("location")) a.location = j.at("location").get<int>();
  if (j.contains("target")) a.target = j.at("target").get<std::string>();
  return a;
}

EpisodeState reset(const world::Scene& scene, const genbench::EpisodeSpec& spec) {
  EpisodeState state;
  state.scene = scene;
  state.agent_location = 0;
  state.holding.reset();
  state.step_count = 0;
  for (const auto& inj : spec.injections) {
    auto it = state.scene.objects.find(inj.object_id);
    if (it == state.scene.objects.end()) {
      throw UnknownObject("injection targets unknown object " + inj.object_id);
    }
    switch (inj.category) {
      case AffordanceCategory::Occupied:
        it->second.busy_remaining = inj.busy_duration;
        break;
      case AffordanceCategory::Dirty:
        it->second.clean = false;
        break;
      case AffordanceCategory::Used:
        it->second.used = true;
        break;
    }
  }
  return state;
}

bool object_visible(const EpisodeState& state, const std::string& id) {
  const ObjectInstance* cur = &state.scene.object(id);
  while (true) {
    if (state.holding && *state.holding == cur->id) return true;
    // a fixed receptacle (or a loose portable) is visible from its location
    // even when closed; the closed-door rule only hides contents
    if (!cur->inside) return cur->location == state.agent_location;
    const ObjectInstance& container = state.scene.object(*cur->inside);
    if (container.cls().portable()) {
      cur = &container;  // movable containers never hide their contents
      continue;
    }
    return container.location == state.agent_location &&
           (!container.cls().openable || container.open);
  }
}

namespace {

StepOutcome fail(EpisodeState& state, FailReason reason,
                 std::optional<AffordanceCategory> violated = std::nullopt) {
  state.step_count += 1;
  return StepOutcome{false, reason, violated, 1};
}

void tick_timers(world::Scene& scene, int amount) {
  if (amount <= 0) return;
  for (auto& [id, obj] : scene.objects) {
    if (obj.busy_remaining > 0) {
      obj.busy_remaining = std::max(0, obj.busy_remaining - amount);
    }
  }
}

StepOutcome succeed(EpisodeState& state, int cost) {
  tick_timers(state.scene, cost);
  state.step_count += cost;
  return StepOutcome{true, FailReason::None, std::nullopt, cost};
}

// Topmost link of the containment chain, i.e. the thing whose location
// determines where `obj` is.
const ObjectInstance& chain_root(const world::Scene& scene,
                                 const ObjectInstance& obj) {
  const ObjectInstance* cur = &obj;
  while (cur->inside) cur = &scene.object(*cur->inside);
  return *cur;
}

const ObjectInstance* find_object(const EpisodeState& state,
                                  const std::string& id) {
  auto it = state.scene.objects.find(id);
  return it == state.scene.objects.end() ? nullptr : &it->second;
}

StepOutcome do_goto(EpisodeState& state, const Action& action) {
  if (!action.target.empty()) return fail(state, FailReason::Malformed);
  if (action.location < 0 || action.location >= state.scene.graph.node_count) {
    return fail(state, FailReason::Malformed);
  }
  if (action.location == state.agent_location) return succeed(state, 0);
  int cost =
      world::shortest_path(state.scene.graph, state.agent_location, action.location);
  state.agent_location = action.location;
  if (state.holding) {
    for (auto& [id, obj] : state.scene.objects) {
      if (!obj.cls().portable()) continue;
      if (id == *state.holding ||
          chain_root(state.scene, obj).id == *state.holding) {
        obj.location = state.agent_location;
      }
    }
  }
  return succeed(state, cost);
}

StepOutcome do_pickup(EpisodeState& state, const Action& action) {
  const ObjectInstance* obj = find_object(state, action.target);
  if (!obj) return fail(state, FailReason::InvalidTarget);
  if (!obj->cls().portable()) return fail(state, FailReason::InvalidTarget);
  if (!object_visible(state, action.target)) {
    return fail(state, FailReason::NotVisible);
  }
  if (state.holding) return fail(state, FailReason::PreconditionViolated);
  auto& mut = state.scene.objects.at(action.target);
  mut.inside.reset();
  state.holding = action.target;
  return succeed(state, 1);
}

StepOutcome do_put(EpisodeState& state, const Action& action) {
  const ObjectInstance* target = find_object(state, action.target);
  if (!target) return fail(state, FailReason::InvalidTarget);
  if (!state.holding) return fail(state, FailReason::PreconditionViolated);
  if (*state.holding == action.target) {
    return fail(state, FailReason::InvalidTarget);
  }
  const auto& cls = target->cls();
  if (cls.portable()) {
    if (!cls.movable_receptacle) return fail(state, FailReason::InvalidTarget);
    if (!object_visible(state, action.target)) {
      return fail(state, FailReason::NotVisible);
    }
    // A container that is used or dirty refuses new contents until cleaned.
    if (target->used) {
      return fail(state, FailReason::PreconditionViolated,
                  AffordanceCategory::Used);
    }
    if (!target->clean) {
      return fail(state, FailReason::PreconditionViolated,
                  AffordanceCategory::Dirty);
    }
  } else {
    if (!cls.receptacle) return fail(state, FailReason::InvalidTarget);
    if (!object_visible(state, action.target)) {
      return fail(state, FailReason::NotVisible);
    }
    if (target->busy_remaining > 0) {
      return fail(state, FailReason::PreconditionViolated,
                  AffordanceCategory::Occupied);
    }
    if (cls.openable && !target->open) {
      return fail(state, FailReason::PreconditionViolated);
    }
  }
  auto& held = state.scene.objects.at(*state.holding);
  held.inside = action.target;
  held.location = target->location;
  state.holding.reset();
  return succeed(state, 1);
}

StepOutcome do_open_close(EpisodeState& state, const Action& action, bool open) {
  const ObjectInstance* target = find_object(state, action.target);
  if (!target) return fail(state, FailReason::InvalidTarget);
  if (!target->cls().openable || target->cls().portable()) {
    return fail(state, FailReason::InvalidTarget);
  }
  if (!object_visible(state, action.target)) {
    return fail(state, FailReason::NotVisible);
  }
  if (target->busy_remaining > 0) {
    return fail(state, FailReason::PreconditionViolated,
                AffordanceCategory::Occupied);
  }
  if (target->open == open) return fail(state, FailReason::PreconditionViolated);
  state.scene.objects.at(action.target).open = open;
  return succeed(state, 1);
}

StepOutcome do_toggle(EpisodeState& state, const Action& action, bool on) {
  const ObjectInstance* target = find_object(state, action.target);
  if (!target) return fail(state, FailReason::InvalidTarget);
  if (target->cls().category != ObjectCategory::Appliance) {
    return fail(state, FailReason::InvalidTarget);
  }
  if (!object_visible(state, action.target)) {
    return fail(state, FailReason::NotVisible);
  }
  if (target->busy_remaining > 0) {
    return fail(state, FailReason::PreconditionViolated,
                AffordanceCategory::Occupied);
  }
  if (target->toggled_on == on) {
    return fail(state, FailReason::PreconditionViolated);
  }
  state.scene.objects.at(action.target).toggled_on = on;
  return succeed(state, 1);
}

StepOutcome do_clean(EpisodeState& state, const Action& action) {
  const ObjectInstance* target = find_object(state, action.target);
  if (!target) return fail(state, FailReason::InvalidTarget);
  if (!target->cls().cleanable()) return fail(state, FailReason::InvalidTarget);
  if (!state.holding || *state.holding != action.target) {
    return fail(state, FailReason::PreconditionViolated);
  }
  if (state.agent_location != state.scene.sink_location) {
    return fail(state, FailReason::PreconditionViolated);
  }
  auto& mut = state.scene.objects.at(action.target);
  mut.clean = true;
  mut.used = false;
  return succeed(state, 1);
}

StepOutcome do_temp(EpisodeState& state, const Action& action, bool heat) {
  const ObjectInstance* appliance = find_object(state, action.target);
  if (!appliance) return fail(state, FailReason::InvalidTarget);
  const auto& cls = appliance->cls();
  if (heat ? !cls.heats : !cls.cools) {
    return fail(state, FailReason::InvalidTarget);
  }
  if (!object_visible(state, action.target)) {
    return fail(state, FailReason::NotVisible);
  }
  if (appliance->busy_remaining > 0) {
    return fail(state, FailReason::PreconditionViolated,
                AffordanceCategory::Occupied);
  }
  if (!state.holding) return fail(state, FailReason::PreconditionViolated);
  auto& held = state.scene.objects.at(*state.holding);
  held.heated = heat;
  held.cooled = !heat;
  return succeed(state, 4);
}

StepOutcome do_wait(EpisodeState& state, const Action& action) {
  if (!action.target.empty()) return fail(state, FailReason::Malformed);
  return succeed(state, 1);
}

}  // namespace

StepOutcome step(EpisodeState& state, const Action& action) {
  if (action.type != ActionType::Goto && action.type != ActionType::Wait &&
      action.target.empty()) {
    return fail(state, FailReason::Malformed);
  }
  switch (action.type) {
    case ActionType::Goto: return do_goto(state, action);
    case ActionType::Pickup: return do_pickup(state, action);
    case ActionType::Put: return do_put(state, action);
    case ActionType::Open: return do_open_close(state, action, true);
    case ActionType::Close: return do_open_close(state, action, false);
    case ActionType::ToggleOn: return do_toggle(state, action, true);
    case ActionType::ToggleOff: return do_toggle(state, action, false);
    case ActionType::Clean: return do_clean(state, action);
    case ActionType::Heat: return do_temp(state, action, true);
    case ActionType::Cool: return do_temp(state, action, false);
    case ActionType::Wait: return do_wait(state, action);
  }
  return fail(state, FailReason::Malformed);
}

Observation observe(const EpisodeState& state, bool reveal_latent) {
  Observation obs;
  obs.location = state.agent_location;
  obs.holding = state.holding;
  for (const auto& [id, obj] : state.scene.objects) {
    bool visible = obj.cls().portable()
                       ? object_visible(state, id)
                       : obj.location == state.agent_location;
    if (!visible) continue;
    ObsObject o;
    o.id = id;
    o.class_name = obj.class_name;
    o.open = obj.open;
    if (reveal_latent) {
      o.clean = obj.clean;
      o.used = obj.used;
      o.busy_remaining = obj.busy_remaining;
    }
    obs.visible.push_back(std::move(o));
  }
  return obs;
}

Json Observation::to_json() const {
  Json j;
  j["location"] = location;
  j["holding"] = holding ? Json(*holding) : Json(nullptr);
  Json vis = Json::array();
  for (const auto& o : visible) {
    vis.push_back(Json{{"id", o.id}, {"class", o.class_name}, {"open", o.open}});
  }
  j["visible"] = std::move(vis);
  return j;
}

std::string Observation::digest() const {
  std::uint64_t h = fnv1a(to_json().dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

GoalScore score_goal(const EpisodeState& state,
                     const genbench::EpisodeSpec& spec) {
  const pddl::Domain& domain = compile::household_domain();
  pddl::Problem problem = compile::goal_problem(state.scene, spec.task);
  pddl::State facts = compile::project(state);

  GoalScore score;
  for (const auto& cond : pddl::goal_conditions(problem)) {
    ++score.gc_total;
    if (pddl::formula_satisfied(cond, facts, domain, problem)) {
      ++score.gc_satisfied;
    }
  }
  score.success = score.gc_satisfied == score.gc_total;
  return score;
}

}  // namespace affordsim::sim
