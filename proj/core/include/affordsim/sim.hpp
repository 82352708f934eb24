#pragma once

// Episode simulator. Executes high-level actions against a scene snapshot,
// enforcing latent affordance preconditions (busy appliances, unavailable
// containers) that agents cannot see in observations. Failed actions burn a
// step but never change object state, and failure causes are not part of the
// observable interface.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "affordsim/task_types.hpp"
#include "affordsim/world.hpp"

namespace affordsim::sim {

using Json = nlohmann::json;

enum class ActionType {
  Goto,
  Pickup,
  Put,
  Open,
  Close,
  ToggleOn,
  ToggleOff,
  Clean,
  Heat,
  Cool,
  Wait,
};

std::string to_string(ActionType t);
ActionType action_type_from_string(const std::string& s);

struct Action {
  ActionType type = ActionType::Wait;
  std::string target;       // object id; empty for Goto/Wait
  world::LocationId location = -1;  // Goto only

  bool operator==(const Action&) const = default;
  std::string str() const;
  Json to_json() const;
  static Action from_json(const Json& j);
};

// Why a step failed. Agents only ever learn ok/failed; the reason stays
// inside the simulator (and in internal traces used by tests).
enum class FailReason {
  None,
  NotVisible,
  InvalidTarget,
  PreconditionViolated,
  Malformed,
};

std::string to_string(FailReason r);

struct StepOutcome {
  bool ok = true;
  FailReason reason = FailReason::None;
  // Set when reason == PreconditionViolated.
  std::optional<world::AffordanceCategory> violated;
  int cost = 1;  // how much step_count advanced
};

struct EpisodeState {
  world::Scene scene;  // object attributes mutate during the episode
  world::LocationId agent_location = 0;
  std::optional<std::string> holding;
  int step_count = 0;
};

struct ObsObject {
  std::string id;
  std::string class_name;
  bool open = false;
  // Latent attributes, populated only when observing with reveal_latent.
  std::optional<bool> clean;
  std::optional<bool> used;
  std::optional<int> busy_remaining;
};

struct Observation {
  world::LocationId location = 0;
  std::optional<std::string> holding;
  std::vector<ObsObject> visible;

  Json to_json() const;  // canonical; latent fields are never serialized
  std::string digest() const;
};

struct UnknownObject : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fresh episode state with the episode's injections applied to the scene.
EpisodeState reset(const world::Scene& scene, const genbench::EpisodeSpec& spec);

// Executes one action. Successful steps advance step_count by the action cost
// and tick every busy timer down by the same amount; failed steps advance
// step_count by 1 and leave all object state untouched.
StepOutcome step(EpisodeState& state, const Action& action);

// True when `id` is at the agent's location and not enclosed by any closed
// openable receptacle.
bool object_visible(const EpisodeState& state, const std::string& id);

Observation observe(const EpisodeState& state, bool reveal_latent = false);

struct GoalScore {
  bool success = false;
  int gc_satisfied = 0;
  int gc_total = 0;
};

// Evaluates the episode goal against the current state. One goal condition
// per top-level conjunct of the goal formula.
GoalScore score_goal(const EpisodeState& state, const genbench::EpisodeSpec& spec);

}  // namespace affordsim::sim
