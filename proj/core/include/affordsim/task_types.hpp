#pragma once

// Value types shared by the generator, simulator and agents: what a task is,
// which latent injections an episode carries, and the natural-language
// annotations attached to each demonstration.

#include <string>
#include <vector>

#include <json.hpp>

#include "affordsim/world.hpp"

namespace affordsim::genbench {

using Json = nlohmann::json;

enum class TaskType {
  PickAndPlace,
  CleanAndPlace,
  HeatAndPlace,
  CoolAndPlace,
  PickTwoAndPlace,
  StackAndPlace,
};

inline constexpr int kTaskTypeCount = 6;

std::string to_string(TaskType t);
TaskType task_type_from_string(const std::string& s);

enum class Difficulty { Basic, Advanced };
std::string to_string(Difficulty d);

struct TaskSpec {
  TaskType type = TaskType::PickAndPlace;
  std::string target_class;      // class of the object(s) being moved
  std::string receptacle_class;  // destination receptacle class
  std::string mrecep_class;      // movable container, StackAndPlace only

  bool operator==(const TaskSpec&) const = default;
};

// A latent unavailability planted at episode start. Occupied carries the busy
// duration; Used and Dirty are sticky until the object gets cleaned.
struct Injection {
  std::string object_id;
  world::AffordanceCategory category = world::AffordanceCategory::Dirty;
  int busy_duration = 0;

  bool operator==(const Injection&) const = default;
};

struct Annotation {
  std::string goal_text;
  std::vector<std::string> step_texts;
  bool operator==(const Annotation&) const = default;
};

struct EpisodeSpec {
  std::string pair_id;   // shared between the static and dynamic twin
  std::string scene_id;
  TaskSpec task;
  std::vector<Injection> injections;  // empty in the static twin
  std::string goal;                   // printed goal formula, shared verbatim
  std::vector<Annotation> annotations;
  std::string split = "test";  // train | valid | test
  bool seen_scene = true;

  bool is_static() const { return injections.empty(); }
  // Difficulty is derived, not stored: a static twin is trivially Basic and
  // the dynamic twin's tier follows from how many injections it carries.
  Difficulty difficulty() const {
    return injections.size() >= 2 ? Difficulty::Advanced : Difficulty::Basic;
  }
  std::string id() const {
    return pair_id + (is_static() ? "_static" : "_dynamic");
  }

  bool operator==(const EpisodeSpec&) const = default;
};

Json task_to_json(const TaskSpec& t);
TaskSpec task_from_json(const Json& j);
Json episode_to_json(const EpisodeSpec& e);
EpisodeSpec episode_from_json(const Json& j);

}  // namespace affordsim::genbench
