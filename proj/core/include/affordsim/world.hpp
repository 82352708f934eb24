#pragma once

// Symbolic household model: rooms are small graphs of locations, objects are
// typed instances with a handful of boolean/integer attributes. This is the
// substrate everything else (task generation, planning, simulation) works on.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace affordsim::world {

using Json = nlohmann::json;
using LocationId = int;

enum class RoomType { Kitchen, Bathroom };

// Why an object can be unavailable. Occupied clears on its own once the
// busy timer runs out; Used and Dirty stick until the object is cleaned.
enum class AffordanceCategory { Occupied, Used, Dirty };
enum class Persistence { Temporary, Persistent };

enum class ObjectCategory { Appliance, Tableware, Cloth, Plain, Surface };

struct ObjectClass {
  std::string name;
  ObjectCategory category = ObjectCategory::Plain;
  bool openable = false;      // has an open/closed state (cabinet, microwave)
  bool receptacle = false;    // other objects can be placed in/on it
  bool movable_receptacle = false;  // portable container (bowl, pan, ...)
  bool heats = false;         // appliance that heats (microwave)
  bool cools = false;         // appliance that cools (fridge)
  bool sink = false;

  bool dynamic() const;  // true iff it admits at least one affordance category
  std::vector<AffordanceCategory> applicable_categories() const;
  bool cleanable() const;
  bool portable() const;
};

Persistence persistence(AffordanceCategory c);
std::string to_string(AffordanceCategory c);
AffordanceCategory affordance_from_string(const std::string& s);
std::string to_string(ObjectCategory c);
std::string to_string(RoomType r);
RoomType room_from_string(const std::string& s);

// Class catalog. Lookup throws std::out_of_range on unknown names.
const ObjectClass& class_info(const std::string& name);
const std::vector<ObjectClass>& all_classes();

struct ObjectInstance {
  std::string id;
  std::string class_name;
  LocationId location = 0;
  std::optional<std::string> inside;  // receptacle or container holding this
  bool open = false;
  bool clean = true;
  bool used = false;
  int busy_remaining = 0;
  bool heated = false;
  bool cooled = false;
  bool toggled_on = false;

  const ObjectClass& cls() const { return class_info(class_name); }
};

struct Edge {
  LocationId a = 0;
  LocationId b = 0;
  int cost = 1;
};

struct LocationGraph {
  int node_count = 0;
  std::vector<Edge> edges;  // undirected, costs >= 1

  bool connected() const;
};

// Cheapest travel cost between two locations (Dijkstra). Throws
// std::out_of_range if either endpoint is not a node of the graph.
int shortest_path(const LocationGraph& g, LocationId from, LocationId to);

struct Scene {
  std::string id;
  RoomType room = RoomType::Kitchen;
  std::uint64_t seed = 0;
  LocationGraph graph;
  LocationId sink_location = 0;
  std::map<std::string, ObjectInstance> objects;  // keyed by instance id

  const ObjectInstance& object(const std::string& id) const;
  std::vector<std::string> objects_of_class(const std::string& cls) const;
  std::vector<std::string> objects_of_category(ObjectCategory c) const;
};

struct SceneSize {
  int locations = 5;
  // Extra copies on top of the built-in per-room catalog; keyed by class name.
  std::map<std::string, int> extra_objects;
};

// Deterministic: the same (seed, room, size) always yields the same scene.
Scene build_scene(std::uint64_t seed, RoomType room, const SceneSize& size = {});

// Returns human-readable violations; empty means the scene is well formed.
std::vector<std::string> validate_scene(const Scene& scene);

Json scene_to_json(const Scene& scene);
Scene scene_from_json(const Json& j);

}  // namespace affordsim::world
