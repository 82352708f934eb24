#include "affordsim/world.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "affordsim/rng.hpp"

namespace affordsim::world {

bool ObjectClass::dynamic() const { return !applicable_categories().empty(); }

std::vector<AffordanceCategory> ObjectClass::applicable_categories() const {
  switch (category) {
    case ObjectCategory::Appliance:
      return {AffordanceCategory::Occupied};
    case ObjectCategory::Tableware:
      return {AffordanceCategory::Used, AffordanceCategory::Dirty};
    case ObjectCategory::Cloth:
      return {AffordanceCategory::Dirty};
    default:
      return {};
  }
}

bool ObjectClass::cleanable() const {
  return category == ObjectCategory::Tableware ||
         category == ObjectCategory::Cloth;
}

bool ObjectClass::portable() const {
  return category == ObjectCategory::Tableware ||
         category == ObjectCategory::Cloth || category == ObjectCategory::Plain;
}

Persistence persistence(AffordanceCategory c) {
  return c == AffordanceCategory::Occupied ? Persistence::Temporary
                                           : Persistence::Persistent;
}

std::string to_string(AffordanceCategory c) {
  switch (c) {
    case AffordanceCategory::Occupied: return "Occupied";
    case AffordanceCategory::Used: return "Used";
    case AffordanceCategory::Dirty: return "Dirty";
  }
  return "?";
}

AffordanceCategory affordance_from_string(const std::string& s) {
  if (s == "Occupied") return AffordanceCategory::Occupied;
  if (s == "Used") return AffordanceCategory::Used;
  if (s == "Dirty") return AffordanceCategory::Dirty;
  throw std::invalid_argument("unknown affordance category: " + s);
}

std::string to_string(ObjectCategory c) {
  switch (c) {
    case ObjectCategory::Appliance: return "Appliance";
    case ObjectCategory::Tableware: return "Tableware";
    case ObjectCategory::Cloth: return "Cloth";
    case ObjectCategory::Plain: return "Plain";
    case ObjectCategory::Surface: return "Surface";
  }
  return "?";
}

std::string to_string(RoomType r) {
  return r == RoomType::Kitchen ? "Kitchen" : "Bathroom";
}

RoomType room_from_string(const std::string& s) {
  if (s == "Kitchen") return RoomType::Kitchen;
  if (s == "Bathroom") return RoomType::Bathroom;
  throw std::invalid_argument("unknown room type: " + s);
}

namespace {

ObjectClass make_class(std::string name, ObjectCategory cat, bool openable,
                       bool receptacle, bool movable, bool heats, bool cools,
                       bool sink) {
  ObjectClass c;
  c.name = std::move(name);
  c.category = cat;
  c.openable = openable;
  c.receptacle = receptacle;
  c.movable_receptacle = movable;
  c.heats = heats;
  c.cools = cools;
  c.sink = sink;
  return c;
}

const std::vector<ObjectClass>& catalog() {
  static const std::vector<ObjectClass> classes = {
      //          name           category                  open  recep mov   heat  cool  sink
      make_class("Microwave", ObjectCategory::Appliance, true, true, false, true, false, false),
      make_class("Fridge", ObjectCategory::Appliance, true, true, false, false, true, false),
      make_class("Mug", ObjectCategory::Tableware, false, false, false, false, false, false),
      make_class("Cup", ObjectCategory::Tableware, false, false, false, false, false, false),
      make_class("Bowl", ObjectCategory::Tableware, false, true, true, false, false, false),
      make_class("Plate", ObjectCategory::Tableware, false, true, true, false, false, false),
      make_class("Pot", ObjectCategory::Tableware, false, true, true, false, false, false),
      make_class("Pan", ObjectCategory::Tableware, false, true, true, false, false, false),
      make_class("Cloth", ObjectCategory::Cloth, false, false, false, false, false, false),
      make_class("HandTowel", ObjectCategory::Cloth, false, false, false, false, false, false),
      make_class("Egg", ObjectCategory::Plain, false, false, false, false, false, false),
      make_class("Apple", ObjectCategory::Plain, false, false, false, false, false, false),
      make_class("Potato", ObjectCategory::Plain, false, false, false, false, false, false),
      make_class("Bread", ObjectCategory::Plain, false, false, false, false, false, false),
      make_class("Tomato", ObjectCategory::Plain, false, false, false, false, false, false),
      make_class("SoapBar", ObjectCategory::Plain, false, false, false, false, false, false),
      make_class("ToiletPaper", ObjectCategory::Plain, false, false, false, false, false, false),
      make_class("Candle", ObjectCategory::Plain, false, false, false, false, false, false),
      make_class("CounterTop", ObjectCategory::Surface, false, true, false, false, false, false),
      make_class("Cabinet", ObjectCategory::Surface, true, true, false, false, false, false),
      make_class("Drawer", ObjectCategory::Surface, true, true, false, false, false, false),
      make_class("Shelf", ObjectCategory::Surface, false, true, false, false, false, false),
      make_class("SinkBasin", ObjectCategory::Surface, false, true, false, false, false, true),
  };
  return classes;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

const std::vector<ObjectClass>& all_classes() { return catalog(); }

const ObjectClass& class_info(const std::string& name) {
  for (const auto& c : catalog()) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("unknown object class: " + name);
}

bool LocationGraph::connected() const {
  if (node_count <= 0) return false;
  std::vector<std::vector<int>> adj(node_count);
  for (const auto& e : edges) {
    if (e.a < 0 || e.a >= node_count || e.b < 0 || e.b >= node_count) {
      return false;
    }
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  std::vector<bool> seen(node_count, false);
  std::queue<int> q;
  q.push(0);
  seen[0] = true;
  int reached = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        q.push(v);
      }
    }
  }
  return reached == node_count;
}

int shortest_path(const LocationGraph& g, LocationId from, LocationId to) {
  if (from < 0 || from >= g.node_count || to < 0 || to >= g.node_count) {
    throw std::out_of_range("shortest_path: location id out of range");
  }
  if (from == to) return 0;
  std::vector<std::vector<std::pair<int, int>>> adj(g.node_count);
  for (const auto& e : g.edges) {
    adj[e.a].push_back({e.b, e.cost});
    adj[e.b].push_back({e.a, e.cost});
  }
  constexpr int kInf = std::numeric_limits<int>::max();
  std::vector<int> dist(g.node_count, kInf);
  using Item = std::pair<int, int>;  // (dist, node)
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[from] = 0;
  pq.push({0, from});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    if (u == to) return d;
    for (auto [v, w] : adj[u]) {
      if (d + w < dist[v]) {
        dist[v] = d + w;
        pq.push({dist[v], v});
      }
    }
  }
  throw std::runtime_error("shortest_path: no route between locations");
}

const ObjectInstance& Scene::object(const std::string& oid) const {
  auto it = objects.find(oid);
  if (it == objects.end()) {
    throw std::out_of_range("unknown object id: " + oid);
  }
  return it->second;
}

std::vector<std::string> Scene::objects_of_class(const std::string& cls) const {
  std::vector<std::string> out;
  for (const auto& [id, obj] : objects) {
    if (obj.class_name == cls) out.push_back(id);
  }
  return out;
}

std::vector<std::string> Scene::objects_of_category(ObjectCategory c) const {
  std::vector<std::string> out;
  for (const auto& [id, obj] : objects) {
    if (obj.cls().category == c) out.push_back(id);
  }
  return out;
}

namespace {

// Per-room object mix. Counts are what a default-sized scene receives; the
// scene builder also honors SceneSize::extra_objects on top of these.
std::vector<std::pair<std::string, int>> room_mix(RoomType room) {
  if (room == RoomType::Kitchen) {
    return {{"Microwave", 1}, {"Fridge", 1},  {"Cabinet", 2}, {"Drawer", 1},
            {"Shelf", 1},     {"Mug", 2},     {"Cup", 1},     {"Bowl", 1},
            {"Plate", 2},     {"Pot", 1},     {"Pan", 1},     {"Cloth", 1},
            {"Egg", 1},       {"Apple", 1},   {"Potato", 1},  {"Bread", 1},
            {"Tomato", 1}};
  }
  return {{"Cabinet", 2},  {"Drawer", 1},      {"Shelf", 1},
          {"Cup", 1},      {"Bowl", 1},        {"Cloth", 1},
          {"HandTowel", 1}, {"SoapBar", 1},    {"ToiletPaper", 1},
          {"Candle", 1}};
}

}  // namespace

Scene build_scene(std::uint64_t seed, RoomType room, const SceneSize& size) {
  if (size.locations < 2) {
    throw std::invalid_argument("build_scene: need at least 2 locations");
  }
  for (const auto& [cls, n] : size.extra_objects) {
    class_info(cls);  // throws on unknown class names
    if (n < 0) throw std::invalid_argument("build_scene: negative count for " + cls);
  }

  Rng rng(rng_key(seed, "scene", to_string(room)));
  Scene scene;
  scene.seed = seed;
  scene.room = room;
  scene.id = lower(to_string(room)) + "_" + std::to_string(seed);

  const int n = size.locations;
  scene.graph.node_count = n;
  for (int i = 1; i < n; ++i) {
    Edge e;
    e.a = static_cast<int>(rng.below(i));
    e.b = i;
    e.cost = static_cast<int>(rng.between(1, 3));
    scene.graph.edges.push_back(e);
  }
  // A few shortcut edges so routes are not always tree paths.
  int extra = n / 3;
  for (int k = 0; k < extra; ++k) {
    int a = static_cast<int>(rng.below(n));
    int b = static_cast<int>(rng.below(n));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    bool dup = false;
    for (const auto& e : scene.graph.edges) {
      if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) dup = true;
    }
    if (dup) continue;
    scene.graph.edges.push_back({a, b, static_cast<int>(rng.between(1, 3))});
  }
  std::sort(scene.graph.edges.begin(), scene.graph.edges.end(),
            [](const Edge& x, const Edge& y) {
              return std::tie(x.a, x.b) < std::tie(y.a, y.b);
            });

  scene.sink_location = static_cast<int>(rng.below(n));

  auto counts = room_mix(room);
  for (const auto& [cls, n_extra] : size.extra_objects) {
    bool merged = false;
    for (auto& [name, cnt] : counts) {
      if (name == cls) {
        cnt += n_extra;
        merged = true;
      }
    }
    if (!merged) counts.push_back({cls, n_extra});
  }

  std::map<std::string, int> next_index;
  auto add_object = [&](const std::string& cls, LocationId loc) -> std::string {
    ObjectInstance obj;
    obj.class_name = cls;
    obj.id = lower(cls) + "_" + std::to_string(next_index[cls]++);
    obj.location = loc;
    scene.objects[obj.id] = obj;
    return obj.id;
  };

  // Fixed furniture first: one countertop per location plus the sink basin,
  // so every location has somewhere to set an object down.
  for (int loc = 0; loc < n; ++loc) add_object("CounterTop", loc);
  add_object("SinkBasin", scene.sink_location);

  std::vector<std::string> open_surfaces;  // ids of non-openable receptacles
  for (const auto& [id, obj] : scene.objects) open_surfaces.push_back(id);

  // Remaining fixtures and portables in catalog order.
  for (const auto& [cls, count] : counts) {
    const ObjectClass& info = class_info(cls);
    for (int k = 0; k < count; ++k) {
      if (info.portable()) {
        // Portables start out sitting on some open surface.
        const std::string& surface = rng.pick(open_surfaces);
        const auto& s = scene.objects.at(surface);
        auto id = add_object(cls, s.location);
        scene.objects.at(id).inside = surface;
      } else {
        add_object(cls, static_cast<int>(rng.below(n)));
      }
    }
  }
  return scene;
}

std::vector<std::string> validate_scene(const Scene& scene) {
  std::vector<std::string> bad;
  const auto& g = scene.graph;
  if (g.node_count < 1) bad.push_back("graph has no locations");
  for (const auto& e : g.edges) {
    if (e.a < 0 || e.a >= g.node_count || e.b < 0 || e.b >= g.node_count) {
      bad.push_back("edge endpoint out of range");
    }
    if (e.cost < 1) bad.push_back("edge cost below 1");
    if (e.a == e.b) bad.push_back("self loop in location graph");
  }
  if (g.node_count >= 1 && !g.connected()) {
    bad.push_back("location graph is not connected");
  }

  int sinks = 0;
  for (const auto& [id, obj] : scene.objects) {
    const ObjectClass* info = nullptr;
    try {
      info = &obj.cls();
    } catch (const std::out_of_range&) {
      bad.push_back("object " + id + " has unknown class " + obj.class_name);
      continue;
    }
    if (id != obj.id) bad.push_back("object key/id mismatch for " + id);
    if (obj.location < 0 || obj.location >= g.node_count) {
      bad.push_back("object " + id + " placed at invalid location");
    }
    if (info->sink) {
      ++sinks;
      if (obj.location != scene.sink_location) {
        bad.push_back("sink basin not at scene sink_location");
      }
    }
    if (obj.open && !info->openable) {
      bad.push_back("object " + id + " is open but not openable");
    }
    if (obj.busy_remaining < 0) {
      bad.push_back("object " + id + " has negative busy timer");
    }
    if (obj.busy_remaining > 0 && info->category != ObjectCategory::Appliance) {
      bad.push_back("object " + id + " is busy but not an appliance");
    }
    if (obj.used && info->category != ObjectCategory::Tableware) {
      bad.push_back("object " + id + " is marked used but not tableware");
    }
    if (!obj.clean && !info->cleanable()) {
      bad.push_back("object " + id + " is dirty but not cleanable");
    }
    if ((obj.heated || obj.cooled) && !info->portable()) {
      bad.push_back("object " + id + " has a temperature but is fixed");
    }
    if (!info->portable() && obj.inside.has_value()) {
      bad.push_back("fixed object " + id + " claims to be inside something");
    }
    if (obj.inside) {
      auto it = scene.objects.find(*obj.inside);
      if (it == scene.objects.end()) {
        bad.push_back("object " + id + " inside unknown object " + *obj.inside);
      } else {
        if (!it->second.cls().receptacle) {
          bad.push_back("object " + id + " inside non-receptacle " + *obj.inside);
        }
        if (it->second.location != obj.location) {
          bad.push_back("object " + id + " location disagrees with container");
        }
      }
    }
  }
  if (sinks != 1) {
    bad.push_back("scene must contain exactly one sink basin, found " +
                  std::to_string(sinks));
  }
  if (scene.sink_location < 0 || scene.sink_location >= g.node_count) {
    bad.push_back("sink_location out of range");
  }
  return bad;
}

Json scene_to_json(const Scene& scene) {
  Json j;
  j["id"] = scene.id;
  j["room"] = to_string(scene.room);
  j["seed"] = scene.seed;
  j["sink_location"] = scene.sink_location;
  Json edges = Json::array();
  for (const auto& e : scene.graph.edges) {
    edges.push_back(Json::array({e.a, e.b, e.cost}));
  }
  j["graph"] = Json{{"nodes", scene.graph.node_count}, {"edges", edges}};
  Json objs = Json::object();
  for (const auto& [id, o] : scene.objects) {
    Json jo;
    jo["class"] = o.class_name;
    jo["location"] = o.location;
    jo["inside"] = o.inside ? Json(*o.inside) : Json(nullptr);
    jo["open"] = o.open;
    jo["clean"] = o.clean;
    jo["used"] = o.used;
    jo["busy_remaining"] = o.busy_remaining;
    jo["heated"] = o.heated;
    jo["cooled"] = o.cooled;
    jo["toggled_on"] = o.toggled_on;
    objs[id] = jo;
  }
  j["objects"] = objs;
  return j;
}

Scene scene_from_json(const Json& j) {
  Scene scene;
  scene.id = j.at("id").get<std::string>();
  scene.room = room_from_string(j.at("room").get<std::string>());
  scene.seed = j.at("seed").get<std::uint64_t>();
  scene.sink_location = j.at("sink_location").get<int>();
  scene.graph.node_count = j.at("graph").at("nodes").get<int>();
  for (const auto& e : j.at("graph").at("edges")) {
    scene.graph.edges.push_back(
        {e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()});
  }
  for (const auto& [id, jo] : j.at("objects").items()) {
    ObjectInstance o;
    o.id = id;
    o.class_name = jo.at("class").get<std::string>();
    o.location = jo.at("location").get<int>();
    if (!jo.at("inside").is_null()) o.inside = jo.at("inside").get<std::string>();
    o.open = jo.at("open").get<bool>();
    o.clean = jo.at("clean").get<bool>();
    o.used = jo.at("used").get<bool>();
    o.busy_remaining = jo.at("busy_remaining").get<int>();
    o.heated = jo.at("heated").get<bool>();
    o.cooled = jo.at("cooled").get<bool>();
    o.toggled_on = jo.at("toggled_on").get<bool>();
    scene.objects[id] = o;
  }
  return scene;
}

}  // namespace affordsim::world
