#include "affordsim/genbench.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "affordsim/instructions.hpp"

namespace affordsim::genbench {

using world::AffordanceCategory;
using world::ObjectCategory;
using world::Scene;

std::string to_string(TaskType t) {
  switch (t) {
    case TaskType::PickAndPlace: return "PickAndPlace";
    case TaskType::CleanAndPlace: return "CleanAndPlace";
    case TaskType::HeatAndPlace: return "HeatAndPlace";
    case TaskType::CoolAndPlace: return "CoolAndPlace";
    case TaskType::PickTwoAndPlace: return "PickTwoAndPlace";
    case TaskType::StackAndPlace: return "StackAndPlace";
  }
  return "PickAndPlace";
}

TaskType task_type_from_string(const std::string& s) {
  for (int i = 0; i < kTaskTypeCount; ++i) {
    auto t = static_cast<TaskType>(i);
    if (to_string(t) == s) return t;
  }
  throw std::invalid_argument("unknown task type: " + s);
}

std::string to_string(Difficulty d) {
  return d == Difficulty::Basic ? "basic" : "advanced";
}

namespace {

std::string pad6(int n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d", n);
  return buf;
}

// Destinations are ordinary storage; appliances and the sink stay out so the
// destination itself never competes with task appliances for injections.
const std::set<std::string>& allowed_destinations() {
  static const std::set<std::string> table = {"CounterTop", "Cabinet", "Drawer",
                                              "Shelf"};
  return table;
}

struct ClassPools {
  std::vector<std::string> portables;        // class names, sorted
  std::vector<std::string> plain_portables;  // portables that are not movable receptacles
  std::vector<std::string> cleanables;
  std::vector<std::string> pairs;            // classes with >= 2 instances
  std::vector<std::string> single_mreceps;   // movable receptacle, exactly 1 instance
  std::vector<std::string> destinations;
  bool has_heater = false;
  bool has_cooler = false;
};

ClassPools collect_pools(const Scene& scene) {
  std::map<std::string, int> counts;
  for (const auto& [id, obj] : scene.objects) counts[obj.class_name]++;

  ClassPools pools;
  for (const auto& [cls_name, n] : counts) {
    const auto& cls = world::class_info(cls_name);
    if (cls.portable()) {
      pools.portables.push_back(cls_name);
      if (!cls.movable_receptacle) pools.plain_portables.push_back(cls_name);
      if (cls.cleanable()) pools.cleanables.push_back(cls_name);
      if (n >= 2) pools.pairs.push_back(cls_name);
      if (cls.movable_receptacle && n == 1) pools.single_mreceps.push_back(cls_name);
    } else {
      if (allowed_destinations().count(cls_name)) {
        pools.destinations.push_back(cls_name);
      }
      if (cls.heats) pools.has_heater = true;
      if (cls.cools) pools.has_cooler = true;
    }
  }
  return pools;
}

}  // namespace

TaskSpec sample_task(const Scene& scene, Rng& rng) {
  ClassPools pools = collect_pools(scene);
  if (pools.destinations.empty() || pools.portables.empty()) {
    throw GenerationError("scene " + scene.id + " cannot host any task");
  }

  std::vector<TaskType> feasible = {TaskType::PickAndPlace};
  if (!pools.cleanables.empty()) feasible.push_back(TaskType::CleanAndPlace);
  if (pools.has_heater) feasible.push_back(TaskType::HeatAndPlace);
  if (pools.has_cooler) feasible.push_back(TaskType::CoolAndPlace);
  if (!pools.pairs.empty()) feasible.push_back(TaskType::PickTwoAndPlace);
  if (!pools.single_mreceps.empty() && !pools.plain_portables.empty()) {
    feasible.push_back(TaskType::StackAndPlace);
  }

  TaskSpec task;
  task.type = feasible[rng.below(feasible.size())];
  task.receptacle_class = pools.destinations[rng.below(pools.destinations.size())];
  switch (task.type) {
    case TaskType::PickAndPlace:
    case TaskType::HeatAndPlace:
    case TaskType::CoolAndPlace:
      task.target_class = pools.portables[rng.below(pools.portables.size())];
      break;
    case TaskType::CleanAndPlace:
      task.target_class = pools.cleanables[rng.below(pools.cleanables.size())];
      break;
    case TaskType::PickTwoAndPlace:
      task.target_class = pools.pairs[rng.below(pools.pairs.size())];
      break;
    case TaskType::StackAndPlace: {
      task.mrecep_class = pools.single_mreceps[rng.below(pools.single_mreceps.size())];
      std::vector<std::string> targets;
      for (const auto& c : pools.plain_portables) {
        if (c != task.mrecep_class) targets.push_back(c);
      }
      task.target_class = targets[rng.below(targets.size())];
      break;
    }
  }
  return task;
}

bool advanced_eligible(const TaskSpec& task) {
  if (task.type != TaskType::HeatAndPlace && task.type != TaskType::CoolAndPlace) {
    return false;
  }
  return world::class_info(task.target_class).category == ObjectCategory::Tableware;
}

std::vector<Injection> sample_injections(const Scene& scene, const TaskSpec& task,
                                         const compile::Demonstration& expert_static,
                                         Difficulty difficulty, int min_busy,
                                         int max_busy, Rng& rng) {
  std::set<std::string> used;
  for (const auto& action : expert_static.actions) {
    if (!action.target.empty()) used.insert(action.target);
  }

  auto sticky_category = [&](const std::string& id) {
    auto cats = scene.object(id).cls().applicable_categories();
    // tableware admits Used or Dirty, cloth only Dirty
    if (cats.size() > 1 && rng.chance(0.5)) return cats[0];
    return cats.back();
  };
  auto make_injection = [&](const std::string& id) {
    const auto& cls = scene.object(id).cls();
    if (cls.category == ObjectCategory::Appliance) {
      return Injection{id, AffordanceCategory::Occupied,
                       static_cast<int>(rng.between(min_busy, max_busy))};
    }
    return Injection{id, sticky_category(id), 0};
  };

  std::vector<Injection> out;
  if (difficulty == Difficulty::Advanced) {
    // the task appliance goes busy and the task object needs a wash
    std::string appliance, target;
    for (const auto& id : used) {
      const auto& cls = scene.object(id).cls();
      bool is_task_appliance = task.type == TaskType::HeatAndPlace ? cls.heats
                                                                   : cls.cools;
      if (is_task_appliance) appliance = id;
      if (scene.object(id).class_name == task.target_class) target = id;
    }
    if (appliance.empty() || target.empty()) return {};
    out.push_back(make_injection(appliance));
    out.push_back(Injection{target, sticky_category(target), 0});
  } else {
    std::vector<std::string> candidates;
    for (const auto& id : used) {
      if (scene.object(id).cls().dynamic()) candidates.push_back(id);
    }
    if (candidates.empty()) return {};
    out.push_back(make_injection(candidates[rng.below(candidates.size())]));
  }
  std::sort(out.begin(), out.end(), [](const Injection& a, const Injection& b) {
    return a.object_id < b.object_id;
  });
  return out;
}

GeneratedPair generate_pair(const Scene& scene, const std::string& scene_id,
                            int pair_index, const GenConfig& config) {
  Rng rng(rng_key(config.seed, "pair", static_cast<std::uint64_t>(pair_index)));

  for (int attempt = 0; attempt < config.retry_budget; ++attempt) {
    TaskSpec task = sample_task(scene, rng);

    EpisodeSpec base;
    base.pair_id = "p" + pad6(pair_index);
    base.scene_id = scene_id;
    base.task = task;
    base.goal = pddl::print_formula(compile::task_goal(task));
    base.split = "test";

    if (sim::score_goal(sim::reset(scene, base), base).success) continue;

    auto expert_static = compile::generate_demonstration(scene, base, config.planner);
    if (expert_static.status != planner::PlanStatus::Solved ||
        expert_static.actions.empty()) {
      continue;
    }

    Difficulty difficulty =
        advanced_eligible(task) && rng.chance(config.advanced_fraction)
            ? Difficulty::Advanced
            : Difficulty::Basic;
    auto injections =
        sample_injections(scene, task, expert_static, difficulty,
                          config.min_busy, config.max_busy, rng);
    if (injections.empty()) continue;

    EpisodeSpec dynamic_spec = base;
    dynamic_spec.injections = injections;
    auto expert_dynamic =
        compile::generate_demonstration(scene, dynamic_spec, config.planner);
    if (expert_dynamic.status != planner::PlanStatus::Solved ||
        expert_dynamic.actions.empty()) {
      continue;
    }

    auto annotations = make_annotations(task, rng);
    base.annotations = annotations;
    dynamic_spec.annotations = std::move(annotations);

    GeneratedPair pair;
    pair.stat = std::move(base);
    pair.dyn = std::move(dynamic_spec);
    pair.expert_static = std::move(expert_static);
    pair.expert_dynamic = std::move(expert_dynamic);
    return pair;
  }
  throw GenerationError("exhausted retries for pair " + std::to_string(pair_index) +
                        " in scene " + scene_id);
}

GeneratedDataset build_dataset(const GenConfig& config) {
  if (config.pairs <= 0 || config.scenes <= 0) {
    throw GenerationError("config needs at least one pair and one scene");
  }
  GeneratedDataset out;
  out.config = config;

  std::vector<std::string> scene_ids;
  for (int i = 0; i < config.scenes; ++i) {
    auto room = (i % 4 == 3) ? world::RoomType::Bathroom : world::RoomType::Kitchen;
    std::uint64_t scene_seed = rng_key(config.seed, "scene", static_cast<std::uint64_t>(i));
    Scene scene = world::build_scene(scene_seed, room, config.size);
    std::string id =
        (room == world::RoomType::Kitchen ? "kitchen_" : "bathroom_") + pad6(i);
    scene.id = id;
    scene_ids.push_back(id);
    out.scenes.emplace(id, std::move(scene));
  }
  int unseen = static_cast<int>(config.unseen_fraction * config.scenes);
  std::set<std::string> unseen_ids(scene_ids.end() - unseen, scene_ids.end());

  for (int p = 0; p < config.pairs; ++p) {
    Rng pick(rng_key(config.seed, "pair-scene", static_cast<std::uint64_t>(p)));
    const std::string& scene_id = scene_ids[pick.below(scene_ids.size())];
    GeneratedPair pair = generate_pair(out.scenes.at(scene_id), scene_id, p, config);
    bool seen = !unseen_ids.count(scene_id);
    pair.stat.seen_scene = seen;
    pair.dyn.seen_scene = seen;
    out.pairs.push_back(std::move(pair));
  }
  return out;
}

}  // namespace affordsim::genbench
