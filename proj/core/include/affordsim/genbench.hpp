#pragma once

// Benchmark generation: sample a feasible task for a scene, plant latent
// unavailability into a copy of it, and produce paired (static, dynamic)
// episodes that differ only in their injection list. Every episode ships with
// a planner demonstration for its own initial state plus the static twin's
// demonstration, which is what script-following baselines execute.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "affordsim/rng.hpp"
#include "affordsim/task_compile.hpp"
#include "affordsim/task_types.hpp"
#include "affordsim/world.hpp"

namespace affordsim::genbench {

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenConfig {
  std::uint64_t seed = 0;
  int pairs = 100;
  int scenes = 20;
  // every fourth scene is a bathroom; the rest are kitchens so that
  // appliance tasks stay samplable
  double unseen_fraction = 0.2;    // trailing scenes reserved as unseen
  double advanced_fraction = 0.4;  // chance to upgrade an eligible pair
  int min_busy = 5;
  int max_busy = 30;
  int retry_budget = 20;           // task resamples per pair before giving up
  world::SceneSize size;
  planner::PlannerConfig planner;
};

struct GeneratedPair {
  EpisodeSpec stat;  // injection-free twin ("static" is taken)
  EpisodeSpec dyn;
  compile::Demonstration expert_static;
  compile::Demonstration expert_dynamic;
};

struct GeneratedDataset {
  GenConfig config;
  std::map<std::string, world::Scene> scenes;  // keyed by scene id
  std::vector<GeneratedPair> pairs;
};

// A task the scene can host whose goal is not already satisfied. Throws
// GenerationError when the scene offers nothing (does not happen for the
// built-in room mixes).
TaskSpec sample_task(const world::Scene& scene, Rng& rng);

// True when the pair may be upgraded to Advanced: a temperature task against
// tableware, so both an appliance and a cleanable target exist.
bool advanced_eligible(const TaskSpec& task);

// Injection list for the dynamic twin. Targets are restricted to objects the
// static expert actually uses; empty result means the plan touches nothing
// that can be made unavailable and the caller should resample.
std::vector<Injection> sample_injections(const world::Scene& scene,
                                         const TaskSpec& task,
                                         const compile::Demonstration& expert_static,
                                         Difficulty difficulty, int min_busy,
                                         int max_busy, Rng& rng);

// One paired pickup: task, twins, experts, annotations. Deterministic in
// (config.seed, pair_index).
GeneratedPair generate_pair(const world::Scene& scene, const std::string& scene_id,
                            int pair_index, const GenConfig& config);

GeneratedDataset build_dataset(const GenConfig& config);

}  // namespace affordsim::genbench
